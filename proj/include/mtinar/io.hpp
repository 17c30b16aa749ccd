#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mtinar/model.hpp"

namespace mtinar {

/// Reads a count series from delimited text (comma, tab, or whitespace).
/// A header row is auto-detected; `column` selects a column by header name
/// or zero-based index. Without a selector a single-column file is used
/// directly and a multi-column file must carry a column named "count".
CountSeries load_series(const std::string& path,
                        const std::optional<std::string>& column = {});

/// Shortest representation that round-trips a double (17 significant digits).
std::string format_g17(double value);

/// Minimal tab-separated table writer; all numerics go through format_g17
/// so emitted values round-trip losslessly.
class TableWriter {
public:
    explicit TableWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells);
    void write(const std::string& path) const;

    std::string cell(double value) const { return format_g17(value); }
    std::string cell(long value) const { return std::to_string(value); }
    std::string cell(int value) const { return std::to_string(value); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace mtinar
