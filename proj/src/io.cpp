#include "mtinar/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mtinar/errors.hpp"

namespace mtinar {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    if (delim == ' ') {
        std::istringstream stream(line);
        std::string token;
        while (stream >> token) out.push_back(token);
        return out;
    }
    std::string token;
    std::istringstream stream(line);
    while (std::getline(stream, token, delim)) out.push_back(trim(token));
    return out;
}

bool parse_count(const std::string& token, int& value) {
    const std::string t = trim(token);
    if (t.empty()) return false;
    long long parsed = 0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, parsed);
    if (ec != std::errc() || ptr != last) return false;
    if (parsed > std::numeric_limits<int>::max() || parsed < std::numeric_limits<int>::min())
        return false;
    value = static_cast<int>(parsed);
    return true;
}

}  // namespace

CountSeries load_series(const std::string& path, const std::optional<std::string>& column) {
    std::ifstream file(path);
    if (!file) throw InputError("cannot open series file: " + path);

    std::vector<std::pair<std::size_t, std::string>> lines;  // (line number, content)
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(file, raw)) {
        ++line_no;
        const std::string content = trim(raw);
        if (!content.empty()) lines.emplace_back(line_no, content);
    }
    if (lines.empty()) throw InputError("series file is empty: " + path);

    const char delim = lines.front().second.find('\t') != std::string::npos ? '\t'
                       : lines.front().second.find(',') != std::string::npos ? ','
                                                                             : ' ';

    std::vector<std::string> first_tokens = split(lines.front().second, delim);
    int probe = 0;
    bool has_header = false;
    for (const std::string& token : first_tokens) {
        if (!parse_count(token, probe)) {
            has_header = true;
            break;
        }
    }

    std::size_t column_index = 0;
    const std::size_t n_columns = first_tokens.size();
    if (column) {
        bool resolved = false;
        if (has_header) {
            for (std::size_t c = 0; c < first_tokens.size(); ++c) {
                if (first_tokens[c] == *column) {
                    column_index = c;
                    resolved = true;
                    break;
                }
            }
        }
        if (!resolved) {
            int idx = 0;
            if (!parse_count(*column, idx) || idx < 0 || static_cast<std::size_t>(idx) >= n_columns)
                throw InputError("column selector '" + *column + "' matches no column");
            column_index = static_cast<std::size_t>(idx);
        }
    } else if (n_columns > 1) {
        bool resolved = false;
        if (has_header) {
            for (std::size_t c = 0; c < first_tokens.size(); ++c) {
                if (first_tokens[c] == "count") {
                    column_index = c;
                    resolved = true;
                    break;
                }
            }
        }
        if (!resolved)
            throw InputError("multi-column file needs a column selector or a 'count' header");
    }

    CountSeries series;
    series.values.reserve(lines.size());
    for (std::size_t i = has_header ? 1 : 0; i < lines.size(); ++i) {
        const auto& [no, content] = lines[i];
        const std::vector<std::string> tokens = split(content, delim);
        if (column_index >= tokens.size())
            throw InputError("line " + std::to_string(no) + ": missing column " +
                             std::to_string(column_index));
        int value = 0;
        if (!parse_count(tokens[column_index], value))
            throw InputError("line " + std::to_string(no) + ": '" + tokens[column_index] +
                             "' is not an integer count");
        if (value < 0)
            throw InputError("line " + std::to_string(no) + ": negative count " +
                             std::to_string(value));
        series.values.push_back(value);
    }
    if (series.values.empty()) throw InputError("series file holds no data rows: " + path);
    return series;
}

std::string format_g17(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void TableWriter::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw InputError("table row width does not match the header");
    rows_.push_back(std::move(cells));
}

void TableWriter::write(const std::string& path) const {
    std::ofstream file(path);
    if (!file) throw InputError("cannot write table: " + path);
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) file << '\t';
            file << cells[i];
        }
        file << '\n';
    };
    emit(header_);
    for (const auto& row : rows_) emit(row);
}

}  // namespace mtinar
