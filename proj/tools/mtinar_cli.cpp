// Command-line front end: simulation, fitting, structure tests, forecasting,
// and the Monte-Carlo study harness. All reports are plain tab-separated
// text with numbers at 17 significant digits, and identical invocations on
// identical inputs produce byte-identical output.

#include <omp.h>

#include <CLI11.hpp>
#include <boost/math/distributions/normal.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "mtinar/cml.hpp"
#include "mtinar/diagnostics.hpp"
#include "mtinar/errors.hpp"
#include "mtinar/forecast.hpp"
#include "mtinar/hypothesis.hpp"
#include "mtinar/io.hpp"
#include "mtinar/study.hpp"
#include "mtinar/threshold.hpp"

using namespace mtinar;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 1;
    int workers = 0;  // 0: library default
    std::string out_dir;
};

class Report {
public:
    void line(const std::string& key, const std::string& value) {
        rows_.push_back(key + '\t' + value);
    }
    void line(const std::string& key, double value) { line(key, format_g17(value)); }
    void line(const std::string& key, long value) { line(key, std::to_string(value)); }
    void line(const std::string& key, int value) { line(key, std::to_string(value)); }

    void write(const std::string& path) const {
        std::ostream* out = &std::cout;
        std::ofstream file;
        if (!path.empty()) {
            file.open(path);
            if (!file) throw InputError("cannot write report: " + path);
            out = &file;
        }
        for (const std::string& row : rows_) *out << row << '\n';
    }

private:
    std::vector<std::string> rows_;
};

ModelSpec resolve_spec(const std::string& model_name, std::optional<double> phi1,
                       std::optional<double> phi2, std::optional<double> lambda,
                       std::optional<int> r, std::optional<int> regime_order) {
    ModelSpec spec;
    if (!model_name.empty()) {
        const StudyModel* builtin = find_builtin_model(model_name);
        if (!builtin) throw InputError("unknown model name: " + model_name);
        spec = builtin->spec;
    }
    if (phi1) spec.phi1 = *phi1;
    if (phi2) spec.phi2 = *phi2;
    if (lambda) spec.lambda = *lambda;
    if (r) spec.r = *r;
    if (regime_order) spec.regime_order = *regime_order;
    spec.validate();
    return spec;
}

std::pair<double, double> parse_pair(const std::string& text, const char* what) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw InputError(std::string(what) + " expects two comma-separated values");
    try {
        return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw InputError(std::string(what) + ": cannot parse '" + text + "'");
    }
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const GlobalOptions& global, const std::string& model_name,
                 std::optional<double> phi1, std::optional<double> phi2,
                 std::optional<double> lambda, std::optional<int> r,
                 std::optional<int> regime_order, int n, int burn_in, std::optional<int> x0,
                 const std::string& out) {
    const ModelSpec spec = resolve_spec(model_name, phi1, phi2, lambda, r, regime_order);
    RngStream rng(global.seed);
    const CountSeries series =
        simulate(spec, n, x0 ? *x0 : default_initial_state(spec), burn_in, rng);

    std::ostream* stream = &std::cout;
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        if (!file) throw InputError("cannot write series: " + out);
        stream = &file;
    }
    for (int v : series.values) *stream << v << '\n';
    return 0;
}

// --------------------------------------------------------------------- fit

struct ResolvedThreshold {
    int r = 0;
    std::string source;
    std::optional<ThresholdSearchResult> search;
    std::pair<int, int> range{0, 0};
};

ResolvedThreshold resolve_threshold(const CountSeries& series, const std::string& r_arg,
                                    int regime_order, const std::string& search_method,
                                    std::pair<double, double> quantiles,
                                    std::pair<double, double> dness_lambda, int dness_grid) {
    ResolvedThreshold resolved;
    if (r_arg != "search") {
        try {
            resolved.r = std::stoi(r_arg);
        } catch (const std::exception&) {
            throw InputError("--r expects an integer or 'search', got '" + r_arg + "'");
        }
        resolved.source = "fixed";
        return resolved;
    }
    resolved.range = candidate_range(series, quantiles.first, quantiles.second);
    if (search_method == "cml") {
        resolved.search = search_r_cml(series, regime_order, resolved.range);
    } else if (search_method == "clsvar") {
        resolved.search = search_r_cls_var(series, regime_order, resolved.range);
    } else if (search_method == "dness") {
        resolved.search = dness_search(series, regime_order, dness_lambda.first,
                                       dness_lambda.second, dness_grid, resolved.range);
    } else {
        throw InputError("unknown search method: " + search_method);
    }
    resolved.r = resolved.search->r_hat;
    resolved.source = "search:" + search_method;
    return resolved;
}

void append_search_details(Report& report, const ResolvedThreshold& resolved) {
    if (!resolved.search) return;
    report.line("quantile_range",
                std::to_string(resolved.range.first) + "," + std::to_string(resolved.range.second));
    report.line("tie_break", "smallest_r");
    for (const auto& [r, score] : resolved.search->per_candidate)
        report.line("candidate_" + std::to_string(r), score);
    for (int r : resolved.search->skipped)
        report.line("skipped_candidate", r);
    if (resolved.search->method == ThresholdMethod::DNess)
        report.line("search_lambda", resolved.search->dness_lambda);
}

void write_plot_data(const std::string& dir, const DiagnosticsReport& diag) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);

    TableWriter residuals({"t", "pearson_residual"});
    for (std::size_t t = 0; t < diag.pearson_residuals.size(); ++t)
        residuals.add_row({std::to_string(t + 1), format_g17(diag.pearson_residuals[t])});
    residuals.write((base / "residuals.tsv").string());

    // Sample autocorrelations of the residuals plus partial ones via the
    // Durbin-Levinson recursion.
    const std::size_t n = diag.pearson_residuals.size();
    const int max_lag = std::min<int>(40, static_cast<int>(n) / 4);
    double mean = 0.0;
    for (double r : diag.pearson_residuals) mean += r;
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (double r : diag.pearson_residuals) denom += (r - mean) * (r - mean);
    std::vector<double> acf(static_cast<std::size_t>(max_lag) + 1, 0.0);
    acf[0] = 1.0;
    for (int h = 1; h <= max_lag; ++h) {
        double acc = 0.0;
        for (std::size_t t = 0; t + static_cast<std::size_t>(h) < n; ++t)
            acc += (diag.pearson_residuals[t] - mean) *
                   (diag.pearson_residuals[t + static_cast<std::size_t>(h)] - mean);
        acf[static_cast<std::size_t>(h)] = acc / denom;
    }
    std::vector<double> pacf(acf.size(), 0.0);
    std::vector<double> phi_prev(acf.size(), 0.0), phi_cur(acf.size(), 0.0);
    for (int k = 1; k <= max_lag; ++k) {
        double num = acf[static_cast<std::size_t>(k)];
        for (int j = 1; j < k; ++j)
            num -= phi_prev[static_cast<std::size_t>(j)] * acf[static_cast<std::size_t>(k - j)];
        double den = 1.0;
        for (int j = 1; j < k; ++j)
            den -= phi_prev[static_cast<std::size_t>(j)] * acf[static_cast<std::size_t>(j)];
        const double phi_kk = den != 0.0 ? num / den : 0.0;
        pacf[static_cast<std::size_t>(k)] = phi_kk;
        for (int j = 1; j < k; ++j)
            phi_cur[static_cast<std::size_t>(j)] =
                phi_prev[static_cast<std::size_t>(j)] -
                phi_kk * phi_prev[static_cast<std::size_t>(k - j)];
        phi_cur[static_cast<std::size_t>(k)] = phi_kk;
        phi_prev = phi_cur;
    }
    TableWriter correlogram({"lag", "acf", "pacf"});
    for (int h = 1; h <= max_lag; ++h)
        correlogram.add_row({std::to_string(h), format_g17(acf[static_cast<std::size_t>(h)]),
                             format_g17(pacf[static_cast<std::size_t>(h)])});
    correlogram.write((base / "residual_acf.tsv").string());

    std::vector<double> sorted = diag.pearson_residuals;
    std::sort(sorted.begin(), sorted.end());
    const boost::math::normal_distribution<double> normal(0.0, 1.0);
    TableWriter qq({"theoretical_quantile", "sample_quantile"});
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(sorted.size());
        qq.add_row({format_g17(boost::math::quantile(normal, p)), format_g17(sorted[i])});
    }
    qq.write((base / "residual_qq.tsv").string());
}

int cmd_fit(const std::string& input, const std::optional<std::string>& column,
            const std::string& r_arg, int regime_order, const std::string& method,
            const std::string& search_method, const std::string& quantiles_arg,
            const std::string& dness_lambda_arg, int dness_grid, const std::string& out,
            const std::string& plot_dir) {
    const CountSeries series = load_series(input, column);
    const auto quantiles = parse_pair(quantiles_arg, "--quantiles");
    const auto dness_lambda = parse_pair(dness_lambda_arg, "--dness-lambda");
    const ResolvedThreshold resolved = resolve_threshold(
        series, r_arg, regime_order, search_method, quantiles, dness_lambda, dness_grid);

    Report report;
    report.line("command", "fit");
    report.line("input", input);
    report.line("n", static_cast<long>(series.size()));
    report.line("r", resolved.r);
    report.line("r_source", resolved.source);
    report.line("R", regime_order);
    report.line("method", method);

    const auto transitions = transitions_of(series);
    MeanFit fit;
    if (method == "cls") {
        fit = cls_fit(transitions, resolved.r, regime_order);
    } else if (method == "cml") {
        fit = cml_fit(transitions, resolved.r, regime_order);
    } else {
        throw InputError("unknown method: " + method);
    }

    report.line("phi1", fit.phi1_hat);
    report.line("phi2", fit.phi2_hat);
    report.line("lambda", fit.lambda_hat);
    report.line("n_transitions", fit.n_transitions);
    report.line("n_lower", fit.n_lower);
    report.line("n_upper", fit.n_upper);
    report.line("valid_parameters", fit.valid_parameters ? "yes" : "no");

    const double n = static_cast<double>(fit.n_transitions);
    report.line("se_phi1_sandwich", fit.std_errors[0]);
    report.line("se_phi2_sandwich", fit.std_errors[1]);
    report.line("se_lambda_sandwich", fit.std_errors[2]);
    if (method == "cml") {
        // Observed-information errors are the default report for real data.
        const CmlCovariance cov = cml_covariance(transitions, resolved.r, regime_order, fit);
        report.line("se_phi1_observed", std::sqrt(cov.observed_information(0, 0) / n));
        report.line("se_phi2_observed", std::sqrt(cov.observed_information(1, 1) / n));
        report.line("se_lambda_observed", std::sqrt(cov.observed_information(2, 2) / n));
        if (!cov.hessian_negative_definite)
            report.line("warning", "hessian not negative definite; pseudo-inverse used");
    }

    if (fit.valid_parameters) {
        const DiagnosticsReport diag = full_diagnostics(series, fit, resolved.r, regime_order);
        report.line("loglik", diag.loglik);
        report.line("aic", diag.aic);
        report.line("bic", diag.bic);
        report.line("rms", diag.rms);
        report.line("residual_mean", diag.residual_mean);
        report.line("residual_variance", diag.residual_variance);
        if (!plot_dir.empty()) write_plot_data(plot_dir, diag);
    } else {
        report.line("note", "estimates outside the parameter space; diagnostics skipped");
    }
    append_search_details(report, resolved);
    report.write(out);
    return 0;
}

// -------------------------------------------------------------------- test

int cmd_test(const std::string& input, const std::optional<std::string>& column,
             const std::string& r_arg, int regime_order, const std::string& search_method,
             const std::string& quantiles_arg, const std::string& out) {
    const CountSeries series = load_series(input, column);
    const auto quantiles = parse_pair(quantiles_arg, "--quantiles");
    const ResolvedThreshold resolved = resolve_threshold(
        series, r_arg, regime_order, search_method, quantiles, {2.0, 6.0}, 4);

    Report report;
    report.line("command", "test");
    report.line("input", input);
    report.line("n", static_cast<long>(series.size()));
    report.line("r", resolved.r);
    report.line("r_source", resolved.source);
    report.line("R", regime_order);

    const TestResult mean_test = wald_mean_test(series, resolved.r, regime_order);
    report.line("wald_e_statistic", mean_test.statistic);
    report.line("wald_e_df", mean_test.df);
    report.line("wald_e_critical_05", mean_test.critical_value);
    report.line("wald_e_p_value", mean_test.p_value);
    report.line("wald_e_reject_05", mean_test.reject_at_05 ? "yes" : "no");

    // Sequenced decision: the mean test settles it when it rejects; the
    // variance test gets the final say otherwise.
    bool structure = mean_test.reject_at_05;
    std::string decided_by = "wald_e";
    try {
        const TestResult var_test = wald_variance_test(series, resolved.r, regime_order);
        report.line("wald_var_statistic", var_test.statistic);
        report.line("wald_var_df", var_test.df);
        report.line("wald_var_critical_05", var_test.critical_value);
        report.line("wald_var_p_value", var_test.p_value);
        report.line("wald_var_reject_05", var_test.reject_at_05 ? "yes" : "no");
        const TestResult additive =
            wald_variance_test_additive(series, resolved.r, regime_order);
        report.line("wald_var_additive_statistic", additive.statistic);
        report.line("wald_var_additive_p_value", additive.p_value);
        if (!mean_test.reject_at_05) {
            structure = var_test.reject_at_05;
            decided_by = "wald_var";
        }
    } catch (const NumericError& e) {
        report.line("wald_var_error", e.what());
        if (!mean_test.reject_at_05) decided_by = "wald_e (variance test unavailable)";
    }
    report.line("piecewise_structure", structure ? "detected" : "not detected");
    report.line("decided_by", decided_by);
    append_search_details(report, resolved);
    report.write(out);
    return 0;
}

// ---------------------------------------------------------------- forecast

ModelSpec spec_from_fit_report(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw InputError("cannot open fit report: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(file, line)) {
        const auto tab = line.find('\t');
        if (tab != std::string::npos) kv[line.substr(0, tab)] = line.substr(tab + 1);
    }
    for (const char* key : {"phi1", "phi2", "lambda", "r", "R"})
        if (!kv.count(key)) throw InputError(std::string("fit report misses key: ") + key);
    ModelSpec spec;
    spec.phi1 = std::stod(kv["phi1"]);
    spec.phi2 = std::stod(kv["phi2"]);
    spec.lambda = std::stod(kv["lambda"]);
    spec.r = std::stoi(kv["r"]);
    spec.regime_order = std::stoi(kv["R"]);
    spec.validate();
    return spec;
}

int cmd_forecast(const std::string& input, const std::optional<std::string>& column,
                 const std::string& fit_report, const std::string& model_name,
                 std::optional<double> phi1, std::optional<double> phi2,
                 std::optional<double> lambda, std::optional<int> r,
                 std::optional<int> regime_order, std::optional<int> origin,
                 const std::vector<int>& horizons, std::optional<int> max_state_arg,
                 const std::string& actuals_path, const std::string& out,
                 bool emit_pmf) {
    ModelSpec spec = fit_report.empty()
                         ? resolve_spec(model_name, phi1, phi2, lambda, r, regime_order)
                         : spec_from_fit_report(fit_report);
    if (horizons.empty()) throw InputError("at least one horizon is required");
    for (int h : horizons)
        if (h < 1) throw InputError("horizons must be >= 1");

    CountSeries series;
    if (!input.empty()) series = load_series(input, column);
    if (!input.empty() && !actuals_path.empty()) {
        const CountSeries actuals = load_series(actuals_path);
        series.values.insert(series.values.end(), actuals.values.begin(),
                             actuals.values.end());
    }
    if (series.size() == 0 && !origin)
        throw InputError("need --origin or --input to anchor the forecast");

    const int anchor = origin ? *origin : series.values.back();
    int observed_max = anchor;
    for (int v : series.values) observed_max = std::max(observed_max, v);
    const int max_state =
        max_state_arg ? *max_state_arg
                      : std::max(default_max_state(spec, observed_max, 1e-12),
                                 stationary_max_state(spec, 1e-10));

    Report report;
    report.line("command", "forecast");
    report.line("origin", anchor);
    report.line("max_state", max_state);
    report.line("truncation_rule", "rows keep mass 1e-10; override with --max-state");

    for (int h : horizons) {
        const std::string tag = "h" + std::to_string(h);
        const ForecastPMF pmf = h_step_distribution(spec, anchor, h, max_state);
        const PointForecasts points = point_forecasts(pmf);
        report.line(tag + "_mean", points.mean);
        report.line(tag + "_mode", points.mode);
        report.line(tag + "_median", points.median);
        report.line(tag + "_truncation_mass", pmf.truncation_mass);
        if (pmf.truncation_warning) report.line(tag + "_warning", "truncation mass >= 1e-8");

        // Rolling evaluation over the final h observations: each actual is
        // forecast from the value h steps before it.
        if (series.size() >= static_cast<std::size_t>(2 * h)) {
            CountSeries actual_tail;
            std::vector<double> mean_forecasts, mode_forecasts;
            bool complete = true;
            for (std::size_t t = series.size() - static_cast<std::size_t>(h);
                 t < series.size(); ++t) {
                const int from = series.values[t - static_cast<std::size_t>(h)];
                if (from > max_state) {
                    complete = false;
                    break;
                }
                const ForecastPMF rolled = h_step_distribution(spec, from, h, max_state);
                const PointForecasts rolled_points = point_forecasts(rolled);
                actual_tail.values.push_back(series.values[t]);
                mean_forecasts.push_back(rolled_points.mean);
                mode_forecasts.push_back(static_cast<double>(rolled_points.mode));
            }
            if (complete) {
                const ForecastErrorMetrics mean_metrics =
                    forecast_error_metrics(actual_tail, mean_forecasts);
                const ForecastErrorMetrics mode_metrics =
                    forecast_error_metrics(actual_tail, mode_forecasts);
                report.line(tag + "_expectation_bias", mean_metrics.bias);
                report.line(tag + "_expectation_made", mean_metrics.made);
                report.line(tag + "_mode_bias", mode_metrics.bias);
                report.line(tag + "_mode_made", mode_metrics.made);
            }
        }
        if (emit_pmf) {
            for (std::size_t j = 0; j < pmf.probabilities.size(); ++j)
                report.line(tag + "_pmf_" + std::to_string(j), pmf.probabilities[j]);
        }
    }
    report.write(out);
    return 0;
}

// ------------------------------------------------------------------- study

int cmd_study(const GlobalOptions& global, const std::string& config_path,
              std::optional<std::uint64_t> seed_override) {
    StudyConfig config = load_study_config(config_path);
    if (seed_override) config.seed = *seed_override;
    if (!global.out_dir.empty()) config.out_dir = global.out_dir;
    run_study(config);
    std::cout << "study written to " << config.out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-regime mixed-thinning integer autoregression toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions global;
    app.add_option("--seed", global.seed, "master random seed");
    app.add_option("--workers", global.workers, "worker thread cap (0 = library default)");
    app.add_option("--out-dir", global.out_dir, "output directory override");

    // simulate
    auto* sim = app.add_subcommand("simulate", "draw a series from a model");
    std::string sim_model;
    std::optional<double> sim_phi1, sim_phi2, sim_lambda;
    std::optional<int> sim_r, sim_R, sim_x0;
    int sim_n = 500, sim_burn_in = kDefaultBurnIn;
    std::string sim_out;
    sim->add_option("--model", sim_model, "builtin design name (A1..B4, IP1.., BM1..)");
    sim->add_option("--phi1", sim_phi1);
    sim->add_option("--phi2", sim_phi2);
    sim->add_option("--lambda", sim_lambda);
    sim->add_option("--r", sim_r);
    sim->add_option("--R", sim_R);
    sim->add_option("--n", sim_n, "series length")->required();
    sim->add_option("--burn-in", sim_burn_in);
    sim->add_option("--x0", sim_x0, "initial state (default: stationary-ish)");
    sim->add_option("--out", sim_out, "output file (default: stdout)");

    // fit
    auto* fit = app.add_subcommand("fit", "estimate parameters from a series");
    std::string fit_input, fit_r = "search", fit_method = "cml", fit_search = "cml";
    std::string fit_quantiles = "0.1,0.9", fit_dness_lambda = "2,6";
    std::string fit_out, fit_plot_dir;
    std::optional<std::string> fit_column;
    int fit_R = 0, fit_dness_grid = 4;
    fit->add_option("--input", fit_input)->required();
    fit->add_option("--column", fit_column, "column name or zero-based index");
    fit->add_option("--r", fit_r, "threshold value or 'search'");
    fit->add_option("--R", fit_R, "regime order flag (0 or 1)");
    fit->add_option("--method", fit_method, "cls | cml");
    fit->add_option("--search", fit_search, "cml | clsvar | dness");
    fit->add_option("--quantiles", fit_quantiles, "candidate range quantiles lo,hi");
    fit->add_option("--dness-lambda", fit_dness_lambda, "innovation-mean grid bounds lo,hi");
    fit->add_option("--dness-grid", fit_dness_grid, "grid intervals");
    fit->add_option("--out", fit_out, "report file (default: stdout)");
    fit->add_option("--plot-data", fit_plot_dir, "directory for residual/acf/qq data files");

    // test
    auto* test = app.add_subcommand("test", "Wald tests for piecewise structure");
    std::string test_input, test_r = "search", test_search = "cml";
    std::string test_quantiles = "0.1,0.9", test_out;
    std::optional<std::string> test_column;
    int test_R = 0;
    test->add_option("--input", test_input)->required();
    test->add_option("--column", test_column);
    test->add_option("--r", test_r, "threshold value or 'search'");
    test->add_option("--R", test_R);
    test->add_option("--search", test_search);
    test->add_option("--quantiles", test_quantiles);
    test->add_option("--out", test_out);

    // forecast
    auto* fc = app.add_subcommand("forecast", "conditional distributions ahead");
    std::string fc_input, fc_fit_report, fc_model, fc_actuals, fc_out;
    std::optional<std::string> fc_column;
    std::optional<double> fc_phi1, fc_phi2, fc_lambda;
    std::optional<int> fc_r, fc_R, fc_origin, fc_max_state;
    std::vector<int> fc_horizons;
    bool fc_pmf = false;
    fc->add_option("--input", fc_input, "fitted series (anchors the forecast)");
    fc->add_option("--column", fc_column);
    fc->add_option("--fit-report", fc_fit_report, "take parameters from a fit report");
    fc->add_option("--model", fc_model);
    fc->add_option("--phi1", fc_phi1);
    fc->add_option("--phi2", fc_phi2);
    fc->add_option("--lambda", fc_lambda);
    fc->add_option("--r", fc_r);
    fc->add_option("--R", fc_R);
    fc->add_option("--origin", fc_origin, "conditioning value (default: last observation)");
    fc->add_option("--horizons", fc_horizons, "steps ahead")->required();
    fc->add_option("--max-state", fc_max_state, "truncation bound override");
    fc->add_option("--actuals", fc_actuals, "held-out continuation for bias/MADE");
    fc->add_option("--out", fc_out);
    fc->add_flag("--pmf", fc_pmf, "dump the full distribution per horizon");

    // study
    auto* study = app.add_subcommand("study", "Monte-Carlo study harness");
    std::string study_config;
    std::optional<std::uint64_t> study_seed;
    study->add_option("--config", study_config, "JSON study configuration")->required();
    study->add_option("--study-seed", study_seed, "override the config seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        std::cerr << "error\tkind=input\tcode=2\tmessage=argument parsing failed\n";
        return 2;
    }

    if (global.workers > 0) omp_set_num_threads(global.workers);

    try {
        if (sim->parsed())
            return cmd_simulate(global, sim_model, sim_phi1, sim_phi2, sim_lambda, sim_r, sim_R,
                                sim_n, sim_burn_in, sim_x0, sim_out);
        if (fit->parsed())
            return cmd_fit(fit_input, fit_column, fit_r, fit_R, fit_method, fit_search,
                           fit_quantiles, fit_dness_lambda, fit_dness_grid, fit_out,
                           fit_plot_dir);
        if (test->parsed())
            return cmd_test(test_input, test_column, test_r, test_R, test_search,
                            test_quantiles, test_out);
        if (fc->parsed())
            return cmd_forecast(fc_input, fc_column, fc_fit_report, fc_model, fc_phi1, fc_phi2,
                                fc_lambda, fc_r, fc_R, fc_origin, fc_horizons, fc_max_state,
                                fc_actuals, fc_out, fc_pmf);
        if (study->parsed()) {
            std::optional<std::uint64_t> seed_override = study_seed;
            if (!seed_override && app.count("--seed") > 0) seed_override = global.seed;
            return cmd_study(global, study_config, seed_override);
        }
    } catch (const Error& e) {
        const char* kind = e.kind() == ErrorKind::Input       ? "input"
                           : e.kind() == ErrorKind::Numeric   ? "numeric"
                                                              : "truncation";
        std::cerr << "error\tkind=" << kind << "\tcode=" << e.exit_code() << "\tmessage="
                  << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error\tkind=numeric\tcode=3\tmessage=" << e.what() << '\n';
        return 3;
    }
    return 0;
}
