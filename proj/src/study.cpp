#include "mtinar/study.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "mtinar/errors.hpp"
#include "mtinar/hypothesis.hpp"
#include "mtinar/io.hpp"
#include "mtinar/threshold.hpp"

namespace mtinar {

namespace {

// Effectively unreachable threshold for one-regime null designs.
constexpr int kOneRegimeThreshold = 1000000000;

StudyModel two_regime(const char* name, double phi1, double phi2, double lambda, int r,
                      int regime_order) {
    StudyModel m;
    m.name = name;
    m.spec = {phi1, phi2, lambda, r, regime_order};
    return m;
}

StudyModel one_regime(const char* name, double alpha, double lambda, int regime_order) {
    StudyModel m;
    m.name = name;
    m.spec = {alpha, alpha, lambda, kOneRegimeThreshold, regime_order};
    m.one_regime = true;
    return m;
}

bool contains(const std::vector<std::string>& v, const char* s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

enum ThresholdSlot { kThrCml = 0, kThrClsVar = 1, kThrDness = 2 };
enum TestSlot { kTestMean = 0, kTestVariance = 1 };

struct RepRecord {
    bool cls_ok = false;
    std::array<double, 3> cls{};
    bool cml_ok = false;
    std::array<double, 3> cml{};
    std::array<bool, 3> thr_ok{false, false, false};
    std::array<int, 3> thr_r{0, 0, 0};
    std::array<bool, 2> test_ok{false, false};
    std::array<bool, 2> test_reject{false, false};
};

struct CellAccumulator {
    long ok = 0;
    std::array<double, 3> sum{};
    std::array<double, 3> sum_sq_err{};
    std::array<double, 3> truth{};

    void add(const std::array<double, 3>& est) {
        ++ok;
        for (int i = 0; i < 3; ++i) {
            sum[static_cast<std::size_t>(i)] += est[static_cast<std::size_t>(i)];
            const double err =
                est[static_cast<std::size_t>(i)] - truth[static_cast<std::size_t>(i)];
            sum_sq_err[static_cast<std::size_t>(i)] += err * err;
        }
    }
};

std::string flag_cell(long failed, int replications) {
    return failed > replications / 100 ? "yes" : "no";
}

}  // namespace

const std::vector<StudyModel>& builtin_models() {
    static const std::vector<StudyModel> models = {
        two_regime("A1", 0.4, 0.2, 3.0, 4, 0),
        two_regime("A2", 0.4, 0.4, 3.0, 4, 0),
        two_regime("A3", 0.3, 0.6, 5.0, 7, 0),
        two_regime("A4", 0.6, 0.6, 5.0, 12, 0),
        two_regime("B1", 0.4, 0.2, 3.0, 4, 1),
        two_regime("B2", 0.4, 0.4, 3.0, 4, 1),
        two_regime("B3", 0.3, 0.6, 5.0, 7, 1),
        two_regime("B4", 0.6, 0.6, 5.0, 12, 1),
        one_regime("IP1", 0.2, 6.0, 0),
        one_regime("IP2", 0.4, 5.0, 0),
        one_regime("IP3", 0.5, 5.0, 0),
        one_regime("IG1", 0.4, 5.0, 1),
        one_regime("IG2", 0.5, 4.0, 1),
        one_regime("IG3", 0.6, 5.0, 1),
        two_regime("BM1", 0.4, 0.2, 6.0, 6, 0),
        two_regime("BM2", 0.4, 0.4, 6.0, 6, 0),
        two_regime("BM3", 0.3, 0.6, 5.0, 7, 0),
        two_regime("BM4", 0.4, 0.2, 6.0, 6, 1),
        two_regime("BM5", 0.4, 0.4, 6.0, 6, 1),
        two_regime("BM6", 0.3, 0.6, 5.0, 7, 1),
    };
    return models;
}

const StudyModel* find_builtin_model(const std::string& name) {
    for (const StudyModel& m : builtin_models())
        if (m.name == name) return &m;
    return nullptr;
}

void StudyConfig::validate() const {
    if (models.empty()) throw InputError("study config lists no models");
    if (sample_sizes.empty()) throw InputError("study config lists no sample sizes");
    if (replications < 1) throw InputError("replication count must be >= 1");
    for (const StudyModel& m : models) m.spec.validate();
    for (int n : sample_sizes)
        if (n < 10) throw InputError("sample sizes below 10 are not supported");
    for (const std::string& e : estimators)
        if (e != "cls" && e != "cml") throw InputError("unknown estimator: " + e);
    for (const std::string& t : threshold_methods)
        if (t != "cml" && t != "clsvar" && t != "dness")
            throw InputError("unknown threshold method: " + t);
    for (const std::string& t : tests)
        if (t != "wald_e" && t != "wald_var") throw InputError("unknown test: " + t);
    if (!(quantile_lo >= 0.0 && quantile_lo < quantile_hi && quantile_hi <= 1.0))
        throw InputError("study quantile levels must satisfy 0 <= lo < hi <= 1");
    if (!(dness_lambda_lo < dness_lambda_hi) || dness_grid < 1)
        throw InputError("invalid innovation-mean grid for the nested search");
    if (burn_in < 0) throw InputError("burn-in must be nonnegative");
}

StudyConfig load_study_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw InputError("cannot open study config: " + path);
    nlohmann::json j;
    try {
        file >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config parse error: ") + e.what());
    }

    StudyConfig config;
    try {
        for (const auto& entry : j.at("models")) {
            if (entry.is_string()) {
                const StudyModel* m = find_builtin_model(entry.get<std::string>());
                if (!m) throw InputError("unknown model name: " + entry.get<std::string>());
                config.models.push_back(*m);
            } else {
                StudyModel m;
                m.name = entry.at("name").get<std::string>();
                m.spec.phi1 = entry.at("phi1").get<double>();
                m.spec.phi2 = entry.at("phi2").get<double>();
                m.spec.lambda = entry.at("lambda").get<double>();
                m.spec.r = entry.value("r", kOneRegimeThreshold);
                m.spec.regime_order = entry.value("R", 0);
                m.one_regime = entry.value("one_regime", false);
                config.models.push_back(std::move(m));
            }
        }
        config.sample_sizes = j.at("sample_sizes").get<std::vector<int>>();
        config.replications = j.value("replications", config.replications);
        config.estimators = j.value("estimators", config.estimators);
        config.threshold_methods = j.value("threshold_methods", config.threshold_methods);
        config.tests = j.value("tests", config.tests);
        config.seed = j.value("seed", config.seed);
        config.out_dir = j.value("out_dir", config.out_dir);
        config.burn_in = j.value("burn_in", config.burn_in);
        if (j.contains("quantiles")) {
            config.quantile_lo = j["quantiles"].at(0).get<double>();
            config.quantile_hi = j["quantiles"].at(1).get<double>();
        }
        if (j.contains("dness")) {
            config.dness_lambda_lo = j["dness"].value("lambda_lo", config.dness_lambda_lo);
            config.dness_lambda_hi = j["dness"].value("lambda_hi", config.dness_lambda_hi);
            config.dness_grid = j["dness"].value("grid", config.dness_grid);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config field error: ") + e.what());
    }
    config.validate();
    return config;
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t model_index,
                               std::size_t size_index, int replication) {
    return derive_seed(master, model_index, size_index, static_cast<std::uint64_t>(replication));
}

void run_study(const StudyConfig& config) {
    config.validate();
    std::filesystem::create_directories(config.out_dir);

    if (config.replications < 30)
        std::fprintf(stderr, "warning: only %d replications; cell estimates will be noisy\n",
                     config.replications);

    const bool run_cls = contains(config.estimators, "cls");
    const bool run_cml = contains(config.estimators, "cml");
    const std::array<bool, 3> run_thr = {contains(config.threshold_methods, "cml"),
                                         contains(config.threshold_methods, "clsvar"),
                                         contains(config.threshold_methods, "dness")};
    const std::array<bool, 2> run_test = {contains(config.tests, "wald_e"),
                                          contains(config.tests, "wald_var")};
    const bool need_range = run_thr[0] || run_thr[1] || run_thr[2] ||
                            ((run_test[0] || run_test[1]) &&
                             std::any_of(config.models.begin(), config.models.end(),
                                         [](const StudyModel& m) { return m.one_regime; }));

    TableWriter estimates({"model", "n", "method", "parameter", "bias", "mse", "mean",
                           "n_failed", "flagged"});
    TableWriter thresholds({"model", "n", "method", "mean_r", "cp", "n_failed", "flagged"});
    TableWriter tests({"model", "n", "test", "rejection_rate", "n_failed", "flagged"});
    TableWriter manifest({"model", "n", "replication", "seed"});
    TableWriter timings({"model", "n", "seconds"});

    static const char* kThresholdNames[3] = {"cml", "clsvar", "dness"};
    static const char* kTestNames[2] = {"wald_e", "wald_var"};
    static const char* kParamNames[3] = {"phi1", "phi2", "lambda"};

    for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
        const StudyModel& model = config.models[mi];
        for (std::size_t ni = 0; ni < config.sample_sizes.size(); ++ni) {
            const int n = config.sample_sizes[ni];
            std::vector<RepRecord> records(static_cast<std::size_t>(config.replications));
            const double t0 = omp_get_wtime();

#pragma omp parallel for schedule(dynamic)
            for (int rep = 0; rep < config.replications; ++rep) {
                RepRecord& rec = records[static_cast<std::size_t>(rep)];
                RngStream rng(replication_seed(config.seed, mi, ni, rep));
                CountSeries series;
                try {
                    series = simulate(model.spec, n, default_initial_state(model.spec),
                                      config.burn_in, rng);
                } catch (const Error&) {
                    continue;  // every sub-result stays failed
                }

                if (run_cls) {
                    try {
                        const MeanFit fit = cls_fit(series, model.spec.r, model.spec.regime_order);
                        rec.cls = {fit.phi1_hat, fit.phi2_hat, fit.lambda_hat};
                        rec.cls_ok = true;
                    } catch (const Error&) {
                    }
                }
                if (run_cml) {
                    try {
                        CmlOptions opts;
                        opts.with_covariance = false;
                        const MeanFit fit =
                            cml_fit(series, model.spec.r, model.spec.regime_order, {}, opts);
                        rec.cml = {fit.phi1_hat, fit.phi2_hat, fit.lambda_hat};
                        rec.cml_ok = true;
                    } catch (const Error&) {
                    }
                }

                std::pair<int, int> range{0, 0};
                bool have_range = false;
                if (need_range) {
                    try {
                        range = candidate_range(series, config.quantile_lo, config.quantile_hi);
                        have_range = true;
                    } catch (const Error&) {
                    }
                }

                if (have_range) {
                    if (run_thr[kThrCml]) {
                        try {
                            CmlOptions opts;
                            opts.with_covariance = false;
                            rec.thr_r[kThrCml] =
                                search_r_cml(series, model.spec.regime_order, range, opts).r_hat;
                            rec.thr_ok[kThrCml] = true;
                        } catch (const Error&) {
                        }
                    }
                    if (run_thr[kThrClsVar]) {
                        try {
                            rec.thr_r[kThrClsVar] =
                                search_r_cls_var(series, model.spec.regime_order, range).r_hat;
                            rec.thr_ok[kThrClsVar] = true;
                        } catch (const Error&) {
                        }
                    }
                    if (run_thr[kThrDness]) {
                        try {
                            rec.thr_r[kThrDness] =
                                dness_search(series, model.spec.regime_order,
                                             config.dness_lambda_lo, config.dness_lambda_hi,
                                             config.dness_grid, range)
                                    .r_hat;
                            rec.thr_ok[kThrDness] = true;
                        } catch (const Error&) {
                        }
                    }
                }

                if (run_test[kTestMean] || run_test[kTestVariance]) {
                    // One-regime null data has no usable design threshold;
                    // test at the midpoint of the sample quantile range.
                    int r_test = model.spec.r;
                    int order_test = model.spec.regime_order;
                    bool r_resolved = true;
                    if (model.one_regime) {
                        order_test = 0;
                        if (have_range)
                            r_test = static_cast<int>(
                                std::lround(0.5 * (range.first + range.second)));
                        else
                            r_resolved = false;
                    }
                    if (r_resolved) {
                        if (run_test[kTestMean]) {
                            try {
                                rec.test_reject[kTestMean] =
                                    wald_mean_test(series, r_test, order_test).reject_at_05;
                                rec.test_ok[kTestMean] = true;
                            } catch (const Error&) {
                            }
                        }
                        if (run_test[kTestVariance]) {
                            try {
                                rec.test_reject[kTestVariance] =
                                    wald_variance_test(series, r_test, order_test).reject_at_05;
                                rec.test_ok[kTestVariance] = true;
                            } catch (const Error&) {
                            }
                        }
                    }
                }
            }
            const double seconds = omp_get_wtime() - t0;

            // Serial aggregation in replication order keeps the tables
            // byte-identical for any worker count.
            if (run_cls || run_cml) {
                for (int which = 0; which < 2; ++which) {
                    if ((which == 0 && !run_cls) || (which == 1 && !run_cml)) continue;
                    CellAccumulator acc;
                    acc.truth = {model.spec.phi1, model.spec.phi2, model.spec.lambda};
                    for (const RepRecord& rec : records) {
                        const bool ok = which == 0 ? rec.cls_ok : rec.cml_ok;
                        if (ok) acc.add(which == 0 ? rec.cls : rec.cml);
                    }
                    const long failed = config.replications - acc.ok;
                    for (int p = 0; p < 3; ++p) {
                        const auto pi = static_cast<std::size_t>(p);
                        const double mean = acc.ok > 0 ? acc.sum[pi] / acc.ok : 0.0;
                        const double mse = acc.ok > 0 ? acc.sum_sq_err[pi] / acc.ok : 0.0;
                        estimates.add_row({model.name, std::to_string(n),
                                           which == 0 ? "cls" : "cml", kParamNames[p],
                                           estimates.cell(mean - acc.truth[pi]),
                                           estimates.cell(mse), estimates.cell(mean),
                                           estimates.cell(failed),
                                           flag_cell(failed, config.replications)});
                    }
                }
            }

            for (int t = 0; t < 3; ++t) {
                if (!run_thr[static_cast<std::size_t>(t)]) continue;
                long ok = 0, hits = 0;
                double sum_r = 0.0;
                for (const RepRecord& rec : records) {
                    if (!rec.thr_ok[static_cast<std::size_t>(t)]) continue;
                    ++ok;
                    sum_r += rec.thr_r[static_cast<std::size_t>(t)];
                    if (rec.thr_r[static_cast<std::size_t>(t)] == model.spec.r) ++hits;
                }
                const long failed = config.replications - ok;
                thresholds.add_row({model.name, std::to_string(n), kThresholdNames[t],
                                    thresholds.cell(ok > 0 ? sum_r / ok : 0.0),
                                    thresholds.cell(ok > 0 ? double(hits) / ok : 0.0),
                                    thresholds.cell(failed),
                                    flag_cell(failed, config.replications)});
            }

            for (int t = 0; t < 2; ++t) {
                if (!run_test[static_cast<std::size_t>(t)]) continue;
                long ok = 0, rejects = 0;
                for (const RepRecord& rec : records) {
                    if (!rec.test_ok[static_cast<std::size_t>(t)]) continue;
                    ++ok;
                    if (rec.test_reject[static_cast<std::size_t>(t)]) ++rejects;
                }
                const long failed = config.replications - ok;
                tests.add_row({model.name, std::to_string(n), kTestNames[t],
                               tests.cell(ok > 0 ? double(rejects) / ok : 0.0),
                               tests.cell(failed), flag_cell(failed, config.replications)});
            }

            for (int rep = 0; rep < config.replications; ++rep)
                manifest.add_row({model.name, std::to_string(n), std::to_string(rep),
                                  std::to_string(replication_seed(config.seed, mi, ni, rep))});
            timings.add_row({model.name, std::to_string(n), timings.cell(seconds)});
        }
    }

    const std::filesystem::path dir(config.out_dir);
    if (run_cls || run_cml) estimates.write((dir / "estimates.tsv").string());
    if (run_thr[0] || run_thr[1] || run_thr[2]) thresholds.write((dir / "threshold.tsv").string());
    if (run_test[0] || run_test[1]) tests.write((dir / "tests.tsv").string());
    manifest.write((dir / "manifest.tsv").string());
    timings.write((dir / "timings.tsv").string());
}

}  // namespace mtinar
