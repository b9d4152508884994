#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mdelm/csv.hpp"
#include "mdelm/dataset.hpp"
#include "mdelm/elm.hpp"
#include "mdelm/errors.hpp"
#include "mdelm/press.hpp"
#include "mdelm/rng.hpp"
#include "mdelm/stats.hpp"

namespace mdelm {

struct DetectorConfig {
    int n_models = 10;
    int feature_subset_size = 0;  // 0 = all features
    double artificial_fraction = 0.03;
    int flips_per_iteration = 2;
    std::optional<int> focus_class;
    bool focus_on_original = false;  // pick the focus flip by original label instead of current
    double target_artificial_score = 100.0;
    long long max_iterations = 400000;
    std::vector<double> quantiles{0.99, 0.999};
    double lambda = 1.0;
    int n_sigmoid = 200;
    int n_rbf = 200;
    bool passthrough = true;
    std::optional<std::size_t> subsample_n_other;  // per-model non-focus resample
    bool subsample_stratified = false;
    bool include_artificial_in_fit = false;
    std::uint64_t master_seed = 0;

    void validate() const {
        if (n_models < 1) throw ValidationError("detector: n_models must be at least 1");
        if (!(artificial_fraction > 0.0 && artificial_fraction < 0.5))
            throw ValidationError("detector: artificial_fraction must be in (0, 0.5)");
        if (flips_per_iteration < 1)
            throw ValidationError("detector: flips_per_iteration must be at least 1");
        if (target_artificial_score < 0.0)
            throw ValidationError("detector: target_artificial_score must be non-negative");
        if (max_iterations < 0) throw ValidationError("detector: max_iterations must be non-negative");
        if (quantiles.empty()) throw ValidationError("detector: at least one quantile required");
        for (double q : quantiles)
            if (!(q > 0.0 && q < 1.0))
                throw ValidationError("detector: quantiles must be in (0,1)");
        if (!std::is_sorted(quantiles.begin(), quantiles.end()))
            throw ValidationError("detector: quantiles must be sorted ascending");
        if (!(lambda > 0.0)) throw ValidationError("detector: lambda must be positive");
        if (n_sigmoid < 0 || n_rbf < 0)
            throw ValidationError("detector: hidden sizes must be non-negative");
        if (n_sigmoid == 0 && n_rbf == 0 && !passthrough)
            throw ValidationError("detector: hidden layer would be empty");
        if (feature_subset_size < 0)
            throw ValidationError("detector: feature_subset_size must be non-negative");
        if (subsample_n_other && !focus_class)
            throw ValidationError("detector: subsample_n_other requires a focus_class");
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"n_models", n_models},
                         {"feature_subset_size", feature_subset_size},
                         {"artificial_fraction", artificial_fraction},
                         {"flips_per_iteration", flips_per_iteration},
                         {"focus_class", focus_class ? nlohmann::json(*focus_class)
                                                     : nlohmann::json(nullptr)},
                         {"focus_on_original", focus_on_original},
                         {"target_artificial_score", target_artificial_score},
                         {"max_iterations", max_iterations},
                         {"quantiles", quantiles},
                         {"lambda", lambda},
                         {"n_sigmoid", n_sigmoid},
                         {"n_rbf", n_rbf},
                         {"passthrough", passthrough},
                         {"subsample_n_other",
                          subsample_n_other ? nlohmann::json(*subsample_n_other)
                                            : nlohmann::json(nullptr)},
                         {"subsample_stratified", subsample_stratified},
                         {"include_artificial_in_fit", include_artificial_in_fit},
                         {"master_seed", master_seed}};
        return j;
    }

    static DetectorConfig from_json(const nlohmann::json& j);
};

/// Labels after injecting the artificial-mislabel control group.
struct Injection {
    std::vector<int> labels;                 // perturbed copy
    std::vector<std::size_t> artificial_ids; // ascending
    std::vector<int> original_labels;        // of the artificial ids
};

/// Flips ceil(fraction * n) uniformly chosen samples to a uniformly chosen
/// different class.
inline Injection inject_artificial(const std::vector<int>& labels, double fraction,
                                   int n_classes, std::uint64_t seed) {
    if (n_classes < 2) throw ValidationError("inject_artificial: need at least 2 classes");
    if (labels.empty()) throw ValidationError("inject_artificial: empty label set");
    if (!(fraction > 0.0 && fraction < 0.5))
        throw ValidationError("inject_artificial: fraction must be in (0, 0.5)");
    const std::size_t m = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(labels.size())));
    Injection out;
    out.labels = labels;
    Rng rng(seed);
    auto picked = rng.sample_without_replacement(labels.size(), m);
    std::sort(picked.begin(), picked.end());
    for (std::size_t i : picked) {
        const int offset =
            1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_classes - 1)));
        out.artificial_ids.push_back(i);
        out.original_labels.push_back(labels[i]);
        out.labels[i] = (labels[i] + offset) % n_classes;
    }
    return out;
}

using Proposal = std::vector<std::pair<std::size_t, int>>;  // (sample, new label)

/// Draws flips_per_iteration distinct samples and a different class for each.
/// With a focus class the first sample comes from `focus_pool`.
inline Proposal propose(const std::vector<int>& current_labels, int n_classes,
                        const std::vector<std::size_t>& focus_pool, int flips_per_iteration,
                        Rng& rng) {
    const std::size_t n = current_labels.size();
    if (n < static_cast<std::size_t>(flips_per_iteration))
        throw ValidationError("propose: fewer samples than flips_per_iteration");
    Proposal proposal;
    auto taken = [&](std::size_t s) {
        for (const auto& [id, lbl] : proposal)
            if (id == s) return true;
        return false;
    };
    auto flip_label = [&](std::size_t s) {
        const int offset =
            1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_classes - 1)));
        return (current_labels[s] + offset) % n_classes;
    };
    if (!focus_pool.empty()) {
        const std::size_t s = focus_pool[rng.uniform_int(focus_pool.size())];
        proposal.emplace_back(s, flip_label(s));
    }
    while (proposal.size() < static_cast<std::size_t>(flips_per_iteration)) {
        const std::size_t s = rng.uniform_int(n);
        if (taken(s)) continue;
        proposal.emplace_back(s, flip_label(s));
    }
    return proposal;
}

/// Evaluates one proposal against the committed labeling. On a strict LOO
/// error decrease every proposed sample's score goes up by one; nothing is
/// ever committed in either branch.
inline bool trial(const PressState& press, const Proposal& proposal, int n_classes,
                  std::vector<std::uint32_t>& scores) {
    std::vector<TargetFlip> flips;
    flips.reserve(proposal.size());
    for (const auto& [sample, new_label] : proposal) {
        Eigen::VectorXd t = Eigen::VectorXd::Zero(n_classes);
        t[new_label] = 1.0;
        flips.push_back(TargetFlip{static_cast<Eigen::Index>(sample), std::move(t)});
    }
    if (press.loo_error_after_flip(flips) < press.loo_error()) {
        for (const auto& [sample, new_label] : proposal) ++scores[sample];
        return true;
    }
    return false;
}

struct ModelRun {
    std::vector<Eigen::Index> feature_subset;  // ascending column indices
    std::vector<std::size_t> artificial_ids;   // row indices, ascending
    std::vector<std::uint32_t> scores;         // per row of the supplied data
    long long iterations = 0;
    long long accepted = 0;
    double final_artificial_mean = 0.0;
    bool reached_target = false;
};

/// One MD-ELM model: feature subset -> standardize -> random hidden layer ->
/// PRESS state on artificially perturbed targets -> propose/trial loop until
/// the artificial control group averages target_artificial_score.
inline ModelRun run_model(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                          int n_classes, const DetectorConfig& config, std::uint64_t model_seed) {
    config.validate();
    if (features.rows() < 2) throw ValidationError("run_model: need at least 2 samples");
    if (static_cast<std::size_t>(features.rows()) != labels.size())
        throw ValidationError("run_model: label count mismatch");
    const int subset_size =
        config.feature_subset_size == 0 ? static_cast<int>(features.cols())
                                        : config.feature_subset_size;
    if (subset_size > features.cols())
        throw ValidationError("run_model: feature_subset_size " + std::to_string(subset_size) +
                              " exceeds available features " + std::to_string(features.cols()));

    ModelRun run;
    Rng subset_rng(derive_seed(model_seed, 1));
    auto picked = subset_rng.sample_without_replacement(
        static_cast<std::size_t>(features.cols()), static_cast<std::size_t>(subset_size));
    std::sort(picked.begin(), picked.end());
    for (std::size_t c : picked) run.feature_subset.push_back(static_cast<Eigen::Index>(c));

    Eigen::MatrixXd x(features.rows(), subset_size);
    for (int c = 0; c < subset_size; ++c) x.col(c) = features.col(run.feature_subset[c]);
    const Standardizer standardizer = Standardizer::fit(x);
    x = standardizer.apply(x);

    const Injection injection =
        inject_artificial(labels, config.artificial_fraction, n_classes,
                          derive_seed(model_seed, 2));
    run.artificial_ids = injection.artificial_ids;

    const HiddenLayer layer = make_hidden_layer(subset_size, config.n_sigmoid, config.n_rbf,
                                                derive_seed(model_seed, 3), &x,
                                                config.passthrough);
    const PressState press(transform(layer, x), one_hot_targets(injection.labels, n_classes),
                           config.lambda);

    std::vector<std::size_t> focus_pool;
    if (config.focus_class) {
        const std::vector<int>& pool_labels =
            config.focus_on_original ? labels : injection.labels;
        for (std::size_t i = 0; i < pool_labels.size(); ++i)
            if (pool_labels[i] == *config.focus_class) focus_pool.push_back(i);
        if (focus_pool.empty())
            throw ValidationError("run_model: focus class " +
                                  std::to_string(*config.focus_class) + " is empty");
    }

    run.scores.assign(labels.size(), 0);
    std::vector<char> is_artificial(labels.size(), 0);
    for (std::size_t i : run.artificial_ids) is_artificial[i] = 1;
    const double n_artificial = static_cast<double>(run.artificial_ids.size());
    double artificial_sum = 0.0;

    Rng trial_rng(derive_seed(model_seed, 4));
    while (true) {
        run.final_artificial_mean = artificial_sum / n_artificial;
        if (run.final_artificial_mean >= config.target_artificial_score) {
            run.reached_target = true;
            break;
        }
        if (run.iterations >= config.max_iterations) break;
        const Proposal proposal =
            propose(injection.labels, n_classes, focus_pool, config.flips_per_iteration,
                    trial_rng);
        if (trial(press, proposal, n_classes, run.scores)) {
            ++run.accepted;
            for (const auto& [sample, new_label] : proposal)
                if (is_artificial[sample]) artificial_sum += 1.0;
        }
        ++run.iterations;
    }
    return run;
}

struct ModelSummary {
    std::vector<std::size_t> sample_indices;   // into the full dataset, ascending
    std::vector<std::uint32_t> scores;         // aligned with sample_indices
    std::vector<std::size_t> artificial_ids;   // into the full dataset
    std::vector<Eigen::Index> feature_subset;
    long long iterations = 0;
    long long accepted = 0;
    double final_artificial_mean = 0.0;
    bool reached_target = false;
};

struct ScoreReport {
    std::vector<std::string> sample_ids;
    std::vector<int> labels;
    std::vector<double> averaged_scores;   // over non-artificial participations
    std::vector<int> participation;        // number of models the average is over
    std::vector<ModelSummary> models;
    std::optional<NormalFit> normal_fit;   // over non-artificial averaged scores
    std::vector<std::pair<double, double>> thresholds;        // (quantile, value)
    std::vector<std::vector<std::size_t>> detected;           // per quantile, score-descending
    std::optional<WelchResult> welch;      // artificial vs non-artificial scores
    DetectorConfig config;
};

/// Detected ids at one of the report's quantiles, score-descending.
inline std::vector<std::string> detect(const ScoreReport& report, double quantile) {
    for (std::size_t q = 0; q < report.config.quantiles.size(); ++q) {
        if (report.config.quantiles[q] == quantile) {
            std::vector<std::string> ids;
            if (q < report.detected.size())
                for (std::size_t i : report.detected[q]) ids.push_back(report.sample_ids[i]);
            return ids;
        }
    }
    throw ValidationError("detect: quantile " + csv::format_double(quantile) +
                          " is not in the report");
}

/// Runs n_models independent MD-ELM models and aggregates their scores.
/// Every model draws its own subsample, feature subset and artificial set
/// from a seed derived as splitmix64(master_seed, model index); `jobs`
/// only controls how many run concurrently and never changes the result.
inline ScoreReport run_ensemble(const Dataset& dataset, const DetectorConfig& config,
                                int jobs = 1) {
    config.validate();
    dataset.validate();
    const std::size_t n = static_cast<std::size_t>(dataset.n_samples());

    struct PerModel {
        std::vector<std::size_t> rows;  // dataset rows the model saw
        ModelRun run;
        std::exception_ptr failure;
    };
    std::vector<PerModel> per_model(static_cast<std::size_t>(config.n_models));

    auto execute = [&](int m) {
        PerModel& slot = per_model[static_cast<std::size_t>(m)];
        try {
            const std::uint64_t model_seed =
                derive_seed(config.master_seed, static_cast<std::uint64_t>(m));
            if (config.subsample_n_other) {
                slot.rows = subsample_focus_indices(dataset.labels, dataset.n_classes,
                                                    *config.focus_class, *config.subsample_n_other,
                                                    derive_seed(model_seed, 0),
                                                    config.subsample_stratified);
            } else {
                slot.rows.resize(n);
                for (std::size_t i = 0; i < n; ++i) slot.rows[i] = i;
            }
            Eigen::MatrixXd features(static_cast<Eigen::Index>(slot.rows.size()),
                                     dataset.n_features());
            std::vector<int> labels(slot.rows.size());
            for (std::size_t i = 0; i < slot.rows.size(); ++i) {
                features.row(static_cast<Eigen::Index>(i)) =
                    dataset.features.values.row(static_cast<Eigen::Index>(slot.rows[i]));
                labels[i] = dataset.labels[slot.rows[i]];
            }
            slot.run = run_model(features, labels, dataset.n_classes, config, model_seed);
        } catch (...) {
            slot.failure = std::current_exception();
        }
    };

    if (jobs <= 1 || config.n_models == 1) {
        for (int m = 0; m < config.n_models; ++m) execute(m);
    } else {
        std::vector<std::thread> workers;
        std::atomic<int> next{0};
        const int n_workers = std::min(jobs, config.n_models);
        for (int w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                for (int m = next.fetch_add(1); m < config.n_models; m = next.fetch_add(1))
                    execute(m);
            });
        }
        for (auto& t : workers) t.join();
    }
    for (int m = 0; m < config.n_models; ++m) {
        if (per_model[static_cast<std::size_t>(m)].failure) {
            try {
                std::rethrow_exception(per_model[static_cast<std::size_t>(m)].failure);
            } catch (const std::exception& e) {
                throw Error("model " + std::to_string(m) + " failed: " + e.what());
            }
        }
    }

    ScoreReport report;
    report.config = config;
    report.sample_ids = dataset.features.sample_ids;
    report.labels = dataset.labels;
    report.averaged_scores.assign(n, 0.0);
    report.participation.assign(n, 0);

    std::vector<double> clean_sum(n, 0.0);
    for (int m = 0; m < config.n_models; ++m) {
        const PerModel& slot = per_model[static_cast<std::size_t>(m)];
        ModelSummary summary;
        summary.sample_indices = slot.rows;
        summary.scores = slot.run.scores;
        summary.feature_subset = slot.run.feature_subset;
        summary.iterations = slot.run.iterations;
        summary.accepted = slot.run.accepted;
        summary.final_artificial_mean = slot.run.final_artificial_mean;
        summary.reached_target = slot.run.reached_target;
        std::vector<char> artificial(slot.rows.size(), 0);
        for (std::size_t local : slot.run.artificial_ids) {
            artificial[local] = 1;
            summary.artificial_ids.push_back(slot.rows[local]);
        }
        for (std::size_t local = 0; local < slot.rows.size(); ++local) {
            if (artificial[local] && !config.include_artificial_in_fit) continue;
            clean_sum[slot.rows[local]] += static_cast<double>(slot.run.scores[local]);
            ++report.participation[slot.rows[local]];
        }
        report.models.push_back(std::move(summary));
    }
    for (std::size_t i = 0; i < n; ++i)
        if (report.participation[i] > 0)
            report.averaged_scores[i] = clean_sum[i] / static_cast<double>(report.participation[i]);

    // Normal fit over the averaged scores of samples that have at least one
    // non-artificial participation; the artificial control group stays out
    // of the fit and out of detection unless include_artificial_in_fit.
    std::vector<double> fit_scores;
    for (std::size_t i = 0; i < n; ++i)
        if (report.participation[i] > 0) fit_scores.push_back(report.averaged_scores[i]);
    if (fit_scores.size() >= 2) {
        const NormalFit fit = fit_normal(fit_scores);
        if (fit.stddev > 0.0) {
            report.normal_fit = fit;
            for (double q : config.quantiles)
                report.thresholds.emplace_back(q, fit.mean + normal_quantile(q) * fit.stddev);
        }
    }
    if (report.normal_fit) {
        for (const auto& [quantile, threshold] : report.thresholds) {
            std::vector<std::size_t> hits;
            for (std::size_t i = 0; i < n; ++i) {
                if (report.participation[i] == 0) continue;
                if (config.focus_class && dataset.labels[i] != *config.focus_class) continue;
                if (report.averaged_scores[i] > threshold) hits.push_back(i);
            }
            std::sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) {
                if (report.averaged_scores[a] != report.averaged_scores[b])
                    return report.averaged_scores[a] > report.averaged_scores[b];
                return report.sample_ids[a] < report.sample_ids[b];
            });
            report.detected.push_back(std::move(hits));
        }
    }

    // Success diagnostic: pooled per-model scores, control group vs the rest.
    std::vector<double> artificial_scores, clean_scores;
    for (const auto& summary : report.models) {
        std::vector<char> artificial(summary.sample_indices.size(), 0);
        for (std::size_t k = 0; k < summary.sample_indices.size(); ++k) {
            for (std::size_t a : summary.artificial_ids)
                if (a == summary.sample_indices[k]) artificial[k] = 1;
        }
        for (std::size_t k = 0; k < summary.sample_indices.size(); ++k) {
            (artificial[k] ? artificial_scores : clean_scores)
                .push_back(static_cast<double>(summary.scores[k]));
        }
    }
    if (artificial_scores.size() >= 2 && clean_scores.size() >= 2) {
        try {
            report.welch = welch_t(artificial_scores, clean_scores);
        } catch (const Error&) {
            // all scores identical in both groups; leave the diagnostic unset
        }
    }
    return report;
}

inline nlohmann::json score_report_to_json(const ScoreReport& report) {
    nlohmann::json samples = nlohmann::json::array();
    for (std::size_t i = 0; i < report.sample_ids.size(); ++i) {
        samples.push_back({{"id", report.sample_ids[i]},
                           {"label", report.labels[i]},
                           {"mean_score", report.averaged_scores[i]},
                           {"participation", report.participation[i]}});
    }
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : report.models) {
        models.push_back({{"sample_indices", m.sample_indices},
                          {"scores", m.scores},
                          {"artificial_ids", m.artificial_ids},
                          {"feature_subset", m.feature_subset},
                          {"iterations", m.iterations},
                          {"accepted", m.accepted},
                          {"final_artificial_mean", m.final_artificial_mean},
                          {"reached_target", m.reached_target}});
    }
    nlohmann::json thresholds = nlohmann::json::array();
    for (const auto& [q, v] : report.thresholds)
        thresholds.push_back({{"quantile", q}, {"threshold", v}});
    nlohmann::json detected = nlohmann::json::object();
    for (std::size_t q = 0; q < report.detected.size(); ++q) {
        nlohmann::json ids = nlohmann::json::array();
        for (std::size_t i : report.detected[q]) ids.push_back(report.sample_ids[i]);
        detected[csv::format_double(report.config.quantiles[q])] = std::move(ids);
    }
    return nlohmann::json{
        {"format", "mdelm.report/1"},
        {"config", report.config.to_json()},
        {"samples", std::move(samples)},
        {"models", std::move(models)},
        {"normal_fit", report.normal_fit
                           ? nlohmann::json{{"mean", report.normal_fit->mean},
                                            {"stddev", report.normal_fit->stddev}}
                           : nlohmann::json(nullptr)},
        {"thresholds", std::move(thresholds)},
        {"detected", std::move(detected)},
        {"welch", report.welch ? nlohmann::json{{"t", report.welch->t},
                                                {"p", report.welch->p},
                                                {"dof", report.welch->dof}}
                               : nlohmann::json(nullptr)}};
}

inline ScoreReport score_report_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "mdelm.report/1")
        throw ValidationError("score report: missing or unknown format tag");
    ScoreReport report;
    report.config = DetectorConfig::from_json(j.at("config"));
    for (const auto& s : j.at("samples")) {
        report.sample_ids.push_back(s.at("id").get<std::string>());
        report.labels.push_back(s.at("label").get<int>());
        report.averaged_scores.push_back(s.at("mean_score").get<double>());
        report.participation.push_back(s.at("participation").get<int>());
    }
    for (const auto& m : j.at("models")) {
        ModelSummary summary;
        summary.sample_indices = m.at("sample_indices").get<std::vector<std::size_t>>();
        summary.scores = m.at("scores").get<std::vector<std::uint32_t>>();
        summary.artificial_ids = m.at("artificial_ids").get<std::vector<std::size_t>>();
        for (const auto& f : m.at("feature_subset"))
            summary.feature_subset.push_back(f.get<Eigen::Index>());
        summary.iterations = m.at("iterations").get<long long>();
        summary.accepted = m.at("accepted").get<long long>();
        summary.final_artificial_mean = m.at("final_artificial_mean").get<double>();
        summary.reached_target = m.at("reached_target").get<bool>();
        report.models.push_back(std::move(summary));
    }
    if (!j.at("normal_fit").is_null())
        report.normal_fit = NormalFit{j.at("normal_fit").at("mean").get<double>(),
                                      j.at("normal_fit").at("stddev").get<double>()};
    for (const auto& t : j.at("thresholds"))
        report.thresholds.emplace_back(t.at("quantile").get<double>(),
                                       t.at("threshold").get<double>());
    std::unordered_map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < report.sample_ids.size(); ++i)
        index_of[report.sample_ids[i]] = i;
    for (std::size_t q = 0; q < report.config.quantiles.size(); ++q) {
        const std::string key = csv::format_double(report.config.quantiles[q]);
        if (!j.at("detected").contains(key)) break;
        std::vector<std::size_t> hits;
        for (const auto& id : j.at("detected").at(key))
            hits.push_back(index_of.at(id.get<std::string>()));
        report.detected.push_back(std::move(hits));
    }
    if (!j.at("welch").is_null())
        report.welch = WelchResult{j.at("welch").at("t").get<double>(),
                                   j.at("welch").at("p").get<double>(),
                                   j.at("welch").at("dof").get<double>()};
    return report;
}

/// Flat CSV: one row per sample with the per-model scores (blank when the
/// sample was not in that model) and a detected flag per quantile.
inline std::string score_report_to_csv(const ScoreReport& report) {
    std::string out = "id,mean_score";
    for (std::size_t m = 0; m < report.models.size(); ++m)
        out += ",m" + std::to_string(m);
    for (double q : report.config.quantiles) out += ",detected_q" + csv::format_double(q);
    out += '\n';

    const std::size_t n = report.sample_ids.size();
    std::vector<std::vector<std::string>> model_cells(
        report.models.size(), std::vector<std::string>(n));
    for (std::size_t m = 0; m < report.models.size(); ++m) {
        const auto& summary = report.models[m];
        for (std::size_t k = 0; k < summary.sample_indices.size(); ++k)
            model_cells[m][summary.sample_indices[k]] = std::to_string(summary.scores[k]);
    }
    std::vector<std::vector<char>> flagged(report.detected.size(), std::vector<char>(n, 0));
    for (std::size_t q = 0; q < report.detected.size(); ++q)
        for (std::size_t i : report.detected[q]) flagged[q][i] = 1;

    for (std::size_t i = 0; i < n; ++i) {
        out += csv::quote_cell(report.sample_ids[i]);
        out += "," + csv::format_double(report.averaged_scores[i]);
        for (std::size_t m = 0; m < report.models.size(); ++m) out += "," + model_cells[m][i];
        for (std::size_t q = 0; q < report.config.quantiles.size(); ++q)
            out += q < flagged.size() && flagged[q][i] ? ",1" : ",0";
        out += '\n';
    }
    return out;
}

inline DetectorConfig DetectorConfig::from_json(const nlohmann::json& j) {
    DetectorConfig c;
    c.n_models = j.value("n_models", c.n_models);
    c.feature_subset_size = j.value("feature_subset_size", c.feature_subset_size);
    c.artificial_fraction = j.value("artificial_fraction", c.artificial_fraction);
    c.flips_per_iteration = j.value("flips_per_iteration", c.flips_per_iteration);
    if (j.contains("focus_class") && !j.at("focus_class").is_null())
        c.focus_class = j.at("focus_class").get<int>();
    c.focus_on_original = j.value("focus_on_original", c.focus_on_original);
    c.target_artificial_score = j.value("target_artificial_score", c.target_artificial_score);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    if (j.contains("quantiles")) c.quantiles = j.at("quantiles").get<std::vector<double>>();
    c.lambda = j.value("lambda", c.lambda);
    c.n_sigmoid = j.value("n_sigmoid", c.n_sigmoid);
    c.n_rbf = j.value("n_rbf", c.n_rbf);
    c.passthrough = j.value("passthrough", c.passthrough);
    if (j.contains("subsample_n_other") && !j.at("subsample_n_other").is_null())
        c.subsample_n_other = j.at("subsample_n_other").get<std::size_t>();
    c.subsample_stratified = j.value("subsample_stratified", c.subsample_stratified);
    c.include_artificial_in_fit = j.value("include_artificial_in_fit", c.include_artificial_in_fit);
    c.master_seed = j.value("master_seed", c.master_seed);
    return c;
}

}  // namespace mdelm
