#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mdelm/elm.hpp"
#include "mdelm/errors.hpp"
#include "mdelm/rng.hpp"

namespace mdelm {

/// Per-sample weights n / (C * n_c): every class ends up with the same
/// total weight.
inline Eigen::VectorXd balanced_class_weights(const std::vector<int>& labels, int n_classes) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (int l : labels) {
        if (l < 0 || l >= n_classes)
            throw ValidationError("balanced_class_weights: label out of range");
        ++counts[static_cast<std::size_t>(l)];
    }
    for (int c = 0; c < n_classes; ++c)
        if (counts[static_cast<std::size_t>(c)] == 0)
            throw ValidationError("balanced_class_weights: class " + std::to_string(c) +
                                  " is empty");
    const double n = static_cast<double>(labels.size());
    Eigen::VectorXd w(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i)
        w[static_cast<Eigen::Index>(i)] =
            n / (static_cast<double>(n_classes) *
                 static_cast<double>(counts[static_cast<std::size_t>(labels[i])]));
    return w;
}

/// Stratified fold assignment: within each class the (seeded, shuffled)
/// members are dealt round-robin, so per-fold class counts differ from the
/// exact proportion by at most one sample.
struct CvPlan {
    int k = 5;
    std::vector<int> fold_of;  // per sample
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

inline CvPlan stratified_kfold(const std::vector<int>& labels, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("stratified_kfold: k must be at least 2");
    if (static_cast<std::size_t>(k) > labels.size())
        throw ValidationError("stratified_kfold: k exceeds the sample count");
    CvPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.fold_of.assign(labels.size(), -1);
    int n_classes = 0;
    for (int l : labels) n_classes = std::max(n_classes, l + 1);
    Rng rng(seed);
    for (int c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) members.push_back(i);
        if (members.empty()) continue;
        if (members.size() < static_cast<std::size_t>(k))
            plan.warnings.push_back("class " + std::to_string(c) + " has only " +
                                    std::to_string(members.size()) + " members for " +
                                    std::to_string(k) + " folds");
        rng.shuffle(members);
        for (std::size_t t = 0; t < members.size(); ++t)
            plan.fold_of[members[t]] = static_cast<int>(t % static_cast<std::size_t>(k));
    }
    return plan;
}

/// One-vs-rest logistic model with an elastic-net penalty.
struct ElasticNetModel {
    Eigen::MatrixXd weights;    // D x C
    Eigen::VectorXd intercepts; // C
    double alpha = 0.0;
    double l1_ratio = 0.15;
    std::string loss = "logistic_ovr";

    Eigen::MatrixXd decision(const Eigen::MatrixXd& x) const {
        return (x * weights).rowwise() + intercepts.transpose();
    }
    std::vector<int> predict(const Eigen::MatrixXd& x) const {
        return predict_scores(decision(x));
    }
    double zero_fraction() const {
        if (weights.size() == 0) return 0.0;
        return static_cast<double>((weights.array() == 0.0).count()) /
               static_cast<double>(weights.size());
    }

    nlohmann::json to_json() const {
        return {{"weights", matrix_to_json(weights)},
                {"intercepts", vector_to_json(intercepts)},
                {"alpha", alpha},
                {"l1_ratio", l1_ratio},
                {"loss", loss}};
    }
    static ElasticNetModel from_json(const nlohmann::json& j) {
        ElasticNetModel m;
        m.weights = matrix_from_json(j.at("weights"));
        m.intercepts = vector_from_json(j.at("intercepts"));
        m.alpha = j.at("alpha").get<double>();
        m.l1_ratio = j.at("l1_ratio").get<double>();
        m.loss = j.at("loss").get<std::string>();
        return m;
    }
};

/// Feature indices with a nonzero weight for any class, ascending.
inline std::vector<Eigen::Index> selected_features(const ElasticNetModel& model) {
    std::vector<Eigen::Index> out;
    for (Eigen::Index j = 0; j < model.weights.rows(); ++j)
        if ((model.weights.row(j).array() != 0.0).any()) out.push_back(j);
    return out;
}

inline Eigen::MatrixXi confusion_matrix(const std::vector<int>& truth,
                                        const std::vector<int>& predicted, int n_classes) {
    if (truth.size() != predicted.size())
        throw ValidationError("confusion_matrix: length mismatch");
    Eigen::MatrixXi m = Eigen::MatrixXi::Zero(n_classes, n_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= n_classes || predicted[i] < 0 ||
            predicted[i] >= n_classes)
            throw ValidationError("confusion_matrix: label out of range at sample " +
                                  std::to_string(i));
        ++m(truth[i], predicted[i]);
    }
    return m;
}

/// Mean per-class recall. Classes without support are skipped.
inline double balanced_accuracy(const Eigen::MatrixXi& confusion) {
    double total = 0.0;
    int classes = 0;
    for (Eigen::Index c = 0; c < confusion.rows(); ++c) {
        const int support = confusion.row(c).sum();
        if (support == 0) continue;
        total += static_cast<double>(confusion(c, c)) / static_cast<double>(support);
        ++classes;
    }
    return classes > 0 ? total / static_cast<double>(classes) : 0.0;
}

struct SgdConfig {
    double eta0 = 0.01;
    int epochs = 20;
};

namespace detail {

/// One elastic-net SGD fit at a fixed alpha. L2 enters as weight decay,
/// L1 through the cumulative-penalty scheme (Tsuruoka et al.), which clips
/// at zero instead of letting a weight oscillate across it; that is what
/// makes selected_features well defined under SGD.
inline ElasticNetModel sgd_fit_single(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                      int n_classes, double alpha, double l1_ratio,
                                      const Eigen::VectorXd& sample_weights,
                                      const std::vector<std::size_t>& rows, SgdConfig cfg,
                                      std::uint64_t seed) {
    const Eigen::Index d = x.cols();
    ElasticNetModel model;
    model.alpha = alpha;
    model.l1_ratio = l1_ratio;
    model.weights = Eigen::MatrixXd::Zero(d, n_classes);
    model.intercepts = Eigen::VectorXd::Zero(n_classes);

    Eigen::MatrixXd cumulative_applied = Eigen::MatrixXd::Zero(d, n_classes);  // q in the scheme
    double cumulative_l1 = 0.0;                                                // u in the scheme
    Rng rng(seed);
    std::vector<std::size_t> order = rows;
    const double l2 = alpha * (1.0 - l1_ratio);
    const double l1 = alpha * l1_ratio;
    std::uint64_t step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t row : order) {
            const double eta =
                cfg.eta0 / (1.0 + cfg.eta0 * alpha * static_cast<double>(step));
            ++step;
            const auto xi = x.row(static_cast<Eigen::Index>(row));
            const double sw = sample_weights[static_cast<Eigen::Index>(row)];
            const int y = labels[row];

            if (l2 > 0.0) model.weights *= std::max(0.0, 1.0 - eta * l2);
            for (int c = 0; c < n_classes; ++c) {
                const double margin = xi.dot(model.weights.col(c)) + model.intercepts[c];
                const double prob = 1.0 / (1.0 + std::exp(-margin));
                // raw softplus so a blown-up margin drives the loss to inf
                epoch_loss += sw * std::log1p(std::exp(y == c ? -margin : margin));
                const double g = sw * (prob - (y == c ? 1.0 : 0.0));
                model.weights.col(c).noalias() -= eta * g * xi.transpose();
                model.intercepts[c] -= eta * g;
            }
            if (l1 > 0.0) {
                cumulative_l1 += eta * l1;
                for (Eigen::Index j = 0; j < d; ++j) {
                    for (int c = 0; c < n_classes; ++c) {
                        const double z = model.weights(j, c);
                        if (z > 0.0) {
                            model.weights(j, c) =
                                std::max(0.0, z - (cumulative_l1 + cumulative_applied(j, c)));
                        } else if (z < 0.0) {
                            model.weights(j, c) =
                                std::min(0.0, z + (cumulative_l1 - cumulative_applied(j, c)));
                        }
                        cumulative_applied(j, c) += model.weights(j, c) - z;
                    }
                }
            }
        }
        if (!std::isfinite(epoch_loss) || !model.weights.allFinite() ||
            !model.intercepts.allFinite())
            throw Error("fit_elasticnet_sgd: loss diverged at alpha=" + std::to_string(alpha));
    }
    return model;
}

inline double weighted_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted,
                                const Eigen::VectorXd& weights,
                                const std::vector<std::size_t>& rows) {
    double hit = 0.0, total = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double w = weights[static_cast<Eigen::Index>(rows[k])];
        total += w;
        if (truth[rows[k]] == predicted[k]) hit += w;
    }
    return total > 0.0 ? hit / total : 0.0;
}

}  // namespace detail

/// Out-of-fold predictions at a fixed alpha: each fold is predicted by a
/// model trained on the other folds.
inline std::vector<int> cross_val_predict(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                          double alpha, double l1_ratio,
                                          const Eigen::VectorXd& sample_weights, const CvPlan& plan,
                                          SgdConfig cfg, std::uint64_t seed) {
    int n_classes = 0;
    for (int l : labels) n_classes = std::max(n_classes, l + 1);
    std::vector<int> predicted(labels.size(), 0);
    for (int fold = 0; fold < plan.k; ++fold) {
        std::vector<std::size_t> train, val;
        for (std::size_t i = 0; i < labels.size(); ++i)
            (plan.fold_of[i] == fold ? val : train).push_back(i);
        if (val.empty()) continue;
        const auto model = detail::sgd_fit_single(x, labels, n_classes, alpha, l1_ratio,
                                                  sample_weights, train, cfg,
                                                  derive_seed(seed, 0xcf0000ULL + fold));
        for (std::size_t i : val) {
            const Eigen::RowVectorXd scores = model.decision(x.row(static_cast<Eigen::Index>(i)));
            int best = 0;
            for (int c = 1; c < n_classes; ++c)
                if (scores[c] > scores[best]) best = c;
            predicted[i] = best;
        }
    }
    return predicted;
}

struct ElasticNetFit {
    ElasticNetModel model;
    std::vector<std::pair<double, double>> cv_table;  // (alpha, mean weighted accuracy)
};

/// Grid-search the penalty strength by k-fold CV (weighted accuracy as the
/// selection metric, ties resolved toward the stronger penalty), then refit
/// the winner on the full data.
inline ElasticNetFit fit_elasticnet_sgd(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                        const std::vector<double>& alpha_grid, double l1_ratio,
                                        const Eigen::VectorXd& sample_weights, const CvPlan& plan,
                                        SgdConfig cfg, std::uint64_t seed) {
    if (alpha_grid.empty()) throw ValidationError("fit_elasticnet_sgd: empty alpha grid");
    if (l1_ratio < 0.0 || l1_ratio > 1.0)
        throw ValidationError("fit_elasticnet_sgd: l1_ratio must be in [0,1]");
    if (!x.allFinite()) throw ValidationError("fit_elasticnet_sgd: non-finite features");
    if (static_cast<std::size_t>(x.rows()) != labels.size() ||
        x.rows() != sample_weights.size() || labels.size() != plan.fold_of.size())
        throw ValidationError("fit_elasticnet_sgd: inconsistent input sizes");
    int n_classes = 0;
    for (int l : labels) n_classes = std::max(n_classes, l + 1);

    ElasticNetFit fit;
    if (alpha_grid.size() == 1) {
        fit.cv_table.emplace_back(alpha_grid[0], 1.0);  // no selection needed
    } else {
        for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
            double score_sum = 0.0;
            for (int fold = 0; fold < plan.k; ++fold) {
                std::vector<std::size_t> train, val;
                for (std::size_t i = 0; i < labels.size(); ++i)
                    (plan.fold_of[i] == fold ? val : train).push_back(i);
                const auto model = detail::sgd_fit_single(
                    x, labels, n_classes, alpha_grid[a], l1_ratio, sample_weights, train, cfg,
                    derive_seed(seed, a * static_cast<std::size_t>(plan.k) +
                                          static_cast<std::size_t>(fold)));
                std::vector<int> predicted;
                predicted.reserve(val.size());
                for (std::size_t i : val) {
                    const Eigen::RowVectorXd scores =
                        model.decision(x.row(static_cast<Eigen::Index>(i)));
                    int best = 0;
                    for (int c = 1; c < n_classes; ++c)
                        if (scores[c] > scores[best]) best = c;
                    predicted.push_back(best);
                }
                score_sum += detail::weighted_accuracy(labels, predicted, sample_weights, val);
            }
            fit.cv_table.emplace_back(alpha_grid[a], score_sum / static_cast<double>(plan.k));
        }
    }

    std::size_t best = 0;
    for (std::size_t a = 1; a < fit.cv_table.size(); ++a) {
        const auto& [alpha, score] = fit.cv_table[a];
        if (score > fit.cv_table[best].second ||
            (score == fit.cv_table[best].second && alpha > fit.cv_table[best].first))
            best = a;
    }
    std::vector<std::size_t> all_rows(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) all_rows[i] = i;
    fit.model = detail::sgd_fit_single(x, labels, n_classes, fit.cv_table[best].first, l1_ratio,
                                       sample_weights, all_rows, cfg,
                                       derive_seed(seed, 0xf17f17ULL));
    return fit;
}

}  // namespace mdelm
