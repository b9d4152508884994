#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mdelm/errors.hpp"
#include "mdelm/rng.hpp"

namespace mdelm {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return Eigen::MatrixXd(0, 0);
    const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

/// Per-feature zero-mean unit-variance scaling. Binary {0,1} columns and
/// constant columns pass through unchanged.
class Standardizer {
public:
    Standardizer() = default;

    static Standardizer fit(const Eigen::MatrixXd& x) {
        Standardizer s;
        const Eigen::Index d = x.cols();
        s.mean_ = Eigen::VectorXd::Zero(d);
        s.scale_ = Eigen::VectorXd::Ones(d);
        for (Eigen::Index c = 0; c < d; ++c) {
            const auto col = x.col(c);
            const bool binary = ((col.array() == 0.0) || (col.array() == 1.0)).all();
            if (binary) continue;
            const double mean = col.mean();
            const double var = (col.array() - mean).square().sum() /
                               static_cast<double>(std::max<Eigen::Index>(x.rows(), 1));
            s.mean_[c] = mean;
            s.scale_[c] = var > 0.0 ? std::sqrt(var) : 1.0;
        }
        return s;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
        if (x.cols() != mean_.size()) throw Error("standardizer: dimension mismatch");
        return (x.rowwise() - mean_.transpose()).array().rowwise() /
               scale_.transpose().array();
    }

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::VectorXd& scale() const { return scale_; }

    nlohmann::json to_json() const {
        return {{"mean", vector_to_json(mean_)}, {"scale", vector_to_json(scale_)}};
    }
    static Standardizer from_json(const nlohmann::json& j) {
        Standardizer s;
        s.mean_ = vector_from_json(j.at("mean"));
        s.scale_ = vector_from_json(j.at("scale"));
        return s;
    }

private:
    Eigen::VectorXd mean_;
    Eigen::VectorXd scale_;
};

/// Nonlinearity of the "standard" neurons. tanh is the default; logistic is
/// the config-exposed alternative.
enum class Activation { Tanh, Logistic };

inline std::string to_string(Activation a) {
    return a == Activation::Tanh ? "tanh" : "logistic";
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "logistic") return Activation::Logistic;
    throw ValidationError("unknown activation: " + s);
}

/// Fixed random feature map: optional linear passthrough of the inputs,
/// tanh/logistic neurons with uniform(-1,1) weights, and Gaussian RBF
/// neurons with centers sampled from the data and a shared median-distance
/// width.
struct HiddenLayer {
    int input_dim = 0;
    bool passthrough = true;
    Activation activation = Activation::Tanh;
    Eigen::MatrixXd sigmoid_weights;  // n_sig x input_dim
    Eigen::VectorXd sigmoid_biases;   // n_sig
    Eigen::MatrixXd rbf_centers;      // n_rbf x input_dim
    Eigen::VectorXd rbf_widths;       // n_rbf, all equal by construction
    std::uint64_t seed = 0;

    Eigen::Index output_dim() const {
        return (passthrough ? input_dim : 0) + sigmoid_weights.rows() + rbf_centers.rows();
    }

    nlohmann::json to_json() const {
        return {{"input_dim", input_dim},
                {"passthrough", passthrough},
                {"activation", to_string(activation)},
                {"sigmoid_weights", matrix_to_json(sigmoid_weights)},
                {"sigmoid_biases", vector_to_json(sigmoid_biases)},
                {"rbf_centers", matrix_to_json(rbf_centers)},
                {"rbf_widths", vector_to_json(rbf_widths)},
                {"seed", seed}};
    }
    static HiddenLayer from_json(const nlohmann::json& j) {
        HiddenLayer l;
        l.input_dim = j.at("input_dim").get<int>();
        l.passthrough = j.at("passthrough").get<bool>();
        l.activation = activation_from_string(j.value("activation", "tanh"));
        l.sigmoid_weights = matrix_from_json(j.at("sigmoid_weights"));
        l.sigmoid_biases = vector_from_json(j.at("sigmoid_biases"));
        l.rbf_centers = matrix_from_json(j.at("rbf_centers"));
        l.rbf_widths = vector_from_json(j.at("rbf_widths"));
        l.seed = j.at("seed").get<std::uint64_t>();
        if (l.sigmoid_weights.rows() > 0 && l.sigmoid_weights.cols() != l.input_dim)
            throw ValidationError("hidden layer: sigmoid weight shape mismatch");
        return l;
    }
};

/// Shared RBF width: median pairwise distance among the sampled centers,
/// falling back to 1 when degenerate.
inline double median_pairwise_distance(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    if (n < 2) return 1.0;
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            dists.push_back((points.row(i) - points.row(j)).norm());
    std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
    const double median = dists[dists.size() / 2];
    return median > 0.0 ? median : 1.0;
}

/// Builds the random layer. RBF centers are drawn without replacement from
/// the rows of `center_source`; without a source they are uniform in
/// [-1,1]^d, which matches standardized inputs.
inline HiddenLayer make_hidden_layer(int input_dim, int n_sigmoid, int n_rbf,
                                     std::uint64_t seed,
                                     const Eigen::MatrixXd* center_source = nullptr,
                                     bool passthrough = true,
                                     Activation activation = Activation::Tanh) {
    if (input_dim < 1) throw ValidationError("make_hidden_layer: input_dim must be positive");
    if (n_sigmoid < 0 || n_rbf < 0)
        throw ValidationError("make_hidden_layer: neuron counts must be non-negative");
    if (n_sigmoid == 0 && n_rbf == 0 && !passthrough)
        throw ValidationError("make_hidden_layer: layer would be empty");
    HiddenLayer layer;
    layer.input_dim = input_dim;
    layer.passthrough = passthrough;
    layer.activation = activation;
    layer.seed = seed;
    Rng rng(seed);
    layer.sigmoid_weights.resize(n_sigmoid, input_dim);
    layer.sigmoid_biases.resize(n_sigmoid);
    for (int r = 0; r < n_sigmoid; ++r) {
        for (int c = 0; c < input_dim; ++c) layer.sigmoid_weights(r, c) = rng.uniform(-1.0, 1.0);
        layer.sigmoid_biases[r] = rng.uniform(-1.0, 1.0);
    }
    layer.rbf_centers.resize(n_rbf, input_dim);
    if (n_rbf > 0) {
        if (center_source) {
            if (center_source->cols() != input_dim)
                throw ValidationError("make_hidden_layer: center source dimension mismatch");
            if (center_source->rows() < n_rbf)
                throw ValidationError("make_hidden_layer: center source has " +
                                      std::to_string(center_source->rows()) + " rows, need " +
                                      std::to_string(n_rbf));
            const auto picks = rng.sample_without_replacement(
                static_cast<std::size_t>(center_source->rows()), static_cast<std::size_t>(n_rbf));
            for (int r = 0; r < n_rbf; ++r)
                layer.rbf_centers.row(r) =
                    center_source->row(static_cast<Eigen::Index>(picks[static_cast<std::size_t>(r)]));
        } else {
            for (int r = 0; r < n_rbf; ++r)
                for (int c = 0; c < input_dim; ++c) layer.rbf_centers(r, c) = rng.uniform(-1.0, 1.0);
        }
    }
    layer.rbf_widths =
        Eigen::VectorXd::Constant(n_rbf, median_pairwise_distance(layer.rbf_centers));
    return layer;
}

/// H = [X | act(X W^T + b) | exp(-||x - c||^2 / (2 sigma^2))].
inline Eigen::MatrixXd transform(const HiddenLayer& layer, const Eigen::MatrixXd& x) {
    if (x.cols() != layer.input_dim)
        throw ValidationError("transform: input has " + std::to_string(x.cols()) +
                              " columns, layer expects " + std::to_string(layer.input_dim));
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd h(n, layer.output_dim());
    Eigen::Index at = 0;
    if (layer.passthrough) {
        h.leftCols(layer.input_dim) = x;
        at += layer.input_dim;
    }
    const Eigen::Index n_sig = layer.sigmoid_weights.rows();
    if (n_sig > 0) {
        auto preact =
            ((x * layer.sigmoid_weights.transpose()).rowwise() + layer.sigmoid_biases.transpose())
                .array();
        if (layer.activation == Activation::Tanh)
            h.middleCols(at, n_sig) = preact.tanh();
        else
            h.middleCols(at, n_sig) = 1.0 / (1.0 + (-preact).exp());
        at += n_sig;
    }
    const Eigen::Index n_rbf = layer.rbf_centers.rows();
    for (Eigen::Index k = 0; k < n_rbf; ++k) {
        const double denom = 2.0 * layer.rbf_widths[k] * layer.rbf_widths[k];
        h.col(at + k) = ((x.rowwise() - layer.rbf_centers.row(k)).rowwise().squaredNorm() /
                         -denom)
                            .array()
                            .exp();
    }
    return h;
}

inline Eigen::MatrixXd one_hot_targets(const std::vector<int>& labels, int n_classes) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes)
            throw ValidationError("one_hot_targets: label " + std::to_string(labels[i]) +
                                  " outside [0," + std::to_string(n_classes) + ")");
        t(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return t;
}

struct RidgeSolution {
    Eigen::MatrixXd output_weights;  // D_h x C
    double lambda = 1.0;
    int n_classes = 0;

    nlohmann::json to_json() const {
        return {{"output_weights", matrix_to_json(output_weights)},
                {"lambda", lambda},
                {"n_classes", n_classes}};
    }
    static RidgeSolution from_json(const nlohmann::json& j) {
        RidgeSolution s;
        s.output_weights = matrix_from_json(j.at("output_weights"));
        s.lambda = j.at("lambda").get<double>();
        s.n_classes = j.at("n_classes").get<int>();
        return s;
    }
};

/// B = (H^T H + lambda I)^{-1} H^T T via Cholesky.
inline RidgeSolution solve_ridge(const Eigen::MatrixXd& h, const Eigen::MatrixXd& t,
                                 double lambda) {
    if (!(lambda > 0.0)) throw ValidationError("solve_ridge: lambda must be positive");
    if (h.rows() != t.rows()) throw ValidationError("solve_ridge: row count mismatch");
    if (!h.allFinite() || !t.allFinite()) throw ValidationError("solve_ridge: non-finite input");
    Eigen::MatrixXd gram = h.transpose() * h;
    gram.diagonal().array() += lambda;
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw Error("solve_ridge: factorization failed");
    RidgeSolution sol;
    sol.output_weights = llt.solve(h.transpose() * t);
    sol.lambda = lambda;
    sol.n_classes = static_cast<int>(t.cols());
    return sol;
}

/// Argmax decoding; ties resolve to the lowest class index.
inline std::vector<int> predict_scores(const Eigen::MatrixXd& scores) {
    std::vector<int> labels(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        int best = 0;
        for (Eigen::Index c = 1; c < scores.cols(); ++c)
            if (scores(r, c) > scores(r, best)) best = static_cast<int>(c);
        labels[static_cast<std::size_t>(r)] = best;
    }
    return labels;
}

inline std::vector<int> predict(const HiddenLayer& layer, const RidgeSolution& solution,
                                const Eigen::MatrixXd& x) {
    return predict_scores(transform(layer, x) * solution.output_weights);
}

}  // namespace mdelm
