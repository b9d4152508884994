#pragma once

#include <list>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mdelm/errors.hpp"

namespace mdelm {

/// A single relabeling: replace target row `index` with `new_target`.
struct TargetFlip {
    Eigen::Index index = 0;
    Eigen::VectorXd new_target;
};

struct PressOptions {
    // Full n x n hat matrix below this sample count, on-demand columns above.
    Eigen::Index full_hat_threshold = 4000;
    std::size_t column_cache_capacity = 256;
    double interpolation_guard = 1e-10;  // reject when 1 - h_ii falls below
};

/// Closed-form leave-one-out state for a ridge output layer.
///
/// With A = (H^T H + lambda I)^{-1} and HAT = H A H^T:
///   h_ii          = h_i^T A h_i
///   PRESS residual row i = (T - HAT T)_i / (1 - h_ii)
///   loo_error     = mean squared PRESS residual over all samples and columns.
///
/// Changing only target rows leaves HAT fixed, so a flip T_i -> t' moves the
/// residual matrix by ((j==i) - HAT(j,i)) * (t' - T_i) per row j. That makes
/// the LOO error of any relabeling an O(n) query on top of the cached state.
class PressState {
public:
    PressState(const Eigen::MatrixXd& h, const Eigen::MatrixXd& t, double lambda,
               PressOptions options = {})
        : h_(h), targets_(t), lambda_(lambda), options_(options) {
        if (!(lambda > 0.0)) throw ValidationError("build_press: lambda must be positive");
        if (h.rows() < 2) throw ValidationError("build_press: need at least 2 samples");
        if (h.rows() != t.rows()) throw ValidationError("build_press: row count mismatch");
        if (!h.allFinite() || !t.allFinite())
            throw ValidationError("build_press: non-finite input");

        const Eigen::Index n = h_.rows();
        const Eigen::Index d = h_.cols();
        Eigen::MatrixXd gram = h_.transpose() * h_;
        gram.diagonal().array() += lambda_;
        const Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) throw Error("build_press: factorization failed");
        gram_inverse_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
        hat_factor_.noalias() = h_ * gram_inverse_;  // n x d, HAT = hat_factor * H^T

        hat_diag_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) hat_diag_[i] = hat_factor_.row(i).dot(h_.row(i));
        inv_one_minus_h_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double gap = 1.0 - hat_diag_[i];
            if (gap < options_.interpolation_guard)
                throw NearInterpolationError("build_press: 1 - h_ii = " + std::to_string(gap) +
                                             " at sample " + std::to_string(i) +
                                             "; PRESS residuals are unreliable");
            inv_one_minus_h_[i] = 1.0 / gap;
        }
        if (n <= options_.full_hat_threshold) hat_full_.noalias() = hat_factor_ * h_.transpose();

        residuals_.noalias() = targets_ - h_ * (gram_inverse_ * (h_.transpose() * targets_));
        refresh_press();
    }

    Eigen::Index n_samples() const { return h_.rows(); }
    Eigen::Index n_outputs() const { return targets_.cols(); }
    double loo_error() const { return loo_error_; }
    const Eigen::MatrixXd& gram_inverse() const { return gram_inverse_; }
    const Eigen::VectorXd& hat_diag() const { return hat_diag_; }
    const Eigen::MatrixXd& targets() const { return targets_; }
    const Eigen::MatrixXd& residuals() const { return residuals_; }

    /// LOO error after applying `flips` to the committed targets. Pure query:
    /// the state is unchanged, and simultaneous flips compose additively.
    double loo_error_after_flip(std::span<const TargetFlip> flips) const {
        const Eigen::Index n = n_samples();
        const Eigen::Index c = n_outputs();
        Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n, c);
        accumulate_residual_delta(flips, delta);
        delta.array().colwise() *= inv_one_minus_h_.array();
        return (press_ + delta).squaredNorm() / static_cast<double>(n * c);
    }

    double loo_error_after_flip(Eigen::Index index, const Eigen::VectorXd& new_target) const {
        const TargetFlip flip{index, new_target};
        return loo_error_after_flip(std::span<const TargetFlip>(&flip, 1));
    }

    /// Applies `flips` to the committed targets and brings residuals, PRESS
    /// residuals and the LOO error in line with a fresh build on the new T.
    /// The PRESS matrix moves by the same scaled delta a query would use, so
    /// the committed loo_error equals the previously queried value exactly.
    void commit_flip(std::span<const TargetFlip> flips) {
        Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n_samples(), n_outputs());
        accumulate_residual_delta(flips, delta);
        for (const auto& flip : flips) targets_.row(flip.index) = flip.new_target.transpose();
        residuals_ += delta;
        delta.array().colwise() *= inv_one_minus_h_.array();
        press_ += delta;
        loo_error_ = press_.squaredNorm() / static_cast<double>(n_samples() * n_outputs());
    }

    void commit_flip(Eigen::Index index, const Eigen::VectorXd& new_target) {
        const TargetFlip flip{index, new_target};
        commit_flip(std::span<const TargetFlip>(&flip, 1));
    }

    /// Column i of HAT. Materialized from the full matrix when cached,
    /// otherwise computed as hat_factor * h_i with LRU reuse.
    Eigen::VectorXd hat_column(Eigen::Index i) const {
        if (hat_full_.size() > 0) return hat_full_.col(i);
        std::lock_guard<std::mutex> lock(cache_mutex_);
        if (auto it = column_cache_.find(i); it != column_cache_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.second);
            return it->second.first;
        }
        Eigen::VectorXd col = hat_factor_ * h_.row(i).transpose();
        if (column_cache_.size() >= options_.column_cache_capacity && !lru_.empty()) {
            column_cache_.erase(lru_.back());
            lru_.pop_back();
        }
        lru_.push_front(i);
        column_cache_.emplace(i, std::make_pair(col, lru_.begin()));
        return col;
    }

private:
    // delta(j) += ((j == i) - HAT(j, i)) * (t' - T_i) for every flip.
    void accumulate_residual_delta(std::span<const TargetFlip> flips,
                                   Eigen::MatrixXd& delta) const {
        for (const auto& flip : flips) {
            if (flip.index < 0 || flip.index >= n_samples())
                throw ValidationError("flip index " + std::to_string(flip.index) +
                                      " out of range [0," + std::to_string(n_samples()) + ")");
            if (flip.new_target.size() != n_outputs())
                throw ValidationError("flip target has wrong width");
            const Eigen::VectorXd d = flip.new_target - targets_.row(flip.index).transpose();
            delta.noalias() -= hat_column(flip.index) * d.transpose();
            delta.row(flip.index) += d.transpose();
        }
    }

    void refresh_press() {
        press_ = residuals_.array().colwise() * inv_one_minus_h_.array();
        loo_error_ =
            press_.squaredNorm() / static_cast<double>(n_samples() * n_outputs());
    }

    Eigen::MatrixXd h_;
    Eigen::MatrixXd targets_;
    double lambda_;
    PressOptions options_;

    Eigen::MatrixXd gram_inverse_;     // (H^T H + lambda I)^{-1}
    Eigen::MatrixXd hat_factor_;       // H * gram_inverse
    Eigen::MatrixXd hat_full_;         // n x n when n <= full_hat_threshold
    Eigen::VectorXd hat_diag_;
    Eigen::VectorXd inv_one_minus_h_;
    Eigen::MatrixXd residuals_;        // T - HAT T
    Eigen::MatrixXd press_;            // residuals scaled by 1/(1 - h_ii)
    double loo_error_ = 0.0;

    mutable std::mutex cache_mutex_;
    mutable std::list<Eigen::Index> lru_;
    mutable std::unordered_map<Eigen::Index,
                               std::pair<Eigen::VectorXd, std::list<Eigen::Index>::iterator>>
        column_cache_;
};

inline PressState build_press(const Eigen::MatrixXd& h, const Eigen::MatrixXd& t, double lambda,
                              PressOptions options = {}) {
    return PressState(h, t, lambda, options);
}

}  // namespace mdelm
