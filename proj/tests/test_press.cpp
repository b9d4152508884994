#include <catch2/catch_amalgamated.hpp>

#include <mdelm/elm.hpp>
#include <mdelm/press.hpp>
#include <mdelm/rng.hpp>

#include "oracles.hpp"

#include <vector>

using namespace mdelm;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
    return m;
}

Eigen::MatrixXd random_one_hot(Rng& rng, Eigen::Index rows, int classes) {
    std::vector<int> labels(static_cast<std::size_t>(rows));
    for (auto& l : labels) l = static_cast<int>(rng.uniform_int(classes));
    return one_hot_targets(labels, classes);
}

TargetFlip flip_to(Eigen::Index index, int label, int classes) {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(classes);
    t[label] = 1.0;
    return TargetFlip{index, std::move(t)};
}

}  // namespace

TEST_CASE("identity design with lambda 1 has leverage one half") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
    const PressState press(eye, eye, 1.0);
    REQUIRE(press.hat_diag()[0] == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(press.hat_diag()[1] == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("PRESS residuals equal brute-force leave-one-out retraining") {
    Rng rng(2024);
    for (double lambda : {1e-3, 1.0, 10.0}) {
        const Eigen::MatrixXd h = random_matrix(rng, 40, 10);
        const Eigen::MatrixXd t = random_one_hot(rng, 40, 3);
        const PressState press(h, t, lambda);
        const Eigen::MatrixXd press_residuals =
            press.residuals().array().colwise() / (1.0 - press.hat_diag().array());
        const Eigen::MatrixXd oracle = oracles::loo_residuals_by_retraining(h, t, lambda);
        for (Eigen::Index i = 0; i < 40; ++i)
            for (Eigen::Index c = 0; c < 3; ++c)
                REQUIRE(std::abs(press_residuals(i, c) - oracle(i, c)) <=
                        1e-8 * (1.0 + std::abs(oracle(i, c))));
    }
}

TEST_CASE("leverage invariants hold") {
    Rng rng(5);
    const Eigen::MatrixXd h = random_matrix(rng, 60, 12);
    const Eigen::MatrixXd t = random_one_hot(rng, 60, 4);
    const PressState press(h, t, 0.1);
    REQUIRE((press.hat_diag().array() >= 0.0).all());
    REQUIRE((press.hat_diag().array() < 1.0).all());
    REQUIRE(press.hat_diag().sum() <= 12.0 + 1e-9);
    REQUIRE(press.loo_error() >= 0.0);
}

TEST_CASE("near-interpolation states are rejected with a distinct error") {
    const Eigen::MatrixXd h = 1e9 * Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd t = Eigen::MatrixXd::Identity(3, 3);
    REQUIRE_THROWS_AS(PressState(h, t, 1e-3), NearInterpolationError);
}

TEST_CASE("flip queries are pure and exact for the identity flip") {
    Rng rng(7);
    const Eigen::MatrixXd h = random_matrix(rng, 30, 6);
    const Eigen::MatrixXd t = random_one_hot(rng, 30, 3);
    const PressState press(h, t, 1.0);
    int current = 0;
    while (t(4, current) != 1.0) ++current;
    const double before = press.loo_error();
    REQUIRE(press.loo_error_after_flip(4, t.row(4).transpose()) == before);
    const auto flip = flip_to(4, (current + 1) % 3, 3);
    const double moved = press.loo_error_after_flip(std::span<const TargetFlip>(&flip, 1));
    REQUIRE(press.loo_error_after_flip(std::span<const TargetFlip>(&flip, 1)) == moved);
    REQUIRE(press.loo_error() == before);
}

TEST_CASE("single and double flips match a full rebuild") {
    Rng rng(11);
    const Eigen::MatrixXd h = random_matrix(rng, 40, 10);
    Eigen::MatrixXd t = random_one_hot(rng, 40, 4);
    const PressState press(h, t, 1.0);

    SECTION("single flip") {
        for (int trial = 0; trial < 20; ++trial) {
            const auto i = static_cast<Eigen::Index>(rng.uniform_int(40));
            const auto flip = flip_to(i, static_cast<int>(rng.uniform_int(4)), 4);
            Eigen::MatrixXd t2 = t;
            t2.row(i) = flip.new_target.transpose();
            const PressState fresh(h, t2, 1.0);
            const double incremental =
                press.loo_error_after_flip(std::span<const TargetFlip>(&flip, 1));
            REQUIRE(std::abs(incremental - fresh.loo_error()) <=
                    1e-10 * std::max(1.0, fresh.loo_error()));
        }
    }
    SECTION("two simultaneous flips") {
        for (int trial = 0; trial < 20; ++trial) {
            auto i = static_cast<Eigen::Index>(rng.uniform_int(40));
            auto j = static_cast<Eigen::Index>(rng.uniform_int(40));
            if (i == j) j = (j + 1) % 40;
            const std::vector<TargetFlip> flips{
                flip_to(i, static_cast<int>(rng.uniform_int(4)), 4),
                flip_to(j, static_cast<int>(rng.uniform_int(4)), 4)};
            Eigen::MatrixXd t2 = t;
            t2.row(i) = flips[0].new_target.transpose();
            t2.row(j) = flips[1].new_target.transpose();
            const PressState fresh(h, t2, 1.0);
            const double incremental = press.loo_error_after_flip(flips);
            REQUIRE(std::abs(incremental - fresh.loo_error()) <=
                    1e-10 * std::max(1.0, fresh.loo_error()));
        }
    }
}

TEST_CASE("commit_flip matches the queried value exactly and tracks rebuilds") {
    Rng rng(13);
    const Eigen::MatrixXd h = random_matrix(rng, 50, 8);
    Eigen::MatrixXd t = random_one_hot(rng, 50, 3);
    PressState press(h, t, 0.5);

    SECTION("commit then read gives the same number") {
        const auto flip = flip_to(9, 2, 3);
        const double promised =
            press.loo_error_after_flip(std::span<const TargetFlip>(&flip, 1));
        press.commit_flip(std::span<const TargetFlip>(&flip, 1));
        REQUIRE(press.loo_error() == promised);
        REQUIRE(press.targets()(9, 2) == 1.0);
    }
    SECTION("identity commit leaves the state untouched") {
        const double before = press.loo_error();
        const Eigen::MatrixXd residuals_before = press.residuals();
        press.commit_flip(3, press.targets().row(3).transpose());
        REQUIRE(press.loo_error() == before);
        REQUIRE((press.residuals() - residuals_before).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("one hundred random commits stay within drift tolerance") {
        Eigen::MatrixXd current = t;
        for (int step = 0; step < 100; ++step) {
            const auto i = static_cast<Eigen::Index>(rng.uniform_int(50));
            const auto flip = flip_to(i, static_cast<int>(rng.uniform_int(3)), 3);
            current.row(i) = flip.new_target.transpose();
            press.commit_flip(std::span<const TargetFlip>(&flip, 1));
        }
        const PressState fresh(h, current, 0.5);
        REQUIRE(std::abs(press.loo_error() - fresh.loo_error()) <=
                1e-8 * std::max(1.0, fresh.loo_error()));
        REQUIRE((press.targets() - current).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("out-of-range index is rejected") {
        const auto flip = flip_to(50, 0, 3);
        REQUIRE_THROWS_AS(press.loo_error_after_flip(std::span<const TargetFlip>(&flip, 1)),
                          ValidationError);
    }
}

TEST_CASE("on-demand hat columns agree with the full matrix") {
    Rng rng(17);
    const Eigen::MatrixXd h = random_matrix(rng, 80, 9);
    const Eigen::MatrixXd t = random_one_hot(rng, 80, 3);
    const PressState full(h, t, 1.0);
    PressOptions on_demand;
    on_demand.full_hat_threshold = 0;
    on_demand.column_cache_capacity = 4;
    const PressState lazy(h, t, 1.0, on_demand);
    REQUIRE(lazy.loo_error() == Catch::Approx(full.loo_error()).margin(1e-14));
    for (Eigen::Index i : {0, 5, 7, 5, 79, 0, 12, 5}) {  // revisits exercise the LRU
        REQUIRE((lazy.hat_column(i) - full.hat_column(i)).cwiseAbs().maxCoeff() < 1e-12);
    }
    const auto flip = flip_to(21, 1, 3);
    REQUIRE(lazy.loo_error_after_flip(std::span<const TargetFlip>(&flip, 1)) ==
            Catch::Approx(full.loo_error_after_flip(std::span<const TargetFlip>(&flip, 1)))
                .margin(1e-13));
}

TEST_CASE("build_press validates its inputs") {
    const Eigen::MatrixXd h = Eigen::MatrixXd::Random(10, 3);
    const Eigen::MatrixXd t = Eigen::MatrixXd::Random(10, 2);
    REQUIRE_THROWS_AS(PressState(h, t, 0.0), ValidationError);
    REQUIRE_THROWS_AS(PressState(h.topRows(1), t.topRows(1), 1.0), ValidationError);
    Eigen::MatrixXd bad = t;
    bad(0, 0) = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(PressState(h, bad, 1.0), ValidationError);
}
