#include <catch2/catch_amalgamated.hpp>

#include <mdelm/stats.hpp>

#include "oracles.hpp"

#include <vector>

using namespace mdelm;

TEST_CASE("fit_normal computes mean and ML stddev") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto fit = fit_normal(v);
    REQUIRE(fit.mean == Catch::Approx(2.5));
    REQUIRE(fit.stddev == Catch::Approx(std::sqrt(1.25)));
    REQUIRE_THROWS_AS(fit_normal(std::vector<double>{1.0}), Error);
}

TEST_CASE("normal_quantile matches the erf-based oracle") {
    REQUIRE(normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(std::abs(normal_quantile(0.99) - 2.3263) < 1e-4);
    for (double q : {0.001, 0.025, 0.2, 0.5, 0.9, 0.95, 0.99, 0.999, 0.9999}) {
        REQUIRE(normal_quantile(q) ==
                Catch::Approx(oracles::inverse_normal_cdf_erf(q)).margin(1e-9));
    }
    REQUIRE(normal_quantile(0.25) == Catch::Approx(-normal_quantile(0.75)).margin(1e-12));
    REQUIRE_THROWS_AS(normal_quantile(0.0), Error);
    REQUIRE_THROWS_AS(normal_quantile(1.0), Error);
}

TEST_CASE("fit_normal_threshold is mean + z(q) stddev") {
    const std::vector<double> scores{3.0, 5.0, 7.0, 9.0, 11.0};
    const auto fit = fit_normal(scores);
    SECTION("median quantile gives the mean") {
        REQUIRE(fit_normal_threshold(scores, 0.5) == Catch::Approx(fit.mean).margin(1e-12));
    }
    SECTION("q = 0.99 uses z about 2.3263") {
        const double threshold = fit_normal_threshold(scores, 0.99);
        REQUIRE(std::abs((threshold - fit.mean) / fit.stddev - 2.3263) < 1e-4);
        const double oracle = fit.mean + oracles::inverse_normal_cdf_erf(0.99) * fit.stddev;
        REQUIRE(threshold == Catch::Approx(oracle).margin(1e-9));
    }
    SECTION("zero variance rejected") {
        const std::vector<double> flat{2.0, 2.0, 2.0};
        REQUIRE_THROWS_AS(fit_normal_threshold(flat, 0.9), Error);
    }
}

TEST_CASE("welch_t on identical samples") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const auto r = welch_t(a, a);
    REQUIRE(r.t == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(r.p == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("welch_t separates distant means") {
    const std::vector<double> a{0.0, 0.001, -0.001, 0.0005};
    const std::vector<double> b{10.0, 10.001, 9.999, 10.0005};
    const auto r = welch_t(a, b);
    REQUIRE(r.p < 1e-3);
    REQUIRE(r.t < 0.0);
}

TEST_CASE("welch_t matches the textbook-formula oracle on a fixed fixture") {
    const std::vector<double> a{2.1, 3.4, 1.9, 2.8, 3.0, 2.2, 2.9};
    const std::vector<double> b{4.0, 3.8, 4.4, 3.5, 4.2};
    const auto r = welch_t(a, b);
    const auto pieces = oracles::welch_pieces(a, b);
    REQUIRE(r.t == Catch::Approx(pieces.t).margin(1e-12));
    REQUIRE(r.dof == Catch::Approx(pieces.dof).margin(1e-12));
    const double p_oracle = oracles::t_two_sided_p_by_quadrature(pieces.t, pieces.dof);
    REQUIRE(r.p == Catch::Approx(p_oracle).margin(1e-9));
}

TEST_CASE("welch_t rejects degenerate input") {
    const std::vector<double> flat{5.0, 5.0, 5.0};
    REQUIRE_THROWS_AS(welch_t(flat, flat), Error);
    REQUIRE_THROWS_AS(welch_t(std::vector<double>{1.0}, flat), Error);
}
