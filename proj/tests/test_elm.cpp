#include <catch2/catch_amalgamated.hpp>

#include <mdelm/dataset.hpp>
#include <mdelm/elm.hpp>

#include "oracles.hpp"

using namespace mdelm;

TEST_CASE("make_hidden_layer shapes and determinism") {
    Eigen::MatrixXd source = Eigen::MatrixXd::Random(300, 12);
    const auto layer = make_hidden_layer(12, 200, 200, 5, &source);
    REQUIRE(layer.output_dim() == 12 + 400);
    const auto again = make_hidden_layer(12, 200, 200, 5, &source);
    REQUIRE((layer.sigmoid_weights - again.sigmoid_weights).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((layer.rbf_centers - again.rbf_centers).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((layer.rbf_widths.array() > 0.0).all());

    SECTION("identity feature map") {
        const auto id = make_hidden_layer(12, 0, 0, 5, nullptr, true);
        REQUIRE(id.output_dim() == 12);
        Eigen::MatrixXd x = Eigen::MatrixXd::Random(7, 12);
        REQUIRE((transform(id, x) - x).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("an empty layer is rejected") {
        REQUIRE_THROWS_AS(make_hidden_layer(12, 0, 0, 5, nullptr, false), ValidationError);
    }
    SECTION("too few center rows") {
        Eigen::MatrixXd tiny = Eigen::MatrixXd::Random(3, 12);
        REQUIRE_THROWS_AS(make_hidden_layer(12, 0, 10, 5, &tiny), ValidationError);
    }
}

TEST_CASE("transform evaluates the declared feature map") {
    Eigen::MatrixXd source = Eigen::MatrixXd::Random(50, 4);
    const auto layer = make_hidden_layer(4, 6, 5, 3, &source);

    SECTION("an input equal to a center drives that RBF to one") {
        Eigen::MatrixXd x = layer.rbf_centers.row(2);
        const auto h = transform(layer, x);
        REQUIRE(h(0, 4 + 6 + 2) == Catch::Approx(1.0).margin(1e-15));
    }
    SECTION("zero weights and bias give tanh(0) = 0") {
        HiddenLayer manual;
        manual.input_dim = 4;
        manual.passthrough = false;
        manual.sigmoid_weights = Eigen::MatrixXd::Zero(1, 4);
        manual.sigmoid_biases = Eigen::VectorXd::Zero(1);
        manual.rbf_centers.resize(0, 4);
        manual.rbf_widths.resize(0);
        Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 4);
        REQUIRE(transform(manual, x).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("nonlinear blocks are bounded") {
        Eigen::MatrixXd x = 10.0 * Eigen::MatrixXd::Random(10, 4);
        const auto h = transform(layer, x);
        REQUIRE(h.allFinite());
        REQUIRE(h.middleCols(4, 6).cwiseAbs().maxCoeff() <= 1.0);
        REQUIRE(h.rightCols(5).maxCoeff() <= 1.0);
        REQUIRE(h.rightCols(5).minCoeff() > 0.0);
    }
    SECTION("row permutation commutes with transform") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Random(8, 4);
        Eigen::MatrixXd reversed = x.colwise().reverse();
        const auto h = transform(layer, x);
        const auto hr = transform(layer, reversed);
        REQUIRE((h.colwise().reverse() - hr).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("dimension mismatch") {
        REQUIRE_THROWS_AS(transform(layer, Eigen::MatrixXd::Random(3, 5)), ValidationError);
    }
}

TEST_CASE("one_hot_targets") {
    const auto t = one_hot_targets({0, 3}, 4);
    REQUIRE(t.rows() == 2);
    REQUIRE(t(0, 0) == 1.0);
    REQUIRE(t(1, 3) == 1.0);
    REQUIRE(t.sum() == 2.0);
    REQUIRE(one_hot_targets({0, 0, 0}, 1).col(0).sum() == 3.0);
    REQUIRE(one_hot_targets({0, 1, 2, 3}, 4).cols() == 4);
    REQUIRE_THROWS_AS(one_hot_targets({4}, 4), ValidationError);
}

TEST_CASE("solve_ridge") {
    SECTION("identity system with lambda 1 halves the targets") {
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
        const auto sol = solve_ridge(eye, eye, 1.0);
        REQUIRE((sol.output_weights - 0.5 * eye).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("matches the normal-equations oracle") {
        Eigen::MatrixXd h = Eigen::MatrixXd::Random(30, 8);
        Eigen::MatrixXd t = Eigen::MatrixXd::Random(30, 3);
        const auto sol = solve_ridge(h, t, 0.5);
        const auto oracle = oracles::ridge_normal_equations(h, t, 0.5);
        REQUIRE((sol.output_weights - oracle).norm() / oracle.norm() < 1e-10);
    }
    SECTION("stationarity: H^T(HB - T) + lambda B = 0") {
        Eigen::MatrixXd h = Eigen::MatrixXd::Random(40, 10);
        Eigen::MatrixXd t = Eigen::MatrixXd::Random(40, 4);
        for (double lambda : {1e-3, 1.0, 10.0}) {
            const auto sol = solve_ridge(h, t, lambda);
            const Eigen::MatrixXd gradient =
                h.transpose() * (h * sol.output_weights - t) + lambda * sol.output_weights;
            const double scale = std::max(1.0, (h.transpose() * t).cwiseAbs().maxCoeff());
            REQUIRE(gradient.cwiseAbs().maxCoeff() <= 1e-8 * scale);
        }
    }
    SECTION("norm and training error grow monotonically with lambda") {
        Eigen::MatrixXd h = Eigen::MatrixXd::Random(25, 6);
        Eigen::MatrixXd t = Eigen::MatrixXd::Random(25, 2);
        double prev_norm = std::numeric_limits<double>::infinity();
        double prev_mse = -1.0;
        for (double lambda : {1e-4, 1e-2, 1.0, 1e2, 1e4}) {
            const auto sol = solve_ridge(h, t, lambda);
            const double norm = sol.output_weights.norm();
            const double mse = (h * sol.output_weights - t).squaredNorm();
            REQUIRE(norm <= prev_norm + 1e-12);
            REQUIRE(mse >= prev_mse - 1e-12);
            prev_norm = norm;
            prev_mse = mse;
        }
    }
    SECTION("non-finite input rejected") {
        Eigen::MatrixXd h = Eigen::MatrixXd::Random(5, 2);
        Eigen::MatrixXd t = Eigen::MatrixXd::Random(5, 2);
        h(1, 1) = std::numeric_limits<double>::quiet_NaN();
        REQUIRE_THROWS_AS(solve_ridge(h, t, 1.0), ValidationError);
        REQUIRE_THROWS_AS(solve_ridge(t, t, 0.0), ValidationError);
    }
}

TEST_CASE("predict") {
    SECTION("ties go to the lowest class") {
        Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(3, 4);
        REQUIRE(predict_scores(scores) == std::vector<int>{0, 0, 0});
    }
    SECTION("separable blobs reach 95 percent train accuracy") {
        SynthSpec spec;
        spec.n_classes = 3;
        spec.per_class = 80;
        spec.dim = 6;
        spec.n_noise = 2;
        spec.spread = 0.5;
        spec.seed = 31;
        const auto synth = synth_blobs(spec);
        const Eigen::MatrixXd& x = synth.clean.features.values;
        const auto layer = make_hidden_layer(static_cast<int>(x.cols()), 30, 30, 7, &x);
        const auto h = transform(layer, x);
        const auto sol = solve_ridge(h, one_hot_targets(synth.clean.labels, 3), 1e-3);
        const auto predicted = predict(layer, sol, x);
        double hits = 0.0;
        for (std::size_t i = 0; i < predicted.size(); ++i)
            if (predicted[i] == synth.clean.labels[i]) hits += 1.0;
        REQUIRE(hits / static_cast<double>(predicted.size()) >= 0.95);
    }
}

TEST_CASE("standardizer centers real columns and keeps binary columns") {
    Eigen::MatrixXd x(4, 3);
    x << 1.0, 0.0, 10.0,
         3.0, 1.0, 10.0,
         5.0, 1.0, 10.0,
         7.0, 0.0, 10.0;
    const auto s = Standardizer::fit(x);
    const auto z = s.apply(x);
    REQUIRE(std::abs(z.col(0).mean()) < 1e-12);
    REQUIRE((z.col(1) - x.col(1)).cwiseAbs().maxCoeff() == 0.0);  // binary untouched
    REQUIRE(z.col(2).cwiseAbs().maxCoeff() == 0.0);               // constant centered, unit scale
    const auto restored = Standardizer::from_json(s.to_json());
    REQUIRE((restored.apply(x) - z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hidden layer serialization round-trips the transform") {
    Eigen::MatrixXd source = Eigen::MatrixXd::Random(40, 5);
    const auto layer = make_hidden_layer(5, 8, 4, 13, &source);
    const auto restored = HiddenLayer::from_json(layer.to_json());
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 5);
    REQUIRE((transform(layer, x) - transform(restored, x)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("logistic activation knob") {
    Eigen::MatrixXd source = Eigen::MatrixXd::Random(30, 4);
    const auto layer =
        make_hidden_layer(4, 10, 0, 3, &source, false, Activation::Logistic);
    Eigen::MatrixXd x = 5.0 * Eigen::MatrixXd::Random(20, 4);
    const auto h = transform(layer, x);
    REQUIRE(h.minCoeff() > 0.0);
    REQUIRE(h.maxCoeff() < 1.0);
    const auto restored = HiddenLayer::from_json(layer.to_json());
    REQUIRE(restored.activation == Activation::Logistic);
    REQUIRE((transform(restored, x) - h).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE_THROWS_AS(activation_from_string("relu"), ValidationError);
}
