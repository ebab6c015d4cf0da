#include <doctest.h>

#include <cmath>
#include <random>

#include "debinn/loss.hpp"

using namespace debinn;

TEST_SUITE_BEGIN("loss");

TEST_CASE("weighted cross-entropy") {
    const auto beta1 = uniform_class_weights(2);
    SUBCASE("perfect prediction costs nothing") {
        std::vector<double> probs{1.0, 0.0};
        std::vector<int> labels{0};
        CHECK(weighted_cross_entropy(probs, 2, labels, beta1) == doctest::Approx(0.0));
    }
    SUBCASE("uniform prediction costs ln M") {
        std::vector<double> probs{0.5, 0.5};
        std::vector<int> labels{1};
        CHECK(weighted_cross_entropy(probs, 2, labels, beta1) ==
              doctest::Approx(std::log(2.0)));
        const auto beta3 = uniform_class_weights(3);
        std::vector<double> p3{1.0 / 3, 1.0 / 3, 1.0 / 3};
        std::vector<int> l3{2};
        CHECK(weighted_cross_entropy(p3, 3, l3, beta3) == doctest::Approx(std::log(3.0)));
    }
    SUBCASE("class weights scale the per-sample terms") {
        ClassWeights beta{{2.0, 1.0}};
        std::vector<double> probs{0.5, 0.5, 0.5, 0.5};
        std::vector<int> labels{0, 1};
        CHECK(weighted_cross_entropy(probs, 2, labels, beta) ==
              doctest::Approx(1.5 * std::log(2.0)));
    }
    SUBCASE("empty batch rejected") {
        std::vector<double> none;
        std::vector<int> labels;
        CHECK_THROWS_AS(weighted_cross_entropy(none, 2, labels, beta1), std::invalid_argument);
    }
    SUBCASE("scaling all weights scales the loss (linearity)") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> uni(0.05, 0.95);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> probs;
            std::vector<int> labels;
            for (int k = 0; k < 8; ++k) {
                const double p = uni(rng);
                probs.push_back(p);
                probs.push_back(1.0 - p);
                labels.push_back(k % 2);
            }
            ClassWeights beta{{0.7, 1.9}};
            ClassWeights scaled{{0.7 * 3.5, 1.9 * 3.5}};
            const double base = weighted_cross_entropy(probs, 2, labels, beta);
            CHECK(weighted_cross_entropy(probs, 2, labels, scaled) ==
                  doctest::Approx(3.5 * base));
            CHECK(base >= 0.0);
        }
    }
    SUBCASE("unit weights match a straightforward mean cross-entropy") {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> uni(0.05, 0.95);
        std::vector<double> probs;
        std::vector<int> labels;
        double expected = 0.0;
        const int n = 40;
        for (int k = 0; k < n; ++k) {
            const double p = uni(rng);
            probs.push_back(p);
            probs.push_back(1.0 - p);
            const int y = k % 2;
            labels.push_back(y);
            expected += -std::log(y == 0 ? p : 1.0 - p);
        }
        expected /= n;
        CHECK(weighted_cross_entropy(probs, 2, labels, uniform_class_weights(2)) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("class weights from counts") {
    SUBCASE("balanced counts give unit weights") {
        std::vector<long long> counts{100, 100};
        auto beta = class_weights_from_counts(counts);
        CHECK(beta[0] == doctest::Approx(1.0));
        CHECK(beta[1] == doctest::Approx(1.0));
    }
    SUBCASE("fetal training split") {
        std::vector<long long> counts{1315, 245, 140};
        auto beta = class_weights_from_counts(counts);
        CHECK(beta[0] == doctest::Approx(0.431).epsilon(1e-3));
        CHECK(beta[1] == doctest::Approx(2.313).epsilon(1e-3));
        CHECK(beta[2] == doctest::Approx(4.048).epsilon(1e-3));
    }
    SUBCASE("hecktor training split") {
        std::vector<long long> counts{99, 59};
        auto beta = class_weights_from_counts(counts);
        CHECK(beta[0] == doctest::Approx(0.798).epsilon(1e-3));
        CHECK(beta[1] == doctest::Approx(1.339).epsilon(1e-3));
    }
    SUBCASE("zero count rejected") {
        std::vector<long long> counts{10, 0};
        CHECK_THROWS_AS(class_weights_from_counts(counts), std::invalid_argument);
    }
}

TEST_CASE("l1/l2 penalty") {
    NetworkSpec spec;
    spec.input_dim = 2;
    spec.hidden_widths = {3};
    spec.output_dim = 2;

    SUBCASE("zero coefficients cost nothing") {
        auto g = init_geometry(spec, InitScheme::Random, 2);
        CHECK(l1_l2_penalty(g, 0.0, 0.0) == 0.0);
    }
    SUBCASE("single-weight arithmetic") {
        std::vector<LayerLinear> lin(1);
        lin[0].w_raw = Matrix(1, 1);
        lin[0].w_raw.at(0, 0) = 0.5;
        CHECK(l1_l2_penalty(lin, 0.05, 0.05) == doctest::Approx(0.0375));
    }
    SUBCASE("singularity + gaussian has all-ones weights") {
        auto g = init_geometry(spec, InitScheme::Singularity, 0);
        const std::size_t edges = 2 * 3 + 3 * 2;
        CHECK(l1_l2_penalty(g, 0.0, 0.01) == doctest::Approx(0.01 * edges));
    }
}

TEST_SUITE_END();
