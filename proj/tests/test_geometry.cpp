#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "debinn/ga.hpp"
#include "debinn/geometry.hpp"

using namespace debinn;

namespace {

NetworkSpec small_spec() {
    NetworkSpec spec;
    spec.input_dim = 2;
    spec.hidden_widths = {16, 16};
    spec.output_dim = 2;
    return spec;
}

}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("distance basics") {
    CHECK(distance({0, 0, 0}, {0, 0, 0}) == 0.0);
    CHECK(distance({1, 0, 0}, {0, 0, 0}) == 1.0);
    CHECK(distance({1, 2, 2}, {0, 0, 0}) == 3.0);
    CHECK(distance({1, 2, 2}, {0, 0, 0}) == distance({0, 0, 0}, {1, 2, 2}));
}

TEST_CASE("inverse mapping") {
    CHECK(map_inverse(0.0, 2.0) == 1.0);
    CHECK(map_inverse(2.0, 2.0) == 0.0);
    CHECK(map_inverse(0.5, 2.0) == doctest::Approx(0.75));
    CHECK_THROWS_AS(map_inverse(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(map_inverse(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("gaussian mapping") {
    CHECK(map_gaussian(0.0, 0.5) == 1.0);
    CHECK(map_gaussian(0.7, 0.7) == doctest::Approx(std::exp(-0.5)));
    CHECK(map_gaussian(1.5, 0.5) == doctest::Approx(std::exp(-4.5)));
    CHECK_THROWS_AS(map_gaussian(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("mappings are non-increasing in distance") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double dmax = 0.1 + uni(rng) * 2.0;
        const double sigma = 0.1 + uni(rng);
        double d1 = uni(rng) * dmax, d2 = uni(rng) * dmax;
        if (d1 > d2) std::swap(d1, d2);
        CHECK(map_inverse(d1, dmax) >= map_inverse(d2, dmax));
        CHECK(map_gaussian(d1, sigma) >= map_gaussian(d2, sigma));
    }
}

TEST_CASE("weight matrix from geometry") {
    SUBCASE("coincident 1-to-1 gaussian") {
        std::vector<NeuronGeometry> from(1), to(1);
        from[0].axon = Point3{0.3, 0.3, 0.3};
        to[0].soma = Point3{0.3, 0.3, 0.3};
        auto lw = weight_matrix(from, to, {MappingKind::Gaussian, 0.5});
        CHECK(lw.w.at(0, 0) == 1.0);
        CHECK(lw.degenerate);
    }
    SUBCASE("inverse uses the layer-pair max distance") {
        std::vector<NeuronGeometry> from(2), to(1);
        from[0].axon = Point3{0, 0, 0};
        from[1].axon = Point3{0, 0, 0};
        to[0].soma = Point3{1, 0, 0};
        from[1].axon->x = -1.0;  // distances {1, 2}
        auto lw = weight_matrix(from, to, {MappingKind::Inverse, 0.5});
        CHECK(lw.dmax == doctest::Approx(2.0));
        CHECK(lw.w.at(0, 0) == doctest::Approx(0.5));
        CHECK(lw.w.at(0, 1) == doctest::Approx(0.0));
        CHECK_FALSE(lw.degenerate);
    }
    SUBCASE("singularity geometry flags the degenerate path") {
        auto g = init_geometry(small_spec(), InitScheme::Singularity, 0);
        auto lw = weight_matrix(g.layers[0], g.layers[1], {MappingKind::Inverse, 0.5});
        CHECK(lw.degenerate);
        CHECK(lw.dmax == kDistEpsilon);
        for (double w : lw.w.data) CHECK(w == 1.0);  // 1 - 0/dmax
    }
    SUBCASE("permuting from-neurons permutes columns identically") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::vector<NeuronGeometry> from(5), to(3);
        for (auto& n : from) n.axon = Point3{uni(rng), uni(rng), uni(rng)};
        for (auto& n : to) n.soma = Point3{uni(rng), uni(rng), uni(rng)};
        auto base = weight_matrix(from, to, {MappingKind::Inverse, 0.5});
        std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
        std::vector<NeuronGeometry> shuffled(5);
        for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = from[perm[i]];
        auto permuted = weight_matrix(shuffled, to, {MappingKind::Inverse, 0.5});
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t i = 0; i < 5; ++i)
                CHECK(permuted.w.at(j, i) == base.w.at(j, perm[i]));
    }
}

TEST_CASE("initialization schemes") {
    auto spec = small_spec();
    SUBCASE("singularity collapses all points") {
        auto g = init_geometry(spec, InitScheme::Singularity, 42);
        for (const auto& layer : g.layers)
            for (const auto& n : layer) {
                if (n.soma) CHECK(distance(*n.soma, {0.5, 0.5, 0.5}) == 0.0);
                if (n.axon) CHECK(distance(*n.axon, {0.5, 0.5, 0.5}) == 0.0);
            }
    }
    SUBCASE("random init is deterministic per seed") {
        auto a = init_geometry(spec, InitScheme::Random, 123);
        auto b = init_geometry(spec, InitScheme::Random, 123);
        CHECK(encode(a) == encode(b));
        auto c = init_geometry(spec, InitScheme::Random, 124);
        CHECK(encode(a) != encode(c));
    }
    SUBCASE("random init stays in the unit cube") {
        auto g = init_geometry(spec, InitScheme::Random, 5);
        const auto genes = encode(g);
        const std::size_t spatial = parameter_count(spec);
        for (std::size_t i = 0; i < spatial; ++i) {
            CHECK(genes[i] >= 0.0);
            CHECK(genes[i] <= 1.0);
        }
    }
    SUBCASE("onion puts layer-1 somas on the 1/3 shell") {
        auto g = init_geometry(spec, InitScheme::Onion, 0);
        for (const auto& n : g.layers[1])
            CHECK(distance(*n.soma, {0.5, 0.5, 0.5}) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
        // 2 hidden layers -> 6 shells; output somas on the outermost.
        for (const auto& n : g.layers[3])
            CHECK(distance(*n.soma, {0.5, 0.5, 0.5}) == doctest::Approx(1.0));
    }
}

TEST_CASE("parameter counting") {
    CHECK(parameter_count(small_spec()) == 204);
    NetworkSpec tiny;
    tiny.input_dim = 2;
    tiny.hidden_widths = {1};
    tiny.output_dim = 2;
    CHECK(parameter_count(tiny) == 18);

    NetworkSpec bad = tiny;
    bad.hidden_widths = {};
    CHECK_THROWS_AS(parameter_count(bad), std::invalid_argument);

    // Linear growth: doubling all widths scales the count by exactly 2.
    NetworkSpec doubled = small_spec();
    doubled.input_dim *= 2;
    doubled.output_dim *= 2;
    for (auto& w : doubled.hidden_widths) w *= 2;
    CHECK(parameter_count(doubled) == 2 * parameter_count(small_spec()));
}

TEST_CASE("spec validation") {
    auto spec = small_spec();
    spec.group_size = 3;  // does not divide 16
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.group_size = 2;
    CHECK_NOTHROW(spec.validate());
    spec.group_size = 0;
    spec.hidden_widths = {4, 4, 4, 4};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.hidden_widths = {4};
    spec.mapping.sigma = 0.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("geometry csv round-trip is bitwise") {
    auto spec = small_spec();
    auto g = init_geometry(spec, InitScheme::Random, 321);
    g.gamma[1][3] = 1.25;
    g.beta[2][7] = -0.625;
    auto text = geometry_to_csv(g);
    auto back = geometry_from_csv(text, spec);
    CHECK(encode(back) == encode(g));
}

TEST_SUITE_END();
