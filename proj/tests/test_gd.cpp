#include <doctest.h>

#include <cmath>
#include <random>

#include "debinn/ga.hpp"
#include "debinn/gd.hpp"

using namespace debinn;

namespace {

NetworkSpec gd_spec(bool groupnorm) {
    NetworkSpec spec;
    spec.input_dim = 2;
    spec.hidden_widths = {4};
    spec.output_dim = 2;
    spec.groupnorm = groupnorm;
    spec.init = InitScheme::Random;
    return spec;
}

Dataset small_batch(std::size_t n, std::uint64_t seed, int classes = 2) {
    Dataset d;
    d.rows = n;
    d.cols = 2;
    d.classes = classes;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.5, 1.5);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = uni(rng), b = uni(rng);
        d.x.push_back(a);
        d.x.push_back(b);
        d.y.push_back(static_cast<int>((a > 0) + (classes == 3 && b > 0)));
    }
    return d;
}

// The displayed two-term form of the diagonal derivative, written out
// independently of the library implementation.
double diag_reference(const std::vector<double>& a, std::size_t i, std::size_t m, double eps) {
    const std::size_t base = (i / m) * m;
    const double md = static_cast<double>(m);
    double mu = 0.0;
    for (std::size_t j = 0; j < m; ++j) mu += a[base + j];
    mu /= md;
    double var = 0.0;
    for (std::size_t j = 0; j < m; ++j) var += (a[base + j] - mu) * (a[base + j] - mu);
    var /= md;
    double inner = (2.0 / md) * (1.0 - 1.0 / md) * (a[i] - mu);
    for (std::size_t j = base; j < base + m; ++j)
        if (j != i) inner -= (2.0 / md) * (1.0 / md) * (a[j] - mu);
    const double s = std::sqrt(var + eps);
    return ((1.0 - 1.0 / md) * s - (a[i] - mu) * inner / (2.0 * s)) / (var + eps);
}

}  // namespace

TEST_SUITE_BEGIN("gd");

TEST_CASE("output error") {
    const auto beta = uniform_class_weights(2);
    SUBCASE("perfect prediction gives zero error") {
        auto e = output_error(std::vector<double>{1.0, 0.0}, 0, beta, 1.0);
        CHECK(e[0] == 0.0);
        CHECK(e[1] == 0.0);
    }
    SUBCASE("softmax cross-entropy gradient shape") {
        ClassWeights b{{2.0, 1.0}};
        auto e = output_error(std::vector<double>{0.7, 0.3}, 0, b, 0.5);
        CHECK(e[0] == doctest::Approx(2.0 * (0.7 - 1.0) * 0.5));
        CHECK(e[1] == doctest::Approx(2.0 * 0.3 * 0.5));
    }
}

TEST_CASE("groupnorm backward diagonal") {
    SUBCASE("m = 1 yields exactly zero") {
        std::vector<double> a{0.7};
        auto r = groupnorm_forward(a, 1, 1e-5);
        auto diag = groupnorm_backward_diag(a, r.mean, r.var, 1e-5, 1);
        CHECK(diag[0] == 0.0);
    }
    SUBCASE("at the group mean the variance term vanishes") {
        std::vector<double> a{0.5, 0.1, 0.9, 0.5};  // a[0] and a[3] sit at the mean
        auto r = groupnorm_forward(a, 4, 1e-5);
        auto diag = groupnorm_backward_diag(a, r.mean, r.var, 1e-5, 4);
        const double expected = (1.0 - 0.25) / std::sqrt(r.var[0] + 1e-5);
        CHECK(diag[0] == doctest::Approx(expected).epsilon(1e-12));
        CHECK(diag[3] == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("matches the written-out two-term form") {
        std::mt19937_64 rng(2);
        std::normal_distribution<double> noise(0.0, 1.0);
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t m = 1 + static_cast<std::size_t>(trial % 8);
            std::vector<double> a(2 * m);
            for (auto& v : a) v = noise(rng);
            auto r = groupnorm_forward(a, m, kNormEpsilon);
            auto diag = groupnorm_backward_diag(a, r.mean, r.var, kNormEpsilon, m);
            for (std::size_t i = 0; i < a.size(); ++i)
                CHECK(diag[i] == doctest::Approx(diag_reference(a, i, m, kNormEpsilon))
                                     .epsilon(1e-12));
        }
    }
    SUBCASE("matches perturb-one-activation finite differences") {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> noise(0.0, 1.0);
        std::uniform_real_distribution<double> eps_pick(1e-6, 1e-3);
        const double h = 1e-6;
        for (int trial = 0; trial < 500; ++trial) {
            const std::size_t m = 2 + static_cast<std::size_t>(trial % 7);
            const double eps = eps_pick(rng);
            std::vector<double> a(m);
            for (auto& v : a) v = noise(rng);
            auto r = groupnorm_forward(a, m, eps);
            auto diag = groupnorm_backward_diag(a, r.mean, r.var, eps, m);
            const std::size_t i = static_cast<std::size_t>(trial) % m;
            auto up = a, down = a;
            up[i] += h;
            down[i] -= h;
            const double fd = (groupnorm_forward(up, m, eps).normalized[i] -
                               groupnorm_forward(down, m, eps).normalized[i]) /
                              (2.0 * h);
            CHECK(diag[i] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("backward batch identities") {
    auto spec = gd_spec(true);
    auto batch = small_batch(16, 4);
    const auto beta = class_weights_from_counts(class_counts(batch));
    auto g = init_geometry(spec, InitScheme::Random, 5);
    auto linears = network_linears(g);
    auto bg = backward_batch(g, linears, batch, {}, beta, false);

    SUBCASE("output-layer dbeta equals the summed error term") {
        const auto& out = bg.layers.back();
        REQUIRE(out.dbeta.size() == bg.output_error_sum.size());
        for (std::size_t c = 0; c < out.dbeta.size(); ++c)
            CHECK(out.dbeta[c] == bg.output_error_sum[c]);
    }
    SUBCASE("zero gamma on a layer severs all upstream gradients") {
        auto cut = g;
        cut.gamma[1].assign(cut.gamma[1].size(), 0.0);
        cut.beta[1] = {0.4, -0.2, 0.1, 0.7};  // keep the layer's output nonzero
        auto lin2 = network_linears(cut);
        auto bg2 = backward_batch(cut, lin2, batch, {}, beta, false);
        for (double v : bg2.layers[0].dw.data) CHECK(v == 0.0);
        // The downstream layer still gets gradients through the constant output.
        CHECK(bg2.layers[1].dw.data != std::vector<double>(bg2.layers[1].dw.data.size(), 0.0));
    }
    SUBCASE("near-perfect predictions give vanishing gradients") {
        auto sat = g;
        const std::size_t out = spec.layer_count() - 1;
        sat.gamma[out] = {0.0, 0.0};
        sat.beta[out] = {40.0, -40.0};
        Dataset ones = batch;
        for (auto& y : ones.y) y = 0;
        auto lin3 = network_linears(sat);
        auto bg3 = backward_batch(sat, lin3, ones, {}, uniform_class_weights(2), false);
        for (const auto& lg : bg3.layers) {
            for (double v : lg.dw.data) CHECK(std::abs(v) < 1e-12);
            for (double v : lg.dgamma) CHECK(std::abs(v) < 1e-12);
            for (double v : lg.dbeta) CHECK(std::abs(v) < 1e-12);
        }
    }
}

TEST_CASE("distance gradients") {
    SUBCASE("inverse mapping chain rule") {
        Matrix dw(1, 1), dist(1, 1);
        dw.at(0, 0) = 0.5;
        dist.at(0, 0) = 1.3;
        auto dd = distance_gradients(dw, dist, 2.0, {MappingKind::Inverse, 0.5},
                                     DerivativeMode::Exact);
        CHECK(dd.at(0, 0) == doctest::Approx(-0.25));
    }
    SUBCASE("exact gaussian is stationary at zero distance") {
        Matrix dw(1, 2, 1.0), dist(1, 2);
        dist.at(0, 0) = 0.0;
        dist.at(0, 1) = 0.5;
        auto dd = distance_gradients(dw, dist, 1.0, {MappingKind::Gaussian, 0.5},
                                     DerivativeMode::Exact);
        CHECK(dd.at(0, 0) == 0.0);
        CHECK(dd.at(0, 1) == doctest::Approx(-(0.5 / 0.25) * std::exp(-0.5)));
    }
    SUBCASE("surrogate slope ignores the distance") {
        Matrix dw(1, 2, 0.7), dist(1, 2);
        dist.at(0, 0) = 0.01;
        dist.at(0, 1) = 1.9;
        auto dd = distance_gradients(dw, dist, 2.0, {MappingKind::Gaussian, 0.5},
                                     DerivativeMode::LinearSurrogate);
        CHECK(dd.at(0, 0) == doctest::Approx(-0.35));
        CHECK(dd.at(0, 1) == doctest::Approx(-0.35));
    }
}

TEST_CASE("displacement vectors") {
    NetworkSpec spec;
    spec.input_dim = 2;
    spec.hidden_widths = {1};
    spec.output_dim = 2;
    auto g = init_geometry(spec, InitScheme::Random, 6);

    SUBCASE("zero distance gradients displace nothing") {
        std::vector<Matrix> dd{Matrix(1, 2, 0.0), Matrix(2, 1, 0.0)};
        auto displ = displacement_vectors(g, dd, 0.5);
        for (std::size_t l = 1; l < 3; ++l)
            for (std::size_t j = 0; j < g.layers[l].size(); ++j) {
                const Point3 m = displ.soma_mean(l, j);
                CHECK(m.x == 0.0);
                CHECK(m.y == 0.0);
                CHECK(m.z == 0.0);
            }
    }
    SUBCASE("positive distance gradient pulls the endpoints together") {
        g.layers[0][0].axon = Point3{0.0, 0.5, 0.5};
        g.layers[0][1].axon = Point3{0.0, 0.5, 0.5};
        g.layers[1][0].soma = Point3{1.0, 0.5, 0.5};
        std::vector<Matrix> dd{Matrix(1, 2, 0.0), Matrix(2, 1, 0.0)};
        dd[0].at(0, 0) = 2.0;  // loss rises with this distance
        auto displ = displacement_vectors(g, dd, 0.25);
        const Point3 soma_step = displ.soma_mean(1, 0);
        CHECK(soma_step.x == doctest::Approx(-0.25));  // -lr*dd averaged over 2 connections
        CHECK(soma_step.y == 0.0);
        CHECK(displ.soma_count[1][0] == 2);
        const Point3 axon_step = displ.axon_mean(0, 0);
        CHECK(axon_step.x == doctest::Approx(0.5));  // single incident connection
        CHECK(displ.axon_count[0][0] == 1);
    }
    SUBCASE("equal and opposite pulls cancel") {
        g.layers[0][0].axon = Point3{0.0, 0.5, 0.5};
        g.layers[0][1].axon = Point3{1.0, 0.5, 0.5};
        g.layers[1][0].soma = Point3{0.5, 0.5, 0.5};
        std::vector<Matrix> dd{Matrix(1, 2, 0.0), Matrix(2, 1, 0.0)};
        dd[0].at(0, 0) = 1.5;
        dd[0].at(0, 1) = 1.5;
        auto displ = displacement_vectors(g, dd, 0.1);
        const Point3 m = displ.soma_mean(1, 0);
        CHECK(m.x == doctest::Approx(0.0));
        CHECK(m.y == doctest::Approx(0.0));
    }
    SUBCASE("degenerate connections are counted and skipped") {
        auto sing = init_geometry(spec, InitScheme::Singularity, 0);
        std::vector<Matrix> dd{Matrix(1, 2, 1.0), Matrix(2, 1, 1.0)};
        auto displ = displacement_vectors(sing, dd, 0.1);
        CHECK(displ.degenerate_connections == 4);
        CHECK(displ.soma_mean(1, 0).x == 0.0);
    }
    SUBCASE("averaged step equals the summed gradient over the incident count") {
        auto spec2 = gd_spec(true);
        auto g2 = init_geometry(spec2, InitScheme::Random, 12);
        auto batch = small_batch(8, 9);
        const auto beta = uniform_class_weights(2);
        auto linears = network_linears(g2);
        auto bg = backward_batch(g2, linears, batch, {}, beta, false);
        std::vector<Matrix> dist_grads;
        for (std::size_t k = 0; k < linears.size(); ++k)
            dist_grads.push_back(distance_gradients(bg.layers[k].dw, linears[k].dist,
                                                    linears[k].dmax, spec2.mapping,
                                                    DerivativeMode::Exact));
        const double lr = 0.3;
        auto displ = displacement_vectors(g2, dist_grads, lr);
        // Recompute one soma's summed gradient directly.
        const std::size_t l = 1, j = 2;
        Point3 grad_sum{};
        const Point3 soma = *g2.layers[l][j].soma;
        for (std::size_t i = 0; i < g2.layers[0].size(); ++i) {
            const Point3 axon = *g2.layers[0][i].axon;
            const double d = distance(axon, soma);
            const double s = dist_grads[0].at(j, i) / d;
            grad_sum.x += s * (soma.x - axon.x);
            grad_sum.y += s * (soma.y - axon.y);
            grad_sum.z += s * (soma.z - axon.z);
        }
        const auto count = static_cast<double>(displ.soma_count[l][j]);
        const Point3 m = displ.soma_mean(l, j);
        CHECK(m.x * count == doctest::Approx(-lr * grad_sum.x).epsilon(1e-12));
        CHECK(m.y * count == doctest::Approx(-lr * grad_sum.y).epsilon(1e-12));
        CHECK(m.z * count == doctest::Approx(-lr * grad_sum.z).epsilon(1e-12));
    }
}

TEST_CASE("phase application") {
    auto spec = gd_spec(true);
    auto g = init_geometry(spec, InitScheme::Random, 20);
    std::vector<Matrix> dd{Matrix(4, 2, 0.8), Matrix(2, 4, -0.6)};
    auto displ = displacement_vectors(g, dd, 0.1);

    SUBCASE("even iterations move only somas") {
        auto moved = g;
        apply_phase(moved, displ, 0);
        for (std::size_t l = 0; l < 3; ++l)
            for (std::size_t i = 0; i < g.layers[l].size(); ++i) {
                if (g.layers[l][i].axon)
                    CHECK(distance(*moved.layers[l][i].axon, *g.layers[l][i].axon) == 0.0);
                if (g.layers[l][i].soma)
                    CHECK(distance(*moved.layers[l][i].soma, *g.layers[l][i].soma) > 0.0);
            }
    }
    SUBCASE("odd iterations move only axons") {
        auto moved = g;
        apply_phase(moved, displ, 1);
        for (std::size_t l = 0; l < 3; ++l)
            for (std::size_t i = 0; i < g.layers[l].size(); ++i) {
                if (g.layers[l][i].soma)
                    CHECK(distance(*moved.layers[l][i].soma, *g.layers[l][i].soma) == 0.0);
                if (g.layers[l][i].axon)
                    CHECK(distance(*moved.layers[l][i].axon, *g.layers[l][i].axon) > 0.0);
            }
    }
}

TEST_CASE("finite difference oracle") {
    auto batch = small_batch(12, 31);
    const auto beta = class_weights_from_counts(class_counts(batch));

    SUBCASE("groupnorm off, exact gaussian") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto spec = gd_spec(false);
            auto g = init_geometry(spec, InitScheme::Random, 100 + seed);
            auto r = finite_difference_oracle(g, batch, beta, DerivativeMode::Exact);
            CAPTURE(seed);
            CHECK(r.max_rel_err < 1e-4);
        }
    }
    SUBCASE("groupnorm diagonal convention vs mode-matched oracle") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto spec = gd_spec(true);
            auto g = init_geometry(spec, InitScheme::Random, 200 + seed);
            auto r = finite_difference_oracle(g, batch, beta, DerivativeMode::Exact);
            CAPTURE(seed);
            CHECK(r.max_rel_err < 1e-4);
        }
    }
    SUBCASE("weight standardization chain") {
        auto spec = gd_spec(true);
        spec.weight_standardization = true;
        auto g = init_geometry(spec, InitScheme::Random, 300);
        auto r = finite_difference_oracle(g, batch, beta, DerivativeMode::Exact);
        CHECK(r.max_rel_err < 1e-4);
    }
    SUBCASE("inverse mapping with frozen dmax") {
        auto spec = gd_spec(true);
        spec.mapping.kind = MappingKind::Inverse;
        auto g = init_geometry(spec, InitScheme::Random, 400);
        auto r = finite_difference_oracle(g, batch, beta, DerivativeMode::Exact);
        CHECK(r.max_rel_err < 1e-4);
    }
    SUBCASE("linear surrogate mode") {
        auto spec = gd_spec(true);
        auto g = init_geometry(spec, InitScheme::Random, 500);
        auto r = finite_difference_oracle(g, batch, beta, DerivativeMode::LinearSurrogate);
        CHECK(r.max_rel_err < 1e-4);
    }
    SUBCASE("penalties and other activations") {
        auto spec = gd_spec(true);
        spec.l1 = 0.03;
        spec.l2 = 0.05;
        spec.activation = ActivationKind::Tanh;
        auto g = init_geometry(spec, InitScheme::Random, 600);
        auto r = finite_difference_oracle(g, batch, beta, DerivativeMode::Exact);
        CHECK(r.max_rel_err < 1e-4);
    }
    SUBCASE("three classes, two hidden layers, explicit group size") {
        NetworkSpec spec;
        spec.input_dim = 2;
        spec.hidden_widths = {6, 9};
        spec.output_dim = 3;
        spec.groupnorm = true;
        spec.group_size = 3;
        auto batch3 = small_batch(12, 77, 3);
        auto g = init_geometry(spec, InitScheme::Random, 700);
        auto r = finite_difference_oracle(g, batch3, class_weights_from_counts(class_counts(batch3)),
                                          DerivativeMode::Exact);
        CHECK(r.max_rel_err < 1e-4);
    }
    SUBCASE("zero-gradient point has tiny absolute error") {
        auto spec = gd_spec(true);
        auto g = init_geometry(spec, InitScheme::Random, 800);
        const std::size_t out = spec.layer_count() - 1;
        g.gamma[out] = {0.0, 0.0};
        g.beta[out] = {40.0, -40.0};
        Dataset ones = batch;
        for (auto& y : ones.y) y = 0;
        auto r = finite_difference_oracle(g, ones, uniform_class_weights(2),
                                          DerivativeMode::Exact);
        CHECK(r.max_abs_err < 1e-8);
    }
}

TEST_CASE("train_gd") {
    auto spec = gd_spec(true);
    auto train = small_batch(32, 41);
    auto test = small_batch(16, 42);
    const auto beta = uniform_class_weights(2);
    GDConfig cfg;
    cfg.lr = 0.05;
    cfg.epochs = 6;
    cfg.seed = 3;

    SUBCASE("singularity init rejected") {
        auto bad = spec;
        bad.init = InitScheme::Singularity;
        CHECK_THROWS_AS(train_gd(bad, train, test, cfg, beta), std::invalid_argument);
    }
    SUBCASE("zero learning rate leaves the geometry untouched") {
        GDConfig frozen = cfg;
        frozen.lr = 0.0;
        auto res = train_gd(spec, train, test, frozen, beta);
        CHECK(encode(res.geometry) == encode(init_geometry(spec, frozen.seed)));
    }
    SUBCASE("alternation: somas move on even steps, axons on odd") {
        NetworkGeometry prev = init_geometry(spec, cfg.seed);
        std::size_t hooks = 0;
        auto res = train_gd(spec, train, test, cfg, beta,
                            [&](std::size_t t, const NetworkGeometry& cur) {
                                ++hooks;
                                for (std::size_t l = 0; l < cur.layers.size(); ++l)
                                    for (std::size_t i = 0; i < cur.layers[l].size(); ++i) {
                                        const auto& a = prev.layers[l][i];
                                        const auto& b = cur.layers[l][i];
                                        if (t % 2 == 0 && a.axon) {
                                            CHECK(a.axon->x == b.axon->x);
                                            CHECK(a.axon->y == b.axon->y);
                                            CHECK(a.axon->z == b.axon->z);
                                        }
                                        if (t % 2 == 1 && a.soma) {
                                            CHECK(a.soma->x == b.soma->x);
                                            CHECK(a.soma->y == b.soma->y);
                                            CHECK(a.soma->z == b.soma->z);
                                        }
                                    }
                                prev = cur;
                            });
        CHECK(hooks == cfg.epochs);  // one backward pass per iteration
        CHECK(res.status == GDStatus::Ok);
    }
    SUBCASE("loss decreases on an easy separable problem") {
        Dataset easy;
        easy.rows = 2;
        easy.cols = 2;
        easy.classes = 2;
        easy.x = {1.0, 1.0, -1.0, -1.0};
        easy.y = {0, 1};
        GDConfig slow = cfg;
        slow.lr = 0.02;
        slow.epochs = 10;
        auto res = train_gd(spec, easy, easy, slow, beta);
        REQUIRE(res.history.size() == 10);
        for (std::size_t i = 1; i < res.history.size(); ++i)
            CHECK(res.history[i].train_loss < res.history[i - 1].train_loss);
    }
    SUBCASE("identical seeds give identical curves") {
        auto a = train_gd(spec, train, test, cfg, beta);
        auto b = train_gd(spec, train, test, cfg, beta);
        REQUIRE(a.history.size() == b.history.size());
        for (std::size_t i = 0; i < a.history.size(); ++i) {
            CHECK(a.history[i].train_loss == b.history[i].train_loss);
            CHECK(a.history[i].test_bacc == b.history[i].test_bacc);
        }
        CHECK(encode(a.geometry) == encode(b.geometry));
    }
    SUBCASE("mini-batch mode runs and stays deterministic") {
        GDConfig mb = cfg;
        mb.batch_size = 8;
        auto a = train_gd(spec, train, test, mb, beta);
        auto b = train_gd(spec, train, test, mb, beta);
        CHECK(a.history.size() == cfg.epochs);
        CHECK(encode(a.geometry) == encode(b.geometry));
    }
    SUBCASE("loss beyond the divergence threshold aborts the run") {
        // The probability floor bounds the data loss, so drive the total
        // objective over the threshold through the penalty term.
        auto wild = spec;
        wild.l2 = 1e7;
        auto res = train_gd(wild, train, test, cfg, beta);
        CHECK(res.status == GDStatus::Diverged);
        CHECK(res.history.empty());
        CHECK(res.final_loss > 1e6);
    }
    SUBCASE("non-finite loss aborts the run") {
        // A colossal step overflows the squared distances to inf, and the
        // inverse mapping turns inf/inf into NaN on the next forward pass.
        auto inv = spec;
        inv.mapping.kind = MappingKind::Inverse;
        GDConfig hot = cfg;
        hot.lr = 1e200;
        hot.epochs = 10;
        auto res = train_gd(inv, train, test, hot, beta);
        CHECK(res.status == GDStatus::Diverged);
        CHECK(res.history.size() < hot.epochs);
        CHECK_FALSE(std::isfinite(res.final_loss));
    }
}

TEST_SUITE_END();
