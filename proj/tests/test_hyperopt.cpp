#include "doctest.h"

#include "lrmf/hyperopt.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace lrmf;

namespace {

SnapshotEnsemble ensemble_of(const Matrix& cols) {
    SnapshotEnsemble e;
    e.outputs = cols;
    return e;
}

PsoConfig quick_pso(std::uint64_t seed) {
    PsoConfig p;
    p.seed = seed;
    return p;
}

}  // namespace

TEST_CASE("objective on a one-sample ensemble") {
    const auto lf = ensemble_of(Matrix::Constant(1, 1, 2.0));
    const auto cfg = make_objective_config(KernelFamily::SquaredExponential, lf, 0.1);
    CHECK(cfg.reference_gramian(0, 0) == 4.0);
    for (double h : {0.01, 1.0, 50.0}) {
        const double v = objective(cfg, std::vector<double>{h}, lf);
        CHECK(v == doctest::Approx(3.1).epsilon(1e-14));
    }
}

TEST_CASE("lambda = 0 leaves only the Frobenius distance") {
    std::mt19937_64 rng(2);
    const Matrix cols = oracle::random_matrix(rng, 2, 6);
    const auto lf = ensemble_of(cols);
    const auto cfg = make_objective_config(KernelFamily::Matern32, lf, 0.0);
    const std::vector<double> h{0.4};
    const Matrix diff = oracle::gramian(KernelFamily::Linear, {}, cols) - oracle::gramian(KernelFamily::Matern32, h, cols);
    CHECK(objective(cfg, h, lf) == doctest::Approx(diff.norm()).epsilon(1e-13));

    const auto lin = make_objective_config(KernelFamily::Linear, lf, 0.0);
    CHECK(objective(lin, {}, lf) == 0.0);
}

TEST_CASE("objective matches a dense-SVD recomputation") {
    std::mt19937_64 rng(9);
    const Matrix cols = oracle::random_matrix(rng, 3, 5);
    const auto lf = ensemble_of(cols);
    const auto cfg = make_objective_config(KernelFamily::Exponential, lf, 0.1);
    const double got = objective(cfg, std::vector<double>{1.0}, lf);
    CHECK(got == doctest::Approx(oracle::objective(cols, KernelFamily::Exponential, {1.0}, 0.1)).epsilon(1e-10));
}

TEST_CASE("property: objective is non-negative") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> lh(-3, 2);
    for (auto f : kAllFamilies) {
        for (int trial = 0; trial < 10; ++trial) {
            const Matrix cols = oracle::random_matrix(rng, 2, 7);
            const auto lf = ensemble_of(cols);
            const auto cfg = make_objective_config(f, lf, 0.1);
            std::vector<double> h;
            for (std::size_t i = 0; i < hyperparameter_count(f); ++i) h.push_back(std::pow(10.0, lh(rng)));
            CHECK(objective(cfg, h, lf) >= 0.0);
        }
    }
}

TEST_CASE("degenerate Gramians score +infinity") {
    const Matrix zero = Matrix::Zero(3, 3);
    CHECK(std::isinf(gramian_objective(Matrix::Identity(3, 3), zero, 0.1)));
    CHECK(gramian_objective(Matrix::Identity(3, 3), zero, 0.0) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("config validation") {
    ObjectiveConfig cfg;
    cfg.family = KernelFamily::SquaredExponential;
    cfg.reference_gramian = Matrix::Identity(2, 2);
    cfg.bounds = {{1.0, 0.5}};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.bounds = {{0.0, 1.0}};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.bounds = {{0.1, 1.0}};
    cfg.lambda = NAN;
    CHECK_THROWS_AS(cfg.validate(), Error);

    PsoConfig p;
    p.swarm_size = 1;
    CHECK_THROWS_AS(p.validate(), Error);
    p = PsoConfig{};
    p.k1 = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = PsoConfig{};
    p.max_iters = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = PsoConfig{};
    p.v_max_fraction = 1.5;
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("pso finds the minimum of a 1-D parabola") {
    PsoConfig p = quick_pso(1);
    p.swarm_size = 20;
    p.max_iters = 200;
    const ObjectiveFn f = [](std::span<const double> h) { return (h[0] - 3) * (h[0] - 3); };
    const auto r = pso_minimize(f, p, {{0.0, 10.0}});
    CHECK(std::abs(r.best[0] - 3.0) <= 1e-2);
    CHECK(r.value == f(r.best));
}

TEST_CASE("pso on a constant function stops after the stall window") {
    PsoConfig p = quick_pso(4);
    const ObjectiveFn f = [](std::span<const double>) { return 2.5; };
    const auto r = pso_minimize(f, p, {{-1.0, 1.0}, {0.0, 2.0}});
    CHECK(r.value == 2.5);
    CHECK(static_cast<int>(r.trace.size()) == p.stall_iters + 1);
}

TEST_CASE("pso on Rosenbrock beats an equal-budget random search") {
    PsoConfig p = quick_pso(77);
    p.max_iters = 400;
    p.stall_iters = 400;
    const ObjectiveFn rosen = [](std::span<const double> x) {
        return 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1 - x[0]) * (1 - x[0]);
    };
    const auto r = pso_minimize(rosen, p, {{-2, 2}, {-2, 2}});

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-2, 2);
    double best = INFINITY;
    for (int i = 0; i < 10000; ++i) {
        const double x[2] = {u(rng), u(rng)};
        best = std::min(best, rosen(x));
    }
    CHECK(r.value <= best);
}

TEST_CASE("property: pso stays in the box and its trace never increases") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        PsoConfig p = quick_pso(seed);
        p.swarm_size = 8;
        p.max_iters = 40;
        std::vector<std::vector<double>> visited;
        const ObjectiveFn f = [&](std::span<const double> x) {
            visited.emplace_back(x.begin(), x.end());
            return std::sin(5 * x[0]) + x[1] * x[1];
        };
        const std::vector<Bounds> box{{-1, 2}, {0.5, 3}};
        const auto r = pso_minimize(f, p, box);
        for (const auto& x : visited) {
            CHECK(x[0] >= -1);
            CHECK(x[0] <= 2);
            CHECK(x[1] >= 0.5);
            CHECK(x[1] <= 3);
        }
        for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
        CHECK(r.evaluations == static_cast<int>(visited.size()));
    }
}

TEST_CASE("pso is deterministic and independent of the thread count") {
    const ObjectiveFn f = [](std::span<const double> x) { return std::cos(3 * x[0]) * x[1] + x[1] * x[1]; };
    PsoConfig p = quick_pso(99);
    const auto a = pso_minimize(f, p, {{-2, 2}, {-2, 2}});
    const auto b = pso_minimize(f, p, {{-2, 2}, {-2, 2}});
    p.threads = 4;
    const auto c = pso_minimize(f, p, {{-2, 2}, {-2, 2}});
    CHECK(a.best == b.best);
    CHECK(a.best == c.best);
    CHECK(a.trace == c.trace);
}

TEST_CASE("refine_local examples") {
    const ObjectiveFn parabola = [](std::span<const double> h) { return (h[0] - 3) * (h[0] - 3); };
    const auto r = refine_local(parabola, {2.9}, {{0.0, 10.0}});
    CHECK(std::abs(r.x[0] - 3.0) <= 1e-6);

    const auto s = refine_local(parabola, {3.0}, {{0.0, 10.0}});
    CHECK(s.x[0] == 3.0);
    CHECK(s.value == 0.0);

    const ObjectiveFn kink = [](std::span<const double> h) { return std::abs(h[0] - 1) + 0.1 * h[0] * h[0]; };
    const auto k = refine_local(kink, {0.5}, {{-5.0, 5.0}});
    CHECK(k.value <= kink(std::vector<double>{0.5}));
    double grid_best = INFINITY;
    for (int i = 0; i <= 1000000; ++i) {
        const double x = -5.0 + 10.0 * i / 1e6;
        grid_best = std::min(grid_best, std::abs(x - 1) + 0.1 * x * x);
    }
    CHECK(std::abs(k.value - grid_best) <= 1e-3);
}

TEST_CASE("property: refine_local never returns a worse point") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-2, 2);
    const ObjectiveFn f = [](std::span<const double> x) {
        return std::sin(3 * x[0]) + std::abs(x[1]) + 0.2 * x[0] * x[1];
    };
    for (int trial = 0; trial < 40; ++trial) {
        const std::vector<double> h0{u(rng), u(rng)};
        const auto r = refine_local(f, h0, {{-2, 2}, {-2, 2}});
        CHECK(r.value <= f(h0));
        CHECK(r.value == f(r.x));
    }
}

TEST_CASE("optimize_hyperparams skips the linear family") {
    std::mt19937_64 rng(5);
    const auto lf = ensemble_of(oracle::random_matrix(rng, 2, 6));
    const auto cfg = make_objective_config(KernelFamily::Linear, lf, 0.1);
    const auto r = optimize_hyperparams(KernelFamily::Linear, lf, cfg, quick_pso(1));
    CHECK(r.spec.family == KernelFamily::Linear);
    CHECK(r.spec.h.empty());
    CHECK(r.evaluations == 0);
    const Matrix g1 = oracle::gramian(KernelFamily::Linear, {}, lf.outputs);
    Eigen::JacobiSVD<Matrix> svd(g1);
    const double srank = g1.squaredNorm() / (svd.singularValues()(0) * svd.singularValues()(0));
    CHECK(r.objective_value == doctest::Approx(0.1 / std::sqrt(srank)).epsilon(1e-9));
}

TEST_CASE("optimize_hyperparams matches a log-grid scan on well-separated columns") {
    std::mt19937_64 rng(21);
    Matrix cols = oracle::random_matrix(rng, 2, 10, -1, 1);
    for (Index j = 0; j < cols.cols(); ++j) cols.col(j) += Vector::Constant(2, 4.0 * j);
    const auto lf = ensemble_of(cols);
    const auto cfg = make_objective_config(KernelFamily::SquaredExponential, lf, 0.1);
    const auto r = optimize_hyperparams(KernelFamily::SquaredExponential, lf, cfg, quick_pso(3));

    const double lo = std::log(cfg.bounds[0].lo), hi = std::log(cfg.bounds[0].hi);
    double grid_best = INFINITY;
    for (int i = 0; i < 100; ++i) {
        const double h = std::exp(lo + (hi - lo) * i / 99.0);
        grid_best = std::min(grid_best, oracle::objective(cols, KernelFamily::SquaredExponential, {h}, 0.1));
    }
    CHECK(r.objective_value <= 1.1 * grid_best);
    CHECK(r.objective_value == doctest::Approx(objective(cfg, r.spec.h, lf)).epsilon(1e-10));
    CHECK(r.evaluations > 0);

    const auto again = optimize_hyperparams(KernelFamily::SquaredExponential, lf, cfg, quick_pso(3));
    CHECK(again.spec.h == r.spec.h);
}

TEST_CASE("default bounds scale with the median pairwise distance") {
    Matrix cols(1, 3);
    cols << 0, 2, 6;
    const auto lf = ensemble_of(cols);
    CHECK(median_pairwise_distance(cols) == 4.0);
    const auto b = default_bounds(KernelFamily::RationalQuadratic, lf);
    REQUIRE(b.size() == 2);
    CHECK(b[0].lo == doctest::Approx(4e-3));
    CHECK(b[0].hi == doctest::Approx(4e3));
    CHECK(b[1].lo == doctest::Approx(1e-2));
    CHECK(b[1].hi == doctest::Approx(1e2));
    CHECK(default_bounds(KernelFamily::Exponential, ensemble_of(Matrix::Zero(1, 3)))[0].lo == doctest::Approx(1e-3));
}
