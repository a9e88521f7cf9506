#include "doctest.h"

#include "lrmf/selection.hpp"
#include "oracles.hpp"

#include <numeric>
#include <random>
#include <type_traits>

using namespace lrmf;

namespace {

SnapshotEnsemble ensemble_of(const Matrix& cols) {
    SnapshotEnsemble e;
    e.outputs = cols;
    return e;
}

OptimizedKernel fixed(KernelFamily f, std::vector<double> h) {
    OptimizedKernel k;
    k.spec = KernelSpec{f, std::move(h), {}};
    return k;
}

std::vector<Matrix> component_gramians(const std::vector<OptimizedKernel>& lib, const Matrix& cols) {
    std::vector<Matrix> out;
    for (const auto& k : lib) out.push_back(oracle::gramian(k.spec.family, k.spec.h, cols));
    return out;
}

Vector weights_of(const AdditiveSelection& a) { return Eigen::Map<const Vector>(a.report.weights.data(), a.report.weights.size()); }

}  // namespace

static_assert(std::is_same_v<decltype(&additive_select),
                             AdditiveSelection (*)(const std::vector<OptimizedKernel>&, const SnapshotEnsemble&, double,
                                                   const PsoConfig&)>,
              "additive selection sees a single (low-fidelity) ensemble");
static_assert(std::is_same_v<decltype(&adaptive_select),
                             SelectionReport (*)(const std::vector<OptimizedKernel>&, const SnapshotEnsemble&, Index,
                                                 const AdaptiveOptions&)>,
              "adaptive selection sees a single (low-fidelity) ensemble");

TEST_CASE("project_to_simplex") {
    const Vector p = project_to_simplex((Vector(3) << 0.2, 0.2, 0.2).finished());
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(p.isApprox(Vector::Constant(3, 1.0 / 3.0)));
    const Vector q = project_to_simplex((Vector(3) << 5, -1, 0).finished());
    CHECK(q == (Vector(3) << 1, 0, 0).finished());
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        const Vector v = oracle::random_matrix(rng, 5, 1, -3, 3).col(0);
        const Vector w = project_to_simplex(v);
        CHECK(std::abs(w.sum() - 1.0) <= 1e-12);
        CHECK(w.minCoeff() >= 0.0);
    }
}

TEST_CASE("additive selection with a single family") {
    std::mt19937_64 rng(2);
    const auto lf = ensemble_of(oracle::random_matrix(rng, 2, 8));
    const auto a = additive_select({fixed(KernelFamily::SquaredExponential, {0.5})}, lf, 0.1, PsoConfig{});
    CHECK(a.report.weights == std::vector<double>{1.0});
    CHECK(a.kernel.components.size() == 1);
    CHECK(a.report.mode == SelectionMode::Additive);
}

TEST_CASE("additive selection puts all weight on linear when lambda = 0") {
    std::mt19937_64 rng(3);
    const auto lf = ensemble_of(oracle::random_matrix(rng, 2, 8));
    const auto a = additive_select({fixed(KernelFamily::Linear, {}), fixed(KernelFamily::SquaredExponential, {0.5})}, lf,
                                   0.0, PsoConfig{});
    CHECK(a.report.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.report.objective_value <= 1e-12);
}

TEST_CASE("additive selection beats random simplex points") {
    std::mt19937_64 rng(4);
    const Matrix cols = oracle::random_matrix(rng, 2, 8);
    const auto lf = ensemble_of(cols);
    const std::vector<OptimizedKernel> lib{fixed(KernelFamily::Exponential, {0.7}),
                                           fixed(KernelFamily::SquaredExponential, {0.3}),
                                           fixed(KernelFamily::Matern52, {1.2})};
    PsoConfig pso;
    pso.seed = 4;
    const auto a = additive_select(lib, lf, 0.1, pso);
    const Matrix g1 = oracle::gramian(KernelFamily::Linear, {}, cols);
    const auto comps = component_gramians(lib, cols);
    const double got = mixture_objective(g1, comps, weights_of(a), 0.1);
    CHECK(got == doctest::Approx(a.report.objective_value).epsilon(1e-12));

    std::exponential_distribution<double> e(1.0);
    double best = INFINITY;
    for (int i = 0; i < 10000; ++i) {
        Vector w(3);
        for (Index k = 0; k < 3; ++k) w[k] = e(rng);
        w /= w.sum();
        best = std::min(best, mixture_objective(g1, comps, w, 0.1));
    }
    CHECK(got <= best);
}

TEST_CASE("property: additive weights lie on the simplex and beat every vertex") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed + 50);
        const Matrix cols = oracle::random_matrix(rng, 3, 9);
        const auto lf = ensemble_of(cols);
        const std::vector<OptimizedKernel> lib{fixed(KernelFamily::Linear, {}),
                                               fixed(KernelFamily::Matern32, {0.5 + 0.1 * seed}),
                                               fixed(KernelFamily::RationalQuadratic, {0.8, 1.5}),
                                               fixed(KernelFamily::CompactRBF, {1.0, 2.0})};
        PsoConfig pso;
        pso.seed = seed;
        pso.max_iters = 30;
        const auto a = additive_select(lib, lf, 0.1, pso);
        const Vector w = weights_of(a);
        CHECK(std::abs(w.sum() - 1.0) <= 1e-10);
        CHECK(w.minCoeff() >= 0.0);
        CHECK(w.maxCoeff() <= 1.0);
        const Matrix g1 = oracle::gramian(KernelFamily::Linear, {}, cols);
        const auto comps = component_gramians(lib, cols);
        for (Index v = 0; v < 4; ++v) CHECK(a.report.objective_value <= mixture_objective(g1, comps, Vector::Unit(4, v), 0.1));
    }
}

TEST_CASE("adaptive selection with a single candidate") {
    std::mt19937_64 rng(6);
    const auto lf = ensemble_of(oracle::random_matrix(rng, 2, 10));
    const auto r = adaptive_select({fixed(KernelFamily::Linear, {})}, lf, 3);
    CHECK(r.chosen == KernelFamily::Linear);
    CHECK(r.n_used == 3);
    CHECK_THROWS_AS((void)adaptive_select({fixed(KernelFamily::Linear, {})}, lf, 10), Error);
}

TEST_CASE("adaptive selection prefers an exact linear reconstruction") {
    std::mt19937_64 rng(7);
    const Matrix basis = oracle::random_matrix(rng, 5, 3);
    const Matrix coeff = oracle::random_matrix(rng, 3, 20);
    const auto lf = ensemble_of(basis * coeff);
    const std::vector<OptimizedKernel> lib{fixed(KernelFamily::Linear, {}), fixed(KernelFamily::Exponential, {0.5}),
                                           fixed(KernelFamily::Matern52, {1.0})};
    const auto r = adaptive_select(lib, lf, 3);
    CHECK(r.per_kernel_epsilon[0] <= 1e-8);
    CHECK(r.chosen == KernelFamily::Linear);
}

TEST_CASE("epsilon values match a dense least-squares oracle on scalar outputs") {
    std::mt19937_64 rng(8);
    const Matrix cols = oracle::random_matrix(rng, 1, 30, 0.5, 3.0);
    const auto lf = ensemble_of(cols);
    const std::vector<OptimizedKernel> lib{fixed(KernelFamily::Linear, {}), fixed(KernelFamily::SquaredExponential, {0.2})};
    const auto r = adaptive_select(lib, lf, 4);
    for (std::size_t i = 0; i < lib.size(); ++i) {
        const double want = oracle::self_emulation_error(lib[i].spec.family, lib[i].spec.h, cols, 4);
        CHECK(std::abs(r.per_kernel_epsilon[i] - want) <= 1e-8 * std::max(1.0, want));
    }
    // A rank-one linear Gramian still reproduces scalar data exactly through the truncated solve.
    CHECK(r.per_kernel_epsilon[0] <= 1e-10);
    CHECK(r.chosen == KernelFamily::Linear);
}

TEST_CASE("training pivots never enter the median") {
    std::mt19937_64 rng(10);
    const Matrix cols = oracle::random_matrix(rng, 2, 15);
    const KernelSpec spec{KernelFamily::Exponential, {0.05}, {}};
    const double got = self_emulation_error(spec, ensemble_of(cols), 5);
    CHECK(got == doctest::Approx(oracle::self_emulation_error(spec.family, spec.h, cols, 5)).epsilon(1e-9));

    // Including the five zero training residuals would pull the lower median down.
    const Matrix g = oracle::gramian(spec.family, spec.h, cols);
    const auto piv = oracle::brute_force_pivots(g, 5);
    std::vector<double> with_training(piv.size(), 0.0);
    for (Index j = 0; j < cols.cols(); ++j) {
        if (std::find(piv.begin(), piv.end(), j) != piv.end()) continue;
        Matrix ghat(5, 5);
        Vector rhs(5);
        Matrix lp(2, 5);
        for (Index a = 0; a < 5; ++a) {
            rhs[a] = g(j, piv[a]);
            lp.col(a) = cols.col(piv[a]);
            for (Index b = 0; b < 5; ++b) ghat(a, b) = g(piv[a], piv[b]);
        }
        with_training.push_back((cols.col(j) - lp * oracle::least_squares(ghat, rhs, 1e-12)).norm());
    }
    CHECK(oracle::lower_median(with_training) < got);
}

TEST_CASE("degenerate families get an infinite epsilon") {
    const auto lf = ensemble_of(Matrix::Zero(2, 6));
    const auto r = adaptive_select({fixed(KernelFamily::Linear, {}), fixed(KernelFamily::SquaredExponential, {1.0})}, lf, 2);
    CHECK(std::isinf(r.per_kernel_epsilon[0]));
    CHECK(r.chosen == KernelFamily::SquaredExponential);
}

TEST_CASE("property: adaptive choice is the argmin and survives relabeling") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        std::mt19937_64 rng(seed + 200);
        const Matrix cols = oracle::random_matrix(rng, 2, 16);
        const std::vector<OptimizedKernel> lib{fixed(KernelFamily::Exponential, {0.3}),
                                               fixed(KernelFamily::SquaredExponential, {0.1}),
                                               fixed(KernelFamily::Matern32, {0.6}),
                                               fixed(KernelFamily::CompactRBF, {0.9, 1.5})};
        const auto r = adaptive_select(lib, ensemble_of(cols), 5);
        const auto best = std::min_element(r.per_kernel_epsilon.begin(), r.per_kernel_epsilon.end());
        CHECK(r.chosen == r.families[static_cast<std::size_t>(best - r.per_kernel_epsilon.begin())]);

        // Radial Gramians have a constant diagonal, so the first pivot is a tie that goes to sample 0.
        // Keeping sample 0 in place leaves every later step free of ties.
        std::vector<Index> perm(16);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin() + 1, perm.end(), rng);
        Matrix shuffled(2, 16);
        for (Index j = 0; j < 16; ++j) shuffled.col(j) = cols.col(perm[j]);
        const auto s = adaptive_select(lib, ensemble_of(shuffled), 5);
        std::vector<double> sorted = r.per_kernel_epsilon;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) CHECK(s.chosen == r.chosen);
    }
}
