#pragma once

#include "lrmf/common.hpp"
#include "lrmf/ensemble.hpp"
#include "lrmf/kernels.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lrmf {

struct Bounds {
    double lo = 0.0;
    double hi = 1.0;
};

/// Objective f(h) = ||G_ref - G(h)||_F + lambda / sqrt(srank(G(h))).
struct ObjectiveConfig {
    double lambda = 0.1;
    Matrix reference_gramian;  ///< linear-kernel Gramian of the same ensemble
    KernelFamily family = KernelFamily::SquaredExponential;
    KernelOptions options;
    std::vector<Bounds> bounds;  ///< one box per hyperparameter, 0 < lo < hi

    void validate() const;
};

struct PsoConfig {
    int swarm_size = 30;
    double k1 = 1.49;
    double k2 = 1.49;
    double v_max_fraction = 0.2;
    int max_iters = 100;
    int stall_iters = 15;
    std::uint64_t seed = 0;
    int threads = 1;  ///< fitness evaluations per iteration may be spread over threads

    void validate() const;
};

using ObjectiveFn = std::function<double(std::span<const double>)>;

struct PsoResult {
    std::vector<double> best;
    double value = 0.0;
    std::vector<double> trace;  ///< group best after each iteration
    int evaluations = 0;
};

struct LocalResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    int iterations = 0;
};

struct RefineOptions {
    double gradient_tolerance = 1e-8;
    double step_tolerance = 1e-12;
    int max_iterations = 500;
};

struct OptimizedKernel {
    KernelSpec spec;
    double objective_value = 0.0;
    int evaluations = 0;
    double wall_time = 0.0;  ///< seconds; informational only
};

/// Frobenius distance plus the stable-rank penalty; degenerate candidates score +infinity.
[[nodiscard]] double gramian_objective(const Matrix& reference, const Matrix& candidate, double lambda);

[[nodiscard]] double objective(const ObjectiveConfig& cfg, std::span<const double> h, const SnapshotEnsemble& lf);

/// Median Euclidean distance over all column pairs; 0 for fewer than two columns.
[[nodiscard]] double median_pairwise_distance(const Matrix& columns);

/// Length-like hyperparameters get [1e-3 d, 1e3 d] with d the median pairwise distance;
/// shape exponents (second hyperparameter of rational quadratic and compact RBF) get [1e-2, 1e2].
[[nodiscard]] std::vector<Bounds> default_bounds(KernelFamily family, const SnapshotEnsemble& lf);

[[nodiscard]] ObjectiveConfig make_objective_config(KernelFamily family, const SnapshotEnsemble& lf,
                                                    double lambda = 0.1, KernelOptions options = {});

/// Particle swarm without inertia term, with velocity clamping and box clamping.
[[nodiscard]] PsoResult pso_minimize(const ObjectiveFn& f, const PsoConfig& cfg, const std::vector<Bounds>& bounds);

/// Projected BFGS with central finite-difference gradients. Never returns a worse point than h0.
[[nodiscard]] LocalResult refine_local(const ObjectiveFn& f, std::vector<double> h0, const std::vector<Bounds>& bounds,
                                       const RefineOptions& options = {});

/// Swarm search in log-hyperparameter space followed by local refinement.
[[nodiscard]] OptimizedKernel optimize_hyperparams(KernelFamily family, const SnapshotEnsemble& lf,
                                                   const ObjectiveConfig& cfg, const PsoConfig& pso);

}  // namespace lrmf
