#pragma once

#include "lrmf/common.hpp"
#include "lrmf/ensemble.hpp"
#include "lrmf/hyperopt.hpp"
#include "lrmf/kernels.hpp"

#include <optional>
#include <vector>

namespace lrmf {

enum class SelectionMode { Additive, Adaptive };

/// Outcome of a kernel choice. Vectors are aligned with `families`.
struct SelectionReport {
    SelectionMode mode = SelectionMode::Adaptive;
    std::vector<KernelFamily> families;
    std::vector<double> weights;                // additive only
    std::vector<double> per_kernel_epsilon;     // adaptive only
    std::optional<KernelFamily> chosen;         // adaptive only
    Index n_used = 0;                           // adaptive only
    double objective_value = 0.0;               // additive only
    int evaluations = 0;                        // objective evaluations spent on the weights
};

struct AdditiveSelection {
    MixtureKernel kernel;
    SelectionReport report;
};

/// Euclidean projection onto the probability simplex.
[[nodiscard]] Vector project_to_simplex(const Vector& v);

/// Mixture objective F(w) = ||G_ref - sum_i w_i G_i||_F + lambda / sqrt(srank(sum_i w_i G_i)).
[[nodiscard]] double mixture_objective(const Matrix& reference, const std::vector<Matrix>& components,
                                       const Vector& weights, double lambda);

/// Chooses convex weights over the optimized kernels using low-fidelity data only.
[[nodiscard]] AdditiveSelection additive_select(const std::vector<OptimizedKernel>& optimized,
                                                const SnapshotEnsemble& lf, double lambda, const PsoConfig& pso);

struct AdaptiveOptions {
    double rcond = 1e-12;
    double drop_tolerance = 1e-12;
};

/// Median low-fidelity self-emulation error of one kernel with an n-point pivot set.
/// Returns +infinity when the sliced Gramian is degenerate.
[[nodiscard]] double self_emulation_error(const KernelSpec& spec, const SnapshotEnsemble& lf, Index n,
                                          const AdaptiveOptions& options = {});

/// Picks the single kernel whose n-point low-fidelity self-emulator has the smallest median error.
[[nodiscard]] SelectionReport adaptive_select(const std::vector<OptimizedKernel>& optimized,
                                              const SnapshotEnsemble& lf, Index n,
                                              const AdaptiveOptions& options = {});

}  // namespace lrmf
