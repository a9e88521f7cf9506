#pragma once

#include "lrmf/common.hpp"
#include "lrmf/ensemble.hpp"
#include "lrmf/kernels.hpp"
#include "lrmf/numerics.hpp"

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace lrmf {

/// Effective number of high-fidelity samples: used + ceil(kernel_opt_cost / one_hf_cost).
struct CostLedger {
    Index hf_samples_used = 0;
    double kernel_opt_cost = 0.0;
    double one_hf_cost = 1.0;
    Index effective_hf = 0;
    double hf_cost_spent = 0.0;  ///< sum of the fetched samples' own costs
};

[[nodiscard]] CostLedger effective_cost(Index hf_samples_used, double kernel_opt_cost, double one_hf_cost);

struct HfSample {
    Vector output;
    double cost = 0.0;
};

/// Supplies the high-fidelity output of one sample. Each call counts against the budget.
using HfProvider = std::function<HfSample(Index sample)>;

/// Bi-fidelity emulator: a kernel expansion over n high-fidelity snapshots at the pivot samples.
struct Surrogate {
    Kernel kernel;
    std::vector<Index> pivots;
    Matrix hf_snapshots;      ///< M x n
    Matrix lf_pivot_columns;  ///< m x n, in the stored (possibly normalized) LF space
    SlicedGramian sliced;
    double rcond = 1e-12;
    Vector lf_row_scale;  ///< raw LF = stored * scale; empty means identity
    Vector hf_row_scale;  ///< raw HF = stored * scale; empty means identity
    std::vector<std::string> hf_labels;
    std::shared_ptr<const SnapshotEnsemble> lf_reference;  ///< optional
    std::shared_ptr<const RegularizedSolver> solver;

    /// Rebuilds the cached solver from `sliced` and `rcond`.
    void prepare();
};

struct BuildOptions {
    double rcond = 1e-12;
    double drop_tolerance = 1e-12;
    double kernel_opt_cost = 0.0;
    /// Cost of one high-fidelity run; a non-positive value means the mean cost of the fetched samples.
    double one_hf_cost = 0.0;
};

struct BuildResult {
    Surrogate surrogate;
    CostLedger ledger;
};

/// Pivots the low-fidelity Gramian, then calls `hf` exactly n times at the first n pivots.
[[nodiscard]] BuildResult build_surrogate(std::shared_ptr<const SnapshotEnsemble> lf, const Kernel& kernel, Index n,
                                          const HfProvider& hf, const BuildOptions& options = {});

/// Expansion coefficients c(p) for a low-fidelity column in stored space.
[[nodiscard]] Vector expansion_coefficients(const Surrogate& s, const ConstVectorRef& lf_column);

/// Prediction in stored space from a low-fidelity column in stored space.
[[nodiscard]] Vector evaluate(const Surrogate& s, const ConstVectorRef& lf_column);

/// Prediction at a sample of the reference low-fidelity ensemble.
[[nodiscard]] Vector evaluate_sample(const Surrogate& s, Index sample);

/// Raw-unit prediction from a raw-unit low-fidelity column (applies the stored row scales).
[[nodiscard]] Vector evaluate_raw(const Surrogate& s, const ConstVectorRef& raw_lf_column);

struct ErrorReport {
    double aggregate = 0.0;
    std::vector<std::pair<std::string, double>> per_qoi;
    std::vector<Index> test_indices;
    /// Test samples whose true output has zero norm, with their absolute errors.
    std::vector<std::pair<Index, double>> zero_norm_samples;
};

/// Median relative error over every sample that is not a pivot.
[[nodiscard]] ErrorReport median_relative_error(const Surrogate& s, const SnapshotEnsemble& hf_truth,
                                                const SnapshotEnsemble& lf);

}  // namespace lrmf
