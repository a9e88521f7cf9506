#pragma once

#include "lrmf/common.hpp"

#include <string>
#include <vector>

namespace lrmf {

/// Model outputs for N parameter samples, one column per sample.
struct SnapshotEnsemble {
    Matrix outputs;                   ///< output-dim x N
    Matrix params;                    ///< N x q
    Vector cost;                      ///< per-sample cost units, length N
    std::vector<std::string> labels;  ///< optional, one per output row
    Vector row_scale;                 ///< raw value = stored value * row_scale; empty means unscaled

    [[nodiscard]] Index samples() const noexcept { return outputs.cols(); }
    [[nodiscard]] Index dim() const noexcept { return outputs.rows(); }

    /// Throws a data error if the shape or finiteness invariants do not hold.
    void validate() const;
};

/// Contiguous or scattered set of output rows normalized together.
struct RowGroup {
    std::string name;
    std::vector<Index> rows;
};

/// Groups rows by identical label, in order of first appearance. Unlabeled ensembles form one group.
[[nodiscard]] std::vector<RowGroup> groups_from_labels(const SnapshotEnsemble& ensemble);

struct NormalizedEnsemble {
    SnapshotEnsemble ensemble;
    std::vector<double> factors;  ///< divisor applied to each group
};

/// Divides each group by sqrt(mean over samples of the squared group norm).
[[nodiscard]] NormalizedEnsemble normalize_ensemble(const SnapshotEnsemble& ensemble,
                                                    const std::vector<RowGroup>& groups);

}  // namespace lrmf
