#include "lrmf/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace lrmf {

CostLedger effective_cost(Index hf_samples_used, double kernel_opt_cost, double one_hf_cost) {
    if (!(one_hf_cost > 0.0) || !std::isfinite(one_hf_cost)) config_error("cost of one HF run must be positive");
    if (!(kernel_opt_cost >= 0.0) || !std::isfinite(kernel_opt_cost)) {
        config_error("kernel optimization cost must be finite and non-negative");
    }
    CostLedger ledger;
    ledger.hf_samples_used = hf_samples_used;
    ledger.kernel_opt_cost = kernel_opt_cost;
    ledger.one_hf_cost = one_hf_cost;
    ledger.effective_hf = hf_samples_used + static_cast<Index>(std::ceil(kernel_opt_cost / one_hf_cost));
    return ledger;
}

void Surrogate::prepare() { solver = std::make_shared<const RegularizedSolver>(sliced.entries, rcond); }

BuildResult build_surrogate(std::shared_ptr<const SnapshotEnsemble> lf, const Kernel& kernel, Index n,
                            const HfProvider& hf, const BuildOptions& options) {
    if (!lf) config_error("build_surrogate needs a low-fidelity ensemble");
    const Index total = lf->samples();
    if (n < 1 || n > total) config_error("HF budget n must satisfy 1 <= n <= N");

    const Gramian gramian = build_gramian(kernel, *lf, "lf");
    const PivotDecomposition decomposition = pivoted_cholesky(gramian.entries, n, options.drop_tolerance);

    BuildResult out;
    Surrogate& s = out.surrogate;
    s.kernel = kernel;
    s.rcond = options.rcond;
    s.sliced = slice_gramian(gramian.entries, decomposition.order, n);
    s.pivots = s.sliced.indices;
    s.lf_reference = lf;
    s.lf_row_scale = lf->row_scale;
    s.lf_pivot_columns.resize(lf->dim(), n);
    for (Index l = 0; l < n; ++l) s.lf_pivot_columns.col(l) = lf->outputs.col(s.pivots[static_cast<std::size_t>(l)]);

    double spent = 0.0;
    for (Index l = 0; l < n; ++l) {
        const Index sample = s.pivots[static_cast<std::size_t>(l)];
        HfSample fetched;
        try {
            fetched = hf(sample);
        } catch (const std::exception& e) {
            data_error("high-fidelity provider failed at sample " + std::to_string(sample) + " after " +
                       std::to_string(l) + " of " + std::to_string(n) + " runs (cost spent " +
                       std::to_string(spent) + "): " + e.what());
        }
        if (l == 0) s.hf_snapshots.resize(fetched.output.size(), n);
        if (fetched.output.size() != s.hf_snapshots.rows()) {
            data_error("high-fidelity sample " + std::to_string(sample) + " has inconsistent length");
        }
        if (!fetched.output.allFinite()) data_error("high-fidelity sample " + std::to_string(sample) + " is not finite");
        s.hf_snapshots.col(l) = fetched.output;
        spent += fetched.cost;
    }
    s.prepare();

    const double one_hf = options.one_hf_cost > 0.0 ? options.one_hf_cost : spent / static_cast<double>(n);
    out.ledger = effective_cost(n, options.kernel_opt_cost, one_hf > 0.0 ? one_hf : 1.0);
    out.ledger.hf_cost_spent = spent;
    return out;
}

Vector expansion_coefficients(const Surrogate& s, const ConstVectorRef& lf_column) {
    if (!s.solver) numerical_error("surrogate solver not prepared");
    const Vector rhs = cross_kernel_vector(s.kernel, s.lf_pivot_columns, lf_column);
    return s.solver->solve(rhs);
}

Vector evaluate(const Surrogate& s, const ConstVectorRef& lf_column) {
    return s.hf_snapshots * expansion_coefficients(s, lf_column);
}

Vector evaluate_sample(const Surrogate& s, Index sample) {
    if (!s.lf_reference) config_error("surrogate has no reference low-fidelity ensemble");
    if (sample < 0 || sample >= s.lf_reference->samples()) data_error("sample index out of range");
    return evaluate(s, s.lf_reference->outputs.col(sample));
}

Vector evaluate_raw(const Surrogate& s, const ConstVectorRef& raw_lf_column) {
    Vector column = raw_lf_column;
    if (s.lf_row_scale.size() != 0) {
        if (s.lf_row_scale.size() != column.size()) data_error("LF column length does not match the surrogate");
        column = column.cwiseQuotient(s.lf_row_scale);
    }
    Vector out = evaluate(s, column);
    if (s.hf_row_scale.size() != 0) out = out.cwiseProduct(s.hf_row_scale);
    return out;
}

ErrorReport median_relative_error(const Surrogate& s, const SnapshotEnsemble& hf_truth, const SnapshotEnsemble& lf) {
    if (hf_truth.samples() != lf.samples()) data_error("HF truth must cover every LF sample");
    if (hf_truth.dim() != s.hf_snapshots.rows()) data_error("HF truth dimension does not match the surrogate");

    const std::set<Index> pivots(s.pivots.begin(), s.pivots.end());
    const auto groups = groups_from_labels(hf_truth);

    ErrorReport report;
    std::vector<double> aggregate;
    std::vector<std::vector<double>> grouped(groups.size());
    for (Index j = 0; j < lf.samples(); ++j) {
        if (pivots.count(j)) continue;
        const Vector truth = hf_truth.outputs.col(j);
        if (!truth.allFinite()) continue;  // missing HF column
        report.test_indices.push_back(j);
        const Vector diff = truth - evaluate(s, lf.outputs.col(j));
        const double truth_norm = truth.norm();
        if (truth_norm == 0.0) {
            report.zero_norm_samples.emplace_back(j, diff.norm());
        } else {
            aggregate.push_back(diff.norm() / truth_norm);
        }
        for (std::size_t g = 0; g < groups.size(); ++g) {
            double num = 0.0;
            double den = 0.0;
            for (Index r : groups[g].rows) {
                num += diff[r] * diff[r];
                den += truth[r] * truth[r];
            }
            if (den > 0.0) grouped[g].push_back(std::sqrt(num / den));
        }
    }
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
    report.aggregate = aggregate.empty() ? kNaN : lower_median(std::move(aggregate));
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double value = grouped[g].empty() ? kNaN : lower_median(std::move(grouped[g]));
        report.per_qoi.emplace_back(groups[g].name, value);
    }
    return report;
}

}  // namespace lrmf
