#include "lrmf/selection.hpp"

#include "lrmf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace lrmf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector softmax(std::span<const double> theta) {
    Vector w(static_cast<Index>(theta.size()));
    const double top = *std::max_element(theta.begin(), theta.end());
    for (std::size_t i = 0; i < theta.size(); ++i) w[static_cast<Index>(i)] = std::exp(theta[i] - top);
    return w / w.sum();
}

// Clamp into [0, 1] and renormalize so the weights sit on the simplex to rounding.
Vector clean_weights(Vector w) {
    w = w.cwiseMax(0.0).cwiseMin(1.0);
    const double total = w.sum();
    if (!(total > 0.0)) config_error("weight vector vanished");
    return w / total;
}

struct SimplexDescent {
    Vector w;
    double value;
    int evaluations;
};

// Projected gradient descent on the simplex with finite-difference gradients and backtracking.
SimplexDescent descend_on_simplex(const std::function<double(const Vector&)>& f, Vector w, double fw) {
    int evaluations = 0;
    const Index dim = w.size();
    for (int iter = 0; iter < 500; ++iter) {
        Vector g(dim);
        for (Index i = 0; i < dim; ++i) {
            Vector up = w;
            Vector down = w;
            up[i] += 1e-6;
            down[i] -= 1e-6;
            const double fu = f(up);
            const double fd = f(down);
            evaluations += 2;
            g[i] = (std::isfinite(fu) && std::isfinite(fd)) ? (fu - fd) / 2e-6 : 0.0;
        }
        if (g.lpNorm<Eigen::Infinity>() == 0.0) break;
        double t = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
        bool accepted = false;
        Vector trial;
        double ft = kInf;
        while (true) {
            trial = project_to_simplex(w - t * g);
            const double moved = (trial - w).lpNorm<Eigen::Infinity>();
            if (moved <= 1e-12) break;
            ft = f(trial);
            ++evaluations;
            if (std::isfinite(ft) && ft <= fw + 1e-4 * g.dot(trial - w)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
        const double gain = fw - ft;
        w = trial;
        fw = ft;
        if (gain <= 1e-14 * std::max(1.0, std::abs(fw))) break;
    }
    return {w, fw, evaluations};
}

}  // namespace

Vector project_to_simplex(const Vector& v) {
    const Index n = v.size();
    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double shift = 0.0;
    for (Index k = 0; k < n; ++k) {
        cumulative += sorted[static_cast<std::size_t>(k)];
        const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) shift = candidate;
    }
    return (v.array() - shift).cwiseMax(0.0).matrix();
}

double mixture_objective(const Matrix& reference, const std::vector<Matrix>& components, const Vector& weights,
                         double lambda) {
    Matrix mixed = Matrix::Zero(reference.rows(), reference.cols());
    for (std::size_t i = 0; i < components.size(); ++i) mixed += weights[static_cast<Index>(i)] * components[i];
    return gramian_objective(reference, mixed, lambda);
}

AdditiveSelection additive_select(const std::vector<OptimizedKernel>& optimized, const SnapshotEnsemble& lf,
                                  double lambda, const PsoConfig& pso) {
    if (optimized.empty()) config_error("additive selection needs at least one kernel");
    std::set<KernelFamily> seen;
    for (const auto& k : optimized) {
        if (!seen.insert(k.spec.family).second) config_error("additive selection got a repeated family");
    }

    AdditiveSelection out;
    out.report.mode = SelectionMode::Additive;
    for (const auto& k : optimized) out.report.families.push_back(k.spec.family);

    const Matrix reference = gramian_matrix(KernelSpec{KernelFamily::Linear, {}, {}}, lf.outputs);
    std::vector<Matrix> components;
    for (const auto& k : optimized) components.push_back(gramian_matrix(k.spec, lf.outputs));

    const auto size = static_cast<Index>(optimized.size());
    int evaluations = 0;
    const std::function<double(const Vector&)> f = [&](const Vector& w) {
        return mixture_objective(reference, components, w, lambda);
    };

    Vector best;
    double best_value = kInf;
    if (size == 1) {
        best = Vector::Ones(1);
        best_value = f(best);
    } else {
        const ObjectiveFn in_logits = [&](std::span<const double> theta) { return f(softmax(theta)); };
        const PsoResult swarm = pso_minimize(in_logits, pso, std::vector<Bounds>(optimized.size(), Bounds{-6.0, 6.0}));
        evaluations += swarm.evaluations;

        Vector start = clean_weights(softmax(swarm.best));
        const SimplexDescent refined = descend_on_simplex(f, start, f(start));
        evaluations += refined.evaluations + 1;

        std::vector<Vector> candidates{clean_weights(refined.w), start};
        for (Index i = 0; i < size; ++i) candidates.push_back(Vector::Unit(size, i));
        for (const auto& w : candidates) {
            const double value = f(w);
            ++evaluations;
            if (value < best_value || best.size() == 0) {
                best_value = value;
                best = w;
            }
        }
    }

    out.report.weights.assign(best.data(), best.data() + best.size());
    out.report.objective_value = best_value;
    out.report.evaluations = evaluations;
    for (std::size_t i = 0; i < optimized.size(); ++i) {
        out.kernel.components.push_back(MixtureComponent{optimized[i].spec, out.report.weights[i]});
    }
    return out;
}

double self_emulation_error(const KernelSpec& spec, const SnapshotEnsemble& lf, Index n,
                            const AdaptiveOptions& options) {
    const Index total = lf.samples();
    if (n < 1 || n >= total) config_error("adaptive selection needs 1 <= n < N");
    try {
        const Matrix gramian = gramian_matrix(spec, lf.outputs);
        const PivotDecomposition pivots = pivoted_cholesky(gramian, n, options.drop_tolerance);
        const SlicedGramian sliced = slice_gramian(gramian, pivots.order, n);
        const RegularizedSolver solver(sliced.entries, options.rcond);

        std::vector<Index> tests(pivots.order.begin() + n, pivots.order.end());
        std::sort(tests.begin(), tests.end());
        Matrix rhs(n, static_cast<Index>(tests.size()));
        for (Index l = 0; l < n; ++l) {
            for (std::size_t t = 0; t < tests.size(); ++t) {
                rhs(l, static_cast<Index>(t)) = gramian(sliced.indices[static_cast<std::size_t>(l)], tests[t]);
            }
        }
        const Matrix coefficients = solver.solve(rhs);
        Matrix pivot_columns(lf.dim(), n);
        for (Index l = 0; l < n; ++l) pivot_columns.col(l) = lf.outputs.col(sliced.indices[static_cast<std::size_t>(l)]);
        const Matrix emulated = pivot_columns * coefficients;

        std::vector<double> errors;
        for (std::size_t t = 0; t < tests.size(); ++t) {
            errors.push_back((lf.outputs.col(tests[t]) - emulated.col(static_cast<Index>(t))).norm());
        }
        const double eps = lower_median(std::move(errors));
        return std::isfinite(eps) ? eps : kInf;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Numerical) return kInf;
        throw;
    }
}

SelectionReport adaptive_select(const std::vector<OptimizedKernel>& optimized, const SnapshotEnsemble& lf, Index n,
                                const AdaptiveOptions& options) {
    if (optimized.empty()) config_error("adaptive selection needs at least one kernel");
    if (n < 1 || n >= lf.samples()) config_error("adaptive selection needs 1 <= n < N");

    SelectionReport report;
    report.mode = SelectionMode::Adaptive;
    report.n_used = n;
    for (const auto& k : optimized) {
        report.families.push_back(k.spec.family);
        report.per_kernel_epsilon.push_back(self_emulation_error(k.spec, lf, n, options));
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < optimized.size(); ++i) {
        const double eps = report.per_kernel_epsilon[i];
        const double incumbent = report.per_kernel_epsilon[best];
        const bool lower_family = family_index(report.families[i]) < family_index(report.families[best]);
        if (eps < incumbent || (eps == incumbent && lower_family)) best = i;
    }
    report.chosen = report.families[best];
    return report;
}

}  // namespace lrmf
