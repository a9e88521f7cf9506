#include "lrmf/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace lrmf {

PivotDecomposition pivoted_cholesky(const Matrix& gramian, Index max_steps, double drop_tolerance) {
    const Index n = gramian.rows();
    if (gramian.cols() != n) data_error("pivoted Cholesky needs a square matrix");
    if (max_steps < 0 || max_steps > n) config_error("pivoted Cholesky step count must lie in [0, N]");
    if (!(drop_tolerance >= 0.0)) config_error("pivot drop tolerance must be non-negative");

    Vector schur = gramian.diagonal();
    const double max_diag = n > 0 ? schur.maxCoeff() : 0.0;
    const double not_psd_floor = -1e-8 * std::abs(max_diag);

    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    std::vector<Index> pivots;
    Matrix columns = Matrix::Zero(n, std::max<Index>(max_steps, 1));  // indexed by original row

    for (Index k = 0; k < max_steps && max_diag > 0.0; ++k) {
        Index best = -1;
        for (Index i = 0; i < n; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            if (schur[i] < 0.0) {
                if (schur[i] < not_psd_floor) numerical_error("matrix not PSD");
                schur[i] = 0.0;
            }
            if (best < 0 || schur[i] > schur[best]) best = i;
        }
        if (best < 0 || schur[best] <= drop_tolerance * max_diag) break;

        const double root = std::sqrt(schur[best]);
        for (Index i = 0; i < n; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            double value = gramian(i, best);
            for (Index j = 0; j < k; ++j) value -= columns(i, j) * columns(best, j);
            columns(i, k) = value / root;
        }
        columns(best, k) = root;
        taken[static_cast<std::size_t>(best)] = true;
        for (Index i = 0; i < n; ++i) {
            if (!taken[static_cast<std::size_t>(i)]) schur[i] -= columns(i, k) * columns(i, k);
        }
        schur[best] = 0.0;
        pivots.push_back(best);
    }

    PivotDecomposition out;
    out.effective_rank = static_cast<Index>(pivots.size());
    out.tolerance_used = drop_tolerance;
    out.order = pivots;
    for (Index i = 0; i < n; ++i) {
        if (!taken[static_cast<std::size_t>(i)]) out.order.push_back(i);
    }
    out.factor = Matrix::Zero(n, n);
    for (Index row = 0; row < n; ++row) {
        const Index original = out.order[static_cast<std::size_t>(row)];
        const Index upto = std::min(row + 1, out.effective_rank);
        for (Index col = 0; col < upto; ++col) out.factor(row, col) = columns(original, col);
    }
    return out;
}

SlicedGramian slice_gramian(const Matrix& gramian, const std::vector<Index>& order, Index n) {
    if (n < 0 || n > static_cast<Index>(order.size())) config_error("slice size exceeds the pivot ordering");
    SlicedGramian out;
    out.indices.assign(order.begin(), order.begin() + n);
    out.entries.resize(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            out.entries(i, j) = gramian(out.indices[static_cast<std::size_t>(i)], out.indices[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

double spectral_norm(const Matrix& a, const SpectralNormOptions& options) {
    if (a.size() == 0) return 0.0;
    Vector x = Vector::Ones(a.cols()).normalized();
    double mu = 0.0;
    bool restarted = false;
    for (int it = 0; it < options.max_iterations; ++it) {
        const Vector y = a.transpose() * (a * x);
        const double next = x.dot(y);
        const double norm_y = y.norm();
        if (norm_y == 0.0) {
            if (restarted) return 0.0;
            // Start vector is orthogonal to the row space; restart at the heaviest column.
            Index heaviest = 0;
            a.colwise().squaredNorm().maxCoeff(&heaviest);
            if (a.col(heaviest).squaredNorm() == 0.0) return 0.0;
            x = Vector::Unit(a.cols(), heaviest);
            restarted = true;
            continue;
        }
        const double residual = (y - next * x).norm();
        const bool stalled = std::abs(next - mu) <= 1e-15 * next;
        mu = next;
        x = y / norm_y;
        if (residual <= options.tolerance * next || stalled) break;
    }
    return std::sqrt(std::max(mu, 0.0));
}

double stable_rank(const Matrix& a, const SpectralNormOptions& options) {
    const double frob2 = a.squaredNorm();
    if (!(frob2 > 0.0)) numerical_error("stable rank of a zero matrix");
    const double spec = spectral_norm(a, options);
    if (!(spec > 0.0)) numerical_error("stable rank of a zero matrix");
    return frob2 / (spec * spec);
}

RegularizedSolver::RegularizedSolver(const Matrix& symmetric, double rcond) : matrix_(symmetric) {
    if (symmetric.rows() != symmetric.cols()) data_error("regularized solve needs a square matrix");
    if (!(rcond >= 0.0)) config_error("rcond must be non-negative");
    if (symmetric.size() == 0) numerical_error("Gramian numerically zero");
    if (!symmetric.allFinite()) numerical_error("Gramian contains non-finite entries");

    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric);
    if (eig.info() != Eigen::Success) numerical_error("eigendecomposition failed");
    const Vector& values = eig.eigenvalues();
    const double top = values.cwiseAbs().maxCoeff();
    const double cutoff = rcond * top;

    std::vector<Index> keep;
    for (Index i = 0; i < values.size(); ++i) {
        if (values[i] > cutoff && values[i] > 0.0) keep.push_back(i);
    }
    if (keep.empty()) numerical_error("Gramian numerically zero");

    kept_ = static_cast<Index>(keep.size());
    basis_.resize(symmetric.rows(), kept_);
    inv_values_.resize(kept_);
    double smallest = top;
    for (Index k = 0; k < kept_; ++k) {
        const Index i = keep[static_cast<std::size_t>(k)];
        basis_.col(k) = eig.eigenvectors().col(i);
        inv_values_[k] = 1.0 / values[i];
        smallest = std::min(smallest, values[i]);
    }
    condition_ = top / smallest;
}

Vector RegularizedSolver::solve(const Vector& rhs) const {
    if (rhs.size() != matrix_.rows()) data_error("right-hand side length does not match the Gramian");
    auto apply = [this](const Vector& b) -> Vector {
        return basis_ * inv_values_.cwiseProduct(basis_.transpose() * b);
    };
    Vector c = apply(rhs);
    // One refinement sweep on the kept subspace.
    c += apply(rhs - matrix_ * c);
    return c;
}

Matrix RegularizedSolver::solve(const Matrix& rhs) const {
    if (rhs.rows() != matrix_.rows()) data_error("right-hand side length does not match the Gramian");
    auto apply = [this](const Matrix& b) -> Matrix {
        return basis_ * (inv_values_.asDiagonal() * (basis_.transpose() * b));
    };
    Matrix c = apply(rhs);
    c += apply(rhs - matrix_ * c);
    return c;
}

Vector solve_regularized(const SlicedGramian& sliced, const Vector& rhs, double rcond) {
    return RegularizedSolver(sliced.entries, rcond).solve(rhs);
}

double lower_median(std::vector<double> values) {
    if (values.empty()) data_error("median of an empty set");
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

}  // namespace lrmf
