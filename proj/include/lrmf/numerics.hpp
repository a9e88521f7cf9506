#pragma once

#include "lrmf/common.hpp"

#include <vector>

namespace lrmf {

/// Greedy diagonal-pivoted Cholesky factorization P G P^T = L L^T.
struct PivotDecomposition {
    /// Complete ordering of the 0-based sample indices; the first effective_rank entries are pivots,
    /// the rest follow in ascending index order.
    std::vector<Index> order;
    /// Lower-triangular N x N factor in pivot order. Columns beyond effective_rank are zero.
    Matrix factor;
    Index effective_rank = 0;
    double tolerance_used = 0.0;
};

/// Runs at most max_steps pivots. Stops early once the largest remaining Schur diagonal is
/// <= drop_tolerance * (largest initial diagonal). Ties go to the lowest index.
[[nodiscard]] PivotDecomposition pivoted_cholesky(const Matrix& gramian, Index max_steps,
                                                  double drop_tolerance = 1e-12);

struct SlicedGramian {
    Matrix entries;
    std::vector<Index> indices;
};

/// Principal submatrix of `gramian` at the first n entries of `order`.
[[nodiscard]] SlicedGramian slice_gramian(const Matrix& gramian, const std::vector<Index>& order, Index n);

struct SpectralNormOptions {
    double tolerance = 1e-8;
    int max_iterations = 10000;
};

/// Largest singular value by power iteration on A^T A, started from the normalized all-ones vector.
[[nodiscard]] double spectral_norm(const Matrix& a, const SpectralNormOptions& options = {});

/// ||A||_F^2 / ||A||_2^2. Throws a numerical error for the zero matrix.
[[nodiscard]] double stable_rank(const Matrix& a, const SpectralNormOptions& options = {});

/// Truncated-eigendecomposition pseudo-inverse of a symmetric matrix. Reusable across right-hand sides.
class RegularizedSolver {
public:
    RegularizedSolver(const Matrix& symmetric, double rcond);

    [[nodiscard]] Vector solve(const Vector& rhs) const;
    [[nodiscard]] Matrix solve(const Matrix& rhs) const;

    [[nodiscard]] Index kept_modes() const noexcept { return kept_; }
    /// Ratio of largest to smallest kept eigenvalue magnitude.
    [[nodiscard]] double condition() const noexcept { return condition_; }

private:
    Matrix matrix_;
    Matrix basis_;        // kept eigenvectors
    Vector inv_values_;   // reciprocals of kept eigenvalues
    Index kept_ = 0;
    double condition_ = 0.0;
};

/// Solves G c = rhs, discarding eigenvalues below rcond * (largest eigenvalue).
[[nodiscard]] Vector solve_regularized(const SlicedGramian& sliced, const Vector& rhs, double rcond = 1e-12);

/// Lower median (element (k-1)/2 of the sorted values); throws on an empty input.
[[nodiscard]] double lower_median(std::vector<double> values);

}  // namespace lrmf
