#pragma once
// Reference implementations used only by the tests. They are written from the formulas
// directly and share no code with the library beyond the enum and matrix types.

#include "lrmf/common.hpp"
#include "lrmf/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using lrmf::Index;
using lrmf::KernelFamily;
using lrmf::Matrix;
using lrmf::Vector;

inline double distance(const Vector& u, const Vector& v) {
    double s = 0.0;
    for (Index i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
    return std::sqrt(s);
}

inline double kernel(KernelFamily f, const std::vector<double>& h, const Vector& u, const Vector& v) {
    if (f == KernelFamily::Linear) {
        double s = 0.0;
        for (Index i = 0; i < u.size(); ++i) s += u[i] * v[i];
        return s;
    }
    const double r = distance(u, v);
    switch (f) {
        case KernelFamily::Exponential: return std::exp(-r / h[0]);
        case KernelFamily::SquaredExponential: return std::exp(-(r * r) / (2 * h[0]));
        case KernelFamily::RationalQuadratic: return std::pow(1 + r * r / (2 * h[0] * h[0] * h[1]), -h[1]);
        case KernelFamily::Matern32:
            return (1 + std::sqrt(3.0) * r / h[0]) * std::exp(-std::sqrt(3.0) * r / h[0]);
        case KernelFamily::Matern52:
            return (1 + std::sqrt(5.0) * r / h[0] + 5 * r * r / (3 * h[0] * h[0])) * std::exp(-std::sqrt(5.0) * r / h[0]);
        case KernelFamily::CompactRBF:
            if (r == 0) return 1.0;
            return std::max(0.0, 1 - std::pow(r / h[0], h[1]) * std::exp(-r * r / (2 * h[0] * h[0])));
        default: return std::numeric_limits<double>::quiet_NaN();
    }
}

inline Matrix gramian(KernelFamily f, const std::vector<double>& h, const Matrix& cols) {
    Matrix g(cols.cols(), cols.cols());
    for (Index i = 0; i < cols.cols(); ++i) {
        for (Index j = 0; j < cols.cols(); ++j) g(i, j) = kernel(f, h, cols.col(i), cols.col(j));
    }
    return g;
}

/// ||G_lin - G(h)||_F + lambda / sqrt(||G||_F^2 / sigma_max^2) with sigma_max from a full SVD.
inline double objective(const Matrix& cols, KernelFamily f, const std::vector<double>& h, double lambda) {
    const Matrix g1 = gramian(KernelFamily::Linear, {}, cols);
    const Matrix g = gramian(f, h, cols);
    double frob = 0.0;
    double gnorm2 = 0.0;
    for (Index i = 0; i < g.rows(); ++i) {
        for (Index j = 0; j < g.cols(); ++j) {
            frob += (g1(i, j) - g(i, j)) * (g1(i, j) - g(i, j));
            gnorm2 += g(i, j) * g(i, j);
        }
    }
    Eigen::JacobiSVD<Matrix> svd(g);
    const double smax = svd.singularValues()(0);
    return std::sqrt(frob) + lambda / std::sqrt(gnorm2 / (smax * smax));
}

/// Greedy pivots by recomputing the full Schur complement of the chosen set at every step.
inline std::vector<Index> brute_force_pivots(const Matrix& g, Index steps, double drop = 1e-12) {
    const Index n = g.rows();
    std::vector<Index> chosen;
    const double max_diag = g.diagonal().maxCoeff();
    for (Index k = 0; k < steps; ++k) {
        Vector schur = g.diagonal();
        if (!chosen.empty()) {
            const Index p = static_cast<Index>(chosen.size());
            Matrix gpp(p, p);
            Matrix gip(n, p);
            for (Index a = 0; a < p; ++a) {
                for (Index b = 0; b < p; ++b) gpp(a, b) = g(chosen[a], chosen[b]);
                for (Index i = 0; i < n; ++i) gip(i, a) = g(i, chosen[a]);
            }
            const Matrix solved = gpp.ldlt().solve(gip.transpose());
            for (Index i = 0; i < n; ++i) schur[i] -= gip.row(i).dot(solved.col(i));
        }
        Index best = -1;
        for (Index i = 0; i < n; ++i) {
            if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
            if (best < 0 || schur[i] > schur[best]) best = i;
        }
        if (best < 0 || schur[best] <= drop * max_diag) break;
        chosen.push_back(best);
    }
    return chosen;
}

/// Minimum-norm least-squares solution through a thresholded SVD.
inline Vector least_squares(const Matrix& a, const Vector& b, double rcond) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& s = svd.singularValues();
    Vector x = Vector::Zero(a.cols());
    for (Index k = 0; k < s.size(); ++k) {
        if (s[k] <= rcond * s[0] || s[k] == 0.0) continue;
        x += svd.matrixV().col(k) * (svd.matrixU().col(k).dot(b) / s[k]);
    }
    return x;
}

inline double lower_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
}

/// Median LF self-emulation error of one kernel with n brute-force pivots.
inline double self_emulation_error(KernelFamily f, const std::vector<double>& h, const Matrix& cols, Index n) {
    const Matrix g = gramian(f, h, cols);
    std::vector<Index> piv = brute_force_pivots(g, n);
    for (Index i = 0; static_cast<Index>(piv.size()) < n; ++i) {
        if (std::find(piv.begin(), piv.end(), i) == piv.end()) piv.push_back(i);
    }
    Matrix ghat(n, n);
    Matrix lf_piv(cols.rows(), n);
    for (Index a = 0; a < n; ++a) {
        lf_piv.col(a) = cols.col(piv[a]);
        for (Index b = 0; b < n; ++b) ghat(a, b) = g(piv[a], piv[b]);
    }
    std::vector<double> errs;
    for (Index j = 0; j < cols.cols(); ++j) {
        if (std::find(piv.begin(), piv.end(), j) != piv.end()) continue;
        Vector rhs(n);
        for (Index a = 0; a < n; ++a) rhs[a] = g(j, piv[a]);
        const Vector c = least_squares(ghat, rhs, 1e-12);
        errs.push_back(distance(cols.col(j), lf_piv * c));
    }
    return lower_median(errs);
}

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = u(rng);
    }
    return m;
}

/// B B^T with a full-rank random B; redrawn until the diagonal entries are pairwise distinct.
inline Matrix random_psd(std::mt19937_64& rng, Index n) {
    while (true) {
        const Matrix b = random_matrix(rng, n, n);
        Matrix g = b * b.transpose();
        g = 0.5 * (g + g.transpose());
        std::vector<double> d(g.diagonal().data(), g.diagonal().data() + n);
        std::sort(d.begin(), d.end());
        if (std::adjacent_find(d.begin(), d.end()) == d.end()) return g;
    }
}

inline double condition_number(const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace oracle
