#pragma once

// Deterministic subspace linear algebra: orthonormal bases, projectors,
// top-k singular subspaces, operator norms and principal-angle distances.
// Everything here is a pure function of its inputs.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "dpss/errors.hpp"

namespace dpss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A k-dimensional subspace of R^d held as d x k orthonormal columns.
struct OrthonormalBasis {
    Matrix columns;  // d x k, U^T U = I_k

    int dim() const { return static_cast<int>(columns.rows()); }
    int rank() const { return static_cast<int>(columns.cols()); }
};

/// Symmetric idempotent d x d matrix of a given rank.
struct ProjectionMatrix {
    Matrix entries;
    int rank = 0;

    int dim() const { return static_cast<int>(entries.rows()); }
};

inline double operator_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

inline std::vector<double> singular_values(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    return std::vector<double>(s.data(), s.data() + s.size());
}

// Modified Gram-Schmidt with a relative drop tolerance. A vector is dropped
// when its residual after projecting onto the accepted columns is at most
// tol times its own norm; the output rank is the numerical rank of the input.
inline OrthonormalBasis orthonormalize(const std::vector<Vector>& vectors, double tol) {
    if (vectors.empty()) throw AllZeroInput("orthonormalize: empty input");
    const Eigen::Index d = vectors.front().size();
    Matrix basis(d, static_cast<Eigen::Index>(vectors.size()));
    Eigen::Index k = 0;
    for (const Vector& v : vectors) {
        const double own_norm = v.norm();
        Vector r = v;
        for (Eigen::Index j = 0; j < k; ++j) {
            r -= basis.col(j).dot(r) * basis.col(j);
        }
        // second pass keeps the residual orthogonal at high accuracy
        for (Eigen::Index j = 0; j < k; ++j) {
            r -= basis.col(j).dot(r) * basis.col(j);
        }
        if (r.norm() <= tol * own_norm || own_norm == 0.0) continue;
        basis.col(k++) = r / r.norm();
    }
    if (k == 0) throw AllZeroInput();
    return OrthonormalBasis{basis.leftCols(k)};
}

template <typename Derived>
inline OrthonormalBasis orthonormalize(const Eigen::MatrixBase<Derived>& columns, double tol) {
    std::vector<Vector> vs;
    vs.reserve(static_cast<std::size_t>(columns.cols()));
    for (Eigen::Index i = 0; i < columns.cols(); ++i) vs.push_back(columns.col(i));
    return orthonormalize(vs, tol);
}

inline ProjectionMatrix projector_of(const OrthonormalBasis& basis) {
    const Matrix raw = basis.columns * basis.columns.transpose();
    // (raw + raw^T)/2 is bit-exactly symmetric
    return ProjectionMatrix{0.5 * (raw + raw.transpose()), basis.rank()};
}

// Top-k left singular subspace of M. The span is unique whenever
// s_k > s_{k+1}; a near-degenerate spectrum sets *degenerate_warning instead
// of failing, since consumers only use the span.
inline OrthonormalBasis top_k_subspace(const Matrix& m, int k, bool* degenerate_warning = nullptr) {
    const int d = static_cast<int>(m.rows());
    const int n = static_cast<int>(m.cols());
    if (k < 1 || k > std::min(d, n)) throw Error("top_k_subspace: k out of range");
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    if (degenerate_warning != nullptr) {
        const double gap = (k < s.size()) ? s(k - 1) - s(k) : s(k - 1);
        *degenerate_warning = gap <= 1e-12 * s(0);
    }
    return OrthonormalBasis{svd.matrixU().leftCols(k)};
}

/// ||Sin Theta(U, V)|| = sqrt(1 - sigma_min(U^T V)^2) for equal-rank bases.
inline double sin_theta_distance(const OrthonormalBasis& u, const OrthonormalBasis& v) {
    if (u.rank() != v.rank()) throw RankMismatch();
    if (u.dim() != v.dim()) throw DimensionMismatch();
    // ||Sin Theta|| = ||(I - U U^T) V||; computing the sine directly avoids
    // the sqrt(1 - sigma^2) cancellation for nearly identical spans
    const Matrix residual = v.columns - u.columns * (u.columns.transpose() * v.columns);
    return std::min(1.0, operator_norm(residual));
}

inline double projector_distance(const ProjectionMatrix& p, const ProjectionMatrix& q) {
    if (p.dim() != q.dim()) throw DimensionMismatch();
    return operator_norm(p.entries - q.entries);
}

/// Membership test: x lies in the span within relative residual tol.
inline bool contains(const OrthonormalBasis& s, const Vector& x, double tol) {
    const double norm = x.norm();
    if (norm == 0.0) throw ZeroPoint();
    const Vector residual = x - s.columns * (s.columns.transpose() * x);
    return residual.norm() <= tol * norm;
}

}  // namespace dpss
