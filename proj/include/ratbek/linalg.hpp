#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <limits>

#include "ratbek/types.hpp"

namespace ratbek {

/// Largest singular value; 0 for an empty matrix.
inline double spectral_norm(const Matrix& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

/// Smallest of the min(rows, cols) singular values; 0 for an empty matrix.
inline double sigma_min(const Matrix& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(M);
    const auto& s = svd.singularValues();
    return s(s.size() - 1);
}

struct SigmaExtremes {
    double max = 0.0;
    double min = 0.0;
};

inline SigmaExtremes sigma_extremes(const Matrix& M) {
    if (M.rows() == 0 || M.cols() == 0) return {};
    Eigen::JacobiSVD<Matrix> svd(M);
    const auto& s = svd.singularValues();
    return {s(0), s(s.size() - 1)};
}

/// LU-based determinant; the empty matrix has determinant 1 by convention.
inline Complex determinant(const Matrix& M) {
    if (M.rows() == 0) return Complex(1.0, 0.0);
    return M.determinant();
}

/// Solve M * X = RHS by partial-pivot LU. Callers are expected to have
/// screened M for near-singularity beforehand.
inline Matrix lu_solve(const Matrix& M, const Matrix& rhs) {
    return M.partialPivLu().solve(rhs);
}

/// Moore-Penrose least-norm action S^+ x computed through a thin SVD.
inline Vector pinv_apply(const Matrix& S, const Vector& x) {
    Eigen::JacobiSVD<Matrix> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double cutoff =
        std::numeric_limits<double>::epsilon() * std::max(S.rows(), S.cols()) * (s.size() > 0 ? s(0) : 0.0);
    Vector coeffs = svd.matrixU().adjoint() * x;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        coeffs(i) = s(i) > cutoff ? coeffs(i) / s(i) : Complex(0.0, 0.0);
    }
    return svd.matrixV() * coeffs;
}

/// Right singular vector for the largest singular value.
inline Vector top_right_singular_vector(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinV);
    return svd.matrixV().col(0);
}

/// Left singular vector for the largest singular value.
inline Vector top_left_singular_vector(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU);
    return svd.matrixU().col(0);
}

/// Right singular vector for the smallest singular value.
inline Vector bottom_right_singular_vector(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinV);
    return svd.matrixV().col(svd.matrixV().cols() - 1);
}

}  // namespace ratbek
