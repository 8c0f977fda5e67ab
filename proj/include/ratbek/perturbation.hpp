#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "ratbek/backward_error.hpp"
#include "ratbek/linalg.hpp"
#include "ratbek/realization.hpp"
#include "ratbek/types.hpp"

namespace ratbek {

enum class Regime { PolyAndC, PolyAndB };

/// A structured perturbation of the polynomial coefficients plus exactly one
/// of C or B, built to make lambda_target an exact eigenvalue.
struct Perturbation {
    Regime regime = Regime::PolyAndC;
    std::vector<Matrix> dpoly;  ///< m+1 blocks, each n x n
    std::optional<Matrix> dC;   ///< n x r, present iff regime == PolyAndC
    std::optional<Matrix> dB;   ///< r x n, present iff regime == PolyAndB
    Complex lambda_target;
    double total_norm = 0.0;  ///< sqrt(sum of squared Frobenius norms of all blocks)

    double recompute_norm() const {
        double acc = 0.0;
        for (const Matrix& D : dpoly) acc += D.squaredNorm();
        if (dC) acc += dC->squaredNorm();
        if (dB) acc += dB->squaredNorm();
        return std::sqrt(acc);
    }
};

/// Minimal perturbation of (A_0..A_m, C) making lambda an exact eigenvalue.
/// v defaults to the top right singular vector of T(lambda), in which case
/// the total norm equals 1/sigma_max(T(lambda)); any other unit v gives the
/// per-direction optimum 1/|T(lambda) v|.
inline Perturbation min_perturbation_c(const Realization& R, Complex lambda,
                                       std::optional<Vector> v = std::nullopt,
                                       const Tolerances& tol = {}) {
    const int n = R.n(), m = R.degree(), r = R.state_dim();
    const TMatrix T = make_t_matrix(R, lambda, tol);

    Vector dir;
    if (v.has_value()) {
        if (v->size() != n) throw DimensionError("direction v must have length n");
        if (v->norm() == 0.0) throw ZeroVectorError("direction v must be nonzero");
        dir = *v / v->norm();
    } else {
        dir = top_right_singular_vector(T.data);
    }

    const Vector u = T.data * dir;  // stacked [R^-1 v; lambda R^-1 v; ...; W1 R^-1 v]
    const Matrix full = -(dir * u.adjoint()) / u.squaredNorm();  // n x ((m+1)n + r)

    Perturbation p;
    p.regime = Regime::PolyAndC;
    p.lambda_target = lambda;
    p.dpoly.reserve(m + 1);
    for (int j = 0; j <= m; ++j) p.dpoly.push_back(full.block(0, j * n, n, n));
    p.dC = full.block(0, (m + 1) * n, n, r);
    p.total_norm = 1.0 / u.norm();
    return p;
}

/// Minimal perturbation of (A_0..A_m, B). x defaults to the optimizer of the
/// variational value 1/sigma_max(S(lambda)); any other unit x gives the
/// least-norm solution |S(lambda)^+ x|.
inline Perturbation min_perturbation_b(const Realization& R, Complex lambda,
                                       std::optional<Vector> x = std::nullopt,
                                       const Tolerances& tol = {}) {
    const int n = R.n(), m = R.degree(), r = R.state_dim();
    const SMatrix S = make_s_matrix(R, lambda, tol);

    Vector dir;
    if (x.has_value()) {
        if (x->size() != n) throw DimensionError("direction x must have length n");
        if (x->norm() == 0.0) throw ZeroVectorError("direction x must be nonzero");
        dir = *x / x->norm();
    } else {
        dir = top_left_singular_vector(S.data);
    }

    const Vector d = -pinv_apply(S.data, dir);       // least-norm solution of S d = -x
    const Matrix full = d * dir.adjoint();           // ((m+1)n + r) x n

    Perturbation p;
    p.regime = Regime::PolyAndB;
    p.lambda_target = lambda;
    p.dpoly.reserve(m + 1);
    for (int j = 0; j <= m; ++j) p.dpoly.push_back(full.block(j * n, 0, n, n));
    p.dB = full.block((m + 1) * n, 0, r, n);
    p.total_norm = d.norm();
    return p;
}

/// R with the perturbation added onto its blocks. A and E are untouched, so
/// the pole structure of the result is that of R.
inline Realization apply(const Realization& R, const Perturbation& p) {
    const int n = R.n(), m = R.degree(), r = R.state_dim();
    if (static_cast<int>(p.dpoly.size()) != m + 1) throw DimensionError("perturbation degree mismatch");
    for (const Matrix& D : p.dpoly) {
        if (D.rows() != n || D.cols() != n) throw DimensionError("perturbation coefficient block is not n x n");
    }
    if (p.regime == Regime::PolyAndC) {
        if (!p.dC || p.dB) throw DimensionError("PolyAndC perturbation must carry dC and not dB");
        if (p.dC->rows() != n || p.dC->cols() != r) throw DimensionError("dC must be n x r");
    } else {
        if (!p.dB || p.dC) throw DimensionError("PolyAndB perturbation must carry dB and not dC");
        if (p.dB->rows() != r || p.dB->cols() != n) throw DimensionError("dB must be r x n");
    }

    std::vector<Matrix> poly;
    poly.reserve(m + 1);
    for (int j = 0; j <= m; ++j) poly.push_back(R.poly()[static_cast<std::size_t>(j)] + p.dpoly[static_cast<std::size_t>(j)]);
    Matrix C = R.C(), B = R.B();
    if (p.regime == Regime::PolyAndC) C += *p.dC;
    else B += *p.dB;
    return Realization(std::move(poly), std::move(C), R.A(), R.E(), std::move(B));
}

struct ExactnessCheck {
    double sigma = 0.0;  ///< sigma_min of the perturbed value at lambda
    bool ok = false;
    Vector witness;  ///< right singular vector: the exact eigenvector if ok
};

/// Is lambda an exact eigenvalue of R + p, up to tolerance? The relative
/// part is measured against the cancellation-free evaluation scale of the
/// perturbed function, which stays meaningful for n = 1 where sigma_min of a
/// 1 x 1 value equals its norm.
inline ExactnessCheck verify_exactness(const Realization& R, const Perturbation& p, Complex lambda,
                                       const Tolerances& tol = {}) {
    const Realization perturbed = apply(R, p);
    const Matrix M = perturbed.eval(lambda, tol);
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    ExactnessCheck out;
    out.sigma = s(s.size() - 1);
    out.ok = out.sigma <= tol.verify * eval_scale(perturbed, lambda, tol) + tol.verify_abs;
    out.witness = svd.matrixV().col(svd.matrixV().cols() - 1);
    return out;
}

}  // namespace ratbek
