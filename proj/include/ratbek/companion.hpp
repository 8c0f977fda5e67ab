#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "ratbek/linalg.hpp"
#include "ratbek/realization.hpp"
#include "ratbek/types.hpp"

namespace ratbek {

/// The (nm+r) x (nm+r) companion pencil C1(lambda) = lambda X + Y of a
/// realization with degree m >= 1:
///
///   X = blockdiag(A_m, I_n, ..., I_n, -E)
///   Y = | A_{m-1}  A_{m-2} ... A_0 |  C |
///       |  -I_n                    |    |
///       |          ...             |    |
///       |            -I_n       0  |    |
///       |  0   ...        0   -B   |  A |
///
/// The -B block makes det C1(lambda) = det(A - lambda E) det R(lambda) hold
/// for R(lambda) = P(lambda) + C(A - lambda E)^{-1} B, and the state part of
/// an eigenvector comes out as w = +(A - lambda E)^{-1} B x.
struct CompanionPencil {
    Matrix X;
    Matrix Y;
    int n = 0;
    int m = 0;
    int r = 0;

    int size() const { return n * m + r; }

    Matrix at(Complex lambda) const { return lambda * X + Y; }
};

inline CompanionPencil build_companion(const Realization& R) {
    const int n = R.n(), m = R.degree(), r = R.state_dim();
    if (m < 1) throw DegreeError("companion linearization requires degree m >= 1");
    const int N = n * m + r;

    CompanionPencil P;
    P.n = n;
    P.m = m;
    P.r = r;
    P.X = Matrix::Zero(N, N);
    P.Y = Matrix::Zero(N, N);

    P.X.block(0, 0, n, n) = R.poly()[static_cast<std::size_t>(m)];
    for (int j = 1; j < m; ++j) P.X.block(j * n, j * n, n, n) = Matrix::Identity(n, n);
    if (r > 0) P.X.block(n * m, n * m, r, r) = -R.E();

    for (int j = 0; j < m; ++j) {
        P.Y.block(0, j * n, n, n) = R.poly()[static_cast<std::size_t>(m - 1 - j)];
    }
    for (int j = 1; j < m; ++j) P.Y.block(j * n, (j - 1) * n, n, n) = -Matrix::Identity(n, n);
    if (r > 0) {
        P.Y.block(0, n * m, n, r) = R.C();
        P.Y.block(n * m, (m - 1) * n, r, n) = -R.B();
        P.Y.block(n * m, n * m, r, r) = R.A();
    }
    return P;
}

/// Relative mismatch between det C1(lambda) and det(A - lambda E) det R(lambda);
/// a cheap consistency check between the pencil layout and the evaluation path.
inline double companion_det_identity_error(const Realization& R, Complex lambda, const Tolerances& tol = {}) {
    const CompanionPencil P = build_companion(R);
    const Complex lhs = determinant(P.at(lambda));
    const Complex rhs = determinant(R.pencil_at(lambda)) * determinant(R.eval(lambda, tol));
    const double scale = std::max(std::abs(lhs), std::numeric_limits<double>::min());
    return std::abs(lhs - rhs) / scale;
}

/// Finite eigenpairs of a pencil, as produced by `eigensolve`.
struct PencilEigen {
    Complex shift;
    std::vector<Complex> lambdas;          ///< finite eigenvalues, sorted by (re, im)
    std::vector<Vector> vectors;           ///< matching right eigenvectors z
    std::vector<bool> residual_ok;         ///< pencil residual within tolerance
    std::vector<Vector> infinite_vectors;  ///< eigenvectors with mu = 0 (lambda = infinity)

    int infinite_count() const { return static_cast<int>(infinite_vectors.size()); }

    std::vector<std::pair<Complex, Vector>> pairs() const {
        std::vector<std::pair<Complex, Vector>> out;
        out.reserve(lambdas.size());
        for (std::size_t i = 0; i < lambdas.size(); ++i) out.emplace_back(lambdas[i], vectors[i]);
        return out;
    }
};

/// Solve (lambda X + Y) z = 0 by shift-and-invert reduction to one standard
/// dense eigendecomposition of M = (shift X + Y)^{-1} X. Each eigenvalue mu
/// of M maps to lambda = shift - 1/mu; mu = 0 is an infinite eigenvalue and
/// is reported separately rather than dropped.
inline PencilEigen eigensolve(const CompanionPencil& P, Complex shift, const Tolerances& tol = {}) {
    const Matrix Cs = P.at(shift);
    const auto s = sigma_extremes(Cs);
    if (s.min <= tol.pole * s.max || s.max == 0.0) {
        throw ShiftSingularError("shifted pencil is numerically singular; retry with another shift");
    }
    const Matrix M = lu_solve(Cs, P.X);

    Eigen::ComplexEigenSolver<Matrix> es(M);
    if (es.info() != Eigen::Success) {
        throw Error("dense eigendecomposition did not converge");
    }

    const double mu_scale = es.eigenvalues().cwiseAbs().maxCoeff();
    const double mu_cutoff = 100.0 * std::numeric_limits<double>::epsilon() * mu_scale;

    const double nX = spectral_norm(P.X);
    const double nY = spectral_norm(P.Y);

    PencilEigen out;
    out.shift = shift;
    std::vector<std::pair<Complex, Vector>> finite;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const Complex mu = es.eigenvalues()(i);
        const Vector z = es.eigenvectors().col(i);
        if (std::abs(mu) <= mu_cutoff) {
            out.infinite_vectors.push_back(z);
        } else {
            finite.emplace_back(shift - 1.0 / mu, z);
        }
    }
    std::sort(finite.begin(), finite.end(), [](const auto& a, const auto& b) {
        if (a.first.real() != b.first.real()) return a.first.real() < b.first.real();
        return a.first.imag() < b.first.imag();
    });
    for (auto& [lambda, z] : finite) {
        const double res = (P.at(lambda) * z).norm();
        out.residual_ok.push_back(res <= tol.eig * (nX + std::abs(lambda) * nY) * z.norm());
        out.lambdas.push_back(lambda);
        out.vectors.push_back(std::move(z));
    }
    return out;
}

/// `eigensolve` with the default shift 0 and up to five pseudo-random
/// retries on the unit circle scaled by 1 + |Y|/|X| when the shifted pencil
/// is singular. X = diag(A_m, I, ..., -E) may be singular, so a plain
/// X^{-1} Y reduction would not be robust.
inline PencilEigen eigensolve_auto(const CompanionPencil& P, std::uint64_t seed = 0,
                                   const Tolerances& tol = {}) {
    try {
        return eigensolve(P, Complex(0.0, 0.0), tol);
    } catch (const ShiftSingularError&) {
    }
    std::mt19937_64 rng(split_seed(seed, 0x5afe));
    std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
    const double nX = spectral_norm(P.X);
    const double radius = 1.0 + (nX > 0.0 ? spectral_norm(P.Y) / nX : spectral_norm(P.Y));
    for (int attempt = 0; attempt < 5; ++attempt) {
        const double a = angle(rng);
        try {
            return eigensolve(P, radius * Complex(std::cos(a), std::sin(a)), tol);
        } catch (const ShiftSingularError&) {
        }
    }
    throw ShiftSingularError("no usable shift found in five attempts");
}

/// Eigenvalue, unit eigenvector of R, and recovered state vector, with the
/// bookkeeping recorded while unpacking the companion eigenvector.
struct EigenTriple {
    Complex lambda;
    Vector x;  ///< unit 2-norm
    Vector w;  ///< state part, scaled consistently with x
    Vector z;  ///< raw companion eigenvector
    std::optional<double> residual;    ///< |R(lambda) x| / |R(lambda)|, absent at a pole
    std::optional<double> w_residual;  ///< |w - (A - lambda E)^{-1} B x|, absent at a pole
    double block_residual = 0.0;       ///< deviation of z from its lambda-power block structure
};

/// Unpack companion eigenvectors z = [lambda^{m-1} x; ...; x; w] into
/// eigentriples of R. Triples at a pole are kept with their residuals marked
/// unavailable.
inline std::vector<EigenTriple> recover_triples(const Realization& R,
                                                const std::vector<std::pair<Complex, Vector>>& pairs,
                                                const Tolerances& tol = {}) {
    const int n = R.n(), m = R.degree(), r = R.state_dim();
    std::vector<EigenTriple> out;
    out.reserve(pairs.size());
    for (const auto& [lambda, z] : pairs) {
        if (z.size() != n * m + r || z.norm() == 0.0) throw DimensionError("companion eigenvector of wrong size or zero");
        EigenTriple t;
        t.lambda = lambda;
        t.z = z;

        const Vector x_raw = z.segment((m - 1) * n, n);
        if (x_raw.norm() == 0.0) throw ZeroVectorError("eigenvector block holding x is zero");
        Eigen::Index k = 0;
        x_raw.cwiseAbs().maxCoeff(&k);
        const Complex scale = (x_raw(k) / std::abs(x_raw(k))) * x_raw.norm();
        t.x = x_raw / scale;
        t.w = z.tail(r) / scale;

        double worst = 0.0;
        Complex p = Complex(1.0, 0.0);
        for (int j = m - 1; j >= 0; --j) {
            worst = std::max(worst, (z.segment(j * n, n) - p * x_raw).norm());
            p *= lambda;
        }
        t.block_residual = worst / z.norm();

        if (!R.is_pole(lambda, tol)) {
            const Matrix Rl = R.eval(lambda, tol);
            const auto s = sigma_extremes(Rl);
            t.residual = s.max > 0.0 ? (Rl * t.x).norm() / s.max : 0.0;
            if (r > 0) {
                const Vector w_check = lu_solve(R.pencil_at(lambda), R.B() * t.x);
                t.w_residual = (t.w - w_check).norm();
            } else {
                t.w_residual = 0.0;
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace ratbek
