#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "ratbek/companion.hpp"
#include "ratbek/linalg.hpp"
#include "ratbek/realization.hpp"
#include "ratbek/types.hpp"

namespace ratbek {

/// Stacked map for the regime perturbing the polynomial part and C:
///
///   T(lambda) = [ R^{-1}; lambda R^{-1}; ...; lambda^m R^{-1}; W1 R^{-1} ],
///
/// with W1 = (A - lambda E)^{-1} B, of size ((m+1)n + r) x n. The trailing
/// block is absent when r = 0. Full column rank whenever R(lambda) is
/// invertible, since block 0 already is R^{-1}.
struct TMatrix {
    Matrix data;
    int n = 0;
    int m = 0;
    int r = 0;
};

/// Row-block mirror for the regime perturbing the polynomial part and B:
///
///   S(lambda) = [ R^{-1}, lambda R^{-1}, ..., lambda^m R^{-1}, R^{-1} What ],
///
/// with What = C (A - lambda E)^{-1}, of size n x ((m+1)n + r). Full row
/// rank whenever R(lambda) is invertible, so S S^+ = I_n holds by
/// construction.
struct SMatrix {
    Matrix data;
    int n = 0;
    int m = 0;
    int r = 0;
};

namespace detail {

inline Matrix inverse_of_r(const Realization& R, Complex lambda, const Tolerances& tol) {
    const Matrix Rl = R.eval(lambda, tol);
    if (sigma_min(Rl) <= tol.regularity * eval_scale(R, lambda, tol)) {
        throw SingularError("R(lambda) is numerically singular (lambda is an eigenvalue?)");
    }
    return lu_solve(Rl, Matrix::Identity(R.n(), R.n()));
}

}  // namespace detail

inline TMatrix make_t_matrix(const Realization& R, Complex lambda, const Tolerances& tol = {}) {
    const int n = R.n(), m = R.degree(), r = R.state_dim();
    const Matrix Rinv = detail::inverse_of_r(R, lambda, tol);
    TMatrix T{Matrix((m + 1) * n + r, n), n, m, r};
    const Vector powers = lambda_powers(lambda, m);
    for (int j = 0; j <= m; ++j) T.data.block(j * n, 0, n, n) = powers(j) * Rinv;
    if (r > 0) {
        const Matrix W1 = lu_solve(R.pencil_at(lambda), R.B());
        T.data.block((m + 1) * n, 0, r, n) = W1 * Rinv;
    }
    return T;
}

inline SMatrix make_s_matrix(const Realization& R, Complex lambda, const Tolerances& tol = {}) {
    const int n = R.n(), m = R.degree(), r = R.state_dim();
    const Matrix Rinv = detail::inverse_of_r(R, lambda, tol);
    SMatrix S{Matrix(n, (m + 1) * n + r), n, m, r};
    const Vector powers = lambda_powers(lambda, m);
    for (int j = 0; j <= m; ++j) S.data.block(0, j * n, n, n) = powers(j) * Rinv;
    if (r > 0) {
        const Matrix pencil_t = R.pencil_at(lambda).transpose();
        const Matrix What = lu_solve(pencil_t, R.C().transpose()).transpose();
        S.data.block(0, (m + 1) * n, n, r) = Rinv * What;
    }
    return S;
}

struct EtaWithOptimizer {
    double eta = 0.0;
    Vector direction;  ///< the unit vector attaining the minimum
};

/// Backward error when the polynomial coefficients and C may move:
/// 1/sigma_max(T(lambda)), attained along the top right singular vector.
inline EtaWithOptimizer eta_poly_and_c(const Realization& R, Complex lambda, const Tolerances& tol = {}) {
    const TMatrix T = make_t_matrix(R, lambda, tol);
    Eigen::JacobiSVD<Matrix> svd(T.data, Eigen::ComputeThinV);
    return {1.0 / svd.singularValues()(0), svd.matrixV().col(0)};
}

/// Per-direction backward error 1/|T(lambda) v| for a fixed unit v; the
/// rank-one perturbation -v (Tv)^* / |Tv|^2 achieves it.
inline double eta_poly_and_c_at(const Realization& R, Complex lambda, const Vector& v,
                                const Tolerances& tol = {}) {
    if (v.norm() == 0.0) throw ZeroVectorError("direction v must be nonzero");
    const TMatrix T = make_t_matrix(R, lambda, tol);
    return v.norm() / (T.data * v).norm();
}

struct EtaB {
    double variational = 0.0;  ///< min over unit x of |S^+ x| = 1/sigma_max(S)
    double paper = 0.0;        ///< 1/sigma_min(S), sigma_min = smallest nonzero
    Vector x;                  ///< optimizer of the variational value
};

/// Backward error when the polynomial coefficients and B may move. The two
/// candidate values disagree in general (they coincide only when S has a
/// single distinct singular value, e.g. n = 1); both are reported and the
/// oracle module adjudicates empirically.
inline EtaB eta_poly_and_b(const Realization& R, Complex lambda, const Tolerances& tol = {}) {
    const SMatrix S = make_s_matrix(R, lambda, tol);
    Eigen::JacobiSVD<Matrix> svd(S.data, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    EtaB out;
    out.variational = 1.0 / s(0);
    out.paper = 1.0 / s(s.size() - 1);
    out.x = svd.matrixU().col(0);
    return out;
}

/// Per-vector backward error |S(lambda)^+ x| for a fixed unit x (the least
/// Frobenius norm of a stacked column block with S Delta x = -x).
inline double eta_poly_and_b_at(const Realization& R, Complex lambda, const Vector& x,
                                const Tolerances& tol = {}) {
    if (x.norm() == 0.0) throw ZeroVectorError("direction x must be nonzero");
    const SMatrix S = make_s_matrix(R, lambda, tol);
    return pinv_apply(S.data, x / x.norm()).norm();
}

/// Upper bound sigma_min(R(lambda)) / |(1, lambda, ..., lambda^m)|_2 on the
/// backward error when only the polynomial part may move.
inline double eta_poly_only_bound(const Realization& R, Complex lambda, const Tolerances& tol = {}) {
    const double smin = sigma_min(R.eval(lambda, tol));
    return smin / lambda_norm(lambda, R.degree());
}

/// Polynomial eigenvalue backward error sigma_min(P(lambda)) / |Lambda_m|_q
/// with q the Holder conjugate of the selector's p.
inline double eta_poly(const std::vector<Matrix>& coeffs, Complex lambda, NormSelector sel = {}) {
    if (coeffs.empty()) throw DimensionError("empty coefficient list");
    const int m = static_cast<int>(coeffs.size()) - 1;
    Matrix acc = coeffs.back();
    for (int j = m - 1; j >= 0; --j) acc = lambda * acc + coeffs[static_cast<std::size_t>(j)];
    return sigma_min(acc) / lambda_norm(lambda, m, holder_conjugate(sel.p));
}

/// Eigenpair backward error |P(lambda) x| / ((sum_i |lambda|^i |A_i|_2) |x|).
inline double eta_poly_pair(const std::vector<Matrix>& coeffs, Complex lambda, const Vector& x) {
    if (coeffs.empty()) throw DimensionError("empty coefficient list");
    if (x.norm() == 0.0) throw ZeroVectorError("eigenvector x must be nonzero");
    const int m = static_cast<int>(coeffs.size()) - 1;
    Matrix acc = coeffs.back();
    for (int j = m - 1; j >= 0; --j) acc = lambda * acc + coeffs[static_cast<std::size_t>(j)];
    double denom = 0.0;
    double p = 1.0;
    for (int i = 0; i <= m; ++i) {
        denom += p * spectral_norm(coeffs[static_cast<std::size_t>(i)]);
        p *= std::abs(lambda);
    }
    if (denom == 0.0) throw DegenerateError("all polynomial coefficients are zero");
    return (acc * x).norm() / (denom * x.norm());
}

/// Backward error of a pencil value: sigma_min(C1(lambda)) / |(1, lambda)|_q.
/// Zero when the pencil is singular at lambda.
inline double eta_companion(const CompanionPencil& P, Complex lambda, HolderP p = HolderP::Two) {
    return sigma_min(P.at(lambda)) / lambda_norm(lambda, 1, holder_conjugate(p));
}

struct RatioBound {
    double ratio = 0.0;  ///< eta_companion / eta_poly_only_bound
    double bound = 0.0;  ///< sqrt(m/2) sigma_min(C1) / sigma_min(R)
    bool holds = false;  ///< ratio >= bound - 1e-12
};

/// Checks the lower bound on how much the companion backward error can
/// exceed the polynomial-only one. The underlying inequality assumes
/// |lambda| >= 1; smaller lambda is refused rather than reported as a claim.
inline RatioBound check_ratio_bound(const Realization& R, Complex lambda, const Tolerances& tol = {}) {
    if (std::abs(lambda) < 1.0) throw DomainError("ratio bound requires |lambda| >= 1");
    const CompanionPencil P = build_companion(R);
    const double sRmin = sigma_min(R.eval(lambda, tol));
    if (sRmin <= tol.regularity * eval_scale(R, lambda, tol)) {
        throw SingularError("lambda is (numerically) an eigenvalue; the ratio is 0/0");
    }
    const double sC = sigma_min(P.at(lambda));
    const double eta_c1 = sC / lambda_norm(lambda, 1);
    const double eta_r = sRmin / lambda_norm(lambda, R.degree());
    RatioBound out;
    out.ratio = eta_c1 / eta_r;
    out.bound = std::sqrt(static_cast<double>(R.degree()) / 2.0) * sC / sRmin;
    out.holds = out.ratio >= out.bound - 1e-12;
    return out;
}

struct SigmaValues {
    double sigma_max_t = 0.0;
    double sigma_max_s = 0.0;
    double sigma_min_s = 0.0;
    double sigma_min_r = 0.0;
    std::optional<double> sigma_min_c1;  ///< absent when m = 0
};

/// Everything the bwerr surface reports for one lambda.
struct BackwardErrorReport {
    Complex lambda;
    double eta_poly_bound = 0.0;                ///< sigma_min(R)/|Lambda_m|, rational poly-only bound
    double eta_poly_exact = 0.0;                ///< sigma_min(P)/|Lambda_m|, polynomial part alone
    std::optional<double> eta_pair;             ///< eigenpair error, when an x was supplied
    double eta_c = 0.0;                         ///< 1/sigma_max(T)
    double eta_b_variational = 0.0;             ///< 1/sigma_max(S)
    double eta_b_paper = 0.0;                   ///< 1/sigma_min(S)
    std::optional<double> eta_companion_value;  ///< absent when m = 0
    SigmaValues sigma;
    bool near_eigenvalue = false;  ///< eta values reported as 0: T/S not constructible
};

/// Compute the full report. At a lambda within the regularity tolerance of
/// an eigenvalue the T/S quantities are reported as 0 with the flag set
/// instead of dividing by a huge sigma.
inline BackwardErrorReport compute_report(const Realization& R, Complex lambda,
                                          const Tolerances& tol = {},
                                          const std::optional<Vector>& x = std::nullopt) {
    BackwardErrorReport rep;
    rep.lambda = lambda;

    const Matrix Rl = R.eval(lambda, tol);
    const double sRmin = sigma_min(Rl);
    rep.sigma.sigma_min_r = sRmin;
    const double lam_norm = lambda_norm(lambda, R.degree());
    rep.eta_poly_bound = sRmin / lam_norm;
    rep.eta_poly_exact = sigma_min(R.eval_poly(lambda)) / lam_norm;

    if (x.has_value()) {
        try {
            rep.eta_pair = eta_poly_pair(R.poly(), lambda, *x);
        } catch (const DegenerateError&) {
        }
    }

    if (R.degree() >= 1) {
        const CompanionPencil P = build_companion(R);
        rep.sigma.sigma_min_c1 = sigma_min(P.at(lambda));
        rep.eta_companion_value = *rep.sigma.sigma_min_c1 / lambda_norm(lambda, 1);
    }

    if (sRmin <= tol.regularity * eval_scale(R, lambda, tol)) {
        rep.near_eigenvalue = true;
        return rep;
    }

    const TMatrix T = make_t_matrix(R, lambda, tol);
    rep.sigma.sigma_max_t = spectral_norm(T.data);
    rep.eta_c = 1.0 / rep.sigma.sigma_max_t;

    const SMatrix S = make_s_matrix(R, lambda, tol);
    const auto sS = sigma_extremes(S.data);
    rep.sigma.sigma_max_s = sS.max;
    rep.sigma.sigma_min_s = sS.min;
    rep.eta_b_variational = 1.0 / sS.max;
    rep.eta_b_paper = 1.0 / sS.min;
    return rep;
}

}  // namespace ratbek
