#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ratbek/backward_error.hpp"
#include "ratbek/perturbation.hpp"
#include "ratbek/realization.hpp"
#include "ratbek/types.hpp"

namespace ratbek {

namespace detail {

inline Vector random_unit_complex(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(n);
    do {
        for (int i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
    } while (v.norm() == 0.0);
    return v / v.norm();
}

inline Matrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = Complex(gauss(rng), gauss(rng));
    return M;
}

inline Perturbation slice_c_block(const Matrix& full, int n, int m, int r, Complex lambda) {
    Perturbation p;
    p.regime = Regime::PolyAndC;
    p.lambda_target = lambda;
    for (int j = 0; j <= m; ++j) p.dpoly.push_back(full.block(0, j * n, n, n));
    p.dC = full.block(0, (m + 1) * n, n, r);
    p.total_norm = p.recompute_norm();
    return p;
}

inline Perturbation slice_b_block(const Matrix& full, int n, int m, int r, Complex lambda) {
    Perturbation p;
    p.regime = Regime::PolyAndB;
    p.lambda_target = lambda;
    for (int j = 0; j <= m; ++j) p.dpoly.push_back(full.block(j * n, 0, n, n));
    p.dB = full.block((m + 1) * n, 0, r, n);
    p.total_norm = p.recompute_norm();
    return p;
}

}  // namespace detail

struct SampleOptions {
    std::optional<Vector> direction;  ///< fixed v (or x) instead of random draws
    double null_scale = 1.0;          ///< 0 reduces every sample to its least-norm core
    int verify_every = 97;            ///< exactness-check stride over the samples
    std::uint64_t seed = 0;
};

struct SampleResult {
    double min_norm = 0.0;
    int count = 0;
    int verified = 0;
    bool all_verified_ok = true;
};

/// Draw random feasible perturbations in the poly+C regime (least-norm core
/// for a random direction plus a random element of the constraint's null
/// space) and report the smallest total norm seen. Every sample is feasible
/// by construction, so the minimum can never undercut the true backward
/// error; a subsample is pushed through verify_exactness as a cross-check.
inline SampleResult sample_feasible_c(const Realization& R, Complex lambda, int count,
                                      const SampleOptions& opts = {}, const Tolerances& tol = {}) {
    const int n = R.n(), m = R.degree(), r = R.state_dim();
    const int N = (m + 1) * n + r;
    const TMatrix T = make_t_matrix(R, lambda, tol);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SampleResult out;
    out.count = count;
    out.min_norm = std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) {
        const Vector v = opts.direction ? (*opts.direction / opts.direction->norm())
                                        : detail::random_unit_complex(n, rng);
        const Vector u = T.data * v;
        Matrix full = -(v * u.adjoint()) / u.squaredNorm();
        if (opts.null_scale != 0.0) {
            Matrix G = detail::random_complex(n, N, rng);
            Matrix ns = G - (G * u) * u.adjoint() / u.squaredNorm();  // annihilates u
            // the projector is identically zero when the constraint leaves no
            // freedom (N = 1); anything at roundoff level must not be scaled up
            const double ns_norm = ns.norm();
            if (ns_norm > 1e-8 * G.norm()) {
                const double c = opts.null_scale * std::abs(gauss(rng)) / (u.norm() * ns_norm);
                full += c * ns;
            }
        }
        const double norm = full.norm();
        out.min_norm = std::min(out.min_norm, norm);
        if (i % opts.verify_every == 0) {
            const Perturbation p = detail::slice_c_block(full, n, m, r, lambda);
            ++out.verified;
            if (!verify_exactness(R, p, lambda, tol).ok) out.all_verified_ok = false;
        }
    }
    return out;
}

/// Mirror of sample_feasible_c for the poly+B regime.
inline SampleResult sample_feasible_b(const Realization& R, Complex lambda, int count,
                                      const SampleOptions& opts = {}, const Tolerances& tol = {}) {
    const int n = R.n(), m = R.degree(), r = R.state_dim();
    const int N = (m + 1) * n + r;
    const SMatrix S = make_s_matrix(R, lambda, tol);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SampleResult out;
    out.count = count;
    out.min_norm = std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) {
        const Vector x = opts.direction ? (*opts.direction / opts.direction->norm())
                                        : detail::random_unit_complex(n, rng);
        const Vector d_core = -pinv_apply(S.data, x);
        Matrix full = d_core * x.adjoint();
        if (opts.null_scale != 0.0) {
            // component of d free to roam null(S)
            const Vector g = detail::random_complex(N, 1, rng).col(0);
            Vector ns = g - pinv_apply(S.data, S.data * g);
            // block orthogonal to x in the column direction
            Matrix G2 = detail::random_complex(N, n, rng);
            Matrix perp = G2 - (G2 * x) * x.adjoint();
            // either projector can vanish identically (square S, or n = 1);
            // roundoff-level remainders must not be scaled back up
            const double c1 = ns.norm() > 1e-8 * g.norm()
                                  ? opts.null_scale * std::abs(gauss(rng)) * d_core.norm() / ns.norm()
                                  : 0.0;
            const double c2 = perp.norm() > 1e-8 * G2.norm()
                                  ? opts.null_scale * std::abs(gauss(rng)) * d_core.norm() / perp.norm()
                                  : 0.0;
            full += (c1 * ns) * x.adjoint() + c2 * perp;
        }
        const double norm = full.norm();
        out.min_norm = std::min(out.min_norm, norm);
        if (i % opts.verify_every == 0) {
            const Perturbation p = detail::slice_b_block(full, n, m, r, lambda);
            ++out.verified;
            if (!verify_exactness(R, p, lambda, tol).ok) out.all_verified_ok = false;
        }
    }
    return out;
}

struct MinimizeOptions {
    int restarts = 8;
    int max_iterations = 500;
    double rel_decrease_tol = 1e-12;
    double agree_tol = 1e-6;  ///< restart spread that triggers the warning
    std::uint64_t seed = 0;
};

struct OracleMinimum {
    double eta = 0.0;
    Vector x;
    bool convergence_warning = false;  ///< restarts disagreed beyond agree_tol
    int restarts = 0;
};

/// Minimize |S^+ x| over the unit sphere by multi-start projected gradient
/// descent with backtracking line search. Uses only linear solves (no
/// singular value decomposition of S): |S^+ x|^2 = x^* (S S^*)^{-1} x since
/// S has full row rank, so agreement with 1/sigma_max(S) is independent
/// evidence rather than circularity.
inline OracleMinimum minimize_eta_b(const SMatrix& S, const MinimizeOptions& opts = {}) {
    const int n = S.n;
    const Matrix gram = S.data * S.data.adjoint();
    const Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success) throw SingularError("S S^* is not factorizable; S is rank-deficient");
    const auto apply_m = [&](const Vector& x) -> Vector { return ldlt.solve(x); };

    OracleMinimum best;
    best.eta = std::numeric_limits<double>::infinity();
    best.restarts = opts.restarts;
    std::vector<double> finals;
    for (int restart = 0; restart < opts.restarts; ++restart) {
        std::mt19937_64 rng(split_seed(opts.seed, static_cast<std::uint64_t>(restart)));
        Vector x = detail::random_unit_complex(n, rng);
        Vector g = apply_m(x);
        double f = std::real(x.dot(g));  // x^* M x
        double step = 1.0;
        for (int it = 0; it < opts.max_iterations; ++it) {
            const Vector rgrad = 2.0 * (g - f * x);  // gradient projected to the sphere
            const double gnorm2 = rgrad.squaredNorm();
            if (gnorm2 <= 1e-30 * f * f) break;

            const auto value_at = [&](double a, Vector& cand_out, Vector& g_out) {
                cand_out = x - a * rgrad;
                cand_out /= cand_out.norm();
                g_out = apply_m(cand_out);
                return std::real(cand_out.dot(g_out));
            };

            // backtrack to the first step satisfying the sufficient decrease
            double alpha = step * 2.0;
            Vector cand, gc;
            double fc = 0.0;
            bool accepted = false;
            for (int bt = 0; bt < 80; ++bt) {
                fc = value_at(alpha, cand, gc);
                if (fc <= f - 1e-4 * alpha * gnorm2) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) break;
            // refine: a first-acceptable step can sit on an oscillatory
            // multiplier and crawl, so keep halving while that strictly helps
            Vector cand2, gc2;
            for (int rf = 0; rf < 30; ++rf) {
                const double f2 = value_at(alpha * 0.5, cand2, gc2);
                if (f2 >= fc) break;
                alpha *= 0.5;
                fc = f2;
                cand.swap(cand2);
                gc.swap(gc2);
            }

            x = cand;
            g = gc;
            const double decrease = f - fc;
            f = fc;
            step = alpha;
            if (decrease < opts.rel_decrease_tol * std::max(f, 1e-300)) break;
        }
        finals.push_back(std::sqrt(f));
        if (std::sqrt(f) < best.eta) {
            best.eta = std::sqrt(f);
            best.x = x;
        }
    }
    const double spread = *std::max_element(finals.begin(), finals.end()) -
                          *std::min_element(finals.begin(), finals.end());
    best.convergence_warning = spread > opts.agree_tol * std::max(best.eta, 1e-300);
    return best;
}

inline OracleMinimum minimize_eta_b(const Realization& R, Complex lambda,
                                    const MinimizeOptions& opts = {}, const Tolerances& tol = {}) {
    return minimize_eta_b(make_s_matrix(R, lambda, tol), opts);
}

enum class Winner { Variational, Paper, Tie };

inline const char* to_string(Winner w) {
    switch (w) {
        case Winner::Variational: return "variational";
        case Winner::Paper: return "paper";
        default: return "tie";
    }
}

struct AdjudicateConfig {
    MinimizeOptions minimize;
    double tie_tol = 1e-6;
    std::uint64_t seed = 0;
};

/// One adjudication outcome: which closed-form candidate the independent
/// search agrees with on this instance.
struct AdjudicationRecord {
    std::string instance_id;
    Complex lambda;
    double eta_oracle = 0.0;
    double eta_variational = 0.0;
    double eta_paper = 0.0;
    Winner winner = Winner::Tie;
    int samples = 0;  ///< restarts spent by the search
    std::uint64_t seed = 0;
    bool feasible = false;  ///< the perturbation induced by x* verified exact
    bool convergence_warning = false;
};

/// Run the independent minimizer and compare its value against the two
/// closed-form candidates. The verdict is an empirical output of the run,
/// never an assertion.
inline AdjudicationRecord adjudicate(const Realization& R, Complex lambda,
                                     const AdjudicateConfig& cfg = {}, const Tolerances& tol = {},
                                     const std::string& instance_id = "") {
    MinimizeOptions mopts = cfg.minimize;
    mopts.seed = cfg.seed;
    const EtaB candidates = eta_poly_and_b(R, lambda, tol);
    const OracleMinimum found = minimize_eta_b(R, lambda, mopts, tol);

    AdjudicationRecord rec;
    rec.instance_id = instance_id;
    rec.lambda = lambda;
    rec.eta_oracle = found.eta;
    rec.eta_variational = candidates.variational;
    rec.eta_paper = candidates.paper;
    rec.samples = found.restarts;
    rec.seed = cfg.seed;
    rec.convergence_warning = found.convergence_warning;

    const Perturbation induced = min_perturbation_b(R, lambda, found.x, tol);
    rec.feasible = verify_exactness(R, induced, lambda, tol).ok;

    const double scale = std::max({rec.eta_variational, rec.eta_paper, 1e-300});
    if (std::abs(rec.eta_variational - rec.eta_paper) <= cfg.tie_tol * scale) {
        rec.winner = Winner::Tie;
    } else if (std::abs(rec.eta_oracle - rec.eta_variational) < std::abs(rec.eta_oracle - rec.eta_paper)) {
        rec.winner = Winner::Variational;
    } else {
        rec.winner = Winner::Paper;
    }
    return rec;
}

}  // namespace ratbek
