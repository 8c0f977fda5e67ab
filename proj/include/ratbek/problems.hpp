#pragma once

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "ratbek/linalg.hpp"
#include "ratbek/realization.hpp"
#include "ratbek/types.hpp"

namespace ratbek {

namespace detail {

/// Clamp the singular values of M so sigma_max/sigma_min <= kappa.
inline Matrix clamp_condition(const Matrix& M, double kappa) {
    if (M.rows() == 0 || M.cols() == 0) return M;
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = svd.singularValues();
    if (s(0) == 0.0) return Matrix::Identity(M.rows(), M.cols());
    const double floor = s(0) / kappa;
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::max(s(i), floor);
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().adjoint();
}

}  // namespace detail

/// Draw a random regular realization: complex Gaussian blocks, E = I plus a
/// small perturbation, condition numbers of E and A_m bounded by
/// `conditioning` through singular-value clamping. Instances failing the
/// regularity probe are rejected and redrawn.
inline Realization random_realization(int n, int m, int r, std::uint64_t seed,
                                      double conditioning = 1e6, const Tolerances& tol = {}) {
    if (n < 1 || m < 0 || r < 0) throw DimensionError("need n >= 1, m >= 0, r >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto randn = [&](Eigen::Index rows, Eigen::Index cols) {
        Matrix M(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = Complex(gauss(rng), gauss(rng));
        return M;
    };

    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<Matrix> poly;
        poly.reserve(m + 1);
        for (int j = 0; j <= m; ++j) poly.push_back(randn(n, n));
        poly.back() = detail::clamp_condition(poly.back(), conditioning);
        Matrix C = randn(n, r);
        Matrix A = randn(r, r);
        Matrix E = detail::clamp_condition(Matrix::Identity(r, r) + 0.1 * randn(r, r), conditioning);
        Matrix B = randn(r, n);
        Realization R(std::move(poly), std::move(C), std::move(A), std::move(E), std::move(B), tol);
        if (probe_regularity(R, 8, split_seed(seed, static_cast<std::uint64_t>(attempt)), tol).regular) {
            return R;
        }
    }
    throw GenerationError("no regular instance found in 100 attempts");
}

/// One scalar pole term rho * f(lambda) / (k - lambda m_coef) * Cj with the
/// low-rank factorization Cj = F G stored explicitly (F: n x k_j, G: k_j x n).
/// f(lambda) = lambda for the fluid-solid family and lambda^2 for the
/// condensed one.
struct ScalarPoleTerm {
    Complex rho{1.0, 0.0};
    Complex k{0.0, 0.0};
    Complex m_coef{1.0, 0.0};
    Matrix F;
    Matrix G;

    Complex pole() const { return k / m_coef; }

    /// Convenience: factor a dense Cj by a truncated SVD at `rank_tol`.
    static ScalarPoleTerm from_dense(Complex rho, Complex k, Complex m_coef, const Matrix& Cj,
                                     double rank_tol = 1e-12) {
        Eigen::JacobiSVD<Matrix> svd(Cj, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) > rank_tol * s(0)) ++rank;
        ScalarPoleTerm t;
        t.rho = rho;
        t.k = k;
        t.m_coef = m_coef;
        t.F = svd.matrixU().leftCols(rank) * s.head(rank).asDiagonal();
        t.G = svd.matrixV().leftCols(rank).adjoint();
        return t;
    }
};

enum class PoleFamily { FluidSolid, Condensed };

/// Assemble a realization from a polynomial part plus scalar pole terms by
/// splitting off the polynomial content of each term analytically and
/// stacking one state block per term:
///
///   fluid-solid:  rho lambda / (k - lambda m) = -rho/m + (rho k / m) / (k - lambda m)
///   condensed:    rho lambda^2 / (k - lambda m)
///                   = -(rho/m) lambda - rho k/m^2 + (rho k^2/m^2) / (k - lambda m)
///
/// The strictly proper residue s/(a - lambda e) with Cj = F G becomes the
/// block (C <- F, B <- s G, A <- a I, E <- e I).
inline Realization from_scalar_poles(const std::vector<Matrix>& poly,
                                     const std::vector<ScalarPoleTerm>& terms, PoleFamily family) {
    if (poly.empty()) throw DimensionError("polynomial part must have at least one coefficient");
    const Eigen::Index n = poly.front().rows();

    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (terms[i].m_coef == Complex(0.0, 0.0)) throw DimensionError("m_coef must be nonzero");
        if (terms[i].F.rows() != n || terms[i].G.cols() != n || terms[i].F.cols() != terms[i].G.rows())
            throw DimensionError("rank factors of a pole term are inconsistent");
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            const Complex pi = terms[i].pole(), pj = terms[j].pole();
            const double scale = std::max({1.0, std::abs(pi), std::abs(pj)});
            if (std::abs(pi - pj) <= 1e-12 * scale)
                throw PoleCollisionError("repeated poles; block merge is not supported");
        }
    }

    int m_out = static_cast<int>(poly.size()) - 1;
    if (family == PoleFamily::Condensed && !terms.empty()) m_out = std::max(m_out, 1);

    std::vector<Matrix> out_poly(static_cast<std::size_t>(m_out) + 1, Matrix::Zero(n, n));
    for (std::size_t j = 0; j < poly.size(); ++j) {
        if (poly[j].rows() != n || poly[j].cols() != n) throw DimensionError("polynomial coefficients must be n x n");
        out_poly[j] = poly[j];
    }

    Eigen::Index r = 0;
    for (const auto& t : terms) r += t.F.cols();

    Matrix C = Matrix::Zero(n, r), A = Matrix::Zero(r, r), E = Matrix::Zero(r, r), B = Matrix::Zero(r, n);
    Eigen::Index offset = 0;
    for (const auto& t : terms) {
        const Eigen::Index kj = t.F.cols();
        const Matrix Cj = t.F * t.G;
        Complex residue;
        if (family == PoleFamily::FluidSolid) {
            out_poly[0] -= (t.rho / t.m_coef) * Cj;
            residue = t.rho * t.k / t.m_coef;
        } else {
            out_poly[1] -= (t.rho / t.m_coef) * Cj;
            out_poly[0] -= (t.rho * t.k / (t.m_coef * t.m_coef)) * Cj;
            residue = t.rho * t.k * t.k / (t.m_coef * t.m_coef);
        }
        C.block(0, offset, n, kj) = t.F;
        B.block(offset, 0, kj, n) = residue * t.G;
        A.block(offset, offset, kj, kj) = t.k * Matrix::Identity(kj, kj);
        E.block(offset, offset, kj, kj) = t.m_coef * Matrix::Identity(kj, kj);
        offset += kj;
    }
    return Realization(std::move(out_poly), std::move(C), std::move(A), std::move(E), std::move(B));
}

/// Direct evaluation of one scalar pole term, for validating assembled
/// realizations against the defining formulas.
inline Matrix eval_pole_term(const ScalarPoleTerm& t, PoleFamily family, Complex lambda) {
    const Complex denom = t.k - lambda * t.m_coef;
    const Complex factor = family == PoleFamily::FluidSolid ? t.rho * lambda / denom
                                                            : t.rho * lambda * lambda / denom;
    return factor * (t.F * t.G);
}

}  // namespace ratbek
