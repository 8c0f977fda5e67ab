#pragma once

#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "ratbek/linalg.hpp"
#include "ratbek/types.hpp"

namespace ratbek {

/// A rational matrix function in realization form
///
///     R(lambda) = A_0 + lambda A_1 + ... + lambda^m A_m + C (A - lambda E)^{-1} B,
///
/// with n x n polynomial coefficients and an r-dimensional state block
/// (C: n x r, A, E: r x r, B: r x n). r = 0 is admitted and degenerates to a
/// plain matrix polynomial; m = 0 is admitted for evaluation and backward
/// errors but has no companion pencil.
///
/// Instances are immutable after construction and every operation here is a
/// pure function of its inputs, so concurrent use needs no synchronization.
class Realization {
public:
    Realization(std::vector<Matrix> poly, Matrix C, Matrix A, Matrix E, Matrix B,
                const Tolerances& tol = {})
        : poly_(std::move(poly)), C_(std::move(C)), A_(std::move(A)), E_(std::move(E)), B_(std::move(B)) {
        validate(tol);
    }

    /// Pure polynomial instance (r = 0).
    static Realization polynomial(std::vector<Matrix> poly) {
        const int n = poly.empty() ? 0 : static_cast<int>(poly.front().rows());
        return Realization(std::move(poly), Matrix(n, 0), Matrix(0, 0), Matrix(0, 0), Matrix(0, n));
    }

    int n() const { return static_cast<int>(poly_.front().rows()); }
    int degree() const { return static_cast<int>(poly_.size()) - 1; }
    int state_dim() const { return static_cast<int>(A_.rows()); }

    const std::vector<Matrix>& poly() const { return poly_; }
    const Matrix& C() const { return C_; }
    const Matrix& A() const { return A_; }
    const Matrix& E() const { return E_; }
    const Matrix& B() const { return B_; }

    /// A - lambda E (the r x r pole pencil).
    Matrix pencil_at(Complex lambda) const { return A_ - lambda * E_; }

    /// sigma_min(A - lambda E) against the cancellation-free scale
    /// |A| + |lambda| |E|, which keeps the test meaningful when the pencil
    /// value itself collapses (r = 1 near a pole).
    bool is_pole(Complex lambda, const Tolerances& tol = {}) const {
        if (state_dim() == 0) return false;
        const double scale = spectral_norm(A_) + std::abs(lambda) * spectral_norm(E_);
        return sigma_min(pencil_at(lambda)) <= tol.pole * scale;
    }

    /// Polynomial part by Horner recurrence.
    Matrix eval_poly(Complex lambda) const {
        Matrix acc = poly_.back();
        for (int j = degree() - 1; j >= 0; --j) acc = lambda * acc + poly_[static_cast<std::size_t>(j)];
        return acc;
    }

    /// Strictly proper part C (A - lambda E)^{-1} B via a linear solve.
    /// Throws PoleError at (or numerically near) a pole.
    Matrix eval_proper(Complex lambda, const Tolerances& tol = {}) const {
        if (state_dim() == 0) return Matrix::Zero(n(), n());
        if (is_pole(lambda, tol)) {
            throw PoleError("evaluation at or near a pole of the realization");
        }
        return C_ * lu_solve(pencil_at(lambda), B_);
    }

    /// Full value R(lambda). Throws PoleError at a pole.
    Matrix eval(Complex lambda, const Tolerances& tol = {}) const {
        return eval_poly(lambda) + eval_proper(lambda, tol);
    }

    /// Outer Holder p-norm of (|A_0|, ..., |A_m|, |C|, |A|, |E|, |B|) with
    /// the selected inner matrix norm.
    double norm(NormSelector sel = {}) const {
        Eigen::VectorXd blocks(degree() + 5);
        int k = 0;
        for (const Matrix& Aj : poly_) blocks(k++) = block_norm(Aj, sel.inner);
        blocks(k++) = block_norm(C_, sel.inner);
        blocks(k++) = block_norm(A_, sel.inner);
        blocks(k++) = block_norm(E_, sel.inner);
        blocks(k++) = block_norm(B_, sel.inner);
        return holder_norm(blocks, sel.p);
    }

private:
    static double block_norm(const Matrix& M, MatrixNorm kind) {
        if (M.size() == 0) return 0.0;
        return kind == MatrixNorm::Frobenius ? M.norm() : spectral_norm(M);
    }

    void validate(const Tolerances& tol) const {
        if (poly_.empty()) throw DimensionError("poly must hold at least one coefficient (degree m >= 0)");
        const Eigen::Index n = poly_.front().rows();
        if (n < 1) throw DimensionError("matrix dimension n must be positive");
        for (const Matrix& Aj : poly_) {
            if (Aj.rows() != n || Aj.cols() != n) throw DimensionError("every polynomial coefficient must be n x n");
            if (!is_finite(Aj)) throw DimensionError("non-finite entry in a polynomial coefficient");
        }
        const Eigen::Index r = A_.rows();
        if (A_.cols() != r || E_.rows() != r || E_.cols() != r)
            throw DimensionError("A and E must be square of matching size");
        if (C_.rows() != n || C_.cols() != r) throw DimensionError("C must be n x r");
        if (B_.rows() != r || B_.cols() != n) throw DimensionError("B must be r x n");
        if (!is_finite(C_) || !is_finite(A_) || !is_finite(E_) || !is_finite(B_))
            throw DimensionError("non-finite entry in a realization block");
        if (r > 0) {
            const auto s = sigma_extremes(E_);
            if (s.min <= tol.pole * s.max || s.max == 0.0)
                throw DimensionError("E is numerically singular; the realization part is not proper");
        }
    }

    std::vector<Matrix> poly_;
    Matrix C_, A_, E_, B_;
};

/// Cancellation-free magnitude of R at lambda:
/// sum_j |lambda|^j |A_j|_2 + |W(lambda)|_2. Upper-bounds |R(lambda)|_2 and
/// stays O(problem scale) where the value of R suffers cancellation, so
/// sigma_min(R(lambda)) <= reg_tol * eval_scale is a usable eigenvalue
/// detector even for n = 1 (where sigma_min(R) = |R(lambda)| identically).
inline double eval_scale(const Realization& R, Complex lambda, const Tolerances& tol = {}) {
    double acc = 0.0;
    double p = 1.0;
    for (int j = 0; j <= R.degree(); ++j) {
        acc += p * spectral_norm(R.poly()[static_cast<std::size_t>(j)]);
        p *= std::abs(lambda);
    }
    if (R.state_dim() > 0) acc += spectral_norm(R.eval_proper(lambda, tol));
    return acc;
}

struct RegularityProbe {
    bool regular = false;
    std::optional<Complex> witness;
};

/// Samples pseudo-random non-pole points and reports the first lambda where
/// sigma_min(R(lambda)) clears the regularity tolerance. Probabilistic: a
/// `false` answer means no witness was found in `trials` samples, not a proof
/// of singularity.
inline RegularityProbe probe_regularity(const Realization& R, int trials, std::uint64_t seed,
                                        const Tolerances& tol = {}) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        Complex lambda;
        bool found = false;
        for (int attempt = 0; attempt < 64; ++attempt) {
            lambda = Complex(2.0 * gauss(rng), 2.0 * gauss(rng));
            if (!R.is_pole(lambda, tol)) {
                found = true;
                break;
            }
        }
        if (!found) continue;
        const double smin = sigma_min(R.eval(lambda, tol));
        if (smin > tol.regularity * eval_scale(R, lambda, tol)) return {true, lambda};
    }
    return {false, std::nullopt};
}

}  // namespace ratbek
