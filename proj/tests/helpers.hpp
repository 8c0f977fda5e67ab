#pragma once

#include <random>

#include "ratbek/ratbek.hpp"

namespace testing {

using ratbek::Complex;
using ratbek::Matrix;
using ratbek::Realization;
using ratbek::Vector;

inline Matrix scalar(double re, double im = 0.0) {
    Matrix M(1, 1);
    M(0, 0) = Complex(re, im);
    return M;
}

/// The scalar fixture used throughout: R(lambda) = lambda + 1/(2 - lambda),
/// eigenvalues 1 +- sqrt(2), pole at 2.
inline Realization r0() {
    return Realization({scalar(0.0), scalar(1.0)}, scalar(1.0), scalar(2.0), scalar(1.0), scalar(1.0));
}

inline double max_abs_diff(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) return 1e300;
    if (A.size() == 0) return 0.0;
    return (A - B).cwiseAbs().maxCoeff();
}

/// Power-sum evaluation of the polynomial part, kept independent of the
/// Horner path it checks.
inline Matrix naive_poly_eval(const std::vector<Matrix>& coeffs, Complex lambda) {
    Matrix acc = Matrix::Zero(coeffs.front().rows(), coeffs.front().cols());
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        Complex p(1.0, 0.0);
        for (std::size_t k = 0; k < j; ++k) p *= lambda;
        acc += p * coeffs[j];
    }
    return acc;
}

/// A random lambda that is comfortably away from the poles and from the
/// eigenvalues, so R(lambda) and the maps built from it are well conditioned.
inline Complex safe_lambda(const Realization& R, std::mt19937_64& rng, double min_abs = 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int attempt = 0; attempt < 500; ++attempt) {
        Complex lambda(1.5 * gauss(rng), 1.5 * gauss(rng));
        if (std::abs(lambda) < min_abs) lambda *= (min_abs + 0.5) / std::abs(lambda);
        if (R.state_dim() > 0) {
            const auto pencil = ratbek::sigma_extremes(R.pencil_at(lambda));
            if (pencil.min <= 1e-3 * pencil.max) continue;
        }
        if (ratbek::sigma_min(R.eval(lambda)) > 1e-5 * ratbek::eval_scale(R, lambda)) return lambda;
    }
    throw std::runtime_error("no safe lambda found");
}

inline Vector random_unit(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
    return v / v.norm();
}

}  // namespace testing
