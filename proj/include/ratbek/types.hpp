#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ratbek {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Base class of everything this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation requested at (or numerically indistinguishable from) a pole.
class PoleError : public Error {
public:
    using Error::Error;
};

/// R(lambda) is numerically singular where an invertible value is required.
class SingularError : public Error {
public:
    using Error::Error;
};

/// Operation needs polynomial degree m >= 1.
class DegreeError : public Error {
public:
    using Error::Error;
};

/// The shifted pencil shift*X + Y is numerically singular.
class ShiftSingularError : public Error {
public:
    using Error::Error;
};

class ZeroVectorError : public Error {
public:
    using Error::Error;
};

/// All polynomial coefficients vanish where at least one must not.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Dimension mismatch or value-level invariant violation (non-finite entry,
/// singular E block).
class DimensionError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class PoleCollisionError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

/// A hypothesis of the requested bound is not met (e.g. |lambda| < 1).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Relative tolerances used across the library. All are configurable from
/// the CLI; the defaults are the library-wide contract.
struct Tolerances {
    double pole = 1e-12;        ///< sigma_min(A - lambda E) vs its norm
    double regularity = 1e-10;  ///< sigma_min(R(lambda)) vs its norm
    double eig = 1e-8;          ///< pencil eigenpair residual flag
    double verify = 1e-8;       ///< relative part of the exactness check
    double verify_abs = 1e-14;  ///< absolute floor of the exactness check
};

enum class MatrixNorm { Spectral, Frobenius };

enum class HolderP { One, Two, Inf };

/// Norm on the space of realizations: an inner matrix norm per block and an
/// outer Holder p-norm over the vector of block norms.
struct NormSelector {
    MatrixNorm inner = MatrixNorm::Frobenius;
    HolderP p = HolderP::Two;
};

inline HolderP holder_conjugate(HolderP p) {
    switch (p) {
        case HolderP::One: return HolderP::Inf;
        case HolderP::Inf: return HolderP::One;
        default: return HolderP::Two;
    }
}

/// Holder p-norm of a real nonnegative vector.
inline double holder_norm(const Eigen::VectorXd& v, HolderP p) {
    switch (p) {
        case HolderP::One: return v.cwiseAbs().sum();
        case HolderP::Inf: return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
        default: return v.norm();
    }
}

/// The monomial weight vector (1, lambda, ..., lambda^m), m+1 entries.
inline Vector lambda_powers(Complex lambda, int m) {
    Vector v(m + 1);
    v(0) = Complex(1.0, 0.0);
    for (int j = 1; j <= m; ++j) v(j) = lambda * v(j - 1);
    return v;
}

/// Holder q-norm of (1, lambda, ..., lambda^m).
inline double lambda_norm(Complex lambda, int m, HolderP q = HolderP::Two) {
    const Vector v = lambda_powers(lambda, m);
    return holder_norm(v.cwiseAbs(), q);
}

inline bool is_finite(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline bool is_finite(const Matrix& M) {
    return M.allFinite();
}

/// splitmix64 step; used to derive independent per-task seeds from a master
/// seed so concurrent runs stay deterministic.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace ratbek
