#pragma once

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ratbek/perturbation.hpp"
#include "ratbek/realization.hpp"
#include "ratbek/types.hpp"

namespace ratbek {

// On-disk formats. A matrix is a row-major array of rows, each entry a
// [re, im] pair; numbers are written with 17 significant decimal digits so a
// save/load round trip is bit-exact.
//
//   realization:  { "n", "m", "r", "poly": [M0..Mm], "C", "A", "E", "B" }
//   perturbation: { "regime": "poly_and_c"|"poly_and_b", "lambda_target": [re, im],
//                   "dpoly": [...], "dC" | "dB": M }

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_matrix(std::ostream& os, const Matrix& M, int indent) {
    const std::string pad(indent, ' ');
    if (M.rows() == 0) {
        os << "[]";
        return;
    }
    os << "[\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        os << pad << "  [";
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            os << "[" << format_double(M(i, j).real()) << ", " << format_double(M(i, j).imag()) << "]";
            if (j + 1 < M.cols()) os << ", ";
        }
        os << "]" << (i + 1 < M.rows() ? "," : "") << "\n";
    }
    os << pad << "]";
}

inline Matrix parse_matrix(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                           const std::string& name) {
    if (!j.is_array()) throw ParseError(name + ": expected an array of rows");
    if (static_cast<Eigen::Index>(j.size()) != rows && !(rows > 0 && j.empty() && cols == 0))
        throw ParseError(name + ": expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
    Matrix M(rows, cols);
    if (j.empty()) return M;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ParseError(name + ": row " + std::to_string(i) + " must hold " + std::to_string(cols) + " entries");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& e = row[static_cast<std::size_t>(c)];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw ParseError(name + ": entry (" + std::to_string(i) + "," + std::to_string(c) +
                                 ") must be a [re, im] pair");
            M(i, c) = Complex(e[0].get<double>(), e[1].get<double>());
        }
    }
    return M;
}

/// Infer (rows, cols) of a stored matrix without a size contract.
inline std::pair<Eigen::Index, Eigen::Index> stored_shape(const nlohmann::json& j, const std::string& name) {
    if (!j.is_array()) throw ParseError(name + ": expected an array of rows");
    if (j.empty()) return {0, 0};
    if (!j[0].is_array()) throw ParseError(name + ": rows must be arrays");
    return {static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size())};
}

inline nlohmann::json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace detail

inline void save_realization(std::ostream& os, const Realization& R) {
    os << "{\n";
    os << "  \"n\": " << R.n() << ",\n";
    os << "  \"m\": " << R.degree() << ",\n";
    os << "  \"r\": " << R.state_dim() << ",\n";
    os << "  \"poly\": [\n";
    for (int j = 0; j <= R.degree(); ++j) {
        os << "    ";
        detail::write_matrix(os, R.poly()[static_cast<std::size_t>(j)], 4);
        os << (j < R.degree() ? "," : "") << "\n";
    }
    os << "  ],\n";
    os << "  \"C\": ";
    detail::write_matrix(os, R.C(), 2);
    os << ",\n  \"A\": ";
    detail::write_matrix(os, R.A(), 2);
    os << ",\n  \"E\": ";
    detail::write_matrix(os, R.E(), 2);
    os << ",\n  \"B\": ";
    detail::write_matrix(os, R.B(), 2);
    os << "\n}\n";
}

inline void save_realization(const std::string& path, const Realization& R) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    save_realization(out, R);
}

inline Realization load_realization_json(const nlohmann::json& j, const Tolerances& tol = {}) {
    for (const char* key : {"n", "m", "r", "poly", "C", "A", "E", "B"}) {
        if (!j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
    }
    if (!j["n"].is_number_integer() || !j["m"].is_number_integer() || !j["r"].is_number_integer())
        throw ParseError("n, m, r must be integers");
    const Eigen::Index n = j["n"].get<Eigen::Index>();
    const Eigen::Index m = j["m"].get<Eigen::Index>();
    const Eigen::Index r = j["r"].get<Eigen::Index>();
    if (n < 1 || m < 0 || r < 0) throw ParseError("need n >= 1, m >= 0, r >= 0");
    if (!j["poly"].is_array() || static_cast<Eigen::Index>(j["poly"].size()) != m + 1)
        throw ParseError("poly must hold exactly m+1 coefficient matrices");
    std::vector<Matrix> poly;
    poly.reserve(static_cast<std::size_t>(m) + 1);
    for (Eigen::Index k = 0; k <= m; ++k)
        poly.push_back(detail::parse_matrix(j["poly"][static_cast<std::size_t>(k)], n, n,
                                            "poly[" + std::to_string(k) + "]"));
    Matrix C = detail::parse_matrix(j["C"], n, r, "C");
    Matrix A = detail::parse_matrix(j["A"], r, r, "A");
    Matrix E = detail::parse_matrix(j["E"], r, r, "E");
    Matrix B = detail::parse_matrix(j["B"], r, n, "B");
    return Realization(std::move(poly), std::move(C), std::move(A), std::move(E), std::move(B), tol);
}

inline Realization load_realization(const std::string& path, const Tolerances& tol = {}) {
    return load_realization_json(detail::parse_file(path), tol);
}

inline void save_perturbation(std::ostream& os, const Perturbation& p) {
    os << "{\n";
    os << "  \"regime\": \"" << (p.regime == Regime::PolyAndC ? "poly_and_c" : "poly_and_b") << "\",\n";
    os << "  \"lambda_target\": [" << detail::format_double(p.lambda_target.real()) << ", "
       << detail::format_double(p.lambda_target.imag()) << "],\n";
    os << "  \"dpoly\": [\n";
    for (std::size_t j = 0; j < p.dpoly.size(); ++j) {
        os << "    ";
        detail::write_matrix(os, p.dpoly[j], 4);
        os << (j + 1 < p.dpoly.size() ? "," : "") << "\n";
    }
    os << "  ],\n";
    if (p.regime == Regime::PolyAndC) {
        os << "  \"dC\": ";
        detail::write_matrix(os, *p.dC, 2);
    } else {
        os << "  \"dB\": ";
        detail::write_matrix(os, *p.dB, 2);
    }
    os << "\n}\n";
}

inline void save_perturbation(const std::string& path, const Perturbation& p) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    save_perturbation(out, p);
}

inline Perturbation load_perturbation_json(const nlohmann::json& j) {
    for (const char* key : {"regime", "lambda_target", "dpoly"}) {
        if (!j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
    }
    Perturbation p;
    const std::string regime = j["regime"].get<std::string>();
    if (regime == "poly_and_c") p.regime = Regime::PolyAndC;
    else if (regime == "poly_and_b") p.regime = Regime::PolyAndB;
    else throw ParseError("regime must be \"poly_and_c\" or \"poly_and_b\"");
    const auto& lt = j["lambda_target"];
    if (!lt.is_array() || lt.size() != 2 || !lt[0].is_number() || !lt[1].is_number())
        throw ParseError("lambda_target must be a [re, im] pair");
    p.lambda_target = Complex(lt[0].get<double>(), lt[1].get<double>());
    if (!j["dpoly"].is_array() || j["dpoly"].empty()) throw ParseError("dpoly must be a nonempty array");
    const auto [n, n2] = detail::stored_shape(j["dpoly"][0], "dpoly[0]");
    if (n < 1 || n != n2) throw ParseError("dpoly blocks must be square and nonempty");
    for (std::size_t k = 0; k < j["dpoly"].size(); ++k)
        p.dpoly.push_back(detail::parse_matrix(j["dpoly"][k], n, n, "dpoly[" + std::to_string(k) + "]"));
    const char* key = p.regime == Regime::PolyAndC ? "dC" : "dB";
    const char* other = p.regime == Regime::PolyAndC ? "dB" : "dC";
    if (!j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\" for this regime");
    if (j.contains(other)) throw ParseError("exactly one of dC/dB may be present");
    if (p.regime == Regime::PolyAndC) {
        const auto [rows, r] = detail::stored_shape(j[key], key);
        if (rows != 0 && rows != n) throw ParseError("dC must have n rows");
        p.dC = detail::parse_matrix(j[key], n, rows == 0 ? 0 : r, key);
    } else {
        const auto [r, cols] = detail::stored_shape(j[key], key);
        if (r != 0 && cols != n) throw ParseError("dB must have n columns");
        p.dB = detail::parse_matrix(j[key], r, r == 0 ? n : cols, key);
    }
    for (const Matrix& D : p.dpoly)
        if (!is_finite(D)) throw ParseError("non-finite entry in dpoly");
    if ((p.dC && !is_finite(*p.dC)) || (p.dB && !is_finite(*p.dB)))
        throw ParseError("non-finite entry in dC/dB");
    p.total_norm = p.recompute_norm();
    return p;
}

inline Perturbation load_perturbation(const std::string& path) {
    return load_perturbation_json(detail::parse_file(path));
}

}  // namespace ratbek
