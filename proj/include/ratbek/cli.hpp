#pragma once

#include <CLI11.hpp>

#include <Eigen/Eigenvalues>

#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ratbek/backward_error.hpp"
#include "ratbek/companion.hpp"
#include "ratbek/io.hpp"
#include "ratbek/oracle.hpp"
#include "ratbek/perturbation.hpp"
#include "ratbek/problems.hpp"
#include "ratbek/realization.hpp"

namespace ratbek {

/// Parse "a", "ai", "a+bi", "a-bi" with decimal a, b. Everything else is
/// rejected.
inline Complex parse_complex(const std::string& text) {
    if (text.empty()) throw ParseError("empty complex literal");
    for (char c : text) {
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '+' || c == '-' ||
              c == 'e' || c == 'E' || c == 'i'))
            throw ParseError("bad character in complex literal: " + text);
    }
    const char* s = text.c_str();
    char* p1 = nullptr;
    const double a = std::strtod(s, &p1);
    if (p1 == s || !std::isfinite(a)) throw ParseError("cannot parse complex literal: " + text);
    if (*p1 == '\0') return {a, 0.0};
    if (*p1 == 'i' && *(p1 + 1) == '\0') return {0.0, a};
    if (*p1 == '+' || *p1 == '-') {
        char* p2 = nullptr;
        const double b = std::strtod(p1, &p2);
        if (p2 != p1 && std::isfinite(b) && *p2 == 'i' && *(p2 + 1) == '\0') return {a, b};
    }
    throw ParseError("cannot parse complex literal: " + text);
}

/// Everything a subcommand run needs, bound from flags.
struct CliConfig {
    std::string command;
    std::string input_path;
    std::string perturbation_path;
    std::string output_path;  ///< empty means stdout
    std::string lambda_text;
    std::string mode = "c";  ///< c | b | poly
    std::string center_text = "0";
    double radius = 2.0;
    int count = 0;
    std::uint64_t seed = 0;
    Tolerances tol;
};

namespace cli_detail {

inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline void print_matrix(std::ostream& os, const Matrix& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            const Complex z = M(i, j);
            os << g6(z.real()) << (z.imag() < 0 ? "-" : "+") << g6(std::abs(z.imag())) << "i";
            if (j + 1 < M.cols()) os << "  ";
        }
        os << "\n";
    }
}

/// Run fn(i) for i in [0, n) across threads; results must land in
/// pre-allocated slots so the output order stays deterministic.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    const int workers = static_cast<int>(std::max(1u, hw));
    if (workers == 1 || n < 2) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < std::min(workers, n); ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline void write_report_json(std::ostream& os, const BackwardErrorReport& rep) {
    os << "{\n";
    os << "  \"lambda\": [" << g17(rep.lambda.real()) << ", " << g17(rep.lambda.imag()) << "],\n";
    os << "  \"eta_poly_bound\": " << g17(rep.eta_poly_bound) << ",\n";
    os << "  \"eta_poly_exact\": " << g17(rep.eta_poly_exact) << ",\n";
    os << "  \"eta_pair\": " << (rep.eta_pair ? g17(*rep.eta_pair) : "null") << ",\n";
    os << "  \"eta_C\": " << g17(rep.eta_c) << ",\n";
    os << "  \"eta_B_variational\": " << g17(rep.eta_b_variational) << ",\n";
    os << "  \"eta_B_paper\": " << g17(rep.eta_b_paper) << ",\n";
    os << "  \"eta_companion\": " << (rep.eta_companion_value ? g17(*rep.eta_companion_value) : "null") << ",\n";
    os << "  \"sigma\": {\n";
    os << "    \"sigma_max_T\": " << g17(rep.sigma.sigma_max_t) << ",\n";
    os << "    \"sigma_max_S\": " << g17(rep.sigma.sigma_max_s) << ",\n";
    os << "    \"sigma_min_S\": " << g17(rep.sigma.sigma_min_s) << ",\n";
    os << "    \"sigma_min_R\": " << g17(rep.sigma.sigma_min_r) << ",\n";
    os << "    \"sigma_min_C1\": " << (rep.sigma.sigma_min_c1 ? g17(*rep.sigma.sigma_min_c1) : "null") << "\n";
    os << "  },\n";
    os << "  \"near_eigenvalue\": " << (rep.near_eigenvalue ? "true" : "false") << "\n";
    os << "}\n";
}

struct OutputStream {
    std::ostream* os;
    std::ofstream file;

    OutputStream(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            os = &fallback;
        } else {
            file.open(path);
            if (!file) throw ParseError("cannot open " + path + " for writing");
            os = &file;
        }
    }
};

/// Finite poles of the realization: eigenvalues of E^{-1} A.
inline std::vector<Complex> finite_poles(const Realization& R) {
    if (R.state_dim() == 0) return {};
    const Matrix M = lu_solve(R.E(), R.A());
    Eigen::ComplexEigenSolver<Matrix> es(M, false);
    std::vector<Complex> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
    return out;
}

inline int run_eval(const CliConfig& cfg, std::ostream& out) {
    const Realization R = load_realization(cfg.input_path, cfg.tol);
    const Complex lambda = parse_complex(cfg.lambda_text);
    const Matrix Rl = R.eval(lambda, cfg.tol);
    out << "R(" << g6(lambda.real()) << (lambda.imag() < 0 ? "-" : "+") << g6(std::abs(lambda.imag()))
        << "i) =\n";
    print_matrix(out, Rl);
    out << "sigma_min = " << g17(sigma_min(Rl)) << "\n";
    return 0;
}

inline int run_eigs(const CliConfig& cfg, std::ostream& out) {
    const Realization R = load_realization(cfg.input_path, cfg.tol);
    const CompanionPencil P = build_companion(R);
    const PencilEigen eig = eigensolve_auto(P, cfg.seed, cfg.tol);
    const auto triples = recover_triples(R, eig.pairs(), cfg.tol);
    out << "lambda_re      lambda_im      residual     w_residual   block_res    flag\n";
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const auto& t = triples[i];
        char line[160];
        std::snprintf(line, sizeof(line), "%-14.6g %-14.6g %-12.6g %-12.6g %-12.6g %s\n",
                      t.lambda.real(), t.lambda.imag(), t.residual.value_or(-1.0),
                      t.w_residual.value_or(-1.0), t.block_residual,
                      !eig.residual_ok[i] ? "FLAGGED" : (t.residual ? "ok" : "pole"));
        out << line;
    }
    out << "finite: " << eig.lambdas.size() << ", infinite: " << eig.infinite_count() << "\n";
    return 0;
}

inline int run_bwerr(const CliConfig& cfg, std::ostream& out) {
    const Realization R = load_realization(cfg.input_path, cfg.tol);
    const Complex lambda = parse_complex(cfg.lambda_text);
    const BackwardErrorReport rep = compute_report(R, lambda, cfg.tol);
    OutputStream dest(cfg.output_path, out);
    write_report_json(*dest.os, rep);
    return 0;
}

inline int run_perturb(const CliConfig& cfg, std::ostream& out) {
    const Realization R = load_realization(cfg.input_path, cfg.tol);
    const Complex lambda = parse_complex(cfg.lambda_text);
    Perturbation p;
    double eta = 0.0;
    if (cfg.mode == "c") {
        p = min_perturbation_c(R, lambda, std::nullopt, cfg.tol);
        eta = eta_poly_and_c(R, lambda, cfg.tol).eta;
    } else if (cfg.mode == "b") {
        p = min_perturbation_b(R, lambda, std::nullopt, cfg.tol);
        eta = eta_poly_and_b(R, lambda, cfg.tol).variational;
    } else {
        throw ParseError("perturb needs --mode c or --mode b");
    }
    if (!cfg.output_path.empty()) save_perturbation(cfg.output_path, p);
    const ExactnessCheck check = verify_exactness(R, p, lambda, cfg.tol);
    out << "{\n";
    out << "  \"total_norm\": " << g17(p.total_norm) << ",\n";
    out << "  \"eta\": " << g17(eta) << ",\n";
    out << "  \"sigma\": " << g17(check.sigma) << ",\n";
    out << "  \"ok\": " << (check.ok ? "true" : "false") << "\n";
    out << "}\n";
    if (!check.ok) throw SingularError("constructed perturbation failed the exactness check");
    return 0;
}

inline int run_verify(const CliConfig& cfg, std::ostream& out) {
    const Realization R = load_realization(cfg.input_path, cfg.tol);
    const Perturbation p = load_perturbation(cfg.perturbation_path);
    const Complex lambda = cfg.lambda_text.empty() ? p.lambda_target : parse_complex(cfg.lambda_text);
    const ExactnessCheck check = verify_exactness(R, p, lambda, cfg.tol);
    out << "{\n";
    out << "  \"lambda\": [" << g17(lambda.real()) << ", " << g17(lambda.imag()) << "],\n";
    out << "  \"total_norm\": " << g17(p.recompute_norm()) << ",\n";
    out << "  \"sigma\": " << g17(check.sigma) << ",\n";
    out << "  \"ok\": " << (check.ok ? "true" : "false") << "\n";
    out << "}\n";
    if (!check.ok) throw SingularError("perturbation does not make lambda_target an exact eigenvalue");
    return 0;
}

inline int run_adjudicate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
    const int count = cfg.count > 0 ? cfg.count : 50;
    OutputStream dest(cfg.output_path, out);
    *dest.os << "instance_id,lambda_re,lambda_im,eta_oracle,eta_variational,eta_paper,winner,samples,seed\n";
    int wins_var = 0, wins_paper = 0, ties = 0;
    for (int i = 0; i < count; ++i) {
        std::mt19937_64 rng(split_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        const int n = 2 + static_cast<int>(rng() % 2);
        const int m = 1 + static_cast<int>(rng() % 2);
        const int r = 1 + static_cast<int>(rng() % 3);
        const Realization R = random_realization(n, m, r, split_seed(cfg.seed, 1000 + i), 1e6, cfg.tol);

        std::normal_distribution<double> gauss(0.0, 1.0);
        Complex lambda;
        for (int attempt = 0;; ++attempt) {
            lambda = Complex(gauss(rng), gauss(rng));
            if (R.is_pole(lambda, cfg.tol)) continue;
            const auto s = sigma_extremes(R.eval(lambda, cfg.tol));
            if (s.min > 1e-6 * s.max) break;
            if (attempt > 200) throw GenerationError("no well-conditioned lambda found");
        }

        AdjudicateConfig acfg;
        acfg.seed = split_seed(cfg.seed, 2000 + i);
        const AdjudicationRecord rec = adjudicate(R, lambda, acfg, cfg.tol, "inst" + std::to_string(i));
        *dest.os << rec.instance_id << "," << g17(rec.lambda.real()) << "," << g17(rec.lambda.imag())
                 << "," << g17(rec.eta_oracle) << "," << g17(rec.eta_variational) << ","
                 << g17(rec.eta_paper) << "," << to_string(rec.winner) << "," << rec.samples << ","
                 << rec.seed << "\n";
        if (rec.winner == Winner::Variational) ++wins_var;
        else if (rec.winner == Winner::Paper) ++wins_paper;
        else ++ties;
    }
    err << "adjudication verdict over " << count << " instances: variational " << wins_var
        << ", paper " << wins_paper << ", tie " << ties << "\n";
    return 0;
}

inline int run_sweep(const CliConfig& cfg, std::ostream& out) {
    const Realization R = load_realization(cfg.input_path, cfg.tol);
    const Complex center = parse_complex(cfg.center_text);
    const int side = cfg.count > 0 ? cfg.count : 11;
    const auto poles = finite_poles(R);

    const int total = side * side;
    std::vector<std::string> rows(static_cast<std::size_t>(total));
    parallel_for(total, [&](int idx) {
        const int iy = idx / side, ix = idx % side;
        const double re =
            side == 1 ? center.real() : center.real() - cfg.radius + 2.0 * cfg.radius * ix / (side - 1);
        const double im =
            side == 1 ? center.imag() : center.imag() - cfg.radius + 2.0 * cfg.radius * iy / (side - 1);
        const Complex lambda(re, im);
        std::ostringstream row;
        row << g17(re) << "," << g17(im) << ",";
        bool near_pole = false;
        for (const Complex p : poles) {
            if (std::abs(lambda - p) < 1e-8) near_pole = true;
        }
        if (near_pole || R.is_pole(lambda, cfg.tol)) {
            row << ",,,,,,,,,skipped_pole";
            rows[static_cast<std::size_t>(idx)] = row.str();
            return;
        }
        const BackwardErrorReport rep = compute_report(R, lambda, cfg.tol);
        row << g17(rep.sigma.sigma_min_r) << "," << g17(rep.eta_poly_bound) << ",";
        if (rep.near_eigenvalue) {
            row << ",,,";
            row << (rep.eta_companion_value ? g17(*rep.eta_companion_value) : "") << ",";
            row << ",,,near_eigenvalue";
            rows[static_cast<std::size_t>(idx)] = row.str();
            return;
        }
        row << g17(rep.eta_c) << "," << g17(rep.eta_b_variational) << "," << g17(rep.eta_b_paper) << ",";
        row << (rep.eta_companion_value ? g17(*rep.eta_companion_value) : "") << ",";
        if (std::abs(lambda) >= 1.0 && R.degree() >= 1) {
            const RatioBound rb = check_ratio_bound(R, lambda, cfg.tol);
            row << g17(rb.ratio) << "," << g17(rb.bound) << "," << (rb.holds ? "true" : "false") << ",ok";
        } else {
            row << ",,,ok";
        }
        rows[static_cast<std::size_t>(idx)] = row.str();
    });

    OutputStream dest(cfg.output_path, out);
    *dest.os << "lambda_re,lambda_im,sigma_min_R,eta_poly_bound,eta_C,eta_B_variational,eta_B_paper,"
                "eta_companion,ratio,bound,holds,status\n";
    for (const auto& row : rows) *dest.os << row << "\n";
    return 0;
}

}  // namespace cli_detail

/// Entry point shared by the binary and the tests. `args` excludes the
/// program name. Returns 0 on success, 1 on usage/parse errors, 2 on numeric
/// failures (pole, singular R, shift failure, ...).
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"backward errors and minimal perturbations for rational eigenproblems in realization form"};
    app.require_subcommand(1);

    CliConfig cfg;
    const auto add_common = [&](CLI::App* sub, bool needs_input) {
        if (needs_input) sub->add_option("--input", cfg.input_path, "realization JSON file")->required();
        sub->add_option("--seed", cfg.seed, "random seed (env RATBEK_SEED overrides)");
        sub->add_option("--output", cfg.output_path, "output file (default: stdout)");
        sub->add_option("--pole-tol", cfg.tol.pole, "relative pole tolerance");
        sub->add_option("--reg-tol", cfg.tol.regularity, "relative regularity tolerance");
        sub->add_option("--eig-tol", cfg.tol.eig, "pencil residual tolerance");
        sub->add_option("--verify-tol", cfg.tol.verify, "relative exactness tolerance");
        sub->add_option("--verify-tol-abs", cfg.tol.verify_abs, "absolute exactness tolerance");
    };

    CLI::App* eval = app.add_subcommand("eval", "evaluate R(lambda) and its sigma_min");
    add_common(eval, true);
    eval->add_option("--lambda", cfg.lambda_text, "evaluation point, e.g. 1.5-0.25i")->required();

    CLI::App* eigs = app.add_subcommand("eigs", "companion eigentriples with residuals");
    add_common(eigs, true);

    CLI::App* bwerr = app.add_subcommand("bwerr", "backward error report at one lambda (JSON)");
    add_common(bwerr, true);
    bwerr->add_option("--lambda", cfg.lambda_text)->required();
    bwerr->add_option("--mode", cfg.mode)->check(CLI::IsMember({"c", "b", "poly"}));

    CLI::App* perturb = app.add_subcommand("perturb", "construct + verify the minimal perturbation");
    add_common(perturb, true);
    perturb->add_option("--lambda", cfg.lambda_text)->required();
    perturb->add_option("--mode", cfg.mode)->required()->check(CLI::IsMember({"c", "b"}));
    perturb->get_option("--output")->required();

    CLI::App* verify = app.add_subcommand("verify", "re-check a stored perturbation");
    add_common(verify, true);
    verify->add_option("--perturbation", cfg.perturbation_path, "perturbation JSON file")->required();
    verify->add_option("--lambda", cfg.lambda_text, "override lambda_target");

    CLI::App* adj = app.add_subcommand("adjudicate", "oracle adjudication CSV over generated instances");
    add_common(adj, false);
    adj->add_option("--count", cfg.count, "number of instances (default 50)");

    CLI::App* sweep = app.add_subcommand("sweep", "CSV of backward errors over a lambda grid");
    add_common(sweep, true);
    sweep->add_option("--center", cfg.center_text, "grid center (complex)");
    sweep->add_option("--radius", cfg.radius, "half-width of the square grid");
    sweep->add_option("--count", cfg.count, "grid points per side (default 11)");

    std::vector<const char*> argv;
    argv.push_back("ratbek");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    }

    if (const char* env_seed = std::getenv("RATBEK_SEED")) {
        try {
            cfg.seed = std::stoull(env_seed);
        } catch (...) {
            err << "usage error: RATBEK_SEED must be an unsigned integer\n";
            return 1;
        }
    }

    try {
        if (eval->parsed()) return cli_detail::run_eval(cfg, out);
        if (eigs->parsed()) return cli_detail::run_eigs(cfg, out);
        if (bwerr->parsed()) return cli_detail::run_bwerr(cfg, out);
        if (perturb->parsed()) return cli_detail::run_perturb(cfg, out);
        if (verify->parsed()) return cli_detail::run_verify(cfg, out);
        if (adj->parsed()) return cli_detail::run_adjudicate(cfg, out, err);
        if (sweep->parsed()) return cli_detail::run_sweep(cfg, out);
        err << "usage error: no subcommand\n";
        return 1;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace ratbek
