#include <catch2/catch.hpp>

#include "helpers.hpp"

using namespace ratbek;
using testing::r0;

TEST_CASE("feasibility sampling cannot undercut the optimum (poly+C)") {
    SampleOptions opts;
    opts.seed = 51;
    const double eta = eta_poly_and_c(r0(), Complex(1, 0)).eta;
    const SampleResult res = sample_feasible_c(r0(), Complex(1, 0), 1000, opts);
    CHECK(res.min_norm >= eta - 1e-9);
    CHECK(res.all_verified_ok);
    CHECK(res.verified > 0);
}

TEST_CASE("least-norm sample with the optimal direction hits eta exactly") {
    const auto opt = eta_poly_and_c(r0(), Complex(1, 0));
    SampleOptions opts;
    opts.direction = opt.direction;
    opts.null_scale = 0.0;
    const SampleResult res = sample_feasible_c(r0(), Complex(1, 0), 1, opts);
    CHECK(res.min_norm == Approx(opt.eta).epsilon(1e-12));
}

TEST_CASE("sampling ratio stays >= 1 across random instances, both regimes") {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 5; ++trial) {
        const Realization R = random_realization(3, 2, 2, rng());
        const Complex lambda = testing::safe_lambda(R, rng);
        SampleOptions opts;
        opts.seed = rng();

        const double eta_c = eta_poly_and_c(R, lambda).eta;
        const SampleResult rc = sample_feasible_c(R, lambda, 200, opts);
        CHECK(rc.min_norm >= eta_c * (1.0 - 1e-9));
        CHECK(rc.all_verified_ok);

        const double eta_b = eta_poly_and_b(R, lambda).variational;
        const SampleResult rb = sample_feasible_b(R, lambda, 200, opts);
        CHECK(rb.min_norm >= eta_b * (1.0 - 1e-9));
        CHECK(rb.all_verified_ok);
    }
}

TEST_CASE("gradient search on the scalar fixture") {
    const OracleMinimum found = minimize_eta_b(r0(), Complex(1, 0));
    CHECK(found.eta == Approx(2.0 / std::sqrt(3.0)).epsilon(1e-10));
    CHECK_FALSE(found.convergence_warning);
}

TEST_CASE("gradient search on a synthetic diagonal map") {
    SMatrix S;
    S.n = 2;
    S.m = 0;
    S.r = 0;
    S.data = Matrix::Zero(2, 2);
    S.data(0, 0) = Complex(2.0, 0.0);
    S.data(1, 1) = Complex(0.5, 0.0);
    const OracleMinimum found = minimize_eta_b(S);
    CHECK(found.eta == Approx(0.5).epsilon(1e-8));
}

TEST_CASE("search matches 1/sigma_max(S), not 1/sigma_min(S)") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 5; ++trial) {
        const Realization R = random_realization(2, 1, 2, rng());
        const Complex lambda = testing::safe_lambda(R, rng);
        const EtaB cand = eta_poly_and_b(R, lambda);
        MinimizeOptions mo;
        mo.seed = rng();
        const OracleMinimum found = minimize_eta_b(R, lambda, mo);
        CHECK(found.eta == Approx(cand.variational).epsilon(1e-8));
        if (cand.paper - cand.variational > 1e-6 * cand.paper) {
            CHECK(std::abs(found.eta - cand.paper) > 1e-6 * cand.paper);
        }
    }
}

TEST_CASE("search minimum induces a feasible perturbation") {
    std::mt19937_64 rng(54);
    const Realization R = random_realization(3, 2, 2, rng());
    const Complex lambda = testing::safe_lambda(R, rng);
    MinimizeOptions mo;
    mo.seed = rng();
    const OracleMinimum found = minimize_eta_b(R, lambda, mo);
    const Perturbation p = min_perturbation_b(R, lambda, found.x);
    CHECK(verify_exactness(R, p, lambda).ok);
}

TEST_CASE("adjudication verdicts") {
    AdjudicateConfig cfg;
    cfg.seed = 55;

    // n = 1: the two candidates coincide
    const AdjudicationRecord tie = adjudicate(r0(), Complex(1, 0), cfg, {}, "fixture");
    CHECK(tie.winner == Winner::Tie);
    CHECK(tie.feasible);

    // unitary constant instance: all singular values of S equal
    const Realization unitary = Realization::polynomial({Matrix::Identity(2, 2)});
    const AdjudicationRecord tie2 = adjudicate(unitary, Complex(0.3, 0.4), cfg, {}, "unitary");
    CHECK(tie2.winner == Winner::Tie);

    // generic n = 2 instance with a singular value gap
    std::mt19937_64 rng(56);
    for (int trial = 0; trial < 5; ++trial) {
        const Realization R = random_realization(2, 1, 2, rng());
        const Complex lambda = testing::safe_lambda(R, rng);
        const EtaB cand = eta_poly_and_b(R, lambda);
        if (cand.paper - cand.variational <= 1e-6 * cand.paper) continue;
        AdjudicateConfig c2;
        c2.seed = rng();
        const AdjudicationRecord rec = adjudicate(R, lambda, c2, {}, "rand");
        CHECK(rec.winner == Winner::Variational);
        CHECK(rec.feasible);
    }
}

TEST_CASE("fixed seeds reproduce identical records") {
    std::mt19937_64 rng(57);
    const Realization R = random_realization(2, 1, 2, rng());
    const Complex lambda = testing::safe_lambda(R, rng);
    AdjudicateConfig cfg;
    cfg.seed = 99;
    const AdjudicationRecord a = adjudicate(R, lambda, cfg, {}, "det");
    const AdjudicationRecord b = adjudicate(R, lambda, cfg, {}, "det");
    CHECK(a.eta_oracle == b.eta_oracle);
    CHECK(a.eta_variational == b.eta_variational);
    CHECK(a.eta_paper == b.eta_paper);
    CHECK(a.winner == b.winner);

    SampleOptions so;
    so.seed = 7;
    const SampleResult s1 = sample_feasible_c(R, lambda, 50, so);
    const SampleResult s2 = sample_feasible_c(R, lambda, 50, so);
    CHECK(s1.min_norm == s2.min_norm);
}
