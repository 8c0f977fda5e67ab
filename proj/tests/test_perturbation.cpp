#include <catch2/catch.hpp>

#include "helpers.hpp"

using namespace ratbek;
using testing::r0;
using testing::scalar;

namespace {

Perturbation zero_perturbation(const Realization& R) {
    Perturbation p;
    p.regime = Regime::PolyAndC;
    for (int j = 0; j <= R.degree(); ++j) p.dpoly.push_back(Matrix::Zero(R.n(), R.n()));
    p.dC = Matrix::Zero(R.n(), R.state_dim());
    p.lambda_target = Complex(0, 0);
    return p;
}

}  // namespace

TEST_CASE("poly+C constructor on the scalar fixture") {
    Vector one(1);
    one << Complex(1, 0);
    const Perturbation p = min_perturbation_c(r0(), Complex(1, 0), one);
    REQUIRE(p.dpoly.size() == 2);
    CHECK(std::abs(p.dpoly[0](0, 0) - Complex(-2.0 / 3.0, 0)) < 1e-14);
    CHECK(std::abs(p.dpoly[1](0, 0) - Complex(-2.0 / 3.0, 0)) < 1e-14);
    REQUIRE(p.dC.has_value());
    CHECK(std::abs((*p.dC)(0, 0) - Complex(-2.0 / 3.0, 0)) < 1e-14);
    CHECK(p.total_norm == Approx(2.0 / std::sqrt(3.0)).epsilon(1e-13));
    CHECK(p.recompute_norm() == Approx(p.total_norm).epsilon(1e-13));

    // (R + dR)(1) = (0 - 2/3) + (1 - 2/3) * 1 + (1 - 2/3)/(2 - 1) = 0
    const Realization perturbed = apply(r0(), p);
    CHECK(std::abs(perturbed.eval(Complex(1, 0))(0, 0)) < 1e-14);
}

TEST_CASE("poly+B constructor on the scalar fixture") {
    Vector one(1);
    one << Complex(1, 0);
    const Perturbation p = min_perturbation_b(r0(), Complex(1, 0), one);
    REQUIRE(p.dpoly.size() == 2);
    CHECK(std::abs(p.dpoly[0](0, 0) - Complex(-2.0 / 3.0, 0)) < 1e-14);
    CHECK(std::abs(p.dpoly[1](0, 0) - Complex(-2.0 / 3.0, 0)) < 1e-14);
    REQUIRE(p.dB.has_value());
    CHECK(std::abs((*p.dB)(0, 0) - Complex(-2.0 / 3.0, 0)) < 1e-14);
    CHECK(p.total_norm == Approx(2.0 / std::sqrt(3.0)).epsilon(1e-13));

    const Realization perturbed = apply(r0(), p);
    CHECK(std::abs(perturbed.eval(Complex(1, 0))(0, 0)) < 1e-14);
}

TEST_CASE("stacked block solves the feasibility equation") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const Realization R = random_realization(3, 2, 2, rng());
        const Complex lambda = testing::safe_lambda(R, rng);
        const Vector x = testing::random_unit(3, rng);
        const Perturbation p = min_perturbation_b(R, lambda, x);
        // S * (stacked Delta) * x = -x
        const SMatrix S = make_s_matrix(R, lambda);
        Matrix full((2 + 1) * 3 + 2, 3);
        for (int j = 0; j <= 2; ++j) full.block(j * 3, 0, 3, 3) = p.dpoly[static_cast<std::size_t>(j)];
        full.block(3 * 3, 0, 2, 3) = *p.dB;
        CHECK((S.data * full * x + x).norm() < 1e-12);
    }
}

TEST_CASE("apply is additive and validates shapes") {
    const Realization R = r0();
    const Realization same = apply(R, zero_perturbation(R));
    CHECK(testing::max_abs_diff(same.eval_poly(Complex(0.3, 0.1)), R.eval_poly(Complex(0.3, 0.1))) == 0.0);

    const Perturbation p = min_perturbation_c(R, Complex(1, 0));
    const Realization perturbed = apply(R, p);
    CHECK(std::abs(perturbed.poly()[0](0, 0) - Complex(-2.0 / 3.0, 0)) < 1e-13);
    CHECK(std::abs(perturbed.poly()[1](0, 0) - Complex(1.0 / 3.0, 0)) < 1e-13);
    CHECK(std::abs(perturbed.C()(0, 0) - Complex(1.0 / 3.0, 0)) < 1e-13);

    Perturbation neg = p;
    for (auto& D : neg.dpoly) D = -D;
    neg.dC = -*neg.dC;
    const Realization back = apply(perturbed, neg);
    CHECK(testing::max_abs_diff(back.poly()[0], R.poly()[0]) <= 1e-15);
    CHECK(testing::max_abs_diff(back.C(), R.C()) <= 1e-15);

    Perturbation wrong = p;
    wrong.dpoly.pop_back();
    CHECK_THROWS_AS(apply(R, wrong), DimensionError);
    Perturbation both = p;
    both.dB = Matrix::Zero(1, 1);
    CHECK_THROWS_AS(apply(R, both), DimensionError);
}

TEST_CASE("exactness verification") {
    const Realization R = r0();
    const auto good = verify_exactness(R, min_perturbation_c(R, Complex(1, 0)), Complex(1, 0));
    CHECK(good.sigma < 1e-14);
    CHECK(good.ok);

    const auto bad = verify_exactness(R, zero_perturbation(R), Complex(1, 0));
    CHECK(bad.sigma == Approx(2.0).epsilon(1e-14));
    CHECK_FALSE(bad.ok);
}

TEST_CASE("both constructors are feasible and attain their eta on random instances") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4);
        const int m = static_cast<int>(rng() % 3);
        const int r = static_cast<int>(rng() % 4);
        const Realization R = random_realization(n, m, r, rng());
        const Complex lambda = testing::safe_lambda(R, rng);

        const Perturbation pc = min_perturbation_c(R, lambda);
        CHECK(verify_exactness(R, pc, lambda).ok);
        CHECK(pc.total_norm == Approx(eta_poly_and_c(R, lambda).eta).epsilon(1e-12));
        CHECK(pc.recompute_norm() == Approx(pc.total_norm).epsilon(1e-12));

        const Perturbation pb = min_perturbation_b(R, lambda);
        CHECK(verify_exactness(R, pb, lambda).ok);
        CHECK(pb.total_norm == Approx(eta_poly_and_b(R, lambda).variational).epsilon(1e-12));
        CHECK(pb.recompute_norm() == Approx(pb.total_norm).epsilon(1e-12));
    }
}

TEST_CASE("blocks are rank one with equal spectral and Frobenius norms") {
    std::mt19937_64 rng(43);
    const Realization R = random_realization(3, 2, 3, rng());
    const Complex lambda = testing::safe_lambda(R, rng);
    for (const Perturbation& p : {min_perturbation_c(R, lambda), min_perturbation_b(R, lambda)}) {
        std::vector<Matrix> blocks = p.dpoly;
        if (p.dC) blocks.push_back(*p.dC);
        if (p.dB) blocks.push_back(*p.dB);
        for (const Matrix& D : blocks) {
            if (D.norm() == 0.0) continue;
            Eigen::JacobiSVD<Matrix> svd(D);
            const auto& s = svd.singularValues();
            if (s.size() > 1) CHECK(s(1) <= 1e-12 * s(0));
            CHECK(s(0) == Approx(D.norm()).epsilon(1e-12));
        }
    }
}

TEST_CASE("coefficient blocks scale by conj(lambda)^j") {
    std::mt19937_64 rng(44);
    const Realization R = random_realization(2, 3, 2, rng());
    const Complex lambda = testing::safe_lambda(R, rng);
    const Perturbation p = min_perturbation_c(R, lambda);
    Complex factor(1.0, 0.0);
    for (int j = 0; j <= 3; ++j) {
        CHECK(testing::max_abs_diff(p.dpoly[static_cast<std::size_t>(j)], factor * p.dpoly[0]) <=
              1e-15 * std::max(1.0, std::abs(factor)) * p.dpoly[0].norm());
        factor *= std::conj(lambda);
    }
}
