#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cylq/experiments.hpp"
#include "cylq/quantizer.hpp"

using namespace cylq;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<cplx> basis_vector(const FourierWindow& win, const IntVector& l) {
    std::vector<cplx> psi(static_cast<size_t>(win.size()), cplx(0.0, 0.0));
    psi[static_cast<size_t>(win.flatten(l))] = 1.0;
    return psi;
}

}  // namespace

TEST_CASE("quantized generator acts by shift and sampled diagonal") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 1 + (trial % 2);
        Generator g = random_generator(rng, n, int(uniform_int(rng, 0, Int(n))));
        double hbar = uniform(rng, 0.2, 1.5);
        FourierWindow win(n, 4);
        Observable f;
        f.n = n;
        f.gens.push_back(g);
        LatticeOperator A = weyl_quantize(f, hbar, win);
        REQUIRE(A.terms.size() == 1);

        // Action on basis vectors: psi_l -> h(pi hbar (k + 2l)) psi_{k+l}.
        for (int rep = 0; rep < 4; ++rep) {
            IntVector l(n);
            for (auto& lj : l) lj = uniform_int(rng, -4, 4);
            std::vector<cplx> out = cylq::apply(A, basis_vector(win, l));
            IntVector target(n);
            bool inside = true;
            Eigen::VectorXd p(n);
            for (int j = 0; j < n; ++j) {
                target[j] = g.k[j] + l[j];
                inside = inside && std::abs(target[j]) <= 4;
                p[j] = kPi * hbar * double(g.k[j] + 2 * l[j]);
            }
            cplx want = g.h.eval(p);
            for (Int idx = 0; idx < win.size(); ++idx) {
                cplx expect = (inside && idx == win.flatten(target)) ? want : cplx(0.0);
                CHECK(std::abs(out[size_t(idx)] - expect) < 1e-13 * std::max(1.0, std::abs(want)));
            }
        }
    }
}

TEST_CASE("quantization is linear and respects adjoints") {
    Rng rng(77);
    FourierWindow win(1, 5);
    PlanckParam hbar(0.8);
    Observable f = random_observable(rng, 1, 2, 1);
    Observable g = random_observable(rng, 1, 2, 1);

    Eigen::MatrixXcd Mf = dense(weyl_quantize(f, hbar, win));
    Eigen::MatrixXcd Mg = dense(weyl_quantize(g, hbar, win));
    CHECK((dense(weyl_quantize(add(f, g), hbar, win)) - (Mf + Mg)).norm() < 1e-12);
    CHECK((dense(weyl_quantize(scaled(f, cplx(0, 2)), hbar, win)) - cplx(0, 2) * Mf).norm() <
          1e-12);
    // Q(conj f) = Q(f)^dagger exactly: the sampled diagonal conjugates and the
    // shift reverses.
    CHECK((dense(weyl_quantize(conjugate(f), hbar, win)) - Mf.adjoint()).norm() < 1e-13);
}

TEST_CASE("integral oracle reproduces the sampled action") {
    Rng rng(5);
    // One Gaussian with displaced complex exponent and one plane wave.
    Subspace U = Subspace::full(1);
    MomentumSymbol gauss = MomentumSymbol::gaussian(
        U, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 0.9),
        Eigen::VectorXcd::Constant(1, cplx(0.4, 0.7)), cplx(1.0, -0.3));
    Eigen::VectorXd xi(1);
    xi << 1.1;
    MomentumSymbol plane = MomentumSymbol::plane_wave(1, xi);

    FourierWindow win(1, 6);
    PlanckParam hbar(0.5);
    for (const auto& pair : {std::pair<IntVector, MomentumSymbol>{{1}, gauss},
                             std::pair<IntVector, MomentumSymbol>{{-2}, plane}}) {
        Generator gen{pair.first, pair.second};
        for (Int l0 : {-2, 0, 3}) {
            IntVector l{l0};
            OracleResult res = weyl_integral_oracle(gen, hbar, l, win);
            REQUIRE(res.converged);
            Observable f;
            f.n = 1;
            f.gens.push_back(gen);
            std::vector<cplx> want =
                cylq::apply(weyl_quantize(f, hbar, win), basis_vector(win, l));
            double diff = 0.0;
            for (size_t i = 0; i < want.size(); ++i)
                diff = std::max(diff, std::abs(res.coeffs[i] - want[i]));
            CHECK(diff < 1e-7);
        }
    }
}

TEST_CASE("star, equivariance, and rescale defects are small on finite sums") {
    Rng rng(13);
    FourierWindow win(1, 8);
    Observable f = random_observable(rng, 1, 2, 1);

    DefectReport star = check_star(f, PlanckParam(0.7), win);
    CHECK(star.value < 1e-10);
    CHECK(star.margin > 0);

    Eigen::VectorXd x(1);
    x << 0.37;
    DefectReport eq = check_equivariance(f, x, PlanckParam(0.7), win);
    CHECK(eq.value < 1e-10);

    DefectReport rs = check_planck_rescale(f, PlanckParam(0.9), PlanckParam(0.45), win);
    CHECK(rs.value < 1e-10);
}

TEST_CASE("rank one approximation pins a single matrix element") {
    FourierWindow win(1, 6);
    PlanckParam hbar(0.6);
    auto [f, rep] = rank_one_approx({2}, {0}, hbar, win, 1e-8);
    CHECK(rep.value < 1e-8);
    // The quantization concentrates on |psi_2><psi_0|.
    Eigen::MatrixXcd M = dense(weyl_quantize(f, hbar, win));
    Int row = win.flatten({2}), col = win.flatten({0});
    CHECK(std::abs(M(row, col) - cplx(1.0)) < 1e-6);
    double off = 0.0;
    for (Int i = 0; i < win.size(); ++i)
        for (Int j = 0; j < win.size(); ++j)
            if (i != row || j != col) off = std::max(off, std::abs(M(i, j)));
    CHECK(off < 1e-6);
}

TEST_CASE("plane waves in the lattice directions quantize to isometric shifts") {
    // f = e_1 (x) 1: Q(f) is the pure shift, so its norm matches sup |f| = 1
    // exactly at every hbar and the Rieffel gap vanishes identically.
    Observable f;
    f.n = 1;
    f.gens.push_back({{1}, MomentumSymbol::plane_wave(1, Eigen::VectorXd::Zero(1))});
    std::vector<RieffelRow> rows = rieffel_curve(f, {1.0, 0.5, 0.25}, {6, 6, 6}, 400);
    REQUIRE(rows.size() == 3);
    for (const RieffelRow& r : rows) {
        CHECK(r.qnorm == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.supnorm == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("window schedule radius covers the gaussian mass") {
    Observable f;
    f.n = 1;
    f.gens.push_back({{2}, MomentumSymbol::gaussian(Subspace::full(1), Eigen::VectorXd::Zero(1),
                                                    Eigen::MatrixXd::Identity(1, 1),
                                                    Eigen::VectorXcd::Zero(1))});
    double R = gaussian_sup_radius(f, 1e-8);
    // exp(-R^2) <= 1e-8 forces R >= sqrt(8 ln 10) ~ 4.29.
    CHECK(R >= 4.0);
    // Tighter eps never shrinks the radius.
    CHECK(gaussian_sup_radius(f, 1e-12) >= R);
    CHECK(shift_reach(f) == 2);

    // Plane waves carry no gaussian factor, so no radius requirement.
    Observable pw;
    pw.n = 1;
    pw.gens.push_back({{1}, MomentumSymbol::plane_wave(1, Eigen::VectorXd::Zero(1))});
    CHECK(gaussian_sup_radius(pw, 1e-8) == 0.0);
}

TEST_CASE("bracket defects shrink with hbar at their expected first orders") {
    Observable f, g;
    f.n = g.n = 1;
    f.gens.push_back({{1}, MomentumSymbol::gaussian(Subspace::full(1), Eigen::VectorXd::Zero(1),
                                                    Eigen::MatrixXd::Identity(1, 1),
                                                    Eigen::VectorXcd::Zero(1))});
    Eigen::VectorXd xi(1);
    xi << 0.6;
    g.gens.push_back({{1}, MomentumSymbol::plane_wave(1, xi)});

    FourierWindow win(1, 34);
    DefectReport v1 = von_neumann_defect(f, g, PlanckParam(0.125), win);
    DefectReport v2 = von_neumann_defect(f, g, PlanckParam(0.0625), win);
    CHECK(v1.value > 0.0);
    // First order in hbar: halving hbar roughly halves the defect.
    CHECK(v2.value < 0.6 * v1.value);

    DefectReport d1 = dirac_defect(f, g, PlanckParam(0.125), win);
    DefectReport d2 = dirac_defect(f, g, PlanckParam(0.0625), win);
    // Second order: the decay ratio clearly beats the first-order one.
    CHECK(d2.value < 0.4 * d1.value);
    CHECK(d2.value / d1.value < v2.value / v1.value - 0.1);
}

TEST_CASE("strong continuity curve vanishes at the base point") {
    Observable f;
    f.n = 1;
    Eigen::VectorXd xi(1);
    xi << 0.8;
    f.gens.push_back({{0}, MomentumSymbol::plane_wave(1, xi)});
    FourierWindow win(1, 6);
    std::vector<cplx> psi = basis_vector(win, {0});
    std::vector<StrongContinuityRow> rows =
        strong_continuity_curve(f, psi, PlanckParam(0.7), {0.7, 0.71, 0.75}, win);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].value < 1e-14);
    // Drift grows with the distance from the base point.
    CHECK(rows[1].value <= rows[2].value + 1e-12);
    CHECK(rows[2].value < 0.2);
}

TEST_CASE("tensor embedding attaches trivial factors without changing the norm") {
    Rng rng(17);
    Observable f = random_observable(rng, 1, 2, 1);
    DefectReport rep = tensor_embed_check(f, 1, PlanckParam(0.7), 4);
    CHECK(rep.value < 1e-10);
}
