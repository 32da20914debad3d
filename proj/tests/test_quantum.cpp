#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cylq/quadrature.hpp"
#include "cylq/quantum.hpp"

using namespace cylq;

namespace {

constexpr double kPi = 3.14159265358979323846;
const cplx kI{0.0, 1.0};

// (e^{i w t} - 1) / (i w), the innermost simplex layer.
cplx phase_antideriv(double w, double t) {
    if (w == 0.0) return t;
    return (std::exp(kI * (w * t)) - 1.0) / (kI * w);
}

// Exact iterated integral by peeling the innermost variable; valid while the
// partial frequency sums stay nonzero (generic omega).
cplx simplex_oracle(std::vector<double> omega, double t) {
    if (omega.size() == 1) return phase_antideriv(omega[0], t);
    double wm = omega.back();
    omega.pop_back();
    std::vector<double> merged = omega;
    merged.back() += wm;
    return (simplex_oracle(merged, t) - simplex_oracle(omega, t)) / (kI * wm);
}

}  // namespace

TEST_CASE("gauss-legendre rules and the cumulative integration matrix") {
    // Calling the partial matrix first exercises its internal rule lookup.
    const auto& P = gl_partial_matrix(12);
    const GaussLegendre& rule = gauss_legendre(12);
    REQUIRE(P.size() == 12);

    // Row r integrates x^5 from -1 to node r exactly (degree < npoints).
    for (size_t r = 0; r < P.size(); ++r) {
        double got = 0.0;
        for (size_t c = 0; c < P[r].size(); ++c)
            got += P[r][c] * std::pow(rule.nodes[c], 5);
        double want = (std::pow(rule.nodes[r], 6) - 1.0) / 6.0;
        CHECK(got == doctest::Approx(want).epsilon(1e-13));
    }

    const GaussLegendre& g16 = gauss_legendre(16);
    double wsum = 0.0;
    for (double w : g16.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    for (int k : {2, 8, 20, 30}) {
        double got = 0.0;
        for (size_t i = 0; i < g16.nodes.size(); ++i)
            got += g16.weights[i] * std::pow(g16.nodes[i], k);
        CHECK(got == doctest::Approx(2.0 / (k + 1)).epsilon(1e-12));
    }
}

TEST_CASE("simplex phase integrals match the closed-form recursion") {
    Rng rng(19);
    for (int m = 1; m <= 4; ++m) {
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<double> omega(static_cast<size_t>(m));
            for (double& w : omega) w = uniform(rng, 0.5, 3.0);
            double t = (trial % 2 == 0) ? 0.8 : -0.6;
            QuadResult qr = simplex_phase_integral(omega, t, 1e-13);
            cplx want = simplex_oracle(omega, t);
            CHECK(std::abs(qr.value - want) < 1e-11);
            CHECK(qr.err < 1e-10);
        }
    }
    // Zero frequencies reduce to the simplex volume t^m / m!.
    QuadResult vol = simplex_phase_integral({0.0, 0.0, 0.0}, 0.9, 1e-13);
    CHECK(std::abs(vol.value - std::pow(0.9, 3) / 6.0) < 1e-13);
}

TEST_CASE("qmc simplex integration agrees with the recursion within its estimate") {
    Rng rng(29);
    const int m = 5;
    SimplexQmcPoints pts = make_simplex_qmc_points(m, 0.5, 2048, 8, 77);
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<double> omega(m);
        for (double& w : omega) w = uniform(rng, 0.5, 4.0);
        QuadResult qr = simplex_phase_qmc(pts, omega);
        cplx want = simplex_oracle(omega, 0.5);
        CHECK(std::abs(qr.value - want) < std::max(4.0 * qr.err, 1e-8));
        // The legacy entry point builds the same points from the same seed.
        QuadResult qr2 = simplex_phase_qmc(omega, 0.5, 2048, 8, 77);
        CHECK(qr2.value == qr.value);
    }
}

TEST_CASE("truncated hamiltonian entries and hermiticity") {
    TrigPotential V(1);
    V.set_mode({1}, cplx(0.3, 0.2));
    double hbar = 0.8;
    FourierWindow win(1, 3);
    TruncatedHamiltonian H(win, hbar, V);
    Eigen::MatrixXcd M = H.dense();
    CHECK((M - M.adjoint()).norm() < 1e-14);
    for (Int a = -3; a <= 3; ++a) {
        Int i = win.flatten({a});
        CHECK(std::abs(M(i, i) - cplx(2.0 * kPi * kPi * hbar * hbar * double(a * a))) < 1e-13);
        if (a < 3) CHECK(std::abs(M(win.flatten({a + 1}), i) - cplx(0.3, 0.2)) < 1e-15);
    }
}

TEST_CASE("free propagator is a diagonal unitary group") {
    FourierWindow win(1, 5);
    PlanckParam hbar(0.7);
    Eigen::MatrixXcd U1 = dense(free_propagator(win, hbar, 0.4));
    Eigen::MatrixXcd U2 = dense(free_propagator(win, hbar, 0.9));
    Eigen::MatrixXcd U12 = dense(free_propagator(win, hbar, 1.3));
    CHECK((U1 * U1.adjoint() - Eigen::MatrixXcd::Identity(U1.rows(), U1.cols())).norm() < 1e-13);
    CHECK((U1 * U2 - U12).norm() < 1e-13);
    Int i = win.flatten({3});
    CHECK(std::abs(U1(i, i) - std::exp(-kI * (2.0 * kPi * kPi * 0.4 * 0.7 * 9.0))) < 1e-14);
}

TEST_CASE("heisenberg conjugation by the free propagator, dense oracle") {
    Rng rng(37);
    FourierWindow win(1, 5);
    PlanckParam hbar(0.9);
    double t = 0.6;
    std::vector<LatticeOperator::Term> terms;
    for (Int k : {-2, 0, 1}) {
        std::vector<cplx> d(static_cast<size_t>(win.size()));
        for (auto& v : d) v = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
        terms.push_back({{k}, std::move(d)});
    }
    LatticeOperator A = make_operator(win, std::move(terms));
    Eigen::MatrixXcd F = dense(free_propagator(win, hbar, t));
    Eigen::MatrixXcd want = F.adjoint() * dense(A) * F;
    CHECK((dense(heisenberg_free(A, hbar, t)) - want).norm() < 1e-12);
}

TEST_CASE("free conjugation of symbols is the flow pullback") {
    Rng rng(41);
    Observable f;
    f.n = 1;
    Eigen::VectorXd xi(1);
    xi << 0.0;
    f.gens.push_back({{2}, MomentumSymbol::gaussian(Subspace::full(1), xi,
                                                    Eigen::MatrixXd::Identity(1, 1),
                                                    Eigen::VectorXcd::Zero(1))});
    double t = 0.7;
    Observable g = free_conjugation_symbolic(f, t);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd q(1), p(1);
        q << uniform(rng, 0, 1);
        p << uniform(rng, -2, 2);
        CHECK(std::abs(eval(g, q, p) - eval(f, q + t * p, p)) < 1e-11);
    }
}

TEST_CASE("single dyson layers carry the closed-form diagonal") {
    PlanckParam hbar(0.8);
    double t = 0.5;
    FourierWindow win(1, 6);

    DysonTermResult r1 = dyson_term({{1}}, t, hbar, win);
    REQUIRE(r1.op.terms.size() == 1);
    for (Int a = -6; a <= 5; ++a) {
        double omega = 2.0 * kPi * kPi * hbar.hbar * double((a + 1) * (a + 1) - a * a);
        cplx want = phase_antideriv(omega, t);
        CHECK(std::abs(r1.op.terms[0].diag[size_t(win.flatten({a}))] - want) < 1e-12);
    }

    // Two layers against an outer Gauss-Legendre sweep with the inner layer in
    // closed form; per-layer frequencies follow the partial sums of the shifts.
    DysonTermResult r2 = dyson_term({{1}, {-2}}, t, hbar, win);
    REQUIRE(r2.op.terms.size() == 1);
    const GaussLegendre& g = gauss_legendre(32);
    for (Int a = -4; a <= 4; ++a) {
        double a1 = double(a - 2);  // source after the later shift
        double w1 = 2.0 * kPi * kPi * hbar.hbar * ((a1 + 1) * (a1 + 1) - a1 * a1);
        double w2 = 2.0 * kPi * kPi * hbar.hbar * double((a - 2) * (a - 2) - a * a);
        cplx want = 0.0;
        const int panels = 8;
        for (int pnl = 0; pnl < panels; ++pnl) {
            double lo = t * pnl / panels, hw = 0.5 * t / panels;
            for (size_t i = 0; i < g.nodes.size(); ++i) {
                double s = lo + hw * (g.nodes[i] + 1.0);
                want += hw * g.weights[i] * std::exp(kI * (w1 * s)) * phase_antideriv(w2, s);
            }
        }
        CHECK(std::abs(r2.op.terms[0].diag[size_t(win.flatten({a}))] - want) < 1e-10);
    }
}

TEST_CASE("dyson partial sums start at the identity and tighten the remainder") {
    TrigPotential V(1);
    V.set_mode({1}, 0.25);
    PlanckParam hbar(1.0);
    FourierWindow win(1, 8);

    auto [W0, rep0] = dyson_partial_sum(V, 0.5, hbar, win, 0);
    CHECK((dense(W0) - Eigen::MatrixXcd::Identity(win.size(), win.size())).norm() == 0.0);
    CHECK(rep0.remainder == doctest::Approx(std::exp(0.5 * V.sup_bound()) - 1.0).epsilon(1e-12));

    auto [W2, rep2] = dyson_partial_sum(V, 0.5, hbar, win, 2);
    CHECK(rep2.remainder < 0.1 * rep0.remainder);
    CHECK(rep2.M == 2);
    CHECK(rep2.quad_error < 1e-10);

    // Word count guard: support^M explodes and is refused up front.
    TrigPotential big(1);
    for (Int k = 1; k <= 5; ++k) big.set_mode({k}, 0.01);
    CHECK_THROWS_AS(dyson_partial_sum(big, 0.5, hbar, win, 7), Error);
}

TEST_CASE("interaction picture propagator is unitary and closes the identity") {
    TrigPotential V(1);
    V.set_mode({1}, 0.3);
    V.set_mode({2}, cplx(0.1, 0.05));
    PlanckParam hbar(0.9);
    double t = 0.4;
    FourierWindow win(1, 6);

    Eigen::MatrixXcd W = exact_interaction_propagator(V, t, hbar, win);
    CHECK((W * W.adjoint() - Eigen::MatrixXcd::Identity(W.rows(), W.cols())).norm() < 1e-12);

    Rng rng(53);
    std::vector<cplx> d(static_cast<size_t>(win.size()));
    for (auto& v : d) v = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
    LatticeOperator A = make_operator(win, {{{1}, std::move(d)}});
    DefectReport rep = heisenberg_evolution_check(A, V, t, hbar, win);
    CHECK(rep.value < 1e-10);
}
