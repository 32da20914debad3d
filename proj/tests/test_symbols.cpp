#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cylq/experiments.hpp"
#include "cylq/symbols.hpp"

using namespace cylq;

namespace {

constexpr double kPi = 3.14159265358979323846;
const cplx kI{0.0, 1.0};

Eigen::VectorXd rvec(Rng& rng, int n, double lo = -2.0, double hi = 2.0) {
    Eigen::VectorXd v(n);
    for (int j = 0; j < n; ++j) v[j] = uniform(rng, lo, hi);
    return v;
}

// Central difference of f along direction v.
template <typename F>
cplx dirderiv(F&& f, const Eigen::VectorXd& p, const Eigen::VectorXd& v, double h = 1e-5) {
    return (f(p + h * v) - f(p - h * v)) / (2.0 * h);
}

}  // namespace

TEST_CASE("subspace construction and projection") {
    Subspace z = Subspace::zero(3);
    CHECK(z.dim() == 0);
    Subspace f = Subspace::full(3);
    CHECK(f.dim() == 3);

    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 2 + int(uniform_int(rng, 0, 2));
        int d = int(uniform_int(rng, 1, Int(n)));
        Eigen::MatrixXd vecs(n, d);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) vecs(i, j) = uniform(rng, -1, 1);
        Subspace U = Subspace::from_span(n, vecs);
        CHECK(U.dim() == d);
        CHECK((U.B.transpose() * U.B - Eigen::MatrixXd::Identity(d, d)).norm() < 1e-12);
        // Projection is idempotent and fixes the span.
        Eigen::VectorXd p = rvec(rng, n);
        CHECK((U.project(U.project(p)) - U.project(p)).norm() < 1e-12);
        for (int j = 0; j < d; ++j)
            CHECK((U.project(vecs.col(j)) - vecs.col(j)).norm() < 1e-10 * vecs.col(j).norm());
    }

    // Duplicate directions are dropped.
    Eigen::MatrixXd dup(2, 2);
    dup << 1, 2, 1, 2;
    CHECK(Subspace::from_span(2, dup).dim() == 1);

    Subspace a = Subspace::from_span(2, Eigen::MatrixXd::Identity(2, 2).col(0));
    Subspace b = Subspace::from_span(2, Eigen::MatrixXd::Identity(2, 2).col(1));
    CHECK(Subspace::sum(a, b).dim() == 2);
    CHECK(Subspace::sum(a, a).dim() == 1);
    CHECK(a.contains(a));
    CHECK_FALSE(a.contains(b));
    CHECK(Subspace::full(2).contains(a));
}

TEST_CASE("polynomial evaluation, product, derivative, substitution") {
    Polynomial p(2);
    p.add({1, 0}, 2.0);         // 2u
    p.add({0, 2}, cplx(0, 1));  // i v^2
    Eigen::VectorXd x(2);
    x << 3.0, 2.0;
    CHECK(std::abs(p.eval(x) - (cplx(6.0) + cplx(0, 4.0))) < 1e-14);
    CHECK(p.degree() == 2);

    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        Polynomial a(2), b(2);
        for (int i = 0; i < 3; ++i) {
            a.add({int(uniform_int(rng, 0, 2)), int(uniform_int(rng, 0, 2))},
                  {uniform(rng, -1, 1), uniform(rng, -1, 1)});
            b.add({int(uniform_int(rng, 0, 2)), int(uniform_int(rng, 0, 2))},
                  {uniform(rng, -1, 1), uniform(rng, -1, 1)});
        }
        Eigen::VectorXd u = rvec(rng, 2);
        CHECK(std::abs((a * b).eval(u) - a.eval(u) * b.eval(u)) < 1e-12);
        CHECK(std::abs((a + b).eval(u) - (a.eval(u) + b.eval(u))) < 1e-12);
        CHECK(std::abs(a.conjugated().eval(u) - std::conj(a.eval(u))) < 1e-12);

        Eigen::VectorXcd w(2);
        w << cplx(uniform(rng, -1, 1), uniform(rng, -1, 1)),
            cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
        // Complex directional derivative = w . grad, checked on real directions.
        cplx want = w[0] * dirderiv([&](const Eigen::VectorXd& y) { return a.eval(y); }, u,
                                    Eigen::Vector2d(1, 0)) +
                    w[1] * dirderiv([&](const Eigen::VectorXd& y) { return a.eval(y); }, u,
                                    Eigen::Vector2d(0, 1));
        CHECK(std::abs(a.derivative(w).eval(u) - want) < 1e-8);

        Eigen::MatrixXd M(2, 3);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j) M(i, j) = uniform(rng, -1, 1);
        Eigen::VectorXd y = rvec(rng, 3);
        CHECK(std::abs(a.compose_linear(M).eval(y) - a.eval(M * y)) < 1e-12);
        CHECK(std::abs(a.scale_vars(1.7).eval(u) - a.eval(1.7 * u)) < 1e-12);
    }
}

TEST_CASE("momentum symbol eval matches the closed form") {
    // n=2, U = span(e1), xi = (0, 0.7): h(p) = e^{i 0.7 p2} (u + i) e^{-2u^2 + (1+0.5i)u},
    // u = p1.
    Subspace U = Subspace::from_span(2, Eigen::MatrixXd::Identity(2, 2).col(0));
    Eigen::VectorXd xi(2);
    xi << 0.0, 0.7;
    SymbolTerm t;
    t.coeff = 1.0;
    Polynomial poly(1);
    poly.add({1}, 1.0);
    poly.add({0}, kI);
    t.poly = poly;
    t.Q = Eigen::MatrixXd::Constant(1, 1, 2.0);
    t.w = Eigen::VectorXcd::Constant(1, cplx(1.0, 0.5));
    MomentumSymbol h(U, xi, {t});

    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd p = rvec(rng, 2, -3, 3);
        const double u = p[0];
        cplx want = std::exp(kI * (0.7 * p[1])) * (cplx(u) + kI) *
                    std::exp(-2.0 * u * u + cplx(1.0, 0.5) * u);
        CHECK(std::abs(h.eval(p) - want) < 1e-13 * std::max(1.0, std::abs(want)));
    }

    // Plane wave has unit modulus and the right phase.
    Eigen::VectorXd x2(2);
    x2 << 1.3, -0.4;
    MomentumSymbol pw = MomentumSymbol::plane_wave(2, x2);
    Eigen::VectorXd p = rvec(rng, 2);
    CHECK(std::abs(pw.eval(p) - std::exp(kI * x2.dot(p))) < 1e-14);
    CHECK(pw.dim() == 0);
}

TEST_CASE("momentum symbol constructor validation") {
    // Non-orthonormal basis rejected.
    Subspace bad{2, Eigen::MatrixXd::Constant(2, 1, 1.0)};
    SymbolTerm t;
    t.poly = Polynomial::constant(1, 1.0);
    t.Q = Eigen::MatrixXd::Identity(1, 1);
    t.w = Eigen::VectorXcd::Zero(1);
    CHECK_THROWS_AS(MomentumSymbol(bad, Eigen::VectorXd::Zero(2), {t}), Error);

    Subspace U = Subspace::from_span(2, Eigen::MatrixXd::Identity(2, 2).col(0));
    // xi inside U rejected.
    Eigen::VectorXd xi_in(2);
    xi_in << 1.0, 0.0;
    CHECK_THROWS_AS(MomentumSymbol(U, xi_in, {t}), Error);
    // Q must be positive definite.
    SymbolTerm t2 = t;
    t2.Q = Eigen::MatrixXd::Constant(1, 1, -0.5);
    CHECK_THROWS_AS(MomentumSymbol(U, Eigen::VectorXd::Zero(2), {t2}), Error);
    // Near-symmetric Q accepted, symmetrized exactly.
    Subspace F = Subspace::full(2);
    SymbolTerm t3;
    t3.poly = Polynomial::constant(2, 1.0);
    t3.Q = Eigen::MatrixXd::Identity(2, 2);
    t3.Q(0, 1) = 0.3;
    t3.Q(1, 0) = 0.3 + 1e-12;
    t3.w = Eigen::VectorXcd::Zero(2);
    MomentumSymbol s(F, Eigen::VectorXd::Zero(2), {t3});
    CHECK(s.terms()[0].Q(0, 1) == s.terms()[0].Q(1, 0));
}

TEST_CASE("symbol algebra against pointwise oracles") {
    Rng rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 1 + (trial % 2);
        Generator ga = random_generator(rng, n, int(uniform_int(rng, 0, Int(n))));
        Generator gb = random_generator(rng, n, int(uniform_int(rng, 0, Int(n))));
        const MomentumSymbol& a = ga.h;
        const MomentumSymbol& b = gb.h;
        Eigen::VectorXd p = rvec(rng, n);

        CHECK(std::abs(a.multiply(b).eval(p) - a.eval(p) * b.eval(p)) < 1e-11);
        CHECK(std::abs(a.conjugate().eval(p) - std::conj(a.eval(p))) < 1e-12);
        CHECK(std::abs(a.scaled(cplx(0.3, -2)).eval(p) - cplx(0.3, -2) * a.eval(p)) < 1e-12);
        CHECK(std::abs(a.scale_momentum(0.6).eval(p) - a.eval(0.6 * p)) < 1e-11);

        Eigen::VectorXd v = rvec(rng, n, -1, 1);
        cplx want = dirderiv([&](const Eigen::VectorXd& y) { return a.eval(y); }, p, v);
        CHECK(std::abs(a.derivative(v).eval(p) - want) < 1e-6 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("observable eval, product, bracket oracle") {
    Rng rng(42);
    for (int trial = 0; trial < 15; ++trial) {
        int n = 1 + (trial % 2);
        Observable f = random_observable(rng, n, 2, n);
        Observable g = random_observable(rng, n, 2, n);
        Eigen::VectorXd q = rvec(rng, n, 0, 1), p = rvec(rng, n, -2, 2);

        cplx fv = 0.0;
        for (const Generator& gen : f.gens) {
            double kq = 0;
            for (int j = 0; j < n; ++j) kq += double(gen.k[j]) * q[j];
            fv += std::exp(2.0 * kPi * kI * kq) * gen.h.eval(p);
        }
        CHECK(std::abs(eval(f, q, p) - fv) < 1e-12);

        CHECK(std::abs(eval(multiply(f, g), q, p) - eval(f, q, p) * eval(g, q, p)) < 1e-10);
        CHECK(std::abs(eval(add(f, g), q, p) - (eval(f, q, p) + eval(g, q, p))) < 1e-12);
        CHECK(std::abs(eval(conjugate(f), q, p) - std::conj(eval(f, q, p))) < 1e-12);

        // Bracket oracle: sum_j d_p f d_q g - d_q f d_p g by central differences.
        auto F = [&](const Eigen::VectorXd& qq, const Eigen::VectorXd& pp) {
            return eval(f, qq, pp);
        };
        auto G = [&](const Eigen::VectorXd& qq, const Eigen::VectorXd& pp) {
            return eval(g, qq, pp);
        };
        const double h = 1e-5;
        cplx want = 0.0;
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd ej = Eigen::VectorXd::Zero(n);
            ej[j] = h;
            cplx dfp = (F(q, p + ej) - F(q, p - ej)) / (2 * h);
            cplx dfq = (F(q + ej, p) - F(q - ej, p)) / (2 * h);
            cplx dgp = (G(q, p + ej) - G(q, p - ej)) / (2 * h);
            cplx dgq = (G(q + ej, p) - G(q - ej, p)) / (2 * h);
            want += dfp * dgq - dfq * dgp;
        }
        cplx got = eval(poisson_bracket(f, g), q, p);
        CHECK(std::abs(got - want) < 1e-5 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("configuration translation and free flow pullback") {
    Rng rng(9);
    for (int trial = 0; trial < 15; ++trial) {
        int n = 1 + (trial % 2);
        Observable f = random_observable(rng, n, 2, n);
        Eigen::VectorXd q = rvec(rng, n, 0, 1), p = rvec(rng, n, -2, 2);
        Eigen::VectorXd x = rvec(rng, n, -1, 1);
        CHECK(std::abs(eval(translate_config(f, x), q, p) - eval(f, q - x, p)) < 1e-11);

        double t = uniform(rng, -1.5, 1.5);
        CHECK(std::abs(eval(free_flow_pullback(f, t), q, p) -
                       eval(f, q + t * p, p)) < 1e-10);

        CHECK(std::abs(eval(scale_momentum(f, 1.3), q, p) - eval(f, q, 1.3 * p)) < 1e-11);
    }
}

TEST_CASE("canonicalize merges duplicates and preserves values") {
    Rng rng(55);
    Observable f = random_observable(rng, 1, 2, 1);
    // Duplicate every generator; canonical form folds them back together.
    Observable doubled = add(f, f);
    Observable canon = canonicalize(doubled);
    CHECK(canon.gens.size() <= f.gens.size());
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd q = rvec(rng, 1, 0, 1), p = rvec(rng, 1, -2, 2);
        CHECK(std::abs(eval(canon, q, p) - 2.0 * eval(f, q, p)) < 1e-11);
    }
    // Idempotent once canonical.
    Observable canon2 = canonicalize(canon);
    CHECK(canon2.gens.size() == canon.gens.size());
}

TEST_CASE("sup norm estimate: exact peaks and monotone budget") {
    // |e_1 (x) exp(-p^2)| peaks at 1.
    Observable f;
    f.n = 1;
    f.gens.push_back({{1}, MomentumSymbol::gaussian(Subspace::full(1), Eigen::VectorXd::Zero(1),
                                                    Eigen::MatrixXd::Identity(1, 1),
                                                    Eigen::VectorXcd::Zero(1))});
    double s1 = sup_norm_estimate(f, 200, 4.0);
    double s2 = sup_norm_estimate(f, 2000, 4.0);
    CHECK(s1 <= s2 + 1e-15);
    CHECK(s2 == doctest::Approx(1.0).epsilon(1e-9));

    // Constant observable: sup exactly 1.
    Observable one;
    one.n = 1;
    one.gens.push_back({{0}, MomentumSymbol::plane_wave(1, Eigen::VectorXd::Zero(1))});
    CHECK(sup_norm_estimate(one, 100, 4.0) == 1.0);
}
