#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "cylq/lattice.hpp"

using namespace cylq;

namespace {

IntMatrix from_rows(std::vector<std::vector<Int>> rows) {
    IntMatrix m(int(rows.size()), int(rows[0].size()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m.at(i, j) = rows[i][j];
    return m;
}

void check_snf(const IntMatrix& M) {
    SmithDecomposition s = smith_normal_form(M);
    CHECK(s.U.is_unimodular());
    CHECK(s.V.is_unimodular());
    CHECK(s.U.mul(s.Uinv) == IntMatrix::identity(M.rows()));
    CHECK(s.U.mul(M).mul(s.V) == s.D);
    int steps = std::min(M.rows(), M.cols());
    for (int i = 0; i < steps; ++i) {
        CHECK(s.D.at(i, i) >= 0);
        if (i + 1 < steps && s.D.at(i, i) != 0) CHECK(s.D.at(i + 1, i + 1) % s.D.at(i, i) == 0);
    }
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j)
            if (i != j) CHECK(s.D.at(i, j) == 0);
}

}  // namespace

TEST_CASE("checked arithmetic reports overflow") {
    CHECK(checked_add(1, 2) == 3);
    CHECK_THROWS_AS(checked_mul(Int(1) << 40, Int(1) << 40), OverflowError);
    CHECK_THROWS_AS(checked_add(std::numeric_limits<Int>::max(), 1), OverflowError);
}

TEST_CASE("gcd_bezout basic identities") {
    auto [g1, a1] = gcd_bezout({2, 3});
    CHECK(g1 == 1);
    CHECK(2 * a1[0] + 3 * a1[1] == 1);

    auto [g2, a2] = gcd_bezout({4, 6});
    CHECK(g2 == 2);
    CHECK(4 * a2[0] + 6 * a2[1] == 2);

    auto [g0, a0] = gcd_bezout({0, 0});
    CHECK(g0 == 0);
    CHECK(a0 == IntVector{0, 0});
}

TEST_CASE("gcd_bezout on 1000 random vectors") {
    Rng rng(12345);
    for (int trial = 0; trial < 1000; ++trial) {
        int n = int(uniform_int(rng, 1, 5));
        IntVector v(n);
        for (auto& x : v) x = uniform_int(rng, -1000000, 1000000);
        auto [g, a] = gcd_bezout(v);
        Int dot = 0, gref = 0;
        for (int i = 0; i < n; ++i) {
            dot = checked_add(dot, checked_mul(v[i], a[i]));
            gref = std::gcd(gref, v[i]);
        }
        CHECK(dot == g);
        CHECK(g == gref);
    }
}

TEST_CASE("smith normal form on pinned matrices") {
    check_snf(IntMatrix::identity(2));
    {
        SmithDecomposition s = smith_normal_form(from_rows({{2, 0}, {0, 3}}));
        CHECK(s.D.at(0, 0) == 1);
        CHECK(s.D.at(1, 1) == 6);
    }
    {
        SmithDecomposition s = smith_normal_form(from_rows({{2}, {4}}));
        CHECK(s.D.at(0, 0) == 2);
    }
    check_snf(from_rows({{0, 0}, {0, 0}}));
    check_snf(from_rows({{2, 4, 4}, {-6, 6, 12}, {10, 4, 16}}));
}

TEST_CASE("smith normal form on random matrices") {
    Rng rng(777);
    for (int trial = 0; trial < 200; ++trial) {
        int r = int(uniform_int(rng, 1, 4));
        int c = int(uniform_int(rng, 1, 4));
        IntMatrix M(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) M.at(i, j) = uniform_int(rng, -30, 30);
        check_snf(M);
    }
}

TEST_CASE("is_primitive matches brute force on single vectors") {
    CHECK(is_primitive({{1, 0}}, 2));
    CHECK_FALSE(is_primitive({{2, 0}}, 2));
    CHECK(is_primitive({{2, 3}}, 2));
    CHECK(is_primitive({}, 2));
    CHECK_THROWS_AS(is_primitive({{1, 2}, {2, 4}}, 2), DimensionError);

    // Oracle: a single vector is primitive iff gcd of entries is 1.
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        int n = int(uniform_int(rng, 1, 4));
        IntVector v(n);
        Int g = 0;
        bool zero = true;
        for (auto& x : v) {
            x = uniform_int(rng, -20, 20);
            g = std::gcd(g, x);
            if (x != 0) zero = false;
        }
        if (zero) continue;
        CHECK(is_primitive({v}, n) == (g == 1));
    }
}

TEST_CASE("extend_to_unimodular pinned examples") {
    CHECK(extend_to_unimodular({{1, 0}}, 2).is_unimodular());
    IntMatrix B = extend_to_unimodular({{2, 3}}, 2);
    CHECK(B.at(0, 0) == 2);
    CHECK(B.at(1, 0) == 3);
    CHECK(B.is_unimodular());
    CHECK(extend_to_unimodular({}, 2) == IntMatrix::identity(2));
    CHECK_THROWS_WITH_AS(extend_to_unimodular({{2, 0}}, 2),
                         doctest::Contains("elementary divisor"), Error);
}

TEST_CASE("extend_to_unimodular on random primitive sets") {
    Rng rng(4242);
    for (int trial = 0; trial < 100; ++trial) {
        int n = int(uniform_int(rng, 2, 4));
        int l = int(uniform_int(rng, 1, Int(n)));
        IntMatrix S = random_unimodular(rng, n, 12, 2000);
        std::vector<IntVector> cols;
        for (int j = 0; j < l; ++j) cols.push_back(S.col(j));
        CHECK(is_primitive(cols, n));
        IntMatrix B = extend_to_unimodular(cols, n);
        Int d = B.det();
        CHECK((d == 1 || d == -1));
        for (int j = 0; j < l; ++j)
            for (int i = 0; i < n; ++i) CHECK(B.at(i, j) == cols[j][i]);
    }
}

TEST_CASE("direction_period examples and minimality") {
    auto T = direction_period(RationalDirection::make({1, 0}, 1));
    CHECK(T.num == 1);
    CHECK(T.den == 1);
    T = direction_period(RationalDirection::make({2, 4}, 1));
    CHECK(T.num == 1);
    CHECK(T.den == 2);
    T = direction_period(RationalDirection::make({3, 5}, 1));
    CHECK(T.num == 1);
    CHECK(T.den == 1);

    CHECK_THROWS_AS(RationalDirection::make({0, 0}, 1), Error);

    // Minimality by divisor scan: T = num/den, any T' = T*(a/b) with b>a>=1
    // dividing evenly must fail integrality.
    Rng rng(31337);
    for (int trial = 0; trial < 100; ++trial) {
        int n = int(uniform_int(rng, 1, 3));
        IntVector num(n);
        bool zero = true;
        for (auto& x : num) {
            x = uniform_int(rng, -12, 12);
            if (x != 0) zero = false;
        }
        if (zero) num[0] = 1;
        Int den = uniform_int(rng, 1, 9);
        RationalDirection v = RationalDirection::make(num, den);
        Rational T = direction_period(v);
        // T*v integral with coprime components.
        Int g = 0;
        for (size_t i = 0; i < v.numerator.size(); ++i) {
            Int prod = T.num * v.numerator[i];
            CHECK(prod % (T.den * v.denominator) == 0);
            g = std::gcd(g, prod / (T.den * v.denominator));
        }
        CHECK(g == 1);
        // Scan fractions T' = T * (a/b) < T for small b.
        for (Int b = 2; b <= 6; ++b)
            for (Int a = 1; a < b; ++a) {
                bool integral = true;
                // T' * v_i = (T.num*a*num_i) / (T.den*b*den)
                for (size_t i = 0; i < v.numerator.size(); ++i)
                    if ((T.num * a * v.numerator[i]) % (T.den * b * v.denominator) != 0)
                        integral = false;
                CHECK_FALSE(integral);
            }
    }
}

TEST_CASE("fourier automorphism index") {
    IntMatrix I = IntMatrix::identity(2);
    CHECK(fourier_automorphism_index(I, {3, -1}) == IntVector{3, -1});
    IntMatrix S = from_rows({{1, 1}, {0, 1}});
    CHECK(fourier_automorphism_index(S, {1, 0}) == IntVector{1, 1});
    CHECK_THROWS_AS(fourier_automorphism_index(from_rows({{2, 0}, {0, 1}}), {1, 0}), Error);

    // Group law and injectivity on a window.
    Rng rng(5);
    IntMatrix A = random_unimodular(rng, 3, 10, 1000);
    SmithDecomposition s = smith_normal_form(A);
    IntMatrix Ainv = s.V.mul(s.U);  // A^{-1} = V U when U A V = I
    CHECK(A.mul(Ainv) == IntMatrix::identity(3));
    for (int trial = 0; trial < 100; ++trial) {
        IntVector l(3);
        for (auto& x : l) x = uniform_int(rng, -50, 50);
        CHECK(fourier_automorphism_index(Ainv, fourier_automorphism_index(A, l)) == l);
    }
}
