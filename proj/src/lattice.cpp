#include "cylq/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace cylq {

Int checked_add(Int a, Int b) {
    Int r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer overflow in add");
    return r;
}
Int checked_sub(Int a, Int b) {
    Int r;
    if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("integer overflow in sub");
    return r;
}
Int checked_mul(Int a, Int b) {
    Int r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer overflow in mul");
    return r;
}
Int checked_neg(Int a) { return checked_sub(0, a); }

IntMatrix IntMatrix::identity(int n) {
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

IntMatrix IntMatrix::transpose() const {
    IntMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
    return t;
}

IntMatrix IntMatrix::mul(const IntMatrix& other) const {
    if (cols_ != other.rows_) throw DimensionError("matrix product shape mismatch");
    IntMatrix r(rows_, other.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            Int aik = at(i, k);
            if (aik == 0) continue;
            for (int j = 0; j < other.cols_; ++j)
                r.at(i, j) = checked_add(r.at(i, j), checked_mul(aik, other.at(k, j)));
        }
    return r;
}

IntVector IntMatrix::mul(const IntVector& v) const {
    if (int(v.size()) != cols_) throw DimensionError("matrix-vector shape mismatch");
    IntVector r(rows_, 0);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            if (at(i, j) != 0) r[i] = checked_add(r[i], checked_mul(at(i, j), v[j]));
    return r;
}

IntVector IntMatrix::col(int j) const {
    IntVector c(rows_);
    for (int i = 0; i < rows_; ++i) c[i] = at(i, j);
    return c;
}

Int IntMatrix::det() const {
    if (rows_ != cols_) throw DimensionError("determinant of non-square matrix");
    int n = rows_;
    if (n == 0) return 1;
    IntMatrix w(*this);
    Int sign = 1, prev = 1;
    // Bareiss fraction-free elimination: every division below is exact.
    for (int k = 0; k + 1 < n; ++k) {
        if (w.at(k, k) == 0) {
            int piv = -1;
            for (int i = k + 1; i < n; ++i)
                if (w.at(i, k) != 0) { piv = i; break; }
            if (piv < 0) return 0;
            for (int j = 0; j < n; ++j) std::swap(w.at(k, j), w.at(piv, j));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                Int num = checked_sub(checked_mul(w.at(i, j), w.at(k, k)),
                                      checked_mul(w.at(i, k), w.at(k, j)));
                w.at(i, j) = num / prev;
            }
            w.at(i, k) = 0;
        }
        prev = w.at(k, k);
    }
    return checked_mul(sign, w.at(n - 1, n - 1));
}

bool IntMatrix::is_unimodular() const {
    if (rows_ != cols_) return false;
    Int d = det();
    return d == 1 || d == -1;
}

namespace {

// Extended gcd: returns (g, x, y) with x*a + y*b = g = gcd(|a|, |b|) >= 0.
struct ExGcd {
    Int g, x, y;
};
ExGcd exgcd(Int a, Int b) {
    Int old_r = a, r = b;
    Int old_s = 1, s = 0;
    Int old_t = 0, t = 1;
    while (r != 0) {
        Int q = old_r / r;
        Int tmp = checked_sub(old_r, checked_mul(q, r));
        old_r = r;
        r = tmp;
        tmp = checked_sub(old_s, checked_mul(q, s));
        old_s = s;
        s = tmp;
        tmp = checked_sub(old_t, checked_mul(q, t));
        old_t = t;
        t = tmp;
    }
    if (old_r < 0) {
        old_r = checked_neg(old_r);
        old_s = checked_neg(old_s);
        old_t = checked_neg(old_t);
    }
    return {old_r, old_s, old_t};
}

Int gcd_all(const IntVector& v) {
    Int g = 0;
    for (Int x : v) g = std::gcd(g, x);
    return g;
}

// Elementary row/column operations applied simultaneously to D and the
// transform accumulators, keeping U*M*V = D and U*Uinv = I exact.
struct SnfWork {
    IntMatrix D, U, Uinv, V;

    void row_swap(int a, int b) {
        if (a == b) return;
        for (int j = 0; j < D.cols(); ++j) std::swap(D.at(a, j), D.at(b, j));
        for (int j = 0; j < U.cols(); ++j) std::swap(U.at(a, j), U.at(b, j));
        for (int i = 0; i < Uinv.rows(); ++i) std::swap(Uinv.at(i, a), Uinv.at(i, b));
    }
    // row_a += m * row_b
    void row_addmul(int a, int b, Int m) {
        if (m == 0) return;
        for (int j = 0; j < D.cols(); ++j)
            D.at(a, j) = checked_add(D.at(a, j), checked_mul(m, D.at(b, j)));
        for (int j = 0; j < U.cols(); ++j)
            U.at(a, j) = checked_add(U.at(a, j), checked_mul(m, U.at(b, j)));
        // Uinv <- Uinv * E^{-1}: column b -= m * column a.
        for (int i = 0; i < Uinv.rows(); ++i)
            Uinv.at(i, b) = checked_sub(Uinv.at(i, b), checked_mul(m, Uinv.at(i, a)));
    }
    void row_negate(int a) {
        for (int j = 0; j < D.cols(); ++j) D.at(a, j) = checked_neg(D.at(a, j));
        for (int j = 0; j < U.cols(); ++j) U.at(a, j) = checked_neg(U.at(a, j));
        for (int i = 0; i < Uinv.rows(); ++i) Uinv.at(i, a) = checked_neg(Uinv.at(i, a));
    }
    void col_swap(int a, int b) {
        if (a == b) return;
        for (int i = 0; i < D.rows(); ++i) std::swap(D.at(i, a), D.at(i, b));
        for (int i = 0; i < V.rows(); ++i) std::swap(V.at(i, a), V.at(i, b));
    }
    // col_a += m * col_b
    void col_addmul(int a, int b, Int m) {
        if (m == 0) return;
        for (int i = 0; i < D.rows(); ++i)
            D.at(i, a) = checked_add(D.at(i, a), checked_mul(m, D.at(i, b)));
        for (int i = 0; i < V.rows(); ++i)
            V.at(i, a) = checked_add(V.at(i, a), checked_mul(m, V.at(i, b)));
    }
    void col_negate(int a) {
        for (int i = 0; i < D.rows(); ++i) D.at(i, a) = checked_neg(D.at(i, a));
        for (int i = 0; i < V.rows(); ++i) V.at(i, a) = checked_neg(V.at(i, a));
    }
};

}  // namespace

std::pair<Int, IntVector> gcd_bezout(const IntVector& v) {
    // Blankinship row reduction on [w | I]: repeatedly reduce every entry mod
    // the smallest nonzero one. Coefficients stay Euclid-sized; a left fold of
    // pairwise exgcds would square them at every step.
    if (v.empty()) throw DimensionError("gcd_bezout of empty vector");
    const size_t n = v.size();
    IntVector w = v;
    std::vector<IntVector> T(n, IntVector(n, 0));
    for (size_t i = 0; i < n; ++i) T[i][i] = 1;
    for (;;) {
        size_t piv = n;
        for (size_t i = 0; i < n; ++i)
            if (w[i] != 0 && (piv == n || std::abs(w[i]) < std::abs(w[piv]))) piv = i;
        if (piv == n) return {0, IntVector(n, 0)};
        bool done = true;
        for (size_t j = 0; j < n; ++j) {
            if (j == piv || w[j] == 0) continue;
            Int q = w[j] / w[piv];
            w[j] = checked_sub(w[j], checked_mul(q, w[piv]));
            for (size_t c = 0; c < n; ++c)
                T[j][c] = checked_sub(T[j][c], checked_mul(q, T[piv][c]));
            if (w[j] != 0) done = false;
        }
        if (done) {
            Int g = w[piv];
            IntVector a = T[piv];
            if (g < 0) {
                g = checked_neg(g);
                for (Int& x : a) x = checked_neg(x);
            }
            return {g, a};
        }
    }
}

SmithDecomposition smith_normal_form(const IntMatrix& M) {
    int r = M.rows(), c = M.cols();
    SnfWork w{M, IntMatrix::identity(r), IntMatrix::identity(r), IntMatrix::identity(c)};
    int steps = std::min(r, c);
    for (int t = 0; t < steps; ++t) {
        for (;;) {
            // Pivot: smallest nonzero |entry| in the trailing submatrix.
            int pi = -1, pj = -1;
            for (int i = t; i < r; ++i)
                for (int j = t; j < c; ++j) {
                    Int v = w.D.at(i, j);
                    if (v != 0 && (pi < 0 || std::abs(v) < std::abs(w.D.at(pi, pj)))) {
                        pi = i;
                        pj = j;
                    }
                }
            if (pi < 0) return {w.U, w.Uinv, w.D, w.V};  // trailing block is zero
            w.row_swap(t, pi);
            w.col_swap(t, pj);

            bool residue = false;
            for (int i = t + 1; i < r; ++i) {
                Int q = w.D.at(i, t) / w.D.at(t, t);
                w.row_addmul(i, t, checked_neg(q));
                if (w.D.at(i, t) != 0) residue = true;
            }
            for (int j = t + 1; j < c; ++j) {
                Int q = w.D.at(t, j) / w.D.at(t, t);
                w.col_addmul(j, t, checked_neg(q));
                if (w.D.at(t, j) != 0) residue = true;
            }
            if (residue) continue;  // smaller remainders exist; re-pick pivot

            // Divisibility fix-up: pivot must divide the whole submatrix.
            bool fixed = false;
            for (int i = t + 1; i < r && !fixed; ++i)
                for (int j = t + 1; j < c && !fixed; ++j)
                    if (w.D.at(i, j) % w.D.at(t, t) != 0) {
                        w.row_addmul(t, i, 1);
                        fixed = true;
                    }
            if (fixed) continue;

            if (w.D.at(t, t) < 0) w.row_negate(t);
            break;
        }
    }
    return {w.U, w.Uinv, w.D, w.V};
}

bool is_primitive(const std::vector<IntVector>& vectors, int n) {
    if (n < 1) throw DimensionError("ambient dimension must be >= 1");
    int m = int(vectors.size());
    if (m == 0) return true;
    if (m > n) throw DimensionError("more vectors than ambient dimension");
    IntMatrix A(n, m);
    for (int j = 0; j < m; ++j) {
        if (int(vectors[j].size()) != n) throw DimensionError("vector dimension mismatch");
        for (int i = 0; i < n; ++i) A.at(i, j) = vectors[j][i];
    }
    SmithDecomposition snf = smith_normal_form(A);
    int rank = 0;
    for (int i = 0; i < std::min(n, m); ++i)
        if (snf.D.at(i, i) != 0) ++rank;
    if (rank < m) throw DimensionError("vectors are linearly dependent over Q");
    for (int i = 0; i < m; ++i)
        if (snf.D.at(i, i) != 1) return false;
    return true;
}

IntMatrix extend_to_unimodular(const std::vector<IntVector>& vectors, int n) {
    int m = int(vectors.size());
    if (m == 0) return IntMatrix::identity(n);
    IntMatrix A(n, m);
    for (int j = 0; j < m; ++j) {
        if (int(vectors[j].size()) != n) throw DimensionError("vector dimension mismatch");
        for (int i = 0; i < n; ++i) A.at(i, j) = vectors[j][i];
    }
    SmithDecomposition snf = smith_normal_form(A);
    int rank = 0;
    for (int i = 0; i < std::min(n, m); ++i)
        if (snf.D.at(i, i) != 0) ++rank;
    if (rank < m) throw DimensionError("vectors are linearly dependent over Q");
    for (int i = 0; i < m; ++i)
        if (snf.D.at(i, i) != 1) {
            std::ostringstream msg;
            msg << "input is not primitive: elementary divisor d_" << (i + 1) << " = "
                << snf.D.at(i, i) << " != 1";
            throw Error(msg.str());
        }
    // U A V = [I_m; 0], so A V gives the first m columns of Uinv; completing
    // with the last n-m columns of Uinv keeps |det| = 1, and right-multiplying
    // the first block by V^{-1} (leaving the completion alone) recovers A itself.
    IntMatrix B(n, n);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) B.at(i, j) = A.at(i, j);
    for (int j = m; j < n; ++j)
        for (int i = 0; i < n; ++i) B.at(i, j) = snf.Uinv.at(i, j);
    if (!B.is_unimodular()) throw Error("internal: basis completion is not unimodular");
    return B;
}

RationalDirection RationalDirection::make(IntVector numerator, Int denominator) {
    if (numerator.empty()) throw DimensionError("direction must have dimension >= 1");
    if (denominator <= 0) throw Error("denominator must be positive");
    bool all_zero = true;
    for (Int x : numerator)
        if (x != 0) all_zero = false;
    if (all_zero) throw Error("direction must be nonzero");
    Int g = std::gcd(gcd_all(numerator), denominator);
    for (Int& x : numerator) x /= g;
    return RationalDirection{std::move(numerator), denominator / g};
}

Rational direction_period(const RationalDirection& v) {
    Int g = gcd_all(v.numerator);
    if (g == 0) throw Error("direction must be nonzero");
    Int num = v.denominator, den = g;
    Int r = std::gcd(num, den);
    return Rational{num / r, den / r};
}

IntVector fourier_automorphism_index(const IntMatrix& S, const IntVector& l) {
    if (!S.is_unimodular()) throw Error("matrix is not unimodular");
    return S.transpose().mul(l);
}

IntMatrix random_unimodular(Rng& rng, int n, int ops, Int max_entry) {
    IntMatrix S = IntMatrix::identity(n);
    for (int step = 0; step < ops; ++step) {
        int kind = int(uniform_int(rng, 0, 2));
        int i = int(uniform_int(rng, 0, n - 1));
        int j = int(uniform_int(rng, 0, n - 1));
        if (kind == 0) {
            if (i != j)
                for (int col = 0; col < n; ++col) std::swap(S.at(i, col), S.at(j, col));
        } else if (kind == 1) {
            for (int col = 0; col < n; ++col) S.at(i, col) = -S.at(i, col);
        } else {
            if (i == j) continue;
            Int m = uniform_int(rng, 1, 3) * (uniform_int(rng, 0, 1) ? 1 : -1);
            bool ok = true;
            IntVector row(n);
            for (int col = 0; col < n && ok; ++col) {
                row[col] = checked_add(S.at(i, col), checked_mul(m, S.at(j, col)));
                if (std::abs(row[col]) > max_entry) ok = false;
            }
            if (!ok) continue;
            for (int col = 0; col < n; ++col) S.at(i, col) = row[col];
        }
    }
    return S;
}

std::string to_string(const IntVector& v) {
    std::ostringstream ss;
    ss << "(";
    for (size_t i = 0; i < v.size(); ++i) ss << (i ? "," : "") << v[i];
    ss << ")";
    return ss.str();
}

}  // namespace cylq
