#pragma once

#include <string>
#include <vector>

#include "cylq/util.hpp"

// Integer-lattice algorithms on Z^n: Bezout coefficients, Smith normal form,
// primitivity tests, extension of primitive sets to Z-bases, rational
// direction periods, and GL_n(Z) index automorphisms. All arithmetic is
// checked 64-bit; overflow raises OverflowError instead of wrapping.

namespace cylq {

using Int = long long;
using IntVector = std::vector<Int>;

Int checked_add(Int a, Int b);
Int checked_sub(Int a, Int b);
Int checked_mul(Int a, Int b);
Int checked_neg(Int a);

class IntMatrix {
public:
    IntMatrix() : rows_(0), cols_(0) {}
    IntMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(size_t(rows) * cols, 0) {}
    static IntMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Int& at(int i, int j) { return data_[size_t(i) * cols_ + j]; }
    Int at(int i, int j) const { return data_[size_t(i) * cols_ + j]; }

    IntMatrix transpose() const;
    IntMatrix mul(const IntMatrix& other) const;  // checked
    IntVector mul(const IntVector& v) const;      // checked
    IntVector col(int j) const;
    bool operator==(const IntMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

    // Exact determinant by fraction-free (Bareiss) elimination; square only.
    Int det() const;
    bool is_unimodular() const;

private:
    int rows_, cols_;
    std::vector<Int> data_;
};

struct SmithDecomposition {
    IntMatrix U;     // r x r unimodular
    IntMatrix Uinv;  // tracked exactly alongside U
    IntMatrix D;     // r x c diagonal, d_i >= 0, d_i | d_{i+1}
    IntMatrix V;     // c x c unimodular
    // U * M * V = D
};

struct Rational {
    Int num;
    Int den;  // > 0, gcd(|num|, den) = 1
};

struct RationalDirection {
    IntVector numerator;
    Int denominator;  // > 0
    // Normalizes so gcd(gcd over |numerator|, denominator) = 1; rejects v = 0.
    static RationalDirection make(IntVector numerator, Int denominator);
};

// g = gcd(|v_1|,...,|v_n|) and coefficients a with v.a = g; (0,...,0) -> (0, zeros).
std::pair<Int, IntVector> gcd_bezout(const IntVector& v);

SmithDecomposition smith_normal_form(const IntMatrix& M);

// True iff the (linearly independent) columns extend to a Z-basis, i.e. all
// elementary divisors equal 1. Rejects rationally dependent input.
bool is_primitive(const std::vector<IntVector>& vectors, int n);

// n x n unimodular matrix whose first l columns are the inputs.
IntMatrix extend_to_unimodular(const std::vector<IntVector>& vectors, int n);

// Minimal T > 0 with T*v integral; components of T*v are coprime.
Rational direction_period(const RationalDirection& v);

// Action of the unitary psi[x] -> psi[Sx] on Fourier indices: l -> S^T l.
IntVector fourier_automorphism_index(const IntMatrix& S, const IntVector& l);

// Product of `ops` random elementary row operations on the identity, with all
// intermediate entries bounded by `max_entry` (operations that would exceed
// the bound are skipped). Always unimodular.
IntMatrix random_unimodular(Rng& rng, int n, int ops, Int max_entry = 1000000);

std::string to_string(const IntVector& v);

}  // namespace cylq
