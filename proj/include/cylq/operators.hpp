#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cylq/lattice.hpp"
#include "cylq/util.hpp"

namespace cylq {

// Index window Lambda_N = {-N..N}^n flattened row-major (first coordinate
// slowest), flat = sum_j (l_j + N) * (2N+1)^(n-1-j).
struct FourierWindow {
    int n = 1;
    int N = 0;

    FourierWindow() = default;
    FourierWindow(int n_, int N_);

    Int size() const { return size_; }
    Int flatten(const IntVector& l) const;
    IntVector unflatten(Int idx) const;
    bool contains(const IntVector& l) const;
    bool interior(const IntVector& l, int margin) const;
    bool operator==(const FourierWindow& o) const { return n == o.n && N == o.N; }

  private:
    Int size_ = 1;
};

// A = sum_t S^{k_t} M_{d_t} compressed to the window: (A phi)(l) =
// sum_t d_t(l - k_t) phi(l - k_t), sources outside the window contributing 0.
// Diagonals are full-window tables indexed by source.
struct LatticeOperator {
    struct Term {
        IntVector k;
        std::vector<cplx> diag;
    };
    FourierWindow window;
    std::vector<Term> terms;

    void validate() const;
};

LatticeOperator make_operator(const FourierWindow& win,
                              std::vector<LatticeOperator::Term> terms);
LatticeOperator identity_operator(const FourierWindow& win);

std::vector<cplx> apply(const LatticeOperator& A, const std::vector<cplx>& phi);
LatticeOperator compose(const LatticeOperator& A, const LatticeOperator& B);
LatticeOperator adjoint(const LatticeOperator& A);
LatticeOperator add(const LatticeOperator& A, const LatticeOperator& B);
LatticeOperator scaled(const LatticeOperator& A, cplx c);
// Zero diagonal entries whose source lies outside interior(margin).
LatticeOperator restrict_sources(const LatticeOperator& A, int margin);

Eigen::MatrixXcd dense(const LatticeOperator& A);

struct NormOptions {
    double tol = 1e-8;
    int max_iterations = 10000;
    std::uint64_t seed = 0xc0ffee;
};

struct NormReport {
    double value = 0.0;
    std::string method;
    bool converged = true;
    int iterations = 0;
};

// method: "dense" (largest singular value, window size <= 4096) or "power"
// (power iteration on A^dagger A, relative tolerance opts.tol, iteration cap).
NormReport operator_norm(const LatticeOperator& A, const std::string& method,
                         const NormOptions& opts = {});
// dense when the window fits, power iteration otherwise.
NormReport operator_norm_auto(const LatticeOperator& A, const NormOptions& opts = {});
// Norm of A restricted to sources in interior(margin).
NormReport interior_norm(const LatticeOperator& A, int margin, const NormOptions& opts = {});

// sum_k coeffs(k) S_per^k on l^2(Z_K^n), coefficients zero-filled over classes.
struct PeriodicShiftOp {
    int n = 1;
    int K = 1;
    std::vector<cplx> coeffs;  // flat over Z_K^n, row-major

    PeriodicShiftOp(int n_, int K_);
    Int size() const;
    Int flatten_mod(const IntVector& k) const;  // reduces mod K first
    void add_coeff(const IntVector& k, cplx c);
};

// max over l in Z_K^n of |sum_k f(k) exp(2 pi i k . l / K)|.
double periodic_norm_dft(const PeriodicShiftOp& P);
// Dense K^n x K^n operator 2-norm (oracle-grade).
double periodic_norm_dense(const PeriodicShiftOp& P);

// phi'(S^T l) = phi(l); every index carrying data must land in the target
// window, others are dropped silently.
std::vector<cplx> relabel(const FourierWindow& win, const std::vector<cplx>& phi,
                          const IntMatrix& S, const FourierWindow& target);
// Conjugation by the relabeling permutation: term (k, d) -> (S^T k, d o S^-T).
LatticeOperator relabel(const LatticeOperator& A, const IntMatrix& S,
                        const FourierWindow& target);

}  // namespace cylq
