#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "cylq/lattice.hpp"
#include "cylq/util.hpp"

namespace cylq {

// Linear subspace of R^n held as an orthonormal basis (n x d, possibly d = 0).
struct Subspace {
    int n = 0;
    Eigen::MatrixXd B;  // n x d, orthonormal columns

    int dim() const { return static_cast<int>(B.cols()); }
    static Subspace zero(int n);
    static Subspace full(int n);
    // Orthonormalize the span of the given columns; directions with residual
    // norm below rank_tol are dropped.
    static Subspace from_span(int n, const Eigen::MatrixXd& vecs, double rank_tol = 1e-10);
    static Subspace sum(const Subspace& a, const Subspace& b, double rank_tol = 1e-10);

    Eigen::VectorXd project(const Eigen::VectorXd& p) const { return B * (B.transpose() * p); }
    Eigen::VectorXd coords(const Eigen::VectorXd& p) const { return B.transpose() * p; }
    // True when every column of other lies in this span within tol.
    bool contains(const Subspace& other, double tol = 1e-12) const;
};

// Sparse polynomial in d real variables with complex coefficients, keyed by
// exponent multi-index.
class Polynomial {
  public:
    using Key = std::vector<int>;
    using Map = std::map<Key, cplx>;

    explicit Polynomial(int vars) : vars_(vars) {}
    static Polynomial constant(int vars, cplx c);

    int vars() const { return vars_; }
    int degree() const;
    bool empty() const { return coeffs_.empty(); }
    const Map& coeffs() const { return coeffs_; }

    void add(const Key& alpha, cplx c);
    cplx eval(const Eigen::VectorXd& u) const;
    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial scaled(cplx c) const;
    Polynomial conjugated() const;
    // Directional derivative sum_j w_j d/du_j (w complex allowed).
    Polynomial derivative(const Eigen::VectorXcd& w) const;
    // Substitution u_old = M u_new; M has vars() rows.
    Polynomial compose_linear(const Eigen::MatrixXd& M) const;
    // u -> C u.
    Polynomial scale_vars(double C) const;
    void prune(double tol = 0.0);

  private:
    int vars_;
    Map coeffs_;
};

// One Gaussian-polynomial term coeff * poly(u) * exp(-u^T Q u + w . u) in the
// coordinates u = B^T p of the symbol's subspace. Im(w) carries the in-space
// plane-wave phase; Re(w) allows displaced Gaussians.
struct SymbolTerm {
    cplx coeff{1.0, 0.0};
    Polynomial poly{0};
    Eigen::MatrixXd Q;   // d x d symmetric positive definite (empty when d = 0)
    Eigen::VectorXcd w;  // size d
};

// h(p) = exp(i xi . p) * sum_terms, with xi in the orthogonal complement of U.
class MomentumSymbol {
  public:
    MomentumSymbol(Subspace U, Eigen::VectorXd xi, std::vector<SymbolTerm> terms);
    static MomentumSymbol plane_wave(int n, const Eigen::VectorXd& xi);  // exp(i xi . p)
    // exp(i xi . p) * g(B^T p) for a single Gaussian term.
    static MomentumSymbol gaussian(Subspace U, Eigen::VectorXd xi, const Eigen::MatrixXd& Q,
                                   const Eigen::VectorXcd& w, cplx coeff = 1.0);

    int n() const { return U_.n; }
    int dim() const { return U_.dim(); }
    const Subspace& subspace() const { return U_; }
    const Eigen::VectorXd& xi() const { return xi_; }
    const std::vector<SymbolTerm>& terms() const { return terms_; }
    std::vector<SymbolTerm>& terms() { return terms_; }

    cplx eval(const Eigen::VectorXd& p) const;
    // The Gaussian factor sum_t coeff_t poly_t(u) exp(-u Q u + w u) alone.
    cplx eval_gauss(const Eigen::VectorXd& u) const;

    MomentumSymbol multiply(const MomentumSymbol& other) const;
    MomentumSymbol conjugate() const;
    // Directional derivative along v in R^n (momentum gradient contraction).
    MomentumSymbol derivative(const Eigen::VectorXd& v) const;
    MomentumSymbol scale_momentum(double C) const;
    // Multiply every coefficient by c.
    MomentumSymbol scaled(cplx c) const;
    // Add delta (in subspace coordinates) to the linear exponent of each term.
    MomentumSymbol shift_exponent(const Eigen::VectorXcd& delta) const;
    // Replace xi (must stay orthogonal to U).
    MomentumSymbol with_xi(const Eigen::VectorXd& xi) const;

  private:
    Subspace U_;
    Eigen::VectorXd xi_;
    std::vector<SymbolTerm> terms_;
};

struct Generator {
    IntVector k;
    MomentumSymbol h;
};

// Finite sum of e_k (x) h over lattice Fourier modes k.
struct Observable {
    int n = 0;
    std::vector<Generator> gens;
};

cplx eval(const Observable& f, const Eigen::VectorXd& q, const Eigen::VectorXd& p);
Observable multiply(const Observable& a, const Observable& b);
Observable conjugate(const Observable& f);
Observable add(const Observable& a, const Observable& b);
Observable scaled(const Observable& f, cplx c);
// {f, g} with the dp dq - dq dp orientation: pairwise
// 2 pi i e_{k1+k2} (x) ((grad_{k2} h1) h2 - h1 (grad_{k1} h2)).
Observable poisson_bracket(const Observable& a, const Observable& b);
// f(q, p) -> f(q, C p); C must be nonzero.
Observable scale_momentum(const Observable& f, double C);
// f(q, p) -> f(q - x, p): multiplies e_k coefficients by exp(-2 pi i k . x).
Observable translate_config(const Observable& f, const Eigen::VectorXd& x);
// Pullback along the free flow (q, p) -> (q + t p mod 1, p): each generator
// picks up exp(2 pi i t k . p), split into the U and U-perp parts.
Observable free_flow_pullback(const Observable& f, double t);

// Deterministic canonical form: within a generator, fold coeff into poly and
// merge terms sharing (Q, w) after rounding at 1e-12; merge generators sharing
// (k, subspace fingerprint, xi) at the same rounding; drop empty parts; sort.
Observable canonicalize(const Observable& f);

// Lower bound on sup |f| from nested deterministic sampling (q-grid times
// p-grid plus Gaussian peak centers) followed by coordinate-descent polish.
// Nondecreasing in budget for fixed f and box.
double sup_norm_estimate(const Observable& f, int budget, double box);

}  // namespace cylq
