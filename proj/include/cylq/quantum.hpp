#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cylq/classical.hpp"
#include "cylq/operators.hpp"
#include "cylq/quantizer.hpp"
#include "cylq/symbols.hpp"

namespace cylq {

// H = H0 + M(V) compressed to the window: H_{a,a} = 2 pi^2 hbar^2 |a|^2,
// H_{a+k,a} += a_k; Hermitian by coefficient symmetry.
struct TruncatedHamiltonian {
    FourierWindow window;
    double hbar = 1.0;
    TrigPotential V;

    TruncatedHamiltonian(const FourierWindow& w, double hbar_, TrigPotential V_);
    Eigen::MatrixXcd dense() const;
};

struct PropagatorReport {
    double t = 0.0;
    double hbar = 0.0;
    int M = 0;
    std::string quad_spec;
    double quad_error = 0.0;  // accumulated quadrature error estimate
    double remainder = 0.0;   // sum_{m>M} (|t| |V| / hbar)^m / m!
    double residual = 0.0;    // filled by callers comparing against the exact propagator
};

// Diagonal unitary with entries e^{-2 pi^2 i t hbar |a|^2}.
LatticeOperator free_propagator(const FourierWindow& window, PlanckParam hbar, double t);

// Same transform as free_flow_pullback (shared implementation).
Observable free_conjugation_symbolic(const Observable& f, double t);

// Conjugation by the free propagator: per term the diagonal picks up the
// phase e^{2 pi^2 i t hbar (|a+k|^2 - |a|^2)} at source a.
LatticeOperator heisenberg_free(const LatticeOperator& A, PlanckParam hbar, double t);

struct DysonQuad {
    double gl_tol = 1e-12;  // adaptive Gauss-Legendre target (m <= 4)
    int qmc_points = 1024;  // QMC points per shift (m > 4)
    int qmc_shifts = 8;
    std::uint64_t seed = 20240915;
};

struct DysonTermResult {
    LatticeOperator op;
    double quad_error = 0.0;  // max error estimate over source indices
};

// Single shift term sum k_j with diagonal = simplex integral over
// 0 < t_m < ... < t_1 < t of prod_j e^{2 pi^2 i t_j hbar c_j(a)},
// c_j(a) = |a_j + k_j|^2 - |a_j|^2, a_j = a + sum_{i>j} k_i.
DysonTermResult dyson_term(const std::vector<IntVector>& k_list, double t, PlanckParam hbar,
                           const FourierWindow& window, const DysonQuad& quad = {});

// W_M = sum_{m<=M} (i hbar)^{-m} sum over mode words of prod a_k dyson_term.
std::pair<LatticeOperator, PropagatorReport> dyson_partial_sum(const TrigPotential& V, double t,
                                                               PlanckParam hbar,
                                                               const FourierWindow& window, int M,
                                                               const DysonQuad& quad = {});

// U0(-t) expm(-i t H / hbar) via Hermitian eigendecomposition of truncated H.
Eigen::MatrixXcd exact_interaction_propagator(const TrigPotential& V, double t, PlanckParam hbar,
                                              const FourierWindow& window);

// | e^{itH/hbar} A e^{-itH/hbar} - W* heisenberg_free(A) W | with
// W the exact interaction propagator; an algebraic identity on the window.
DefectReport heisenberg_evolution_check(const LatticeOperator& A, const TrigPotential& V, double t,
                                        PlanckParam hbar, const FourierWindow& window);

}  // namespace cylq
