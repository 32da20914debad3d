#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <vector>

#include "cylq/lattice.hpp"
#include "cylq/symbols.hpp"
#include "cylq/util.hpp"

namespace cylq {

// Point on T^n x R^n; q kept at its canonical representative in [0,1)^n.
struct PhasePoint {
    Eigen::VectorXd q;
    Eigen::VectorXd p;
};

double wrap01(double x);
PhasePoint make_phase_point(Eigen::VectorXd q, Eigen::VectorXd p);
// Flat torus metric: per-coordinate min(|dq|, 1-|dq|), Euclidean in p.
double phase_distance(const PhasePoint& a, const PhasePoint& b);

// V(q) = sum_k a_k e^{2 pi i k.q} with Hermitian coefficients a_{-k} =
// conj(a_k); construction normalizes near-Hermitian input and rejects the
// rest.
struct TrigPotential {
    int n = 1;
    std::map<IntVector, cplx> coeffs;

    explicit TrigPotential(int n_ = 1) : n(n_) {}
    // Sets a_k and a_{-k} = conj(c) together.
    void set_mode(const IntVector& k, cplx c);
    void normalize_hermitian(double tol = 1e-12);
    double sup_bound() const;  // sum |a_k|
};

double eval_potential(const TrigPotential& V, const Eigen::VectorXd& q);
Eigen::VectorXd eval_grad(const TrigPotential& V, const Eigen::VectorXd& q);

struct FlowConfig {
    long long steps = 10000;
    std::string integrator = "verlet";
    double tolerance = 1e-6;
    double threshold_D = 0.0;
};

// Velocity Verlet for H = p^2/2 + V(q), fixed step t/steps.
PhasePoint flow(const PhasePoint& x0, const TrigPotential& V, double t, const FlowConfig& cfg);

// Distance between the t-flow of V and the conjugated unit-time flow of t^2 V
// under (q,p) -> (q, t p); zero for the exact flows.
double rescale_flow_check(const PhasePoint& x0, const TrigPotential& V, double t,
                          const FlowConfig& cfg);

struct GronwallResult {
    double lhs = 0.0;  // d(Phi_V^t x0, Phi_W^t y0)
    double rhs = 0.0;  // (d(x0,y0) + t eps) e^{t c}
    double c = 0.0;    // certified Lipschitz bound max(1, 4 pi^2 sum |k|^2 |a_k|)
    double eps = 0.0;  // certified grad gap bound sum 2 pi |k| |a_k - b_k|
};

GronwallResult gronwall_check(const PhasePoint& x0, const PhasePoint& y0, const TrigPotential& V,
                              const TrigPotential& W, double t, const FlowConfig& cfg);

// V with modes +-k removed.
TrigPotential remove_mode(const TrigPotential& V, const IntVector& k);
// d(Phi_V^1(x0), Phi_{V - V_k}^1(x0)).
double mode_removal_gap(const PhasePoint& x0, const TrigPotential& V, const IntVector& k,
                        const FlowConfig& cfg);

struct CoeffRule {
    int n = 1;
    int cutoff = 0;  // modes enumerated over |k_l| <= cutoff
    std::function<cplx(const IntVector&)> a;
};

// Fejer smoothing: a_k * prod_l max(0, 1 - |k_l|/m); support |k_l| < m.
TrigPotential fejer_smooth(const CoeffRule& rule, int m);

std::vector<cplx> pullback_samples(const Observable& f, const TrigPotential& V, double t,
                                   const FlowConfig& cfg, const std::vector<PhasePoint>& samples);

}  // namespace cylq
