#pragma once

#include <string>
#include <vector>

#include "cylq/operators.hpp"
#include "cylq/symbols.hpp"

namespace cylq {

struct PlanckParam {
    double hbar = 1.0;
    PlanckParam() = default;
    PlanckParam(double h) : hbar(h) {
        if (!(hbar > 0.0)) throw Error("planck parameter: hbar must be positive");
    }
};

struct DefectReport {
    double hbar = 0.0;
    double value = 0.0;
    std::string norm_method;
    int N = 0;
    int margin = 0;
};

// Largest per-coordinate shift magnitude over all generators.
int shift_reach(const Observable& f);

// Q(e_k (x) h) psi_l = h(pi hbar (k + 2l)) psi_{k+l}, one shift-diagonal term
// per generator, diagonal indexed by source l.
LatticeOperator weyl_quantize(const Observable& f, PlanckParam hbar, const FourierWindow& window);

struct OracleQuad {
    double radius = 6.0;  // p-space truncation radius per dimension
    int points = 24;      // Gauss-Legendre nodes per panel per dimension
};

struct OracleResult {
    std::vector<cplx> coeffs;  // on the window
    double residual = 0.0;     // refinement change, quadrature error estimate
    bool converged = true;
};

// Evaluates the reduced oscillatory double integral over U x U applied to the
// basis vector psi_l and returns its Fourier coefficients on the window.
OracleResult weyl_integral_oracle(const Generator& gen, PlanckParam hbar, const IntVector& l,
                                  const FourierWindow& window, const OracleQuad& quad = {});

DefectReport check_star(const Observable& f, PlanckParam hbar, const FourierWindow& window);
DefectReport check_equivariance(const Observable& f, const Eigen::VectorXd& x, PlanckParam hbar,
                                const FourierWindow& window);
DefectReport check_planck_rescale(const Observable& f, PlanckParam hbar, PlanckParam hbar2,
                                  const FourierWindow& window);

// f = e_{a-b} (x) Gaussian centered at pi hbar (a+b), width set so the other
// window lattice points see less than tol * 1e-5; defect vs |psi_a><psi_b|.
std::pair<Observable, DefectReport> rank_one_approx(const IntVector& a, const IntVector& b,
                                                    PlanckParam hbar, const FourierWindow& window,
                                                    double tol);

DefectReport tensor_embed_check(const Observable& f, int m, PlanckParam hbar, int N);

struct RieffelRow {
    double hbar = 0.0;
    int N = 0;
    double qnorm = 0.0;
    double supnorm = 0.0;
};

// Window schedule N(hbar) = ceil(R / (pi hbar)) with R the radius containing
// all but 1e-8 of each Gaussian factor's sup-mass; explicit Ns override.
std::vector<RieffelRow> rieffel_curve(const Observable& f, const std::vector<double>& hbar_grid,
                                      const std::vector<int>& window_schedule, int supnorm_budget);
double gaussian_sup_radius(const Observable& f, double eps = 1e-8);

DefectReport von_neumann_defect(const Observable& f, const Observable& g, PlanckParam hbar,
                                const FourierWindow& window);
DefectReport dirac_defect(const Observable& f, const Observable& g, PlanckParam hbar,
                          const FourierWindow& window);

struct StrongContinuityRow {
    double hbar = 0.0;
    double value = 0.0;
};

std::vector<StrongContinuityRow> strong_continuity_curve(const Observable& f,
                                                         const std::vector<cplx>& psi,
                                                         PlanckParam hbar0,
                                                         const std::vector<double>& hbar_grid,
                                                         const FourierWindow& window);

}  // namespace cylq
