#pragma once

#include <cstdint>
#include <vector>

#include "cylq/util.hpp"

namespace cylq {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int npoints);

// Cumulative integration matrix on the npoints-rule: row r holds weights such
// that sum_c P[r][c] f(x_c) approximates the integral of f from -1 to x_r
// (exact for polynomials of degree < npoints).
const std::vector<std::vector<double>>& gl_partial_matrix(int npoints);

struct QuadResult {
    cplx value;
    double err;  // reported error estimate
};

// Iterated integral of the phase product over the ordered simplex
// 0 < t_m < ... < t_1 < t (oriented, so t < 0 is allowed):
//   integral of prod_j exp(i omega_j t_j).
// Composite Gauss-Legendre panels with cumulative spectral integration per
// level; `panels` subdivisions of [0, t].
cplx simplex_phase_integral_gl(const std::vector<double>& omega, double t, int panels);

// Adaptive wrapper: doubles the panel count until successive values differ by
// at most tol (or the refinement cap is hit); err is the last difference.
QuadResult simplex_phase_integral(const std::vector<double>& omega, double t, double tol = 1e-12);

// Quasi-Monte Carlo over the same simplex: Halton points in the unit cube,
// sorted-coordinate map onto the simplex, `shifts` random Cranley-Patterson
// shifts for the error estimate (3x the standard error of the shift means).
QuadResult simplex_phase_qmc(const std::vector<double>& omega, double t, int npoints, int shifts,
                             std::uint64_t seed);

// Point sets for simplex_phase_qmc, reusable across many omega vectors.
// pts[r] holds npoints sorted-descending m-tuples, already scaled by t.
struct SimplexQmcPoints {
    int m = 0;
    int npoints = 0;
    double volume = 0.0;
    std::vector<std::vector<double>> pts;  // shifts x (npoints * m)
};
SimplexQmcPoints make_simplex_qmc_points(int m, double t, int npoints, int shifts,
                                         std::uint64_t seed);
QuadResult simplex_phase_qmc(const SimplexQmcPoints& points, const std::vector<double>& omega);

// Radical-inverse (Halton) coordinate for index i in the given base.
double radical_inverse(std::uint64_t i, unsigned base);

}  // namespace cylq
