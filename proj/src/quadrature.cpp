#include "cylq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace cylq {

namespace {

// Legendre P_n(x) and derivative via the three-term recurrence.
void legendre_pair(int n, long double x, long double& p, long double& dp) {
    long double p0 = 1.0L, p1 = x;
    if (n == 0) {
        p = p0;
        dp = 0.0L;
        return;
    }
    for (int k = 1; k < n; ++k) {
        long double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0L);
}

GaussLegendre make_gl(int n) {
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const long double pi = 3.141592653589793238462643383279502884L;
        long double x = std::cos(pi * (i + 0.75L) / (n + 0.5L));
        long double p, dp;
        for (int it = 0; it < 100; ++it) {
            legendre_pair(n, x, p, dp);
            long double dx = p / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-19L) break;
        }
        legendre_pair(n, x, p, dp);
        rule.nodes[i] = static_cast<double>(x);
        rule.weights[i] = static_cast<double>(2.0L / ((1.0L - x * x) * dp * dp));
    }
    return rule;
}

std::vector<std::vector<double>> make_partial(const GaussLegendre& rule) {
    const int n = static_cast<int>(rule.nodes.size());
    // V[c][m] = P_m(x_c); solve for Legendre coefficients, then evaluate the
    // antiderivatives I_0 = x + 1, I_m = (P_{m+1} - P_{m-1}) / (2m + 1).
    std::vector<std::vector<long double>> P(n, std::vector<long double>(n + 1));
    for (int c = 0; c < n; ++c) {
        long double x = rule.nodes[c];
        P[c][0] = 1.0L;
        P[c][1] = x;
        for (int k = 1; k < n; ++k) P[c][k + 1] = ((2 * k + 1) * x * P[c][k] - k * P[c][k - 1]) / (k + 1);
    }
    // Gauss-Jordan inverse of V in long double.
    std::vector<std::vector<long double>> A(n, std::vector<long double>(2 * n, 0.0L));
    for (int r = 0; r < n; ++r) {
        for (int m = 0; m < n; ++m) A[r][m] = P[r][m];
        A[r][n + r] = 1.0L;
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
        std::swap(A[piv], A[col]);
        long double d = A[col][col];
        for (int j = 0; j < 2 * n; ++j) A[col][j] /= d;
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            long double f = A[r][col];
            if (f == 0.0L) continue;
            for (int j = 0; j < 2 * n; ++j) A[r][j] -= f * A[col][j];
        }
    }
    // W[r][m] = integral of P_m from -1 to x_r; PM = W * Vinv.
    std::vector<std::vector<double>> PM(n, std::vector<double>(n));
    for (int r = 0; r < n; ++r) {
        std::vector<long double> W(n);
        long double x = rule.nodes[r];
        W[0] = x + 1.0L;
        for (int m = 1; m < n; ++m) W[m] = (P[r][m + 1] - P[r][m - 1]) / (2 * m + 1);
        for (int c = 0; c < n; ++c) {
            long double s = 0.0L;
            for (int m = 0; m < n; ++m) s += W[m] * A[m][n + c];
            PM[r][c] = static_cast<double>(s);
        }
    }
    return PM;
}

std::mutex cache_mutex;

}  // namespace

const GaussLegendre& gauss_legendre(int npoints) {
    if (npoints < 1) throw Error("gauss_legendre: need at least one point");
    std::lock_guard<std::mutex> lock(cache_mutex);
    static std::map<int, GaussLegendre> cache;
    auto it = cache.find(npoints);
    if (it == cache.end()) it = cache.emplace(npoints, make_gl(npoints)).first;
    return it->second;
}

const std::vector<std::vector<double>>& gl_partial_matrix(int npoints) {
    const GaussLegendre& rule = gauss_legendre(npoints);
    std::lock_guard<std::mutex> lock(cache_mutex);
    static std::map<int, std::vector<std::vector<double>>> cache;
    auto it = cache.find(npoints);
    if (it == cache.end()) it = cache.emplace(npoints, make_partial(rule)).first;
    return it->second;
}

cplx simplex_phase_integral_gl(const std::vector<double>& omega, double t, int panels) {
    const int m = static_cast<int>(omega.size());
    if (m == 0) return 1.0;
    if (panels < 1) panels = 1;
    constexpr int ng = 32;
    const GaussLegendre& rule = gauss_legendre(ng);
    const auto& PM = gl_partial_matrix(ng);

    const double half = t / (2.0 * panels);
    std::vector<double> u(static_cast<size_t>(panels) * ng);
    for (int p = 0; p < panels; ++p) {
        double mid = t * (2 * p + 1) / (2.0 * panels);
        for (int r = 0; r < ng; ++r) u[p * ng + r] = mid + half * rule.nodes[r];
    }

    std::vector<cplx> F(u.size(), cplx(1.0, 0.0));
    std::vector<cplx> phi(u.size()), Fnext(u.size());
    cplx total = 0.0;
    for (int j = m - 1; j >= 0; --j) {
        for (size_t i = 0; i < u.size(); ++i)
            phi[i] = std::polar(1.0, omega[j] * u[i]) * F[i];
        cplx C = 0.0;
        for (int p = 0; p < panels; ++p) {
            const cplx* block = &phi[p * ng];
            for (int r = 0; r < ng; ++r) {
                cplx s = 0.0;
                for (int c = 0; c < ng; ++c) s += PM[r][c] * block[c];
                Fnext[p * ng + r] = C + half * s;
            }
            cplx s = 0.0;
            for (int c = 0; c < ng; ++c) s += rule.weights[c] * block[c];
            C += half * s;
        }
        F.swap(Fnext);
        total = C;
    }
    return total;
}

QuadResult simplex_phase_integral(const std::vector<double>& omega, double t, double tol) {
    if (omega.empty()) return {cplx(1.0, 0.0), 0.0};
    double wmax = 0.0;
    for (double w : omega) wmax = std::max(wmax, std::fabs(w));
    int panels = static_cast<int>(std::ceil(wmax * std::fabs(t) / 20.0)) + 1;
    cplx prev = simplex_phase_integral_gl(omega, t, panels);
    double err = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 6; ++round) {
        panels *= 2;
        cplx next = simplex_phase_integral_gl(omega, t, panels);
        err = std::abs(next - prev);
        prev = next;
        if (err <= tol) break;
    }
    return {prev, err};
}

double radical_inverse(std::uint64_t i, unsigned base) {
    double inv = 0.0, f = 1.0 / base;
    while (i) {
        inv += static_cast<double>(i % base) * f;
        i /= base;
        f /= base;
    }
    return inv;
}

SimplexQmcPoints make_simplex_qmc_points(int m, double t, int npoints, int shifts,
                                         std::uint64_t seed) {
    if (shifts < 2) throw Error("simplex_phase_qmc: need at least two shifts");
    static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    if (m > 16) throw Error("simplex_phase_qmc: dimension too large");

    SimplexQmcPoints P;
    P.m = m;
    P.npoints = npoints;
    P.volume = 1.0;
    for (int j = 1; j <= m; ++j) P.volume *= t / j;
    if (m == 0) return P;

    Rng rng(seed);
    std::vector<double> delta(m), s(m);
    P.pts.resize(static_cast<size_t>(shifts));
    for (int r = 0; r < shifts; ++r) {
        for (int j = 0; j < m; ++j) delta[j] = uniform(rng, 0.0, 1.0);
        std::vector<double>& flat = P.pts[static_cast<size_t>(r)];
        flat.resize(static_cast<size_t>(npoints) * m);
        for (int i = 0; i < npoints; ++i) {
            for (int j = 0; j < m; ++j) {
                double v = radical_inverse(static_cast<std::uint64_t>(i) + 1, primes[j]) + delta[j];
                s[j] = v - std::floor(v);
            }
            std::sort(s.begin(), s.end(), std::greater<double>());
            for (int j = 0; j < m; ++j) flat[static_cast<size_t>(i) * m + j] = t * s[j];
        }
    }
    return P;
}

QuadResult simplex_phase_qmc(const SimplexQmcPoints& P, const std::vector<double>& omega) {
    if (static_cast<int>(omega.size()) != P.m) throw DimensionError("simplex_phase_qmc: omega size");
    if (P.m == 0) return {cplx(1.0, 0.0), 0.0};
    const int m = P.m;
    const int shifts = static_cast<int>(P.pts.size());
    std::vector<cplx> shift_means(static_cast<size_t>(shifts));
    for (int r = 0; r < shifts; ++r) {
        const double* flat = P.pts[static_cast<size_t>(r)].data();
        cplx acc = 0.0;
        for (int i = 0; i < P.npoints; ++i) {
            const double* s = flat + static_cast<size_t>(i) * m;
            double phase = 0.0;
            for (int j = 0; j < m; ++j) phase += omega[j] * s[j];
            acc += std::polar(1.0, phase);
        }
        shift_means[static_cast<size_t>(r)] = P.volume * acc / static_cast<double>(P.npoints);
    }
    cplx mean = 0.0;
    for (const cplx& v : shift_means) mean += v;
    mean /= static_cast<double>(shifts);
    double var = 0.0;
    for (const cplx& v : shift_means) var += std::norm(v - mean);
    double err = 3.0 * std::sqrt(var / (static_cast<double>(shifts) * (shifts - 1)));
    return {mean, err};
}

QuadResult simplex_phase_qmc(const std::vector<double>& omega, double t, int npoints, int shifts,
                             std::uint64_t seed) {
    return simplex_phase_qmc(
        make_simplex_qmc_points(static_cast<int>(omega.size()), t, npoints, shifts, seed), omega);
}

}  // namespace cylq
