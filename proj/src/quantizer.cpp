#include "cylq/quantizer.hpp"

#include <algorithm>
#include <cmath>

#include "cylq/kernels.hpp"
#include "cylq/quadrature.hpp"

namespace cylq {

namespace {
constexpr double kPi = 3.14159265358979323846;
const cplx kI{0.0, 1.0};

LatticeOperator sub(const LatticeOperator& A, const LatticeOperator& B) {
    return add(A, scaled(B, cplx(-1.0, 0.0)));
}

Eigen::VectorXd to_real(const IntVector& k) {
    Eigen::VectorXd v(k.size());
    for (size_t j = 0; j < k.size(); ++j) v[static_cast<int>(j)] = static_cast<double>(k[j]);
    return v;
}

}  // namespace

int shift_reach(const Observable& f) {
    Int reach = 0;
    for (const auto& g : f.gens)
        for (Int kj : g.k) reach = std::max(reach, std::llabs(kj));
    return static_cast<int>(reach);
}

LatticeOperator weyl_quantize(const Observable& f, PlanckParam hbar, const FourierWindow& window) {
    if (f.n != window.n) throw DimensionError("weyl_quantize: dimension mismatch");
    LatticeOperator A{window, {}};
    const Int size = window.size();
    for (const auto& g : f.gens) {
        for (Int kj : g.k)
            if (std::llabs(kj) > 2 * static_cast<Int>(window.N))
                throw WindowError("weyl_quantize: generator shift exceeds the window");
        LatticeOperator::Term t;
        t.k = g.k;
        t.diag.resize(static_cast<size_t>(size));
        Eigen::VectorXd p(window.n);
        for (Int i = 0; i < size; ++i) {
            IntVector l = window.unflatten(i);
            for (int j = 0; j < window.n; ++j)
                p[j] = kPi * hbar.hbar * static_cast<double>(g.k[j] + 2 * l[j]);
            t.diag[static_cast<size_t>(i)] = g.h.eval(p);
        }
        A.terms.push_back(std::move(t));
    }
    return A;
}

namespace {

// Composite tensor GL integral of fn over [-R, R]^d with the given panel
// count and nodes per panel per dimension.
template <typename Fn>
cplx tensor_integral(int d, double R, int panels, int nodes, Fn&& fn) {
    const GaussLegendre& rule = gauss_legendre(nodes);
    const int per_dim = panels * nodes;
    std::vector<double> xs(per_dim), ws(per_dim);
    const double h = 2.0 * R / panels;
    for (int p = 0; p < panels; ++p)
        for (int r = 0; r < nodes; ++r) {
            xs[p * nodes + r] = -R + h * (p + 0.5) + 0.5 * h * rule.nodes[r];
            ws[p * nodes + r] = 0.5 * h * rule.weights[r];
        }
    Eigen::VectorXd pt(d);
    std::vector<int> idx(d, 0);
    cplx total = 0.0;
    while (true) {
        double wprod = 1.0;
        for (int j = 0; j < d; ++j) {
            pt[j] = xs[idx[j]];
            wprod *= ws[idx[j]];
        }
        total += wprod * fn(pt);
        int j = d - 1;
        for (; j >= 0; --j) {
            if (++idx[j] < per_dim) break;
            idx[j] = 0;
        }
        if (j < 0) break;
    }
    return total;
}

cplx oracle_coefficient(const Generator& gen, double hbar, const IntVector& l,
                        const OracleQuad& quad, int refine) {
    const MomentumSymbol& h = gen.h;
    const int d = h.dim();
    const Eigen::VectorXd kv = to_real(gen.k);
    const Eigen::VectorXd lv = to_real(l);
    const double kxi = kv.dot(h.xi());
    const double lxi = lv.dot(h.xi());
    const cplx prefactor = std::polar(1.0, kPi * hbar * kxi + 2.0 * kPi * hbar * lxi);
    if (d == 0) return prefactor * h.eval_gauss(Eigen::VectorXd(0));

    const Eigen::VectorXd ku = h.subspace().coords(kv);
    const Eigen::VectorXd lu = h.subspace().coords(lv);
    double lam_max = 1.0;
    for (const auto& t : h.terms()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.Q, Eigen::EigenvaluesOnly);
        lam_max = std::max(lam_max, es.eigenvalues().maxCoeff());
    }
    const double Rp = quad.radius + refine;
    const double Ry = hbar * quad.radius * (1.0 + 2.0 * std::sqrt(lam_max)) + refine;
    const int nodes = quad.points + 8 * refine;
    // Oscillation budget ~12 radians per panel keeps the node count effective.
    const int panels_p = static_cast<int>(std::ceil(Rp * (Ry / hbar) / 12.0)) + 1;
    const int panels_y = static_cast<int>(std::ceil(Ry * (Rp / hbar + 2.0 * kPi * lu.norm()) / 12.0)) + 1;

    const double shift = kPi * hbar;
    cplx I = tensor_integral(d, Ry, panels_y, nodes, [&](const Eigen::VectorXd& y) {
        cplx inner = tensor_integral(d, Rp, panels_p, nodes, [&](const Eigen::VectorXd& p) {
            Eigen::VectorXd parg = p + shift * ku;
            return h.eval_gauss(parg) * std::polar(1.0, -y.dot(p) / hbar);
        });
        return inner * std::polar(1.0, 2.0 * kPi * lu.dot(y));
    });
    double scale = 1.0;
    for (int j = 0; j < d; ++j) scale /= 2.0 * kPi * hbar;
    return prefactor * scale * I;
}

}  // namespace

OracleResult weyl_integral_oracle(const Generator& gen, PlanckParam hbar, const IntVector& l,
                                  const FourierWindow& window, const OracleQuad& quad) {
    if (window.n > 2 || gen.h.dim() > 2)
        throw DimensionError("weyl_integral_oracle: limited to n <= 2, dim U <= 2");
    if (static_cast<int>(l.size()) != window.n)
        throw DimensionError("weyl_integral_oracle: basis index size");
    OracleResult res;
    res.coeffs.assign(static_cast<size_t>(window.size()), cplx(0.0, 0.0));
    cplx c = oracle_coefficient(gen, hbar.hbar, l, quad, 0);
    if (gen.h.dim() > 0) {
        cplx c2 = oracle_coefficient(gen, hbar.hbar, l, quad, 1);
        res.residual = std::abs(c2 - c);
        res.converged = res.residual <= 1e-6 * (1.0 + std::abs(c2));
        c = c2;
    }
    IntVector target(window.n);
    for (int j = 0; j < window.n; ++j) target[j] = checked_add(gen.k[j], l[j]);
    if (window.contains(target)) res.coeffs[static_cast<size_t>(window.flatten(target))] = c;
    return res;
}

namespace {

DefectReport make_report(double hbar, const NormReport& nr, const FourierWindow& w, int margin) {
    DefectReport r;
    r.hbar = hbar;
    r.value = nr.value;
    r.norm_method = nr.method;
    r.N = w.N;
    r.margin = margin;
    return r;
}

}  // namespace

DefectReport check_star(const Observable& f, PlanckParam hbar, const FourierWindow& window) {
    LatticeOperator lhs = weyl_quantize(conjugate(f), hbar, window);
    LatticeOperator rhs = adjoint(weyl_quantize(f, hbar, window));
    const int margin = std::min(shift_reach(f), window.N);
    NormReport nr = interior_norm(sub(lhs, rhs), margin);
    return make_report(hbar.hbar, nr, window, margin);
}

DefectReport check_equivariance(const Observable& f, const Eigen::VectorXd& x, PlanckParam hbar,
                                const FourierWindow& window) {
    if (x.size() != f.n) throw DimensionError("check_equivariance: point size mismatch");
    LatticeOperator Lx{window, {}};
    LatticeOperator Lmx{window, {}};
    {
        LatticeOperator::Term tp, tm;
        tp.k = IntVector(window.n, 0);
        tm.k = IntVector(window.n, 0);
        tp.diag.resize(static_cast<size_t>(window.size()));
        tm.diag.resize(static_cast<size_t>(window.size()));
        for (Int i = 0; i < window.size(); ++i) {
            IntVector l = window.unflatten(i);
            double lx = 0.0;
            for (int j = 0; j < window.n; ++j) lx += static_cast<double>(l[j]) * x[j];
            tp.diag[static_cast<size_t>(i)] = std::polar(1.0, -2.0 * kPi * lx);
            tm.diag[static_cast<size_t>(i)] = std::polar(1.0, 2.0 * kPi * lx);
        }
        Lx.terms.push_back(std::move(tp));
        Lmx.terms.push_back(std::move(tm));
    }
    LatticeOperator lhs = compose(Lx, compose(weyl_quantize(f, hbar, window), Lmx));
    LatticeOperator rhs = weyl_quantize(translate_config(f, x), hbar, window);
    const int margin = std::min(shift_reach(f), window.N);
    NormReport nr = interior_norm(sub(lhs, rhs), margin);
    return make_report(hbar.hbar, nr, window, margin);
}

DefectReport check_planck_rescale(const Observable& f, PlanckParam hbar, PlanckParam hbar2,
                                  const FourierWindow& window) {
    LatticeOperator lhs = weyl_quantize(f, hbar, window);
    LatticeOperator rhs = weyl_quantize(scale_momentum(f, hbar.hbar / hbar2.hbar), hbar2, window);
    NormReport nr = operator_norm_auto(sub(lhs, rhs));
    return make_report(hbar.hbar, nr, window, 0);
}

std::pair<Observable, DefectReport> rank_one_approx(const IntVector& a, const IntVector& b,
                                                    PlanckParam hbar, const FourierWindow& window,
                                                    double tol) {
    const int n = window.n;
    if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n)
        throw DimensionError("rank_one_approx: index size mismatch");
    if (!window.contains(a) || !window.contains(b))
        throw WindowError("rank_one_approx: indices must lie in the window");
    if (!(tol > 0.0 && tol < 1.0)) throw Error("rank_one_approx: tol must lie in (0,1)");

    const double h = hbar.hbar;
    // Width so that the nearest other lattice point (distance 2 pi hbar) sees
    // tol * 1e-5.
    const double s = std::log(1.0 / (tol * 1e-5)) / (4.0 * kPi * kPi * h * h);
    Eigen::VectorXd center(n);
    for (int j = 0; j < n; ++j) center[j] = kPi * h * static_cast<double>(a[j] + b[j]);
    const double expo = s * center.squaredNorm();
    if (expo > 600.0)
        throw FeasibilityError("rank_one_approx: required Gaussian width " + format_float(s) +
                               " overflows at center norm " + format_float(center.norm()));

    IntVector k(n);
    for (int j = 0; j < n; ++j) k[j] = checked_sub(a[j], b[j]);
    Eigen::MatrixXd Q = s * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXcd w = (2.0 * s * center).cast<cplx>();
    MomentumSymbol g = MomentumSymbol::gaussian(Subspace::full(n), Eigen::VectorXd::Zero(n), Q, w,
                                                std::exp(cplx(-expo, 0.0)));
    Observable f;
    f.n = n;
    f.gens.push_back({k, g});

    LatticeOperator rank1{window, {}};
    LatticeOperator::Term t;
    t.k = k;
    t.diag.assign(static_cast<size_t>(window.size()), cplx(0.0, 0.0));
    t.diag[static_cast<size_t>(window.flatten(b))] = 1.0;
    rank1.terms.push_back(std::move(t));

    NormReport nr = operator_norm_auto(sub(weyl_quantize(f, hbar, window), rank1));
    return {f, make_report(h, nr, window, 0)};
}

DefectReport tensor_embed_check(const Observable& f, int m, PlanckParam hbar, int N) {
    const int n = f.n;
    FourierWindow small(n, N), big(n + m, N);
    // f (x) 1: pad shifts and subspace bases with zeros.
    Observable fe;
    fe.n = n + m;
    for (const auto& g : f.gens) {
        IntVector k = g.k;
        k.resize(static_cast<size_t>(n + m), 0);
        Subspace U;
        U.n = n + m;
        U.B = Eigen::MatrixXd::Zero(n + m, g.h.dim());
        U.B.topRows(n) = g.h.subspace().B;
        Eigen::VectorXd xi = Eigen::VectorXd::Zero(n + m);
        xi.head(n) = g.h.xi();
        fe.gens.push_back({std::move(k), MomentumSymbol(U, xi, g.h.terms())});
    }
    LatticeOperator lhs = weyl_quantize(fe, hbar, big);

    // Q(f) (x) Id on the product window.
    LatticeOperator qf = weyl_quantize(f, hbar, small);
    LatticeOperator rhs{big, {}};
    for (const auto& t : qf.terms) {
        LatticeOperator::Term s;
        s.k = t.k;
        s.k.resize(static_cast<size_t>(n + m), 0);
        s.diag.resize(static_cast<size_t>(big.size()));
        for (Int i = 0; i < big.size(); ++i) {
            IntVector l = big.unflatten(i);
            IntVector l1(l.begin(), l.begin() + n);
            s.diag[static_cast<size_t>(i)] = t.diag[static_cast<size_t>(small.flatten(l1))];
        }
        rhs.terms.push_back(std::move(s));
    }
    const int margin = std::min(shift_reach(f), N);
    NormReport nr = interior_norm(sub(lhs, rhs), margin);
    return make_report(hbar.hbar, nr, big, margin);
}

double gaussian_sup_radius(const Observable& f, double eps) {
    double R = 0.0;
    for (const auto& g : f.gens)
        for (const auto& t : g.h.terms()) {
            const int d = g.h.dim();
            if (d == 0) continue;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.Q, Eigen::EigenvaluesOnly);
            const double lam = es.eigenvalues().minCoeff();
            double wre = 0.0;
            for (int j = 0; j < d; ++j) wre += std::abs(t.w[j].real());
            double csum = 0.0;
            for (const auto& [alpha, c] : t.poly.coeffs()) csum += std::abs(c);
            csum = std::max(1.0, std::abs(t.coeff) * csum);
            const int deg = t.poly.degree();
            // Smallest r with csum (1+r)^deg exp(-lam r^2 + wre r) <= eps.
            double lo = 0.0, hi = 1.0;
            auto bound = [&](double r) {
                return std::log(csum) + deg * std::log1p(r) - lam * r * r + wre * r - std::log(eps);
            };
            while (bound(hi) > 0.0 && hi < 1e6) hi *= 2.0;
            if (bound(hi) > 0.0) throw FeasibilityError("gaussian_sup_radius: no finite radius");
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                (bound(mid) > 0.0 ? lo : hi) = mid;
            }
            R = std::max(R, hi);
        }
    return R;
}

std::vector<RieffelRow> rieffel_curve(const Observable& f, const std::vector<double>& hbar_grid,
                                      const std::vector<int>& window_schedule, int supnorm_budget) {
    if (!window_schedule.empty() && window_schedule.size() != hbar_grid.size())
        throw DimensionError("rieffel_curve: schedule length mismatch");
    const double R = gaussian_sup_radius(f);
    const int reach = shift_reach(f);
    const double box = std::max(R, 1.0) + 1.0;
    const double supnorm = sup_norm_estimate(f, supnorm_budget, box);
    std::vector<RieffelRow> rows;
    for (size_t i = 0; i < hbar_grid.size(); ++i) {
        const double h = hbar_grid[i];
        if (!(h > 0.0)) throw Error("rieffel_curve: hbar must be positive");
        int N;
        if (!window_schedule.empty())
            N = window_schedule[i];
        else
            N = std::max({1, reach, static_cast<int>(std::ceil(R / (kPi * h)))});
        FourierWindow win(f.n, N);
        if (win.size() > 200000000)
            throw FeasibilityError("rieffel_curve: window schedule too large at hbar = " +
                                   format_float(h));
        RieffelRow row;
        row.hbar = h;
        row.N = N;
        row.qnorm = operator_norm_auto(weyl_quantize(f, PlanckParam(h), win)).value;
        row.supnorm = supnorm;
        rows.push_back(row);
    }
    return rows;
}

DefectReport von_neumann_defect(const Observable& f, const Observable& g, PlanckParam hbar,
                                const FourierWindow& window) {
    LatticeOperator qf = weyl_quantize(f, hbar, window);
    LatticeOperator qg = weyl_quantize(g, hbar, window);
    LatticeOperator lhs = compose(qf, qg);
    LatticeOperator rhs = weyl_quantize(multiply(f, g), hbar, window);
    const int margin = std::min(shift_reach(f) + shift_reach(g), window.N);
    NormReport nr = interior_norm(sub(lhs, rhs), margin);
    return make_report(hbar.hbar, nr, window, margin);
}

DefectReport dirac_defect(const Observable& f, const Observable& g, PlanckParam hbar,
                          const FourierWindow& window) {
    LatticeOperator qf = weyl_quantize(f, hbar, window);
    LatticeOperator qg = weyl_quantize(g, hbar, window);
    LatticeOperator comm = sub(compose(qf, qg), compose(qg, qf));
    LatticeOperator lhs = scaled(comm, kI / hbar.hbar);
    LatticeOperator rhs = weyl_quantize(poisson_bracket(f, g), hbar, window);
    const int margin = std::min(shift_reach(f) + shift_reach(g), window.N);
    NormReport nr = interior_norm(sub(lhs, rhs), margin);
    return make_report(hbar.hbar, nr, window, margin);
}

std::vector<StrongContinuityRow> strong_continuity_curve(const Observable& f,
                                                         const std::vector<cplx>& psi,
                                                         PlanckParam hbar0,
                                                         const std::vector<double>& hbar_grid,
                                                         const FourierWindow& window) {
    if (static_cast<Int>(psi.size()) != window.size())
        throw DimensionError("strong_continuity_curve: vector size mismatch");
    std::vector<cplx> base = cylq::apply(weyl_quantize(f, hbar0, window), psi);
    std::vector<StrongContinuityRow> rows;
    for (double h : hbar_grid) {
        std::vector<cplx> cur = cylq::apply(weyl_quantize(f, PlanckParam(h), window), psi);
        for (size_t i = 0; i < cur.size(); ++i) cur[i] -= base[i];
        rows.push_back({h, std::sqrt(kernels::cnorm2sq(cur.data(), cur.size()))});
    }
    return rows;
}

}  // namespace cylq
