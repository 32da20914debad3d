#include "cylq/classical.hpp"

#include <algorithm>
#include <cmath>

namespace cylq {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double wrap01(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r -= 1.0;  // guards against floor rounding at the boundary
    return r;
}

PhasePoint make_phase_point(Eigen::VectorXd q, Eigen::VectorXd p) {
    if (q.size() != p.size()) throw DimensionError("phase point: size mismatch");
    for (int j = 0; j < q.size(); ++j) q[j] = wrap01(q[j]);
    return {std::move(q), std::move(p)};
}

double phase_distance(const PhasePoint& a, const PhasePoint& b) {
    if (a.q.size() != b.q.size() || a.p.size() != b.p.size())
        throw DimensionError("phase distance: size mismatch");
    double s = 0.0;
    for (int j = 0; j < a.q.size(); ++j) {
        double d = std::fabs(wrap01(a.q[j]) - wrap01(b.q[j]));
        d = std::min(d, 1.0 - d);
        s += d * d;
    }
    s += (a.p - b.p).squaredNorm();
    return std::sqrt(s);
}

void TrigPotential::set_mode(const IntVector& k, cplx c) {
    if (static_cast<int>(k.size()) != n) throw DimensionError("potential mode: size mismatch");
    IntVector mk(k.size());
    for (size_t j = 0; j < k.size(); ++j) mk[j] = checked_neg(k[j]);
    coeffs[k] = c;
    if (mk != k)
        coeffs[mk] = std::conj(c);
    else if (std::fabs(c.imag()) > 0.0)
        throw Error("potential mode: a_0-type mode must be real");
}

void TrigPotential::normalize_hermitian(double tol) {
    for (auto& [k, c] : coeffs) {
        IntVector mk(k.size());
        for (size_t j = 0; j < k.size(); ++j) mk[j] = checked_neg(k[j]);
        auto it = coeffs.find(mk);
        cplx other = (it == coeffs.end()) ? cplx(0.0, 0.0) : it->second;
        if (std::abs(c - std::conj(other)) > tol * (1.0 + std::abs(c)))
            throw Error("potential: coefficients are not Hermitian (V would not be real)");
        cplx avg = 0.5 * (c + std::conj(other));
        c = avg;
        if (it != coeffs.end()) it->second = std::conj(avg);
    }
}

double TrigPotential::sup_bound() const {
    double s = 0.0;
    for (const auto& [k, c] : coeffs) s += std::abs(c);
    return s;
}

double eval_potential(const TrigPotential& V, const Eigen::VectorXd& q) {
    if (q.size() != V.n) throw DimensionError("eval_potential: size mismatch");
    cplx s = 0.0;
    for (const auto& [k, c] : V.coeffs) {
        double kq = 0.0;
        for (int j = 0; j < V.n; ++j) kq += static_cast<double>(k[j]) * q[j];
        s += c * std::polar(1.0, 2.0 * kPi * kq);
    }
    if (std::fabs(s.imag()) > 1e-12 * (1.0 + std::abs(s)))
        throw Error("eval_potential: imaginary residue above tolerance");
    return s.real();
}

Eigen::VectorXd eval_grad(const TrigPotential& V, const Eigen::VectorXd& q) {
    if (q.size() != V.n) throw DimensionError("eval_grad: size mismatch");
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(V.n);
    for (const auto& [k, c] : V.coeffs) {
        double kq = 0.0;
        for (int j = 0; j < V.n; ++j) kq += static_cast<double>(k[j]) * q[j];
        cplx factor = c * std::polar(1.0, 2.0 * kPi * kq) * cplx(0.0, 2.0 * kPi);
        for (int j = 0; j < V.n; ++j) g[j] += factor * static_cast<double>(k[j]);
    }
    Eigen::VectorXd out(V.n);
    for (int j = 0; j < V.n; ++j) {
        if (std::fabs(g[j].imag()) > 1e-12 * (1.0 + std::abs(g[j])))
            throw Error("eval_grad: imaginary residue above tolerance");
        out[j] = g[j].real();
    }
    return out;
}

PhasePoint flow(const PhasePoint& x0, const TrigPotential& V, double t, const FlowConfig& cfg) {
    if (cfg.steps < 1) throw Error("flow: need at least one step");
    if (cfg.integrator != "verlet") throw Error("flow: unknown integrator " + cfg.integrator);
    const double dt = t / static_cast<double>(cfg.steps);
    Eigen::VectorXd q = x0.q, p = x0.p;
    Eigen::VectorXd g = eval_grad(V, q);
    for (long long s = 0; s < cfg.steps; ++s) {
        Eigen::VectorXd phalf = p - 0.5 * dt * g;
        q += dt * phalf;
        for (int j = 0; j < q.size(); ++j) q[j] = wrap01(q[j]);
        g = eval_grad(V, q);
        p = phalf - 0.5 * dt * g;
    }
    return {std::move(q), std::move(p)};
}

double rescale_flow_check(const PhasePoint& x0, const TrigPotential& V, double t,
                          const FlowConfig& cfg) {
    if (t == 0.0) throw Error("rescale_flow_check: t must be nonzero");
    PhasePoint direct = flow(x0, V, t, cfg);
    TrigPotential Vt2 = V;
    for (auto& [k, c] : Vt2.coeffs) c *= t * t;
    PhasePoint mapped{x0.q, t * x0.p};
    PhasePoint one = flow(mapped, Vt2, 1.0, cfg);
    PhasePoint back{one.q, one.p / t};
    return phase_distance(direct, back);
}

GronwallResult gronwall_check(const PhasePoint& x0, const PhasePoint& y0, const TrigPotential& V,
                              const TrigPotential& W, double t, const FlowConfig& cfg) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error("gronwall_check: t must lie in [0,1]");
    GronwallResult r;
    double c = 0.0;
    for (const auto& [k, a] : V.coeffs) {
        double k2 = 0.0;
        for (Int kj : k) k2 += static_cast<double>(kj) * static_cast<double>(kj);
        c += k2 * std::abs(a);
    }
    r.c = std::max(1.0, 4.0 * kPi * kPi * c);
    double eps = 0.0;
    std::map<IntVector, cplx> diff = V.coeffs;
    for (const auto& [k, b] : W.coeffs) diff[k] -= b;
    for (const auto& [k, d] : diff) {
        double knorm = 0.0;
        for (Int kj : k) knorm += static_cast<double>(kj) * static_cast<double>(kj);
        eps += 2.0 * kPi * std::sqrt(knorm) * std::abs(d);
    }
    r.eps = eps;
    r.lhs = phase_distance(flow(x0, V, t, cfg), flow(y0, W, t, cfg));
    r.rhs = (phase_distance(x0, y0) + t * eps) * std::exp(t * r.c);
    return r;
}

TrigPotential remove_mode(const TrigPotential& V, const IntVector& k) {
    TrigPotential R = V;
    IntVector mk(k.size());
    for (size_t j = 0; j < k.size(); ++j) mk[j] = checked_neg(k[j]);
    R.coeffs.erase(k);
    R.coeffs.erase(mk);
    return R;
}

double mode_removal_gap(const PhasePoint& x0, const TrigPotential& V, const IntVector& k,
                        const FlowConfig& cfg) {
    if (V.coeffs.find(k) == V.coeffs.end())
        throw Error("mode_removal_gap: mode not present in the potential");
    PhasePoint a = flow(x0, V, 1.0, cfg);
    PhasePoint b = flow(x0, remove_mode(V, k), 1.0, cfg);
    return phase_distance(a, b);
}

TrigPotential fejer_smooth(const CoeffRule& rule, int m) {
    if (m < 1) throw Error("fejer_smooth: order must be >= 1");
    if (!rule.a) throw Error("fejer_smooth: coefficient rule missing");
    TrigPotential out(rule.n);
    const int lim = std::max(0, std::min(rule.cutoff, m - 1));
    IntVector k(rule.n, -lim);
    while (true) {
        double weight = 1.0;
        for (int j = 0; j < rule.n; ++j)
            weight *= std::max(0.0, 1.0 - std::fabs(static_cast<double>(k[j])) / m);
        if (weight > 0.0) {
            cplx c = rule.a(k);
            if (c != cplx(0.0, 0.0)) out.coeffs[k] = weight * c;
        }
        int j = rule.n - 1;
        for (; j >= 0; --j) {
            if (k[j] < lim) {
                ++k[j];
                break;
            }
            k[j] = -lim;
        }
        if (j < 0) break;
    }
    out.normalize_hermitian();
    return out;
}

std::vector<cplx> pullback_samples(const Observable& f, const TrigPotential& V, double t,
                                   const FlowConfig& cfg, const std::vector<PhasePoint>& samples) {
    std::vector<cplx> out;
    out.reserve(samples.size());
    for (const auto& x : samples) {
        PhasePoint y = flow(x, V, t, cfg);
        out.push_back(eval(f, y.q, y.p));
    }
    return out;
}

}  // namespace cylq
