#include "cylq/quantum.hpp"

#include <algorithm>
#include <cmath>

#include "cylq/quadrature.hpp"

namespace cylq {

namespace {
constexpr double kPi = 3.14159265358979323846;
const cplx kI{0.0, 1.0};

double norm2sq(const IntVector& a) {
    double s = 0.0;
    for (Int x : a) s += static_cast<double>(x) * static_cast<double>(x);
    return s;
}

}  // namespace

TruncatedHamiltonian::TruncatedHamiltonian(const FourierWindow& w, double hbar_, TrigPotential V_)
    : window(w), hbar(hbar_), V(std::move(V_)) {
    if (!(hbar > 0.0)) throw Error("truncated hamiltonian: hbar must be positive");
    if (V.n != w.n) throw DimensionError("truncated hamiltonian: dimension mismatch");
    V.normalize_hermitian();
}

Eigen::MatrixXcd TruncatedHamiltonian::dense() const {
    const Int sz = window.size();
    if (sz > 4096) throw Error("truncated hamiltonian: dense limited to size 4096");
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(sz, sz);
    for (Int i = 0; i < sz; ++i) {
        IntVector a = window.unflatten(i);
        H(i, i) = 2.0 * kPi * kPi * hbar * hbar * norm2sq(a);
        for (const auto& [k, c] : V.coeffs) {
            IntVector tgt(a.size());
            bool ok = true;
            for (size_t j = 0; j < a.size(); ++j) {
                tgt[j] = checked_add(a[j], k[j]);
                if (tgt[j] < -window.N || tgt[j] > window.N) ok = false;
            }
            if (ok) H(window.flatten(tgt), i) += c;
        }
    }
    return H;
}

LatticeOperator free_propagator(const FourierWindow& window, PlanckParam hbar, double t) {
    LatticeOperator::Term term;
    term.k = IntVector(window.n, 0);
    term.diag.resize(static_cast<size_t>(window.size()));
    for (Int i = 0; i < window.size(); ++i) {
        IntVector a = window.unflatten(i);
        term.diag[static_cast<size_t>(i)] =
            std::polar(1.0, -2.0 * kPi * kPi * t * hbar.hbar * norm2sq(a));
    }
    return {window, {std::move(term)}};
}

Observable free_conjugation_symbolic(const Observable& f, double t) {
    return free_flow_pullback(f, t);
}

LatticeOperator heisenberg_free(const LatticeOperator& A, PlanckParam hbar, double t) {
    LatticeOperator R = A;
    for (auto& term : R.terms) {
        const double kk = norm2sq(term.k);
        for (Int i = 0; i < A.window.size(); ++i) {
            IntVector a = A.window.unflatten(i);
            double ak = 0.0;
            for (size_t j = 0; j < a.size(); ++j)
                ak += static_cast<double>(a[j]) * static_cast<double>(term.k[j]);
            term.diag[static_cast<size_t>(i)] *=
                std::polar(1.0, 2.0 * kPi * kPi * t * hbar.hbar * (2.0 * ak + kk));
        }
    }
    return R;
}

DysonTermResult dyson_term(const std::vector<IntVector>& k_list, double t, PlanckParam hbar,
                           const FourierWindow& window, const DysonQuad& quad) {
    const int m = static_cast<int>(k_list.size());
    const int n = window.n;
    IntVector total(n, 0);
    Int reach = 0;
    for (const auto& k : k_list) {
        if (static_cast<int>(k.size()) != n) throw DimensionError("dyson_term: shift size mismatch");
        for (int j = 0; j < n; ++j) {
            total[j] = checked_add(total[j], k[j]);
            reach = std::max(reach, std::llabs(total[j]));
        }
    }
    for (int j = 0; j < n; ++j)
        if (std::llabs(total[j]) > 2 * static_cast<Int>(window.N))
            throw WindowError("dyson_term: shift word exceeds the window");

    LatticeOperator::Term term;
    term.k = total;
    term.diag.assign(static_cast<size_t>(window.size()), cplx(0.0, 0.0));
    double max_err = 0.0;

    // One point set serves every source index; only omega changes.
    SimplexQmcPoints pts;
    if (m > 4)
        pts = make_simplex_qmc_points(m, t, quad.qmc_points, quad.qmc_shifts,
                                      quad.seed + static_cast<std::uint64_t>(m));
    std::vector<double> omega(m);
    for (Int i = 0; i < window.size(); ++i) {
        IntVector a = window.unflatten(i);
        // a_j = a + sum_{i > j} k_i, applied right to left.
        IntVector cur = a;
        for (int j = m - 1; j >= 0; --j) {
            double c = norm2sq(k_list[j]);
            for (int x = 0; x < n; ++x)
                c += 2.0 * static_cast<double>(cur[x]) * static_cast<double>(k_list[j][x]);
            omega[j] = 2.0 * kPi * kPi * hbar.hbar * c;
            for (int x = 0; x < n; ++x) cur[x] = checked_add(cur[x], k_list[j][x]);
        }
        QuadResult qr = m <= 4 ? simplex_phase_integral(omega, t, quad.gl_tol)
                               : simplex_phase_qmc(pts, omega);
        term.diag[static_cast<size_t>(i)] = qr.value;
        max_err = std::max(max_err, qr.err);
    }
    return {LatticeOperator{window, {std::move(term)}}, max_err};
}

std::pair<LatticeOperator, PropagatorReport> dyson_partial_sum(const TrigPotential& V, double t,
                                                               PlanckParam hbar,
                                                               const FourierWindow& window, int M,
                                                               const DysonQuad& quad) {
    if (M < 0) throw Error("dyson_partial_sum: order must be nonnegative");
    TrigPotential Vn = V;
    Vn.normalize_hermitian();
    std::vector<std::pair<IntVector, cplx>> modes(Vn.coeffs.begin(), Vn.coeffs.end());
    const size_t S = modes.size();
    double words = 1.0;
    for (int m = 1; m <= M; ++m) {
        words *= static_cast<double>(std::max<size_t>(S, 1));
        if (words > 1e5) throw Error("dyson_partial_sum: |support|^M exceeds the 1e5 guard");
    }

    PropagatorReport rep;
    rep.t = t;
    rep.hbar = hbar.hbar;
    rep.M = M;
    rep.quad_spec = "gl(tol=" + format_float(quad.gl_tol) +
                    "),qmc(points=" + std::to_string(quad.qmc_points) +
                    ",shifts=" + std::to_string(quad.qmc_shifts) + ")";

    LatticeOperator W = identity_operator(window);
    for (int m = 1; m <= M && S > 0; ++m) {
        cplx scale = 1.0;
        for (int j = 0; j < m; ++j) scale *= -kI / hbar.hbar;  // (i hbar)^{-m}
        // Mode words in sorted lexicographic order for deterministic summation.
        std::vector<size_t> word(m, 0);
        while (true) {
            cplx coeff = scale;
            std::vector<IntVector> ks(m);
            for (int j = 0; j < m; ++j) {
                coeff *= modes[word[j]].second;
                ks[j] = modes[word[j]].first;
            }
            DysonTermResult dt = dyson_term(ks, t, hbar, window, quad);
            rep.quad_error += std::abs(coeff) * dt.quad_error;
            W = add(W, scaled(dt.op, coeff));
            int j = m - 1;
            for (; j >= 0; --j) {
                if (++word[j] < S) break;
                word[j] = 0;
            }
            if (j < 0) break;
        }
    }

    // Tail of the exponential series at x = |t| |V| / hbar.
    const double x = std::fabs(t) * Vn.sup_bound() / hbar.hbar;
    double term = 1.0;
    for (int m = 1; m <= M; ++m) term *= x / m;
    double tail = 0.0;
    for (int m = M + 1; m <= M + 400; ++m) {
        term *= x / m;
        tail += term;
        if (term < 1e-300) break;
    }
    rep.remainder = tail;
    return {std::move(W), rep};
}

Eigen::MatrixXcd exact_interaction_propagator(const TrigPotential& V, double t, PlanckParam hbar,
                                              const FourierWindow& window) {
    TruncatedHamiltonian H(window, hbar.hbar, V);
    Eigen::MatrixXcd Hd = H.dense();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hd);
    const Int sz = window.size();
    Eigen::VectorXcd phases(sz);
    for (Int i = 0; i < sz; ++i)
        phases[i] = std::polar(1.0, -t * es.eigenvalues()[i] / hbar.hbar);
    Eigen::MatrixXcd expH =
        es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    // U0(-t) is diagonal with entries e^{+2 pi^2 i t hbar |a|^2}.
    Eigen::VectorXcd u0(sz);
    for (Int i = 0; i < sz; ++i)
        u0[i] = std::polar(1.0, 2.0 * kPi * kPi * t * hbar.hbar * norm2sq(window.unflatten(i)));
    return u0.asDiagonal() * expH;
}

DefectReport heisenberg_evolution_check(const LatticeOperator& A, const TrigPotential& V, double t,
                                        PlanckParam hbar, const FourierWindow& window) {
    if (!(A.window == window)) throw DimensionError("heisenberg_evolution_check: window mismatch");
    TruncatedHamiltonian H(window, hbar.hbar, V);
    Eigen::MatrixXcd Hd = H.dense();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hd);
    const Int sz = window.size();
    Eigen::VectorXcd fwd(sz);
    for (Int i = 0; i < sz; ++i) fwd[i] = std::polar(1.0, t * es.eigenvalues()[i] / hbar.hbar);
    Eigen::MatrixXcd expP = es.eigenvectors() * fwd.asDiagonal() * es.eigenvectors().adjoint();
    Eigen::MatrixXcd Ad = dense(A);
    Eigen::MatrixXcd lhs = expP * Ad * expP.adjoint();

    Eigen::MatrixXcd W = exact_interaction_propagator(V, t, hbar, window);
    Eigen::MatrixXcd rhs = W.adjoint() * dense(heisenberg_free(A, hbar, t)) * W;

    Eigen::MatrixXcd D = lhs - rhs;
    Eigen::MatrixXcd G = D.adjoint() * D;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gs(G, Eigen::EigenvaluesOnly);
    DefectReport rep;
    rep.hbar = hbar.hbar;
    rep.value = std::sqrt(std::max(0.0, gs.eigenvalues().maxCoeff()));
    rep.norm_method = "dense";
    rep.N = window.N;
    rep.margin = 0;
    return rep;
}

}  // namespace cylq
