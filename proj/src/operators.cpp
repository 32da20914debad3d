#include "cylq/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cylq/kernels.hpp"

namespace cylq {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

FourierWindow::FourierWindow(int n_, int N_) : n(n_), N(N_) {
    if (n < 1) throw DimensionError("window: need n >= 1");
    if (N < 0) throw WindowError("window: need N >= 0");
    size_ = 1;
    for (int j = 0; j < n; ++j) size_ = checked_mul(size_, 2 * static_cast<Int>(N) + 1);
}

Int FourierWindow::flatten(const IntVector& l) const {
    if (static_cast<int>(l.size()) != n) throw DimensionError("window flatten: index size");
    Int idx = 0;
    for (int j = 0; j < n; ++j) {
        if (l[j] < -N || l[j] > N) throw WindowError("window flatten: index outside window");
        idx = idx * (2 * static_cast<Int>(N) + 1) + (l[j] + N);
    }
    return idx;
}

IntVector FourierWindow::unflatten(Int idx) const {
    if (idx < 0 || idx >= size_) throw WindowError("window unflatten: flat index out of range");
    IntVector l(n);
    const Int w = 2 * static_cast<Int>(N) + 1;
    for (int j = n - 1; j >= 0; --j) {
        l[j] = idx % w - N;
        idx /= w;
    }
    return l;
}

bool FourierWindow::contains(const IntVector& l) const {
    if (static_cast<int>(l.size()) != n) return false;
    for (int j = 0; j < n; ++j)
        if (l[j] < -N || l[j] > N) return false;
    return true;
}

bool FourierWindow::interior(const IntVector& l, int margin) const {
    if (margin < 0 || margin > N) throw WindowError("interior: margin must satisfy 0 <= m <= N");
    if (static_cast<int>(l.size()) != n) return false;
    for (int j = 0; j < n; ++j)
        if (l[j] < -(N - margin) || l[j] > N - margin) return false;
    return true;
}

void LatticeOperator::validate() const {
    for (const auto& t : terms) {
        if (static_cast<int>(t.k.size()) != window.n)
            throw DimensionError("operator term: shift size mismatch");
        for (Int kj : t.k)
            if (std::llabs(kj) > 2 * static_cast<Int>(window.N))
                throw WindowError("operator term: |k_i| must be <= 2N");
        if (static_cast<Int>(t.diag.size()) != window.size())
            throw DimensionError("operator term: diagonal table size mismatch");
    }
}

LatticeOperator make_operator(const FourierWindow& win, std::vector<LatticeOperator::Term> terms) {
    LatticeOperator A{win, std::move(terms)};
    A.validate();
    return A;
}

LatticeOperator identity_operator(const FourierWindow& win) {
    LatticeOperator::Term t;
    t.k = IntVector(win.n, 0);
    t.diag.assign(static_cast<size_t>(win.size()), cplx(1.0, 0.0));
    return {win, {std::move(t)}};
}

namespace {

// Per-dimension valid source range for shift k: both l and l+k in window.
bool source_box(const FourierWindow& w, const IntVector& k, IntVector& lo, IntVector& hi) {
    lo.assign(w.n, 0);
    hi.assign(w.n, 0);
    for (int j = 0; j < w.n; ++j) {
        lo[j] = std::max<Int>(-w.N, -w.N - k[j]);
        hi[j] = std::min<Int>(w.N, static_cast<Int>(w.N) - k[j]);
        if (lo[j] > hi[j]) return false;
    }
    return true;
}

Int flat_offset(const FourierWindow& w, const IntVector& k) {
    Int off = 0;
    for (int j = 0; j < w.n; ++j) off = off * (2 * static_cast<Int>(w.N) + 1) + k[j];
    return off;
}

// Walk the box [lo, hi] over the leading n-1 dims; fn(base_flat) gets the flat
// index of (prefix, lo[n-1]).
template <typename Fn>
void for_each_run(const FourierWindow& w, const IntVector& lo, const IntVector& hi, Fn&& fn) {
    const int n = w.n;
    IntVector cur(lo.begin(), lo.end());
    cur[n - 1] = lo[n - 1];
    while (true) {
        fn(w.flatten(cur));
        int j = n - 2;
        for (; j >= 0; --j) {
            if (cur[j] < hi[j]) {
                ++cur[j];
                break;
            }
            cur[j] = lo[j];
        }
        if (j < 0) break;
    }
}

}  // namespace

std::vector<cplx> apply(const LatticeOperator& A, const std::vector<cplx>& phi) {
    const FourierWindow& w = A.window;
    if (static_cast<Int>(phi.size()) != w.size()) throw DimensionError("apply: vector size mismatch");
    std::vector<cplx> out(phi.size(), cplx(0.0, 0.0));
    IntVector lo, hi;
    for (const auto& t : A.terms) {
        if (!source_box(w, t.k, lo, hi)) continue;
        const Int off = flat_offset(w, t.k);
        const size_t len = static_cast<size_t>(hi[w.n - 1] - lo[w.n - 1] + 1);
        for_each_run(w, lo, hi, [&](Int src0) {
            kernels::cmul_acc(out.data() + src0 + off, t.diag.data() + src0, phi.data() + src0, len);
        });
    }
    return out;
}

LatticeOperator compose(const LatticeOperator& A, const LatticeOperator& B) {
    const FourierWindow& w = A.window;
    if (!(w == B.window)) throw DimensionError("compose: window mismatch");
    const size_t sz = static_cast<size_t>(w.size());
    std::map<IntVector, std::vector<cplx>> acc;
    for (const auto& ta : A.terms)
        for (const auto& tb : B.terms) {
            // k = ka + kb; d(m) = da(m + kb) db(m), zero when m + kb leaves the window.
            IntVector k(w.n);
            bool reachable = true;
            for (int j = 0; j < w.n; ++j) {
                k[j] = checked_add(ta.k[j], tb.k[j]);
                if (std::llabs(k[j]) > 2 * static_cast<Int>(w.N)) reachable = false;
            }
            if (!reachable) continue;
            IntVector lo, hi;
            if (!source_box(w, tb.k, lo, hi)) continue;
            auto [it, fresh] = acc.try_emplace(k);
            if (fresh) it->second.assign(sz, cplx(0.0, 0.0));
            std::vector<cplx>& d = it->second;
            const Int off = flat_offset(w, tb.k);
            const size_t len = static_cast<size_t>(hi[w.n - 1] - lo[w.n - 1] + 1);
            for_each_run(w, lo, hi, [&](Int src0) {
                kernels::cmul_acc(d.data() + src0, ta.diag.data() + src0 + off,
                                  tb.diag.data() + src0, len);
            });
        }
    LatticeOperator R{w, {}};
    R.terms.reserve(acc.size());
    for (auto& [k, d] : acc) R.terms.push_back({k, std::move(d)});
    return R;
}

LatticeOperator adjoint(const LatticeOperator& A) {
    const FourierWindow& w = A.window;
    LatticeOperator R{w, {}};
    for (const auto& t : A.terms) {
        LatticeOperator::Term s;
        s.k.resize(w.n);
        for (int j = 0; j < w.n; ++j) s.k[j] = checked_neg(t.k[j]);
        s.diag.assign(static_cast<size_t>(w.size()), cplx(0.0, 0.0));
        // e(m) = conj(d(m - k)) wherever m and m - k are both in the window.
        IntVector lo, hi;
        if (source_box(w, t.k, lo, hi)) {
            const Int off = flat_offset(w, t.k);
            for_each_run(w, lo, hi, [&](Int src0) {
                const size_t len = static_cast<size_t>(hi[w.n - 1] - lo[w.n - 1] + 1);
                for (size_t i = 0; i < len; ++i)
                    s.diag[static_cast<size_t>(src0 + off) + i] =
                        std::conj(t.diag[static_cast<size_t>(src0) + i]);
            });
        }
        R.terms.push_back(std::move(s));
    }
    return R;
}

LatticeOperator add(const LatticeOperator& A, const LatticeOperator& B) {
    if (!(A.window == B.window)) throw DimensionError("add: window mismatch");
    std::map<IntVector, std::vector<cplx>> acc;
    auto fold = [&](const LatticeOperator& X) {
        for (const auto& t : X.terms) {
            auto [it, fresh] = acc.try_emplace(t.k);
            if (fresh)
                it->second = t.diag;
            else
                for (size_t i = 0; i < t.diag.size(); ++i) it->second[i] += t.diag[i];
        }
    };
    fold(A);
    fold(B);
    LatticeOperator R{A.window, {}};
    for (auto& [k, d] : acc) R.terms.push_back({k, std::move(d)});
    return R;
}

LatticeOperator scaled(const LatticeOperator& A, cplx c) {
    LatticeOperator R = A;
    for (auto& t : R.terms)
        for (auto& v : t.diag) v *= c;
    return R;
}

LatticeOperator restrict_sources(const LatticeOperator& A, int margin) {
    LatticeOperator R = A;
    const FourierWindow& w = A.window;
    for (auto& t : R.terms)
        for (Int i = 0; i < w.size(); ++i)
            if (!w.interior(w.unflatten(i), margin)) t.diag[static_cast<size_t>(i)] = 0.0;
    return R;
}

Eigen::MatrixXcd dense(const LatticeOperator& A) {
    const FourierWindow& w = A.window;
    const Int sz = w.size();
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(sz, sz);
    IntVector lo, hi;
    for (const auto& t : A.terms) {
        if (!source_box(w, t.k, lo, hi)) continue;
        const Int off = flat_offset(w, t.k);
        const size_t len = static_cast<size_t>(hi[w.n - 1] - lo[w.n - 1] + 1);
        for_each_run(w, lo, hi, [&](Int src0) {
            for (size_t i = 0; i < len; ++i) {
                Int s = src0 + static_cast<Int>(i);
                M(s + off, s) += t.diag[static_cast<size_t>(s)];
            }
        });
    }
    return M;
}

namespace {

double single_term_norm(const LatticeOperator& A) {
    const FourierWindow& w = A.window;
    const auto& t = A.terms[0];
    IntVector lo, hi;
    if (!source_box(w, t.k, lo, hi)) return 0.0;
    double best = 0.0;
    const size_t len = static_cast<size_t>(hi[w.n - 1] - lo[w.n - 1] + 1);
    for_each_run(w, lo, hi, [&](Int src0) {
        for (size_t i = 0; i < len; ++i)
            best = std::max(best, std::abs(t.diag[static_cast<size_t>(src0) + i]));
    });
    return best;
}

}  // namespace

NormReport operator_norm(const LatticeOperator& A, const std::string& method,
                         const NormOptions& opts) {
    NormReport rep;
    rep.method = method;
    if (A.terms.empty()) return rep;
    if (method == "dense") {
        if (A.window.size() > 4096) throw Error("operator_norm: dense method limited to size 4096");
        if (A.terms.size() == 1) {
            // S^k M_d is a compressed isometry times a multiplication operator:
            // the singular values are |d| over valid sources.
            rep.value = single_term_norm(A);
            return rep;
        }
        Eigen::MatrixXcd M = dense(A);
        Eigen::MatrixXcd G = M.adjoint() * M;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
        rep.value = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
        return rep;
    }
    if (method != "power") throw Error("operator_norm: unknown method " + method);

    const size_t sz = static_cast<size_t>(A.window.size());
    LatticeOperator At = adjoint(A);
    Rng rng(opts.seed ^ (0x9e3779b97f4a7c15ULL * (sz + 1)));
    std::vector<cplx> v(sz);
    for (auto& x : v) x = cplx(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5));
    double nv = std::sqrt(kernels::cnorm2sq(v.data(), sz));
    if (nv == 0.0) nv = 1.0;
    for (auto& x : v) x /= nv;

    double sigma = 0.0;
    rep.converged = false;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        std::vector<cplx> Av = cylq::apply(A, v);
        double s2 = kernels::cnorm2sq(Av.data(), sz);
        double sigma_new = std::sqrt(s2);
        std::vector<cplx> u = cylq::apply(At, Av);
        double nu = std::sqrt(kernels::cnorm2sq(u.data(), sz));
        rep.iterations = it;
        if (nu == 0.0) {
            rep.value = 0.0;
            rep.converged = true;
            return rep;
        }
        for (auto& x : u) x /= nu;
        v.swap(u);
        if (it > 1 && std::fabs(sigma_new - sigma) <= opts.tol * std::max(sigma_new, 1e-300)) {
            rep.value = sigma_new;
            rep.converged = true;
            return rep;
        }
        sigma = sigma_new;
    }
    rep.value = sigma;
    return rep;
}

NormReport operator_norm_auto(const LatticeOperator& A, const NormOptions& opts) {
    return operator_norm(A, A.window.size() <= 4096 ? "dense" : "power", opts);
}

NormReport interior_norm(const LatticeOperator& A, int margin, const NormOptions& opts) {
    return operator_norm_auto(restrict_sources(A, margin), opts);
}

PeriodicShiftOp::PeriodicShiftOp(int n_, int K_) : n(n_), K(K_) {
    if (n < 1 || K < 1) throw DimensionError("periodic shift op: need n >= 1, K >= 1");
    coeffs.assign(static_cast<size_t>(size()), cplx(0.0, 0.0));
}

Int PeriodicShiftOp::size() const {
    Int s = 1;
    for (int j = 0; j < n; ++j) s = checked_mul(s, static_cast<Int>(K));
    return s;
}

Int PeriodicShiftOp::flatten_mod(const IntVector& k) const {
    if (static_cast<int>(k.size()) != n) throw DimensionError("periodic flatten: size mismatch");
    Int idx = 0;
    for (int j = 0; j < n; ++j) {
        Int r = ((k[j] % K) + K) % K;
        idx = idx * K + r;
    }
    return idx;
}

void PeriodicShiftOp::add_coeff(const IntVector& k, cplx c) {
    coeffs[static_cast<size_t>(flatten_mod(k))] += c;
}

double periodic_norm_dft(const PeriodicShiftOp& P) {
    const Int sz = P.size();
    // Character l evaluates the symbol: |sum_k f(k) e^{2 pi i k.l / K}|.
    std::vector<std::pair<IntVector, cplx>> support;
    for (Int i = 0; i < sz; ++i)
        if (P.coeffs[static_cast<size_t>(i)] != cplx(0.0, 0.0)) {
            IntVector k(P.n);
            Int idx = i;
            for (int j = P.n - 1; j >= 0; --j) {
                k[j] = idx % P.K;
                idx /= P.K;
            }
            support.emplace_back(std::move(k), P.coeffs[static_cast<size_t>(i)]);
        }
    double best = 0.0;
    for (Int li = 0; li < sz; ++li) {
        IntVector l(P.n);
        Int idx = li;
        for (int j = P.n - 1; j >= 0; --j) {
            l[j] = idx % P.K;
            idx /= P.K;
        }
        cplx s = 0.0;
        for (const auto& [k, c] : support) {
            double phase = 0.0;
            for (int j = 0; j < P.n; ++j)
                phase += static_cast<double>(k[j]) * static_cast<double>(l[j]);
            s += c * std::polar(1.0, 2.0 * kPi * phase / P.K);
        }
        best = std::max(best, std::abs(s));
    }
    return best;
}

double periodic_norm_dense(const PeriodicShiftOp& P) {
    const Int sz = P.size();
    if (sz > 4096) throw Error("periodic_norm_dense: size too large");
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(sz, sz);
    for (Int ki = 0; ki < sz; ++ki) {
        cplx c = P.coeffs[static_cast<size_t>(ki)];
        if (c == cplx(0.0, 0.0)) continue;
        IntVector k(P.n);
        Int idx = ki;
        for (int j = P.n - 1; j >= 0; --j) {
            k[j] = idx % P.K;
            idx /= P.K;
        }
        for (Int li = 0; li < sz; ++li) {
            IntVector l(P.n);
            Int idx2 = li;
            for (int j = P.n - 1; j >= 0; --j) {
                l[j] = idx2 % P.K;
                idx2 /= P.K;
            }
            IntVector t(P.n);
            for (int j = 0; j < P.n; ++j) t[j] = l[j] + k[j];
            M(P.flatten_mod(t), li) += c;
        }
    }
    Eigen::MatrixXcd G = M.adjoint() * M;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

namespace {

IntVector apply_st(const IntMatrix& S, const IntVector& l) {
    // S^T l
    const int n = S.rows();
    IntVector r(n, 0);
    for (int j = 0; j < n; ++j) {
        Int s = 0;
        for (int i = 0; i < n; ++i) s = checked_add(s, checked_mul(S.at(i, j), l[i]));
        r[j] = s;
    }
    return r;
}

}  // namespace

std::vector<cplx> relabel(const FourierWindow& win, const std::vector<cplx>& phi,
                          const IntMatrix& S, const FourierWindow& target) {
    if (static_cast<Int>(phi.size()) != win.size()) throw DimensionError("relabel: vector size");
    if (S.rows() != win.n || S.cols() != win.n || win.n != target.n)
        throw DimensionError("relabel: matrix size mismatch");
    if (!S.is_unimodular()) throw Error("relabel: matrix must be unimodular");
    std::vector<cplx> out(static_cast<size_t>(target.size()), cplx(0.0, 0.0));
    for (Int i = 0; i < win.size(); ++i) {
        cplx v = phi[static_cast<size_t>(i)];
        if (v == cplx(0.0, 0.0)) continue;
        IntVector m = apply_st(S, win.unflatten(i));
        if (!target.contains(m))
            throw WindowError("relabel: data index maps outside the target window");
        out[static_cast<size_t>(target.flatten(m))] = v;
    }
    return out;
}

LatticeOperator relabel(const LatticeOperator& A, const IntMatrix& S, const FourierWindow& target) {
    const FourierWindow& w = A.window;
    if (S.rows() != w.n || S.cols() != w.n || w.n != target.n)
        throw DimensionError("relabel: matrix size mismatch");
    if (!S.is_unimodular()) throw Error("relabel: matrix must be unimodular");
    LatticeOperator R{target, {}};
    std::map<IntVector, std::vector<cplx>> acc;
    IntVector lo, hi;
    for (const auto& t : A.terms) {
        IntVector k2 = apply_st(S, t.k);
        if (!source_box(w, t.k, lo, hi)) continue;
        auto [it, fresh] = acc.try_emplace(k2);
        if (fresh) it->second.assign(static_cast<size_t>(target.size()), cplx(0.0, 0.0));
        std::vector<cplx>& d = it->second;
        const size_t len = static_cast<size_t>(hi[w.n - 1] - lo[w.n - 1] + 1);
        for_each_run(w, lo, hi, [&](Int src0) {
            for (size_t i = 0; i < len; ++i) {
                Int s = src0 + static_cast<Int>(i);
                cplx v = t.diag[static_cast<size_t>(s)];
                if (v == cplx(0.0, 0.0)) continue;
                IntVector src = w.unflatten(s);
                IntVector src2 = apply_st(S, src);
                IntVector tgt(w.n);
                for (int j = 0; j < w.n; ++j) tgt[j] = checked_add(src[j], t.k[j]);
                IntVector tgt2 = apply_st(S, tgt);
                if (!target.contains(src2) || !target.contains(tgt2))
                    throw WindowError("relabel: data index maps outside the target window");
                d[static_cast<size_t>(target.flatten(src2))] += v;
            }
        });
    }
    for (auto& [k, dv] : acc) R.terms.push_back({k, std::move(dv)});
    R.validate();
    return R;
}

}  // namespace cylq
