#include "cylq/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "cylq/quadrature.hpp"

namespace cylq {

namespace {
constexpr double kPi = 3.14159265358979323846;
const cplx kI{0.0, 1.0};
}  // namespace

Subspace Subspace::zero(int n) {
    Subspace s;
    s.n = n;
    s.B = Eigen::MatrixXd::Zero(n, 0);
    return s;
}

Subspace Subspace::full(int n) {
    Subspace s;
    s.n = n;
    s.B = Eigen::MatrixXd::Identity(n, n);
    return s;
}

Subspace Subspace::from_span(int n, const Eigen::MatrixXd& vecs, double rank_tol) {
    if (vecs.rows() != n) throw DimensionError("from_span: vector length mismatch");
    Subspace s = zero(n);
    std::vector<Eigen::VectorXd> basis;
    for (int c = 0; c < vecs.cols(); ++c) {
        Eigen::VectorXd v = vecs.col(c);
        double scale = std::max(1.0, v.norm());
        // Modified Gram-Schmidt with one reorthogonalization pass.
        for (int rep = 0; rep < 2; ++rep)
            for (const auto& b : basis) v -= b.dot(v) * b;
        if (v.norm() > rank_tol * scale) basis.push_back(v.normalized());
    }
    s.B.resize(n, static_cast<int>(basis.size()));
    for (size_t j = 0; j < basis.size(); ++j) s.B.col(static_cast<int>(j)) = basis[j];
    return s;
}

bool Subspace::contains(const Subspace& other, double tol) const {
    if (other.n != n) return false;
    if (other.dim() == 0) return true;
    Eigen::MatrixXd R = other.B - B * (B.transpose() * other.B);
    return R.lpNorm<Eigen::Infinity>() <= tol;
}

Subspace Subspace::sum(const Subspace& a, const Subspace& b, double rank_tol) {
    if (a.n != b.n) throw DimensionError("subspace sum: ambient dimension mismatch");
    if (a.contains(b)) return a;
    if (b.contains(a)) return b;
    Eigen::MatrixXd joint(a.n, a.dim() + b.dim());
    joint << a.B, b.B;
    return from_span(a.n, joint, rank_tol);
}

Polynomial Polynomial::constant(int vars, cplx c) {
    Polynomial p(vars);
    p.add(Key(vars, 0), c);
    return p;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [alpha, c] : coeffs_) {
        int s = 0;
        for (int e : alpha) s += e;
        d = std::max(d, s);
    }
    return d;
}

void Polynomial::add(const Key& alpha, cplx c) {
    if (static_cast<int>(alpha.size()) != vars_) throw DimensionError("polynomial: bad multi-index");
    auto it = coeffs_.find(alpha);
    if (it == coeffs_.end()) {
        if (c != cplx(0.0, 0.0)) coeffs_.emplace(alpha, c);
    } else {
        it->second += c;
        if (it->second == cplx(0.0, 0.0)) coeffs_.erase(it);
    }
}

cplx Polynomial::eval(const Eigen::VectorXd& u) const {
    cplx s = 0.0;
    for (const auto& [alpha, c] : coeffs_) {
        double mono = 1.0;
        for (int j = 0; j < vars_; ++j)
            for (int e = 0; e < alpha[j]; ++e) mono *= u[j];
        s += c * mono;
    }
    return s;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    if (o.vars_ != vars_) throw DimensionError("polynomial add: variable count mismatch");
    Polynomial r = *this;
    for (const auto& [alpha, c] : o.coeffs_) r.add(alpha, c);
    return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    if (o.vars_ != vars_) throw DimensionError("polynomial mul: variable count mismatch");
    Polynomial r(vars_);
    for (const auto& [a, ca] : coeffs_)
        for (const auto& [b, cb] : o.coeffs_) {
            Key k(vars_);
            for (int j = 0; j < vars_; ++j) k[j] = a[j] + b[j];
            r.add(k, ca * cb);
        }
    return r;
}

Polynomial Polynomial::scaled(cplx c) const {
    Polynomial r(vars_);
    for (const auto& [alpha, v] : coeffs_) r.add(alpha, c * v);
    return r;
}

Polynomial Polynomial::conjugated() const {
    Polynomial r(vars_);
    for (const auto& [alpha, v] : coeffs_) r.add(alpha, std::conj(v));
    return r;
}

Polynomial Polynomial::derivative(const Eigen::VectorXcd& w) const {
    if (w.size() != vars_) throw DimensionError("polynomial derivative: direction size mismatch");
    Polynomial r(vars_);
    for (const auto& [alpha, c] : coeffs_)
        for (int j = 0; j < vars_; ++j) {
            if (alpha[j] == 0) continue;
            Key k = alpha;
            k[j] -= 1;
            r.add(k, c * static_cast<double>(alpha[j]) * w[j]);
        }
    return r;
}

Polynomial Polynomial::compose_linear(const Eigen::MatrixXd& M) const {
    if (M.rows() != vars_) throw DimensionError("compose_linear: row count mismatch");
    const int nv = static_cast<int>(M.cols());
    Polynomial r(nv);
    for (const auto& [alpha, c] : coeffs_) {
        Polynomial mono = Polynomial::constant(nv, c);
        for (int j = 0; j < vars_; ++j) {
            if (alpha[j] == 0) continue;
            Polynomial lin(nv);
            for (int l = 0; l < nv; ++l)
                if (M(j, l) != 0.0) {
                    Key e(nv, 0);
                    e[l] = 1;
                    lin.add(e, M(j, l));
                }
            for (int rep = 0; rep < alpha[j]; ++rep) mono = mono * lin;
        }
        r = r + mono;
    }
    return r;
}

Polynomial Polynomial::scale_vars(double C) const {
    Polynomial r(vars_);
    for (const auto& [alpha, c] : coeffs_) {
        double total = 1.0;
        int deg = 0;
        for (int e : alpha) deg += e;
        for (int rep = 0; rep < deg; ++rep) total *= C;
        r.add(alpha, c * total);
    }
    return r;
}

void Polynomial::prune(double tol) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();)
        if (std::abs(it->second) <= tol)
            it = coeffs_.erase(it);
        else
            ++it;
}

MomentumSymbol::MomentumSymbol(Subspace U, Eigen::VectorXd xi, std::vector<SymbolTerm> terms)
    : U_(std::move(U)), xi_(std::move(xi)), terms_(std::move(terms)) {
    const int n = U_.n, d = U_.dim();
    if (xi_.size() != n) throw DimensionError("momentum symbol: xi size mismatch");
    if (d > 0) {
        Eigen::MatrixXd G = U_.B.transpose() * U_.B - Eigen::MatrixXd::Identity(d, d);
        if (G.lpNorm<Eigen::Infinity>() > 1e-10) throw Error("momentum symbol: basis not orthonormal");
    }
    Eigen::VectorXd in_u = U_.project(xi_);
    double in_norm = in_u.norm(), scale = std::max(1.0, xi_.norm());
    if (in_norm > 1e-9 * scale)
        throw Error("momentum symbol: xi must lie in the orthogonal complement of U");
    // Skip the subtraction at roundoff level so reloading a stored symbol
    // reproduces xi bit for bit.
    if (in_norm > 1e-13 * scale) xi_ -= in_u;
    for (auto& t : terms_) {
        if (t.poly.vars() != d) throw DimensionError("momentum symbol: polynomial variable count");
        if (t.w.size() != d) throw DimensionError("momentum symbol: linear exponent size");
        if (d > 0) {
            if (t.Q.rows() != d || t.Q.cols() != d) throw DimensionError("momentum symbol: Q size");
            Eigen::MatrixXd S = 0.5 * (t.Q + t.Q.transpose());
            if ((t.Q - S).lpNorm<Eigen::Infinity>() > 1e-10 * (1.0 + S.lpNorm<Eigen::Infinity>()))
                throw Error("momentum symbol: Q must be symmetric");
            t.Q = S;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.Q, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < 1e-12)
                throw Error("momentum symbol: Q must be positive definite (min eigenvalue < 1e-12)");
        }
    }
}

MomentumSymbol MomentumSymbol::plane_wave(int n, const Eigen::VectorXd& xi) {
    SymbolTerm t;
    t.coeff = 1.0;
    t.poly = Polynomial::constant(0, 1.0);
    t.Q = Eigen::MatrixXd(0, 0);
    t.w = Eigen::VectorXcd(0);
    return MomentumSymbol(Subspace::zero(n), xi, {t});
}

MomentumSymbol MomentumSymbol::gaussian(Subspace U, Eigen::VectorXd xi, const Eigen::MatrixXd& Q,
                                        const Eigen::VectorXcd& w, cplx coeff) {
    SymbolTerm t;
    t.coeff = coeff;
    t.poly = Polynomial::constant(U.dim(), 1.0);
    t.Q = Q;
    t.w = w;
    return MomentumSymbol(std::move(U), std::move(xi), {t});
}

cplx MomentumSymbol::eval_gauss(const Eigen::VectorXd& u) const {
    cplx s = 0.0;
    for (const auto& t : terms_) {
        cplx expo = -u.dot(t.Q * u);
        for (int j = 0; j < u.size(); ++j) expo += t.w[j] * u[j];
        s += t.coeff * t.poly.eval(u) * std::exp(expo);
    }
    return s;
}

cplx MomentumSymbol::eval(const Eigen::VectorXd& p) const {
    if (p.size() != U_.n) throw DimensionError("momentum symbol eval: p size mismatch");
    Eigen::VectorXd u = U_.coords(p);
    return std::polar(1.0, xi_.dot(p)) * eval_gauss(u);
}

MomentumSymbol MomentumSymbol::multiply(const MomentumSymbol& other) const {
    if (other.U_.n != U_.n) throw DimensionError("momentum symbol multiply: dimension mismatch");
    Subspace U = Subspace::sum(U_, other.U_);
    Eigen::VectorXd xi_sum = xi_ + other.xi_;
    Eigen::VectorXd xi = xi_sum - U.project(xi_sum);
    Eigen::VectorXcd theta = (U.B.transpose() * xi_sum).cast<cplx>() * kI;
    Eigen::MatrixXd M1 = U_.B.transpose() * U.B;
    Eigen::MatrixXd M2 = other.U_.B.transpose() * U.B;
    std::vector<SymbolTerm> terms;
    terms.reserve(terms_.size() * other.terms_.size());
    const int d = U.dim();
    for (const auto& t1 : terms_)
        for (const auto& t2 : other.terms_) {
            SymbolTerm t;
            t.coeff = t1.coeff * t2.coeff;
            t.poly = t1.poly.compose_linear(M1) * t2.poly.compose_linear(M2);
            t.Q = Eigen::MatrixXd::Zero(d, d);
            if (U_.dim() > 0) t.Q += M1.transpose() * t1.Q * M1;
            if (other.U_.dim() > 0) t.Q += M2.transpose() * t2.Q * M2;
            t.w = M1.transpose().cast<cplx>() * t1.w + M2.transpose().cast<cplx>() * t2.w + theta;
            terms.push_back(std::move(t));
        }
    return MomentumSymbol(std::move(U), std::move(xi), std::move(terms));
}

MomentumSymbol MomentumSymbol::conjugate() const {
    std::vector<SymbolTerm> terms = terms_;
    for (auto& t : terms) {
        t.coeff = std::conj(t.coeff);
        t.poly = t.poly.conjugated();
        t.w = t.w.conjugate();
    }
    return MomentumSymbol(U_, -xi_, std::move(terms));
}

MomentumSymbol MomentumSymbol::derivative(const Eigen::VectorXd& v) const {
    if (v.size() != U_.n) throw DimensionError("momentum symbol derivative: direction size");
    const int d = U_.dim();
    Eigen::VectorXd wvec = U_.coords(v);
    const cplx phase_rate = kI * xi_.dot(v);
    std::vector<SymbolTerm> terms = terms_;
    for (auto& t : terms) {
        Polynomial extra(d);
        cplx wdot = 0.0;
        for (int j = 0; j < d; ++j) wdot += t.w[j] * wvec[j];
        if (phase_rate + wdot != cplx(0.0, 0.0)) extra.add(Polynomial::Key(d, 0), phase_rate + wdot);
        if (d > 0) {
            Eigen::VectorXd qw = t.Q * wvec;
            for (int j = 0; j < d; ++j)
                if (qw[j] != 0.0) {
                    Polynomial::Key e(d, 0);
                    e[j] = 1;
                    extra.add(e, cplx(-2.0 * qw[j], 0.0));
                }
        }
        t.poly = t.poly * extra + t.poly.derivative(wvec.cast<cplx>());
    }
    return MomentumSymbol(U_, xi_, std::move(terms));
}

MomentumSymbol MomentumSymbol::scale_momentum(double C) const {
    if (C == 0.0) throw Error("scale_momentum: scale must be nonzero");
    std::vector<SymbolTerm> terms = terms_;
    for (auto& t : terms) {
        t.Q *= C * C;
        t.w *= C;
        t.poly = t.poly.scale_vars(C);
    }
    return MomentumSymbol(U_, C * xi_, std::move(terms));
}

MomentumSymbol MomentumSymbol::scaled(cplx c) const {
    std::vector<SymbolTerm> terms = terms_;
    for (auto& t : terms) t.coeff *= c;
    return MomentumSymbol(U_, xi_, std::move(terms));
}

MomentumSymbol MomentumSymbol::shift_exponent(const Eigen::VectorXcd& delta) const {
    if (delta.size() != U_.dim()) throw DimensionError("shift_exponent: size mismatch");
    std::vector<SymbolTerm> terms = terms_;
    for (auto& t : terms) t.w += delta;
    return MomentumSymbol(U_, xi_, std::move(terms));
}

MomentumSymbol MomentumSymbol::with_xi(const Eigen::VectorXd& xi) const {
    return MomentumSymbol(U_, xi, terms_);
}

cplx eval(const Observable& f, const Eigen::VectorXd& q, const Eigen::VectorXd& p) {
    if (q.size() != f.n || p.size() != f.n) throw DimensionError("observable eval: size mismatch");
    cplx s = 0.0;
    for (const auto& g : f.gens) {
        double kq = 0.0;
        for (int j = 0; j < f.n; ++j) kq += static_cast<double>(g.k[j]) * q[j];
        s += std::polar(1.0, 2.0 * kPi * kq) * g.h.eval(p);
    }
    return s;
}

namespace {

Eigen::VectorXd to_real(const IntVector& k) {
    Eigen::VectorXd v(k.size());
    for (size_t j = 0; j < k.size(); ++j) v[static_cast<int>(j)] = static_cast<double>(k[j]);
    return v;
}

IntVector add_keys(const IntVector& a, const IntVector& b) {
    IntVector r(a.size());
    for (size_t j = 0; j < a.size(); ++j) r[j] = checked_add(a[j], b[j]);
    return r;
}

std::string fp_double(double x) {
    if (x == 0.0) x = 0.0;  // normalize -0
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12e", x);
    return buf;
}

std::string fp_term_key(const SymbolTerm& t) {
    std::string s;
    for (int r = 0; r < t.Q.rows(); ++r)
        for (int c = 0; c < t.Q.cols(); ++c) s += fp_double(t.Q(r, c)) + ",";
    s += "|";
    for (int j = 0; j < t.w.size(); ++j)
        s += fp_double(t.w[j].real()) + "," + fp_double(t.w[j].imag()) + ";";
    return s;
}

std::string fp_symbol_key(const MomentumSymbol& h) {
    std::string s = std::to_string(h.dim()) + ":";
    const Eigen::MatrixXd& B = h.subspace().B;
    for (int r = 0; r < B.rows(); ++r)
        for (int c = 0; c < B.cols(); ++c) s += fp_double(B(r, c)) + ",";
    s += "|";
    for (int j = 0; j < h.xi().size(); ++j) s += fp_double(h.xi()[j]) + ",";
    return s;
}

}  // namespace

Observable multiply(const Observable& a, const Observable& b) {
    if (a.n != b.n) throw DimensionError("observable multiply: dimension mismatch");
    Observable r;
    r.n = a.n;
    for (const auto& ga : a.gens)
        for (const auto& gb : b.gens)
            r.gens.push_back({add_keys(ga.k, gb.k), ga.h.multiply(gb.h)});
    return canonicalize(r);
}

Observable conjugate(const Observable& f) {
    Observable r;
    r.n = f.n;
    for (const auto& g : f.gens) {
        IntVector mk(g.k.size());
        for (size_t j = 0; j < g.k.size(); ++j) mk[j] = checked_neg(g.k[j]);
        r.gens.push_back({std::move(mk), g.h.conjugate()});
    }
    return canonicalize(r);
}

Observable add(const Observable& a, const Observable& b) {
    if (a.n != b.n) throw DimensionError("observable add: dimension mismatch");
    Observable r;
    r.n = a.n;
    r.gens = a.gens;
    r.gens.insert(r.gens.end(), b.gens.begin(), b.gens.end());
    return canonicalize(r);
}

Observable scaled(const Observable& f, cplx c) {
    Observable r;
    r.n = f.n;
    for (const auto& g : f.gens) r.gens.push_back({g.k, g.h.scaled(c)});
    return r;
}

Observable poisson_bracket(const Observable& a, const Observable& b) {
    if (a.n != b.n) throw DimensionError("poisson bracket: dimension mismatch");
    const cplx two_pi_i = 2.0 * kPi * kI;
    Observable r;
    r.n = a.n;
    for (const auto& ga : a.gens)
        for (const auto& gb : b.gens) {
            IntVector k = add_keys(ga.k, gb.k);
            MomentumSymbol t1 = ga.h.derivative(to_real(gb.k)).multiply(gb.h).scaled(two_pi_i);
            MomentumSymbol t2 = ga.h.multiply(gb.h.derivative(to_real(ga.k))).scaled(-two_pi_i);
            r.gens.push_back({k, std::move(t1)});
            r.gens.push_back({std::move(k), std::move(t2)});
        }
    return canonicalize(r);
}

Observable scale_momentum(const Observable& f, double C) {
    Observable r;
    r.n = f.n;
    for (const auto& g : f.gens) r.gens.push_back({g.k, g.h.scale_momentum(C)});
    return r;
}

Observable translate_config(const Observable& f, const Eigen::VectorXd& x) {
    if (x.size() != f.n) throw DimensionError("translate_config: size mismatch");
    Observable r;
    r.n = f.n;
    for (const auto& g : f.gens) {
        double kx = 0.0;
        for (int j = 0; j < f.n; ++j) kx += static_cast<double>(g.k[j]) * x[j];
        r.gens.push_back({g.k, g.h.scaled(std::polar(1.0, -2.0 * kPi * kx))});
    }
    return r;
}

Observable free_flow_pullback(const Observable& f, double t) {
    Observable r;
    r.n = f.n;
    for (const auto& g : f.gens) {
        Eigen::VectorXd kv = to_real(g.k);
        const Subspace& U = g.h.subspace();
        Eigen::VectorXd xi = g.h.xi() + 2.0 * kPi * t * (kv - U.project(kv));
        Eigen::VectorXcd delta = (U.B.transpose() * kv).cast<cplx>() * (kI * 2.0 * kPi * t);
        r.gens.push_back({g.k, g.h.shift_exponent(delta).with_xi(xi)});
    }
    return r;
}

Observable canonicalize(const Observable& f) {
    using GenKey = std::pair<IntVector, std::string>;
    std::map<GenKey, std::map<std::string, SymbolTerm>> merged;
    std::map<GenKey, std::pair<Subspace, Eigen::VectorXd>> shells;
    for (const auto& g : f.gens) {
        GenKey gk{g.k, fp_symbol_key(g.h)};
        shells.emplace(gk, std::make_pair(g.h.subspace(), g.h.xi()));
        auto& bucket = merged[gk];
        for (const auto& t : g.h.terms()) {
            SymbolTerm folded = t;
            folded.poly = t.poly.scaled(t.coeff);
            folded.coeff = 1.0;
            folded.poly.prune(0.0);
            if (folded.poly.empty()) continue;
            std::string tk = fp_term_key(folded);
            auto it = bucket.find(tk);
            if (it == bucket.end())
                bucket.emplace(std::move(tk), std::move(folded));
            else {
                it->second.poly = it->second.poly + folded.poly;
                it->second.poly.prune(0.0);
            }
        }
    }
    Observable r;
    r.n = f.n;
    for (auto& [gk, bucket] : merged) {
        std::vector<SymbolTerm> terms;
        for (auto& [tk, t] : bucket)
            if (!t.poly.empty()) terms.push_back(std::move(t));
        if (terms.empty()) continue;
        const auto& shell = shells.at(gk);
        r.gens.push_back({gk.first, MomentumSymbol(shell.first, shell.second, std::move(terms))});
    }
    return r;
}

namespace {

const unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double abs_eval(const Observable& f, const Eigen::VectorXd& x) {
    const int n = f.n;
    return std::abs(eval(f, x.head(n), x.tail(n)));
}

// Golden-section maximization of |f| along coordinate c over [x_c - h, x_c + h].
void line_polish(const Observable& f, Eigen::VectorXd& x, int c, double h) {
    const double gr = 0.6180339887498949;
    double a = x[c] - h, b = x[c] + h;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    Eigen::VectorXd y = x;
    y[c] = x1;
    double f1 = abs_eval(f, y);
    y[c] = x2;
    double f2 = abs_eval(f, y);
    for (int it = 0; it < 48; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            y[c] = x2;
            f2 = abs_eval(f, y);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            y[c] = x1;
            f1 = abs_eval(f, y);
        }
    }
    double xb = (f1 > f2) ? x1 : x2;
    y[c] = xb;
    if (abs_eval(f, y) >= abs_eval(f, x)) x[c] = xb;
}

}  // namespace

double sup_norm_estimate(const Observable& f, int budget, double box) {
    const int n = f.n;
    if (n > 8) throw DimensionError("sup_norm_estimate: dimension too large");
    if (budget < 1) budget = 1;

    // Analytic candidate momenta: Gaussian peak centers and the origin.
    std::vector<Eigen::VectorXd> special_p;
    special_p.push_back(Eigen::VectorXd::Zero(n));
    for (const auto& g : f.gens)
        for (const auto& t : g.h.terms()) {
            const int d = g.h.dim();
            if (d == 0) continue;
            Eigen::VectorXd rw(d);
            for (int j = 0; j < d; ++j) rw[j] = t.w[j].real();
            Eigen::VectorXd ustar = 0.5 * t.Q.ldlt().solve(rw);
            special_p.push_back(g.h.subspace().B * ustar);
        }

    auto halton_point = [&](std::uint64_t i, int base_offset, int dims) {
        Eigen::VectorXd v(dims);
        for (int j = 0; j < dims; ++j) v[j] = radical_inverse(i + 1, kPrimes[base_offset + j]);
        return v;
    };

    std::vector<Eigen::VectorXd> candidates;
    candidates.reserve(static_cast<size_t>(budget));
    const int per_special = 64;
    for (size_t s = 0; s < special_p.size() && static_cast<int>(candidates.size()) < budget; ++s)
        for (int j = 0; j < per_special && static_cast<int>(candidates.size()) < budget; ++j) {
            Eigen::VectorXd x(2 * n);
            x.head(n) = halton_point(j, 0, n);
            x.tail(n) = special_p[s];
            candidates.push_back(std::move(x));
        }
    for (std::uint64_t i = 0; static_cast<int>(candidates.size()) < budget; ++i) {
        Eigen::VectorXd x(2 * n);
        x.head(n) = halton_point(i, 0, n);
        x.tail(n) = box * (2.0 * halton_point(i, n, n).array() - 1.0).matrix();
        candidates.push_back(std::move(x));
    }

    std::vector<std::pair<double, size_t>> ranked(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) ranked[i] = {abs_eval(f, candidates[i]), i};
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    double best = ranked.empty() ? 0.0 : ranked[0].first;
    const size_t starts = std::min<size_t>(8, ranked.size());
    for (size_t s = 0; s < starts; ++s) {
        Eigen::VectorXd x = candidates[ranked[s].second];
        double hq = 0.25, hp = std::max(box / 4.0, 0.25);
        for (int sweep = 0; sweep < 3; ++sweep) {
            for (int c = 0; c < n; ++c) line_polish(f, x, c, hq);
            for (int c = n; c < 2 * n; ++c) line_polish(f, x, c, hp);
            hq *= 0.25;
            hp *= 0.25;
        }
        best = std::max(best, abs_eval(f, x));
    }
    return best;
}

}  // namespace cylq
