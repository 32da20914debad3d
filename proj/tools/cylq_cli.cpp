#include <CLI11.hpp>
#include <chrono>
#include <iostream>
#include <sstream>

#include "cylq/classical.hpp"
#include "cylq/experiments.hpp"
#include "cylq/io.hpp"
#include "cylq/quantizer.hpp"
#include "cylq/quantum.hpp"

using namespace cylq;

namespace {

std::vector<IntVector> parse_vector_list(const std::string& text) {
    std::vector<IntVector> out;
    std::stringstream byvec(text);
    std::string vec;
    while (std::getline(byvec, vec, ';')) {
        IntVector v;
        std::stringstream byentry(vec);
        std::string entry;
        while (std::getline(byentry, entry, ',')) {
            size_t pos = 0;
            long long x = std::stoll(entry, &pos);
            if (pos != entry.size()) throw SchemaError("vectors: bad integer '" + entry + "'");
            v.push_back(x);
        }
        if (v.empty()) throw SchemaError("vectors: empty vector");
        out.push_back(std::move(v));
    }
    if (out.empty()) throw SchemaError("vectors: empty list");
    return out;
}

void emit(const CsvTable& table, const std::string& out_path) {
    if (out_path.empty()) std::cout << table.to_string();
    else atomic_write_file(out_path, table.to_string());
}

void emit_json(const io::json& j, const std::string& out_path) {
    if (out_path.empty()) std::cout << j.dump(2) << "\n";
    else atomic_write_file(out_path, j.dump(2) + "\n");
}

int cmd_lattice(const std::string& vectors) {
    std::vector<IntVector> vs = parse_vector_list(vectors);
    const int n = (int)vs[0].size();
    for (const IntVector& v : vs)
        if ((int)v.size() != n) throw SchemaError("vectors: mixed lengths");
    io::json out;
    out["input"] = vs;
    const bool prim = is_primitive(vs, n);
    out["primitive"] = prim;
    if (prim) {
        IntMatrix M = extend_to_unimodular(vs, n);
        std::vector<IntVector> basis;
        for (int j = 0; j < n; ++j) basis.push_back(M.col(j));
        out["basis"] = basis;
        out["det"] = M.det();
    } else {
        out["basis"] = io::json::array();
        out["det"] = 0;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_quantize(const std::string& obs_path, double hbar, int window, const std::string& out) {
    Observable f = io::load_observable(obs_path);
    FourierWindow win(f.n, window);
    LatticeOperator A = weyl_quantize(f, PlanckParam(hbar), win);
    io::save_operator(out, A);
    std::cout << "wrote " << out << " (" << A.terms.size() << " terms, window " << window
              << ")\n";
    return 0;
}

struct CheckArgs {
    std::string observable, observable2, out;
    std::vector<double> hbars{0.5};
    std::vector<double> hbars2;
    std::vector<int> windows;
    int window = 8;
    std::vector<double> x;
    std::vector<long long> a{2}, b{0};
    int m = 1;
    double tol = 1e-8;
    double hbar0 = 0.5;
    int budget = 2000;
    std::uint64_t seed = 1;
};

int cmd_check(const std::string& which, const CheckArgs& c) {
    CsvTable t({"hbar", "value", "N", "method"});
    auto push = [&](const DefectReport& r) {
        t.add_row({t.cell(r.hbar), t.cell(r.value), t.cell((long long)r.N), r.norm_method});
    };
    auto window_for = [&](size_t i) {
        if (i < c.windows.size()) return c.windows[i];
        return c.window;
    };
    auto need_observable = [&]() {
        if (c.observable.empty()) throw SchemaError("check " + which + ": --observable required");
        return io::load_observable(c.observable);
    };
    if (which == "star") {
        Observable f = need_observable();
        for (size_t i = 0; i < c.hbars.size(); ++i)
            push(check_star(f, PlanckParam(c.hbars[i]), FourierWindow(f.n, window_for(i))));
    } else if (which == "equivariance") {
        Observable f = need_observable();
        Rng rng(c.seed);
        Eigen::VectorXd x(f.n);
        if (!c.x.empty()) {
            if ((int)c.x.size() != f.n) throw SchemaError("check equivariance: --x length != n");
            for (int j = 0; j < f.n; ++j) x[j] = c.x[j];
        } else {
            for (int j = 0; j < f.n; ++j) x[j] = uniform(rng, 0.0, 1.0);
        }
        for (size_t i = 0; i < c.hbars.size(); ++i)
            push(check_equivariance(f, x, PlanckParam(c.hbars[i]),
                                    FourierWindow(f.n, window_for(i))));
    } else if (which == "rescale") {
        Observable f = need_observable();
        for (size_t i = 0; i < c.hbars.size(); ++i) {
            const double h2 = i < c.hbars2.size() ? c.hbars2[i] : 0.5 * c.hbars[i];
            push(check_planck_rescale(f, PlanckParam(c.hbars[i]), PlanckParam(h2),
                                      FourierWindow(f.n, window_for(i))));
        }
    } else if (which == "tensor") {
        Observable f = need_observable();
        for (size_t i = 0; i < c.hbars.size(); ++i)
            push(tensor_embed_check(f, c.m, PlanckParam(c.hbars[i]), window_for(i)));
    } else if (which == "rankone") {
        if (c.a.size() != c.b.size()) throw SchemaError("check rankone: |a| != |b|");
        for (size_t i = 0; i < c.hbars.size(); ++i)
            push(rank_one_approx(c.a, c.b, PlanckParam(c.hbars[i]),
                                 FourierWindow((int)c.a.size(), window_for(i)), c.tol)
                     .second);
    } else if (which == "rieffel") {
        Observable f = need_observable();
        std::vector<RieffelRow> rows = rieffel_curve(f, c.hbars, c.windows, c.budget);
        for (const RieffelRow& r : rows)
            t.add_row({t.cell(r.hbar), t.cell(std::abs(r.qnorm - r.supnorm)),
                       t.cell((long long)r.N), "rieffel_gap"});
    } else if (which == "vonneumann" || which == "dirac") {
        Observable f = need_observable();
        if (c.observable2.empty())
            throw SchemaError("check " + which + ": --observable2 required");
        Observable g = io::load_observable(c.observable2);
        for (size_t i = 0; i < c.hbars.size(); ++i) {
            FourierWindow win(f.n, window_for(i));
            push(which == "vonneumann"
                     ? von_neumann_defect(f, g, PlanckParam(c.hbars[i]), win)
                     : dirac_defect(f, g, PlanckParam(c.hbars[i]), win));
        }
    } else if (which == "strongcont") {
        Observable f = need_observable();
        FourierWindow win(f.n, c.window);
        std::vector<cplx> psi(win.size(), 0.0);
        psi[win.flatten(IntVector(f.n, 0))] = 1.0;
        auto rows = strong_continuity_curve(f, psi, PlanckParam(c.hbar0), c.hbars, win);
        for (const auto& r : rows)
            t.add_row({t.cell(r.hbar), t.cell(r.value), t.cell((long long)c.window),
                       "strongcont"});
    } else {
        throw SchemaError("check: unknown check '" + which + "'");
    }
    emit(t, c.out);
    return 0;
}

int cmd_flow(const std::string& pot_path, const std::vector<double>& q0,
             const std::vector<double>& p0, double t, long long steps, int samples,
             const std::string& out) {
    TrigPotential V = io::load_potential(pot_path);
    if ((int)q0.size() != V.n || (int)p0.size() != V.n)
        throw SchemaError("flow: --q/--p length != potential dimension");
    Eigen::VectorXd q(V.n), p(V.n);
    for (int j = 0; j < V.n; ++j) { q[j] = q0[j]; p[j] = p0[j]; }
    PhasePoint x = make_phase_point(q, p);
    std::vector<std::string> header{"t"};
    for (int j = 0; j < V.n; ++j) header.push_back("q" + std::to_string(j));
    for (int j = 0; j < V.n; ++j) header.push_back("p" + std::to_string(j));
    CsvTable tab(header);
    auto add = [&](double ti, const PhasePoint& y) {
        std::vector<std::string> row{tab.cell(ti)};
        for (int j = 0; j < V.n; ++j) row.push_back(tab.cell(y.q[j]));
        for (int j = 0; j < V.n; ++j) row.push_back(tab.cell(y.p[j]));
        tab.add_row(row);
    };
    add(0.0, x);
    FlowConfig cfg;
    for (int s = 1; s <= samples; ++s) {
        const double ti = t * double(s) / double(samples);
        cfg.steps = std::max(1LL, (long long)(steps * double(s) / double(samples)));
        add(ti, flow(x, V, ti, cfg));
    }
    emit(tab, out);
    return 0;
}

int cmd_moderemoval(const std::string& pot_path, const std::vector<long long>& kin,
                    const std::vector<double>& q0in, int smin, int smax, long long steps_per_s,
                    const std::string& out) {
    TrigPotential V = io::load_potential(pot_path);
    IntVector k(kin.begin(), kin.end());
    if ((int)k.size() != V.n) throw SchemaError("moderemoval: --k length != potential dimension");
    double k2 = 0.0;
    for (Int kj : k) k2 += double(kj) * double(kj);
    if (k2 == 0.0) throw SchemaError("moderemoval: k must be nonzero");
    Eigen::VectorXd q = Eigen::VectorXd::Zero(V.n);
    if (!q0in.empty()) {
        if ((int)q0in.size() != V.n) throw SchemaError("moderemoval: --q0 length != dimension");
        for (int j = 0; j < V.n; ++j) q[j] = q0in[j];
    }
    CsvTable t({"s", "gap", "gap_times_s"});
    for (int s = smin; s <= smax; s *= 2) {
        // p0 = s k / |k|^2 so that k . p0 = s exactly.
        Eigen::VectorXd p(V.n);
        for (int j = 0; j < V.n; ++j) p[j] = double(s) * double(k[j]) / k2;
        FlowConfig cfg;
        cfg.steps = std::max(20000LL, steps_per_s * s);
        const double gap = mode_removal_gap(make_phase_point(q, p), V, k, cfg);
        t.add_row({t.cell((long long)s), t.cell(gap), t.cell(gap * double(s))});
    }
    emit(t, out);
    return 0;
}

int cmd_fejer(int cutoff, double decay, const std::vector<int>& ms, int grid,
              const std::string& out) {
    CoeffRule rule;
    rule.n = 1;
    rule.cutoff = cutoff;
    rule.a = [decay](const IntVector& k) {
        double m = 1.0;
        for (Int kj : k) m *= std::pow(1.0 + std::abs(double(kj)), -decay);
        return cplx(m, 0.0);
    };
    TrigPotential V(1);
    for (Int k = -cutoff; k <= cutoff; ++k) V.coeffs[{k}] = rule.a({k});
    V.normalize_hermitian();
    CsvTable t({"m", "sup_grad_gap"});
    for (int m : ms) {
        TrigPotential Vm = fejer_smooth(rule, m);
        double sup = 0.0;
        for (int i = 0; i < grid; ++i) {
            Eigen::VectorXd q = Eigen::VectorXd::Constant(1, double(i) / grid);
            sup = std::max(sup, std::abs(eval_grad(Vm, q)[0] - eval_grad(V, q)[0]));
        }
        t.add_row({t.cell((long long)m), t.cell(sup)});
    }
    emit(t, out);
    return 0;
}

int cmd_dyson(const std::string& pot_path, double t, double hbar, int window, int order,
              const std::string& out) {
    TrigPotential V = io::load_potential(pot_path);
    if (V.n != 1) throw SchemaError("dyson: potential must be one-dimensional");
    const auto t0 = std::chrono::steady_clock::now();
    FourierWindow win(1, window);
    auto [W, rep] = dyson_partial_sum(V, t, PlanckParam(hbar), win, order);
    Eigen::MatrixXcd D = dense(W) - exact_interaction_propagator(V, t, PlanckParam(hbar), win);
    int kmax = 0;
    for (const auto& [k, a] : V.coeffs) kmax = std::max<int>(kmax, (int)std::abs(k[0]));
    const int margin = std::min(order * std::max(kmax, 1) + 1, window);
    for (Int idx = 0; idx < win.size(); ++idx)
        if (!win.interior(win.unflatten(idx), margin)) D.col(idx).setZero();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D.adjoint() * D, Eigen::EigenvaluesOnly);
    const double residual = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    io::json rj;
    rj["t"] = t;
    rj["hbar"] = hbar;
    rj["window"] = window;
    rj["order"] = order;
    rj["margin"] = margin;
    rj["residual"] = residual;
    rj["remainder"] = rep.remainder;
    rj["quad_error"] = rep.quad_error;
    rj["quad_spec"] = rep.quad_spec;
    rj["seconds"] = secs;
    emit_json(rj, out);
    return 0;
}

int cmd_list() {
    for (const ExperimentInfo& e : experiment_registry())
        std::cout << e.name << "  " << e.description << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weyl quantization on the cylinder: quantize observables, check "
                 "algebraic identities, run dynamics and acceptance experiments"};
    app.require_subcommand(1);
    int rc = 0;

    auto* lat = app.add_subcommand("lattice", "primitivity and basis extension for integer vectors");
    auto lat_vectors = std::make_shared<std::string>();
    lat->add_option("--vectors", *lat_vectors, "semicolon-separated integer vectors, e.g. '2,1;0,1'")
        ->required();
    lat->callback([&rc, lat_vectors] { rc = cmd_lattice(*lat_vectors); });

    auto* qz = app.add_subcommand("quantize", "quantize an observable to a lattice operator");
    auto qz_args = std::make_shared<std::tuple<std::string, double, int, std::string>>();
    qz->add_option("--observable", std::get<0>(*qz_args), "observable JSON path")->required();
    qz->add_option("--hbar", std::get<1>(*qz_args), "Planck parameter")->required();
    qz->add_option("--window", std::get<2>(*qz_args), "Fourier window half-width N")->required();
    qz->add_option("--out", std::get<3>(*qz_args), "operator manifest output path")->required();
    qz->callback([&rc, qz_args] {
        rc = cmd_quantize(std::get<0>(*qz_args), std::get<1>(*qz_args), std::get<2>(*qz_args),
                          std::get<3>(*qz_args));
    });

    auto* ck = app.add_subcommand("check", "quantization identity checks, CSV (hbar,value,N,method)");
    auto ck_args = std::make_shared<CheckArgs>();
    auto ck_which = std::make_shared<std::string>();
    ck->add_option("which", *ck_which,
                   "one of star|equivariance|rescale|tensor|rankone|rieffel|vonneumann|dirac|strongcont")
        ->required();
    ck->add_option("--observable", ck_args->observable, "observable JSON path");
    ck->add_option("--observable2", ck_args->observable2, "second observable JSON path");
    ck->add_option("--hbars", ck_args->hbars, "hbar grid")->delimiter(',');
    ck->add_option("--hbars2", ck_args->hbars2, "second hbar grid (rescale)")->delimiter(',');
    ck->add_option("--window", ck_args->window, "window half-width N");
    ck->add_option("--windows", ck_args->windows, "per-grid-point window overrides")->delimiter(',');
    ck->add_option("--x", ck_args->x, "translation vector (equivariance)")->delimiter(',');
    ck->add_option("--a", ck_args->a, "target index (rankone)")->delimiter(',');
    ck->add_option("--b", ck_args->b, "source index (rankone)")->delimiter(',');
    ck->add_option("--m", ck_args->m, "extra dimensions (tensor)");
    ck->add_option("--tol", ck_args->tol, "construction tolerance (rankone)");
    ck->add_option("--hbar0", ck_args->hbar0, "base hbar (strongcont)");
    ck->add_option("--budget", ck_args->budget, "sup-norm sampling budget (rieffel)");
    ck->add_option("--seed", ck_args->seed, "seed for random translation");
    ck->add_option("--out", ck_args->out, "CSV output path (default stdout)");
    ck->callback([&rc, ck_args, ck_which] { rc = cmd_check(*ck_which, *ck_args); });

    auto* fl = app.add_subcommand("flow", "velocity-Verlet trajectory samples, CSV (t,q,p)");
    struct FlowArgs {
        std::string potential, out;
        std::vector<double> q, p;
        double t = 1.0;
        long long steps = 10000;
        int samples = 10;
    };
    auto fl_args = std::make_shared<FlowArgs>();
    fl->add_option("--potential", fl_args->potential, "potential JSON path")->required();
    fl->add_option("--q", fl_args->q, "initial position")->delimiter(',')->required();
    fl->add_option("--p", fl_args->p, "initial momentum")->delimiter(',')->required();
    fl->add_option("--t", fl_args->t, "final time");
    fl->add_option("--steps", fl_args->steps, "integrator steps to final time");
    fl->add_option("--samples", fl_args->samples, "number of sample rows");
    fl->add_option("--out", fl_args->out, "CSV output path (default stdout)");
    fl->callback([&rc, fl_args] {
        rc = cmd_flow(fl_args->potential, fl_args->q, fl_args->p, fl_args->t, fl_args->steps,
                      fl_args->samples, fl_args->out);
    });

    auto* mr = app.add_subcommand("moderemoval",
                                  "flow gap from removing one mode, CSV (s,gap,gap_times_s)");
    struct MrArgs {
        std::string potential, out;
        std::vector<long long> k{1};
        std::vector<double> q0;
        int smin = 10, smax = 320;
        long long steps_per_s = 1000;
    };
    auto mr_args = std::make_shared<MrArgs>();
    mr->add_option("--potential", mr_args->potential, "potential JSON path")->required();
    mr->add_option("--k", mr_args->k, "mode to remove")->delimiter(',');
    mr->add_option("--q0", mr_args->q0, "initial position (default 0)")->delimiter(',');
    mr->add_option("--smin", mr_args->smin, "smallest momentum scale");
    mr->add_option("--smax", mr_args->smax, "largest momentum scale (doubling)");
    mr->add_option("--steps-per-s", mr_args->steps_per_s, "integrator steps per momentum unit");
    mr->add_option("--out", mr_args->out, "CSV output path (default stdout)");
    mr->callback([&rc, mr_args] {
        rc = cmd_moderemoval(mr_args->potential, mr_args->k, mr_args->q0, mr_args->smin,
                             mr_args->smax, mr_args->steps_per_s, mr_args->out);
    });

    auto* fj = app.add_subcommand("fejer", "smoothed-gradient sup gaps, CSV (m,sup_grad_gap)");
    struct FjArgs {
        std::string out;
        int cutoff = 12, grid = 4096;
        double decay = 4.0;
        std::vector<int> ms{4, 8, 16, 32};
    };
    auto fj_args = std::make_shared<FjArgs>();
    fj->add_option("--cutoff", fj_args->cutoff, "coefficient cutoff |k| <= cutoff");
    fj->add_option("--decay", fj_args->decay, "coefficient decay exponent");
    fj->add_option("--ms", fj_args->ms, "smoothing parameters")->delimiter(',');
    fj->add_option("--grid", fj_args->grid, "sup-norm grid size");
    fj->add_option("--out", fj_args->out, "CSV output path (default stdout)");
    fj->callback([&rc, fj_args] {
        rc = cmd_fejer(fj_args->cutoff, fj_args->decay, fj_args->ms, fj_args->grid, fj_args->out);
    });

    auto* dy = app.add_subcommand("dyson", "Dyson partial sum vs exact propagator, JSON report");
    struct DyArgs {
        std::string potential, out;
        double t = 0.5, hbar = 1.0;
        int window = 24, order = 8;
    };
    auto dy_args = std::make_shared<DyArgs>();
    dy->add_option("--potential", dy_args->potential, "potential JSON path")->required();
    dy->add_option("--t", dy_args->t, "time");
    dy->add_option("--hbar", dy_args->hbar, "Planck parameter");
    dy->add_option("--window", dy_args->window, "Fourier window half-width N");
    dy->add_option("--order", dy_args->order, "Dyson truncation order M");
    dy->add_option("--out", dy_args->out, "report JSON path (default stdout)");
    dy->callback([&rc, dy_args] {
        rc = cmd_dyson(dy_args->potential, dy_args->t, dy_args->hbar, dy_args->window,
                       dy_args->order, dy_args->out);
    });

    auto* rn = app.add_subcommand("run", "run a registered experiment from a JSON config");
    auto rn_config = std::make_shared<std::string>();
    rn->add_option("config", *rn_config, "experiment config JSON path")->required();
    rn->callback([&rc, rn_config] { rc = run_config(*rn_config); });

    auto* ls = app.add_subcommand("list", "list registered experiments");
    ls->callback([&rc] { rc = cmd_list(); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
