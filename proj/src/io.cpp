#include "cylq/io.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

namespace cylq::io {

namespace {

std::string join_multiindex(const std::vector<int>& alpha) {
    std::string s;
    for (size_t i = 0; i < alpha.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(alpha[i]);
    }
    return s;
}

std::vector<int> split_multiindex(const std::string& key, int vars, const std::string& field) {
    std::vector<int> alpha;
    if (!key.empty()) {
        std::stringstream ss(key);
        std::string part;
        while (std::getline(ss, part, ',')) {
            try {
                size_t pos = 0;
                int v = std::stoi(part, &pos);
                if (pos != part.size()) throw std::invalid_argument(part);
                alpha.push_back(v);
            } catch (const std::exception&) {
                throw SchemaError(field + ": bad multiindex key '" + key + "'");
            }
        }
    }
    if (static_cast<int>(alpha.size()) != vars)
        throw SchemaError(field + ": multiindex '" + key + "' has " +
                          std::to_string(alpha.size()) + " entries, expected " +
                          std::to_string(vars));
    for (int v : alpha)
        if (v < 0) throw SchemaError(field + ": negative exponent in '" + key + "'");
    return alpha;
}

json cplx_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

double require_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw SchemaError(field + ": expected a number");
    return j.get<double>();
}

cplx cplx_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2)
        throw SchemaError(field + ": expected [re, im]");
    return {require_number(j[0], field), require_number(j[1], field)};
}

const json& require_field(const json& j, const std::string& key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(ctx + ": missing field '" + key + "'");
    return *it;
}

int require_int(const json& j, const std::string& field) {
    if (!j.is_number_integer()) throw SchemaError(field + ": expected an integer");
    return j.get<int>();
}

Eigen::VectorXd vecd_from_json(const json& j, int size, const std::string& field) {
    if (!j.is_array() || static_cast<int>(j.size()) != size)
        throw SchemaError(field + ": expected an array of " + std::to_string(size) + " numbers");
    Eigen::VectorXd v(size);
    for (int i = 0; i < size; ++i) v[i] = require_number(j[i], field);
    return v;
}

}  // namespace

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(origin + ": " + e.what());
    }
}

json load_json_file(const std::string& path) {
    return parse_json_text(read_file(path), path);
}

json to_json(const Observable& f) {
    json gens = json::array();
    for (const Generator& g : f.gens) {
        json jg;
        json k = json::array();
        for (Int ki : g.k) k.push_back(ki);
        jg["k"] = std::move(k);
        const Eigen::MatrixXd& B = g.h.subspace().B;
        json basis = json::array();
        for (int c = 0; c < B.cols(); ++c) {
            json col = json::array();
            for (int r = 0; r < B.rows(); ++r) col.push_back(B(r, c));
            basis.push_back(std::move(col));
        }
        jg["U_basis"] = std::move(basis);
        json xi = json::array();
        for (int i = 0; i < g.h.xi().size(); ++i) xi.push_back(g.h.xi()[i]);
        jg["xi"] = std::move(xi);
        json terms = json::array();
        for (const SymbolTerm& t : g.h.terms()) {
            json jt;
            jt["coeff_re"] = t.coeff.real();
            jt["coeff_im"] = t.coeff.imag();
            json poly;
            for (const auto& [alpha, c] : t.poly.coeffs()) poly[join_multiindex(alpha)] = cplx_to_json(c);
            jt["poly"] = std::move(poly);
            json Q = json::array();
            for (int r = 0; r < t.Q.rows(); ++r) {
                json row = json::array();
                for (int c = 0; c < t.Q.cols(); ++c) row.push_back(t.Q(r, c));
                Q.push_back(std::move(row));
            }
            jt["Q"] = std::move(Q);
            json b = json::array();
            for (int i = 0; i < t.w.size(); ++i) b.push_back(cplx_to_json(t.w[i]));
            jt["b"] = std::move(b);
            terms.push_back(std::move(jt));
        }
        jg["terms"] = std::move(terms);
        gens.push_back(std::move(jg));
    }
    json j;
    j["n"] = f.n;
    j["generators"] = std::move(gens);
    return j;
}

Observable observable_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("observable: expected an object");
    int n = require_int(require_field(j, "n", "observable"), "observable.n");
    if (n < 1) throw SchemaError("observable.n: must be >= 1");
    const json& gens = require_field(j, "generators", "observable");
    if (!gens.is_array()) throw SchemaError("observable.generators: expected an array");
    Observable f;
    f.n = n;
    for (size_t gi = 0; gi < gens.size(); ++gi) {
        std::string ctx = "generators[" + std::to_string(gi) + "]";
        const json& jg = gens[gi];
        if (!jg.is_object()) throw SchemaError(ctx + ": expected an object");
        IntVector k = int_vector_from_json(require_field(jg, "k", ctx), n, ctx + ".k");
        const json& basis = require_field(jg, "U_basis", ctx);
        if (!basis.is_array()) throw SchemaError(ctx + ".U_basis: expected an array");
        int d = static_cast<int>(basis.size());
        Eigen::MatrixXd B(n, d);
        for (int c = 0; c < d; ++c)
            B.col(c) = vecd_from_json(basis[c], n, ctx + ".U_basis[" + std::to_string(c) + "]");
        Eigen::VectorXd xi = vecd_from_json(require_field(jg, "xi", ctx), n, ctx + ".xi");
        const json& terms = require_field(jg, "terms", ctx);
        if (!terms.is_array() || terms.empty())
            throw SchemaError(ctx + ".terms: expected a nonempty array");
        std::vector<SymbolTerm> sym_terms;
        for (size_t ti = 0; ti < terms.size(); ++ti) {
            std::string tctx = ctx + ".terms[" + std::to_string(ti) + "]";
            const json& jt = terms[ti];
            if (!jt.is_object()) throw SchemaError(tctx + ": expected an object");
            SymbolTerm t;
            t.coeff = {require_number(require_field(jt, "coeff_re", tctx), tctx + ".coeff_re"),
                       require_number(require_field(jt, "coeff_im", tctx), tctx + ".coeff_im")};
            const json& jp = require_field(jt, "poly", tctx);
            if (!jp.is_object()) throw SchemaError(tctx + ".poly: expected an object");
            Polynomial poly(d);
            for (auto it = jp.begin(); it != jp.end(); ++it)
                poly.add(split_multiindex(it.key(), d, tctx + ".poly"),
                         cplx_from_json(it.value(), tctx + ".poly"));
            t.poly = std::move(poly);
            const json& jQ = require_field(jt, "Q", tctx);
            if (!jQ.is_array() || static_cast<int>(jQ.size()) != d)
                throw SchemaError(tctx + ".Q: expected " + std::to_string(d) + " rows");
            t.Q.resize(d, d);
            for (int r = 0; r < d; ++r)
                t.Q.row(r) = vecd_from_json(jQ[r], d, tctx + ".Q").transpose();
            const json& jb = require_field(jt, "b", tctx);
            if (!jb.is_array() || static_cast<int>(jb.size()) != d)
                throw SchemaError(tctx + ".b: expected " + std::to_string(d) + " pairs");
            t.w.resize(d);
            for (int i = 0; i < d; ++i) t.w[i] = cplx_from_json(jb[i], tctx + ".b");
            sym_terms.push_back(std::move(t));
        }
        try {
            // The stored basis is used as-is (the constructor checks
            // orthonormality); re-orthonormalizing would perturb bits.
            f.gens.push_back({std::move(k), MomentumSymbol(Subspace{n, B}, xi,
                                                           std::move(sym_terms))});
        } catch (const Error& e) {
            throw SchemaError(ctx + ": " + e.what());
        }
    }
    return f;
}

void save_observable(const std::string& path, const Observable& f) {
    atomic_write_file(path, to_json(f).dump(2) + "\n");
}

Observable load_observable(const std::string& path) {
    return observable_from_json(load_json_file(path));
}

json to_json(const TrigPotential& V) {
    json modes = json::array();
    for (const auto& [k, c] : V.coeffs) {
        json jm;
        json jk = json::array();
        for (Int ki : k) jk.push_back(ki);
        jm["k"] = std::move(jk);
        jm["re"] = c.real();
        jm["im"] = c.imag();
        modes.push_back(std::move(jm));
    }
    json j;
    j["n"] = V.n;
    j["modes"] = std::move(modes);
    return j;
}

TrigPotential potential_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("potential: expected an object");
    int n = require_int(require_field(j, "n", "potential"), "potential.n");
    if (n < 1) throw SchemaError("potential.n: must be >= 1");
    const json& modes = require_field(j, "modes", "potential");
    if (!modes.is_array()) throw SchemaError("potential.modes: expected an array");
    TrigPotential V(n);
    for (size_t i = 0; i < modes.size(); ++i) {
        std::string ctx = "modes[" + std::to_string(i) + "]";
        const json& jm = modes[i];
        if (!jm.is_object()) throw SchemaError(ctx + ": expected an object");
        IntVector k = int_vector_from_json(require_field(jm, "k", ctx), n, ctx + ".k");
        cplx c{require_number(require_field(jm, "re", ctx), ctx + ".re"),
               require_number(require_field(jm, "im", ctx), ctx + ".im")};
        V.coeffs[k] = c;
    }
    try {
        V.normalize_hermitian();
    } catch (const Error& e) {
        throw SchemaError(std::string("potential: ") + e.what());
    }
    return V;
}

void save_potential(const std::string& path, const TrigPotential& V) {
    atomic_write_file(path, to_json(V).dump(2) + "\n");
}

TrigPotential load_potential(const std::string& path) {
    return potential_from_json(load_json_file(path));
}

void save_operator(const std::string& manifest_path, const LatticeOperator& A) {
    A.validate();
    namespace fs = std::filesystem;
    fs::path mp(manifest_path);
    std::string stem = mp.stem().string();
    json terms = json::array();
    for (size_t t = 0; t < A.terms.size(); ++t) {
        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), "_term%03zu.csv", t);
        std::string ref = stem + suffix;
        std::vector<std::string> header;
        for (int j = 0; j < A.window.n; ++j) header.push_back("l_" + std::to_string(j));
        header.push_back("re");
        header.push_back("im");
        CsvTable csv(header);
        for (Int idx = 0; idx < A.window.size(); ++idx) {
            IntVector l = A.window.unflatten(idx);
            std::vector<std::string> row;
            for (Int lj : l) row.push_back(std::to_string(lj));
            row.push_back(format_float(A.terms[t].diag[idx].real()));
            row.push_back(format_float(A.terms[t].diag[idx].imag()));
            csv.add_row(row);
        }
        csv.write((mp.parent_path() / ref).string());
        json jt;
        json jk = json::array();
        for (Int ki : A.terms[t].k) jk.push_back(ki);
        jt["k"] = std::move(jk);
        jt["diag_ref"] = ref;
        terms.push_back(std::move(jt));
    }
    json j;
    j["n"] = A.window.n;
    j["N"] = A.window.N;
    j["terms"] = std::move(terms);
    atomic_write_file(manifest_path, j.dump(2) + "\n");
}

LatticeOperator load_operator(const std::string& manifest_path) {
    json j = load_json_file(manifest_path);
    if (!j.is_object()) throw SchemaError("operator manifest: expected an object");
    int n = require_int(require_field(j, "n", "manifest"), "manifest.n");
    int N = require_int(require_field(j, "N", "manifest"), "manifest.N");
    FourierWindow win(n, N);
    const json& terms = require_field(j, "terms", "manifest");
    if (!terms.is_array()) throw SchemaError("manifest.terms: expected an array");
    namespace fs = std::filesystem;
    fs::path dir = fs::path(manifest_path).parent_path();
    std::vector<LatticeOperator::Term> out;
    for (size_t t = 0; t < terms.size(); ++t) {
        std::string ctx = "terms[" + std::to_string(t) + "]";
        const json& jt = terms[t];
        IntVector k = int_vector_from_json(require_field(jt, "k", ctx), n, ctx + ".k");
        const json& ref = require_field(jt, "diag_ref", ctx);
        if (!ref.is_string()) throw SchemaError(ctx + ".diag_ref: expected a string");
        auto cells = parse_csv(read_file((dir / ref.get<std::string>()).string()));
        if (cells.size() != static_cast<size_t>(win.size()) + 1)
            throw SchemaError(ctx + ": diagonal CSV has " + std::to_string(cells.size()) +
                              " rows, expected " + std::to_string(win.size() + 1));
        std::vector<cplx> diag(win.size());
        for (size_t r = 1; r < cells.size(); ++r) {
            const auto& row = cells[r];
            if (row.size() != static_cast<size_t>(n) + 2)
                throw SchemaError(ctx + ": bad CSV row width");
            IntVector l(n);
            for (int c = 0; c < n; ++c) l[c] = std::stoll(row[c]);
            if (!win.contains(l)) throw SchemaError(ctx + ": index outside window");
            diag[win.flatten(l)] = {std::stod(row[n]), std::stod(row[n + 1])};
        }
        out.push_back({std::move(k), std::move(diag)});
    }
    return make_operator(win, std::move(out));
}

IntVector int_vector_from_json(const json& j, int expected_size, const std::string& field) {
    if (!j.is_array() || static_cast<int>(j.size()) != expected_size)
        throw SchemaError(field + ": expected an array of " + std::to_string(expected_size) +
                          " integers");
    IntVector v(expected_size);
    for (int i = 0; i < expected_size; ++i)
        v[i] = require_int(j[i], field);
    return v;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        if (!line.empty() && line.back() == ',') row.push_back("");
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace cylq::io
