#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>

#include "cylq/experiments.hpp"

using namespace cylq;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("cylq_exp_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

io::json quick_config(const std::string& name) {
    io::json cfg;
    cfg["experiment"] = name;
    return cfg;
}

}  // namespace

TEST_CASE("registry lists one stable entry per acceptance check") {
    const auto& reg = experiment_registry();
    CHECK(reg.size() >= 12);
    std::set<std::string> names;
    for (const auto& e : reg) {
        CHECK(!e.name.empty());
        CHECK(!e.description.empty());
        names.insert(e.name);
    }
    CHECK(names.size() == reg.size());
    for (const char* required : {"formula", "integral_oracle", "periodic_norm", "counterexample",
                                 "rieffel", "defect_rates", "structure", "free_covariance",
                                 "dyson", "heisenberg", "classical", "fejer", "lattice"})
        CHECK(names.count(required) == 1);
}

TEST_CASE("configs are validated strictly") {
    CHECK_THROWS_WITH_AS(run_experiment(quick_config("no_such_thing")),
                         doctest::Contains("no_such_thing"), SchemaError);

    io::json cfg = quick_config("formula");
    cfg["unexpected"] = 1;
    CHECK_THROWS_WITH_AS(run_experiment(cfg), doctest::Contains("unexpected"), SchemaError);

    io::json cfg2 = quick_config("formula");
    cfg2["params"]["bogus_param"] = 3;
    CHECK_THROWS_WITH_AS(run_experiment(cfg2), doctest::Contains("bogus_param"), SchemaError);

    io::json cfg3;
    cfg3["seed"] = 1;
    CHECK_THROWS_AS(run_experiment(cfg3), SchemaError);  // experiment name missing
}

TEST_CASE("outcomes carry the summary contract") {
    io::json cfg = quick_config("formula");
    cfg["params"]["count"] = 6;
    ExperimentOutcome out = run_experiment(cfg);
    CHECK(out.experiment == "formula");
    CHECK(out.pass);
    CHECK(out.summary.at("experiment") == "formula");
    CHECK(out.summary.at("pass") == true);
    CHECK(out.summary.contains("worst_value"));
    // Wall time lives on the outcome, never in the serialized summary.
    CHECK(!out.summary.contains("seconds"));
    CHECK(out.seconds >= 0.0);
    CHECK(out.table.rows() > 0);

    // Identical configs give byte-identical tables.
    ExperimentOutcome out2 = run_experiment(cfg);
    CHECK(out.table.to_string() == out2.table.to_string());
    CHECK(out.worst_value == out2.worst_value);
}

TEST_CASE("runner exit codes separate schema errors from numeric failures") {
    TempDir tmp;

    // Pass: a tiny formula run.
    io::json cfg = quick_config("formula");
    cfg["params"]["count"] = 5;
    cfg["out_csv"] = tmp.file("formula.csv");
    cfg["out_json"] = tmp.file("formula.json");
    std::string cfg_path = tmp.file("cfg.json");
    atomic_write_file(cfg_path, cfg.dump(2));
    CHECK(run_config(cfg_path) == 0);
    CHECK(std::filesystem::exists(tmp.file("formula.csv")));
    io::json summary = io::load_json_file(tmp.file("formula.json"));
    CHECK(summary.at("pass") == true);

    // Deterministic reruns produce byte-identical outputs.
    std::string first_csv = read_file(tmp.file("formula.csv"));
    std::string first_json = read_file(tmp.file("formula.json"));
    CHECK(run_config(cfg_path) == 0);
    CHECK(read_file(tmp.file("formula.csv")) == first_csv);
    CHECK(read_file(tmp.file("formula.json")) == first_json);

    // Numeric failure: an impossible tolerance flips the exit code to 1 and
    // still writes both artifacts.
    io::json fail_cfg = quick_config("periodic_norm");
    fail_cfg["params"]["tol"] = 0.0;
    fail_cfg["out_csv"] = tmp.file("pn.csv");
    fail_cfg["out_json"] = tmp.file("pn.json");
    std::string fail_path = tmp.file("fail.json");
    atomic_write_file(fail_path, fail_cfg.dump(2));
    CHECK(run_config(fail_path) == 1);
    io::json fail_summary = io::load_json_file(tmp.file("pn.json"));
    CHECK(fail_summary.at("pass") == false);
    CHECK(fail_summary.at("worst_value").get<double>() > 0.0);

    // Schema violations and unreadable configs are exit 2.
    std::string bad_path = tmp.file("bad.json");
    atomic_write_file(bad_path, "{\"experiment\": \"formula\", \"oops\": 1}");
    CHECK(run_config(bad_path) == 2);
    atomic_write_file(bad_path, "not json at all");
    CHECK(run_config(bad_path) == 2);
    CHECK(run_config(tmp.file("does_not_exist.json")) == 2);
}

TEST_CASE("random inputs are reproducible and well formed") {
    Rng rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 1 + (trial % 3);
        int d = trial % (n + 1);
        Generator g = random_generator(rng, n, d);
        CHECK(int(g.k.size()) == n);
        CHECK(g.h.n() == n);
        CHECK(g.h.dim() == d);
        // xi lies in the orthogonal complement of the subspace.
        CHECK(g.h.subspace().coords(g.h.xi()).norm() < 1e-12);
    }
    Rng a(5), b(5);
    Generator ga = random_generator(a, 2, 1), gb = random_generator(b, 2, 1);
    Eigen::VectorXd p(2);
    p << 0.3, -1.1;
    CHECK(ga.h.eval(p) == gb.h.eval(p));
}
