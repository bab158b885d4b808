#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "decal/error.hpp"
#include "decal/io.hpp"
#include "decal/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace decal;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json small_config()
{
    return json::parse(R"({
      "seed": 3,
      "data": {"generator": "linear", "n_fit": 4, "n_train": 120, "n_val": 40, "n_test": 80,
               "beta": [6, -4, 2.5], "noise_std": 1, "targets": "posterior_predictive"},
      "model": {"prior_std": 10, "noise_std": 1, "dim": 3},
      "approx": {"variance_scale": 0.1},
      "representation": {"samples": 200, "quantiles": 10},
      "loss": {"loss": "tilted", "t": 0.9},
      "decision_maker": {"kind": "mlp", "hidden": [8, 8]},
      "prior": {"kind": "bootstrap", "replicates": 3, "lambda": 1},
      "train": {"epochs": 30, "patience": 10},
      "eval": {"out_dir": "unused"}
    })");
}

fs::path temp_dir(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("decal_pipeline_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) { return io::read_text(p); }

int run_cli(const std::string& args, const fs::path& log)
{
    const std::string cmd = std::string(DECAL_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

} // namespace

TEST_CASE("parse_config reads every section")
{
    const auto c = parse_config(small_config());
    CHECK(c.seed == 3);
    CHECK(c.data.n_fit == 4);
    CHECK(c.data.targets == TargetMode::posterior_predictive);
    CHECK(c.model.dim == 3);
    CHECK(c.approx.variance_scale == 0.1);
    CHECK(c.samples == 200);
    CHECK(c.quantiles == 10);
    CHECK(std::get<losses::Tilted>(c.loss).t == 0.9);
    CHECK(c.dm.hidden == std::vector<std::size_t>{8, 8});
    CHECK(c.prior.replicates == 3);
    CHECK(c.train.epochs == 30);
    CHECK(c.eval.out_dir == fs::path("unused"));

    const auto d = parse_config(json::object());
    CHECK(d.samples == 1000);
    CHECK(d.quantiles == 20);
    CHECK(d.prior.replicates == 5);
    CHECK(d.train.learning_rate == 0.01);
}

TEST_CASE("parse_config rejects unknown keys and bad values with the field path")
{
    auto check_path = [](json j, const std::string& path) {
        try {
            parse_config(j);
            FAIL("expected a config error for " << path);
        } catch (const ConfigError& e) {
            CHECK(e.path() == path);
        }
    };
    auto j = small_config();
    j["train"]["lerning_rate"] = 0.1;
    check_path(j, "train.lerning_rate");

    j = small_config();
    j["colour"] = 1;
    check_path(j, "colour");

    j = small_config();
    j["approx"]["blend"] = 2;
    check_path(j, "approx.blend");

    j = small_config();
    j["representation"]["quantiles"] = 0;
    check_path(j, "representation.quantiles");

    j = small_config();
    j["prior"]["lambda"] = -1;
    check_path(j, "prior.lambda");

    j = small_config();
    j["data"]["n_train"] = "many";
    check_path(j, "data.n_train");

    j = small_config();
    j["loss"] = json::parse(R"({"loss": "tilted", "t": 3})");
    check_path(j, "loss");

    j = small_config();
    j["data"]["beta"] = {1, 2};
    check_path(j, "data.beta");

    j = small_config();
    j["data"]["source"] = "ingest";
    check_path(j, "data.samples_path");
}

TEST_CASE("run_experiment produces risk, oracle and decision rows")
{
    const auto c = parse_config(small_config());
    const auto r = run_experiment(c);
    REQUIRE(r.splits.size() == 3);
    for (const auto& s : r.splits) {
        CHECK(s.h_q.size() == s.ids.size());
        CHECK(s.h_dm.size() == s.ids.size());
        CHECK(s.h_p.size() == s.ids.size());
        CHECK(s.summaries.front().size() == 10);
        CHECK(s.has_targets());
    }
    for (Split sp : {Split::train, Split::val, Split::test}) {
        const auto* q = r.find_risk(sp, "q_optimal");
        const auto* dm = r.find_risk(sp, "dm");
        REQUIRE(q);
        REQUIRE(dm);
        REQUIRE(r.find_risk(sp, "p_optimal"));
        REQUIRE(dm->improvement.has_value());
        CHECK(*dm->improvement == doctest::Approx((q->risk - dm->risk) / q->risk));
        REQUIRE(r.find_oracle(sp, "p_optimal"));
        CHECK(r.find_oracle(sp, "p_optimal")->p_risk <= r.find_oracle(sp, "q_optimal")->p_risk);
    }
    CHECK(r.prior.size() == 120);
    CHECK(r.record.size() >= 2);
}

TEST_CASE("run outputs are deterministic and complete")
{
    const auto c = parse_config(small_config());
    const auto a = temp_dir("det_a");
    const auto b = temp_dir("det_b");
    write_run_outputs(run_experiment(c), c, a);
    write_run_outputs(run_experiment(c), c, b);
    for (const char* f : {"decisions.csv", "risk.csv", "oracle.csv", "training.csv", "dm.json", "prior.csv"}) {
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(slurp(a / "decisions.csv").rfind("point_id,split,h_q,h_dm,y\n", 0) == 0);
    CHECK(slurp(a / "risk.csv").rfind("split,method,loss,risk,std_error,improvement\n", 0) == 0);
    CHECK(slurp(a / "training.csv").rfind("epoch,train_risk,val_risk,objective\n", 0) == 0);
    const auto dm = dm_from_json(json::parse(slurp(a / "dm.json")));
    CHECK(parameter_count(dm) > 0);

    auto other = c;
    other.seed = 4;
    const auto o = temp_dir("det_o");
    write_run_outputs(run_experiment(other), other, o);
    CHECK(slurp(a / "decisions.csv") != slurp(o / "decisions.csv"));
    for (const auto& p : {a, b, o}) fs::remove_all(p);
}

TEST_CASE("a dominating simple prior reproduces the q-optimal risk under exact inference")
{
    auto j = small_config();
    j["approx"]["variance_scale"] = 1.0;
    j["prior"] = json::parse(R"({"kind": "simple", "lambda": 1e6})");
    j["train"] = json::parse(R"({"learning_rate": 3e-4, "epochs": 2000, "patience": 2000})");
    const auto r = run_experiment(parse_config(j));
    const double q = r.find_risk(Split::test, "q_optimal")->risk;
    const double dm = r.find_risk(Split::test, "dm")->risk;
    CHECK(std::abs(dm - q) / q < 0.01);
}

TEST_CASE("eval.splits filters reported rows")
{
    auto j = small_config();
    j["eval"]["splits"] = {"test"};
    const auto r = run_experiment(parse_config(j));
    CHECK(r.find_risk(Split::test, "dm"));
    CHECK_FALSE(r.find_risk(Split::train, "dm"));
}

TEST_CASE("ingested samples run end to end")
{
    const auto dir = temp_dir("ingest");
    std::ofstream s(dir / "samples.csv");
    std::ofstream t(dir / "targets.csv");
    s << "point_id,split,s_1,s_2,s_3,s_4,s_5\n";
    t << "point_id,y\n";
    for (int i = 0; i < 60; ++i) {
        const char* split = i < 40 ? "train" : (i < 50 ? "val" : "test");
        const double m = 0.1 * i;
        s << "p" << i << "," << split;
        for (int k = -2; k <= 2; ++k) s << "," << m + 0.5 * k;
        s << "\n";
        if (i < 55) t << "p" << i << "," << m + 0.3 * ((i % 3) - 1) << "\n";
    }
    s.close();
    t.close();
    auto j = small_config();
    j["data"] = {{"source", "ingest"}, {"samples_path", (dir / "samples.csv").string()},
                 {"targets_path", (dir / "targets.csv").string()}};
    j["prior"] = json::parse(R"({"kind": "simple", "lambda": 1})");
    j["representation"]["quantiles"] = 4;
    const auto c = parse_config(j);
    const auto r = run_experiment(c);
    CHECK(r.find_risk(Split::train, "dm"));
    CHECK(r.find_risk(Split::val, "dm"));
    // only some test points have targets
    CHECK_FALSE(r.find_risk(Split::test, "dm"));
    CHECK_FALSE(r.find_risk(Split::train, "p_optimal"));
    CHECK(r.oracle.empty());
    write_run_outputs(r, c, dir / "out");
    CHECK_FALSE(fs::exists(dir / "out" / "oracle.csv"));

    j["prior"]["kind"] = "bootstrap";
    CHECK_THROWS_AS(run_experiment(parse_config(j)), ConfigError);
    CHECK_THROWS_AS(build_bootstrap_prior(parse_config(j)), ConfigError);

    j["data"]["samples_path"] = (dir / "nope.csv").string();
    j["prior"]["kind"] = "none";
    try {
        run_experiment(parse_config(j));
        FAIL("expected a stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "ingest");
    }
    fs::remove_all(dir);
}

TEST_CASE("with_param replaces one field")
{
    const auto c = parse_config(small_config());
    CHECK(with_param(c, SweepParam::lambda, 10).prior.lambda == 10);
    CHECK(with_param(c, SweepParam::quantiles, 5).quantiles == 5);
    CHECK(with_param(c, SweepParam::samples, 50).samples == 50);
    CHECK(with_param(c, SweepParam::blend, 0.5).approx.blend == 0.5);
    CHECK(with_param(c, SweepParam::variance_scale, 0.3).approx.variance_scale == 0.3);
    CHECK_THROWS_AS(with_param(c, SweepParam::quantiles, 2.5), ConfigError);
    CHECK_THROWS_AS(with_param(c, SweepParam::blend, 1.5), ConfigError);
    CHECK(sweep_param_from_string("B") == SweepParam::quantiles);
    CHECK(sweep_param_from_string("gamma") == SweepParam::variance_scale);
    CHECK_THROWS_AS(sweep_param_from_string("depth"), InputError);
}

TEST_CASE("a single-value sweep matches a single run")
{
    const auto c = parse_config(small_config());
    const auto dir = temp_dir("sweep1");
    const auto rows = run_sweep(c, SweepParam::lambda, {1.0}, dir);
    const auto r = run_experiment(c);
    for (const auto& row : rows) {
        CHECK(row.error.empty());
        const auto* match = r.find_risk(split_from_string(row.split), row.method);
        REQUIRE(match);
        CHECK(row.risk == match->risk);
    }
    CHECK(rows.size() == r.risk.size());
    fs::remove_all(dir);
}

TEST_CASE("sweep rows follow value order and record failures")
{
    const auto c = parse_config(small_config());
    const auto dir = temp_dir("sweep2");
    const auto rows = run_sweep(c, SweepParam::quantiles, {5, 0, 2}, dir);
    std::vector<double> order;
    for (const auto& r : rows)
        if (order.empty() || order.back() != r.param_value) order.push_back(r.param_value);
    CHECK(order == std::vector<double>{5, 0, 2});
    int failed = 0;
    for (const auto& r : rows)
        if (r.method == "failed") {
            ++failed;
            CHECK(r.param_value == 0);
            CHECK_FALSE(r.error.empty());
        }
    CHECK(failed == 1);
    const auto csv = sweep_csv(SweepParam::quantiles, rows);
    CHECK(csv.rfind("param_value,split,method,risk,improvement", 0) == 0);
    CHECK(run_sweep(c, SweepParam::quantiles, {5, 0, 2}, dir).size() == rows.size());
    fs::remove_all(dir);
}

TEST_CASE("bootstrap prior file is reusable and deterministic")
{
    const auto c = parse_config(small_config());
    const auto a = build_bootstrap_prior(c);
    const auto b = build_bootstrap_prior(c);
    CHECK(a.mu == b.mu);
    CHECK(a.sigma == b.sigma);
    CHECK(a.size() == 120);

    const auto dir = temp_dir("bootprior");
    write_prior_csv(a, dir / "prior.csv");
    auto j = small_config();
    j["prior"]["path"] = (dir / "prior.csv").string();
    const auto from_file = run_experiment(parse_config(j));
    const auto built = run_experiment(c);
    CHECK(from_file.prior.mu == built.prior.mu);
    CHECK(from_file.find_risk(Split::test, "dm")->risk == built.find_risk(Split::test, "dm")->risk);

    j["prior"]["kind"] = "bootstrap";
    j["prior"]["replicates"] = 1;
    j.erase("eval");
    j["prior"].erase("path");
    for (double s : build_bootstrap_prior(parse_config(j)).sigma) CHECK(s == kSigmaFloor);
    fs::remove_all(dir);
}

TEST_CASE("cli exit codes and outputs")
{
    const auto dir = temp_dir("cli");
    write_json(dir / "ok.json", small_config());
    CHECK(run_cli("run -c " + (dir / "ok.json").string() + " --out " + (dir / "run").string(), dir / "log") == 0);
    CHECK(fs::exists(dir / "run" / "risk.csv"));

    CHECK(run_cli("run -c " + (dir / "ok.json").string() + " --out " + (dir / "run2").string() + " --seed 3",
                  dir / "log") == 0);
    CHECK(slurp(dir / "run" / "decisions.csv") == slurp(dir / "run2" / "decisions.csv"));

    auto bad = small_config();
    bad["train"]["lerning_rate"] = 1;
    write_json(dir / "bad.json", bad);
    CHECK(run_cli("run -c " + (dir / "bad.json").string(), dir / "log") == 2);
    CHECK(slurp(dir / "log").find("train.lerning_rate") != std::string::npos);

    auto missing = small_config();
    missing["data"] = {{"source", "ingest"}, {"samples_path", (dir / "absent.csv").string()},
                       {"targets_path", (dir / "absent_y.csv").string()}};
    missing["prior"]["kind"] = "simple";
    write_json(dir / "missing.json", missing);
    CHECK(run_cli("run -c " + (dir / "missing.json").string() + " --out " + (dir / "m").string(), dir / "log") == 1);
    CHECK(slurp(dir / "log").find("ingest") != std::string::npos);

    CHECK(run_cli("run -c " + (dir / "nothere.json").string(), dir / "log") == 2);

    CHECK(run_cli("sweep -c " + (dir / "ok.json").string() + " --param lambda --values 0.1,10 --out " +
                      (dir / "sw").string(),
                  dir / "log") == 0);
    const auto sweep = slurp(dir / "sw" / "sweep.csv");
    CHECK(sweep.rfind("param_value,split,method,risk,improvement\n", 0) == 0);
    CHECK(sweep.find("\n10,") != std::string::npos);

    CHECK(run_cli("sweep -c " + (dir / "ok.json").string() + " --param depth --values 1 --out " + (dir / "sw2").string(),
                  dir / "log") == 2);

    CHECK(run_cli("bootstrap -c " + (dir / "ok.json").string() + " --out " + (dir / "b1").string(), dir / "log") == 0);
    CHECK(run_cli("bootstrap -c " + (dir / "ok.json").string() + " --out " + (dir / "b2").string(), dir / "log") == 0);
    CHECK(slurp(dir / "b1" / "prior.csv") == slurp(dir / "b2" / "prior.csv"));
    CHECK(run_cli("bootstrap -c " + (dir / "missing.json").string() + " --out " + (dir / "b3").string(), dir / "log") == 2);
    fs::remove_all(dir);
}
