#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "slab/errors.hpp"
#include "slab/experiment.hpp"
#include "slab/table.hpp"

using namespace slab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(SLAB_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

int run_cli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = std::string("\"") + SLAB_CLI_PATH + "\" " + args + " > \"" +
                          stdout_file.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every regular file under `a` exists under `b` with identical bytes.
bool same_tree(const fs::path& a, const fs::path& b) {
  std::size_t count = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) return false;
    ++count;
  }
  return count > 0;
}

std::string config_error_path(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(R"({"workload":{"rho0":0.6},
    "policy":{"type":"redundant_small","r":2,"d":100},"runs":3,"seed":9})");
  CHECK(cfg.effective_rho0() == doctest::Approx(0.6));
  CHECK(cfg.resolved_workload().lambda == doctest::Approx(1.5621).epsilon(1e-3));
  CHECK(cfg.runs == 3);
  CHECK(cfg.seed == 9);
  REQUIRE(std::holds_alternative<RedundantSmall>(cfg.policy));
  CHECK(std::get<RedundantSmall>(cfg.policy).d == 100.0);

  const auto rel = parse_config(R"({"workload":{"lambda":1.0},
    "policy":{"type":"straggler_relaunch","mode":"per_job","rule":"latency_argmin"}})");
  CHECK(!rel.rho0);
  CHECK(rel.effective_rho0() == doctest::Approx(1.0 / 1.5621 * 0.6).epsilon(1e-3));

  CHECK(config_error_path(R"({"workload":{}})") == "workload");
  CHECK(config_error_path(R"({"workload":{"rho0":0.5,"lambda":1}})") == "workload");
  CHECK(config_error_path(R"({"workload":{"rho0":0.5},"bogus":1})") == "bogus");
  CHECK(config_error_path(R"({"workload":{"rho0":0.5},"analysis":{"d_grid":[]}})") ==
        "analysis.d_grid");
  CHECK(config_error_path(R"({"workload":{"rho0":0.5,"alpha":0.5}})") == "workload.alpha");
  CHECK(config_error_path(R"({"workload":{"rho0":0.5},"policy":{"type":"magic"}})") ==
        "policy.type");
  CHECK(config_error_path(R"({"workload":{"rho0":0.5},
    "policy":{"type":"redundant_small","r":1.0,"d":5}})") == "policy.r");
  CHECK(config_error_path(R"({"workload":{"rho0":0.5},"rl":{"gamma":1.5}})") == "rl.gamma");
  CHECK(config_error_path(R"({"workload":{"rho0":0.5},"runs":0})") == "runs");
  CHECK(config_error_path("{not json") == "<file>");
}

TEST_CASE("table csv round trip") {
  Table t({"policy", "x", "flag"});
  t.add_row({"redundant_small", fmt(0.1 + 0.2), fmt(true)});
  t.add_row({"rl", fmt(std::nan("")), fmt(std::int64_t{-7})});
  t.add_row({"x", fmt(1e-300), fmt(HUGE_VAL)});
  std::stringstream ss;
  t.write_csv(ss);
  CHECK(Table::read_csv(ss) == t);
  CHECK(fmt(1.0 / 3.0) == "0.333333333");
  CHECK_THROWS_AS(t.add_row({"a,b", "1", "0"}), InternalError);
  CHECK_THROWS_AS(t.add_row({"a"}), InternalError);
}

TEST_CASE("student t interval") {
  CHECK(ci95_halfwidth({1, 2, 3, 4, 5}) ==
        doctest::Approx(2.776445105 * std::sqrt(2.5) / std::sqrt(5.0)).epsilon(1e-8));
  CHECK(std::isnan(ci95_halfwidth({4.0})));
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("codes");
  const auto bad = write_file(dir, "bad.json", R"({"workload":{"rho0":0.6},"analysis":{"d_grid":[]}})");
  const auto heavy = write_file(dir, "heavy.json", R"({"workload":{"rho0":0.6,"beta":2}})");
  const auto ok = write_file(dir, "ok.json", R"({"workload":{"rho0":0.9}})");
  CHECK(run_cli("optimize --config \"" + bad.string() + "\"", dir / "o1") == 2);
  CHECK(run_cli("optimize --config \"" + (dir / "missing.json").string() + "\"", dir / "o2") == 2);
  CHECK(run_cli("optimize", dir / "o3") == 2);
  CHECK(run_cli("optimize --config \"" + ok.string() + "\" --format xml", dir / "o4") == 2);
  CHECK(run_cli("optimize --config \"" + heavy.string() + "\" --out \"" + (dir / "h").string() +
                    "\"",
                dir / "o5") == 3);
  CHECK(run_cli("optimize --config \"" + ok.string() + "\" --out \"" + (dir / "ok").string() + "\"",
                dir / "o6") == 0);
  CHECK(slurp(dir / "o6").find("rho0=0.9 d* = 0") != std::string::npos);
  CHECK(fs::exists(dir / "ok" / "curve.csv"));
  CHECK(fs::exists(dir / "ok" / "optimum.csv"));
}

TEST_CASE("cli outputs are byte-identical across invocations") {
  const fs::path dir = scratch("determinism");
  const auto sim = write_file(dir, "sim.json", R"({"workload":{"rho0":0.6},
    "policy":{"type":"redundant_small","r":2,"d":100},"runs":2,
    "sim":{"num_jobs":1500,"write_jobs":true}})");
  const auto rel = write_file(dir, "rel.json", R"({"workload":{"rho0":0.5},
    "policy":{"type":"straggler_relaunch","mode":"fixed","w":3},"sim":{"num_jobs":1500}})");
  const auto ana = write_file(dir, "ana.json", R"({"workload":{"rho0":0.6},
    "analysis":{"model":"relaunch","rho0_grid":[0.4,0.9]}})");
  const auto trn = write_file(dir, "trn.json", R"({"workload":{"rho0":0.4},
    "rl":{"total_episodes":3,"episode_jobs":16,"batch_size":8}})");
  const auto cmp = write_file(dir, "cmp.json", R"({"workload":{"rho0":0.4},"runs":2,
    "sim":{"num_jobs":800},"compare":{"rho0_grid":[0.4,0.9]}})");

  struct Case {
    std::string cmd;
    fs::path cfg;
    std::string extra;
  };
  const Case cases[] = {{"simulate", sim, "--seed 42"},
                        {"simulate", rel, "--runs 1 --format json"},
                        {"analyze", ana, ""},
                        {"optimize", ana, "--format json"},
                        {"train", trn, "--seed 3"},
                        {"compare", cmp, ""}};
  int i = 0;
  for (const auto& c : cases) {
    CAPTURE(c.cmd);
    const fs::path a = dir / ("a" + std::to_string(i));
    const fs::path b = dir / ("b" + std::to_string(i));
    const std::string base = c.cmd + " --config \"" + c.cfg.string() + "\" " + c.extra + " --out ";
    REQUIRE(run_cli(base + "\"" + a.string() + "\"", dir / ("sa" + std::to_string(i))) == 0);
    REQUIRE(run_cli(base + "\"" + b.string() + "\"", dir / ("sb" + std::to_string(i))) == 0);
    CHECK(same_tree(a, b));
    CHECK(same_tree(b, a));
    CHECK(slurp(dir / ("sa" + std::to_string(i))) == slurp(dir / ("sb" + std::to_string(i))));
    ++i;
  }
  CHECK(fs::exists(dir / "a0" / "jobs_run1.csv"));
  CHECK(fs::exists(dir / "a4" / "checkpoint.json"));

  // Every written CSV reads back to the same table.
  for (const auto& e : fs::recursive_directory_iterator(dir / "a0")) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream in(e.path());
    const Table t = Table::read_csv(in);
    std::ostringstream out;
    t.write_csv(out);
    CHECK(out.str() == slurp(e.path()));
  }
}
