#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "slab/errors.hpp"
#include "slab/experiment.hpp"
#include "slab/qnetwork.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Flags {
  std::string config;
  std::string out;
  std::string format;
  std::uint64_t seed = 0;
  int runs = 0;
};

slab::ExperimentConfig load(const Flags& f, CLI::App& sub) {
  slab::ExperimentConfig cfg = slab::load_config(f.config);
  if (sub.count("--seed")) {
    cfg.seed = f.seed;
    cfg.rl.seed = f.seed;
  }
  if (sub.count("--runs")) cfg.runs = f.runs;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (!f.format.empty()) cfg.format = f.format;
  cfg.validate();
  return cfg;
}

void print_optimum(const slab::Outputs& out) {
  for (const auto& [name, table] : out) {
    if (name != "optimum") continue;
    for (const auto& row : table.rows()) {
      std::printf("rho0=%s %s* = %s (%s E[T] = %s)\n", row[0].c_str(), row[1].c_str(),
                  row[3].c_str(), row[2].c_str(), row[4].c_str());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis of straggler mitigation in a master-worker cluster"};
  app.require_subcommand(1);
  Flags flags;

  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "experiment config (JSON)")->required();
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "base seed");
    sub->add_option("--runs", flags.runs, "independent runs")->check(CLI::PositiveNumber);
    sub->add_option("--format", flags.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    return sub;
  };
  CLI::App* analyze = add("analyze", "M/G/c estimates along the d or w grid, both Erlang-C variants");
  CLI::App* simulate = add("simulate", "simulate one policy over several seeded runs");
  CLI::App* optimize = add("optimize", "optimal d or w from the analysis");
  CLI::App* train = add("train", "train the Q-learning scheduler");
  CLI::App* compare = add("compare", "optimized policies side by side over a load grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (analyze->parsed()) {
      const auto cfg = load(flags, *analyze);
      const auto out = slab::cmd_analyze(cfg);
      slab::write_outputs(out, cfg.out_dir, cfg.format);
      print_optimum(out);
    } else if (simulate->parsed()) {
      const auto cfg = load(flags, *simulate);
      const auto out = slab::cmd_simulate(cfg);
      slab::write_outputs(out, cfg.out_dir, cfg.format);
      out.front().second.write_csv(std::cout);
    } else if (optimize->parsed()) {
      const auto cfg = load(flags, *optimize);
      const auto out = slab::cmd_optimize(cfg);
      slab::write_outputs(out, cfg.out_dir, cfg.format);
      print_optimum(out);
    } else if (train->parsed()) {
      const auto cfg = load(flags, *train);
      slab::QNetwork net;
      const auto out = slab::cmd_train(cfg, &net);
      slab::write_outputs(out, cfg.out_dir, cfg.format);
      std::ofstream ck(std::filesystem::path(cfg.out_dir) / "checkpoint.json", std::ios::binary);
      slab::save_checkpoint(ck, net);
    } else if (compare->parsed()) {
      const auto cfg = load(flags, *compare);
      const auto out = slab::cmd_compare(cfg);
      slab::write_outputs(out, cfg.out_dir, cfg.format);
      out.front().second.write_csv(std::cout);
    }
  } catch (const slab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const slab::Error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
