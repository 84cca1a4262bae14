// Copyright 2026 The CREM Sampling Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// crem: experiment driver.
//
//   crem [--config F] [--seed S] [--workers W] [--out-dir D] [--format csv|json]
//        <thermo|sample|kl|kl-sweep|hardness|steep-rate|brw|plot> [options]
//
// Exit codes: 0 success, 1 internal invariant violated, 2 bad configuration,
// 3 capacity exceeded, 4 other errors.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "crem/error.hpp"
#include "crem/runner/config.hpp"
#include "crem/runner/experiment.hpp"
#include "crem/runner/plot.hpp"

namespace {

namespace fs = std::filesystem;
using crem::runner::ExperimentConfig;

struct Options {
  std::string config;
  std::string seed;
  int workers = -1;
  std::string out_dir;
  std::string format;
  bool plot = false;

  std::string spec;
  std::vector<double> beta;
  std::vector<int> N;
  std::vector<std::string> M;
  std::vector<std::string> K;
  std::vector<std::string> z;
  int reals = -1;
  int trials = -1;
  int reps = -1;
  long long budget = -1;
  std::vector<long long> record;
  std::string algorithm;
  std::string out;

  std::string plot_in;
  std::string plot_kind;
  std::string plot_out;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw crem::runner::ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// A profile name, or a file holding [spec] (or top-level) breakpoints and
// slopes or a name.
void apply_spec(const std::string& value, ExperimentConfig& cfg) {
  cfg.spec_name.clear();
  cfg.breakpoints.clear();
  cfg.slopes.clear();
  if (!fs::is_regular_file(value)) {
    cfg.spec_name = value;
    return;
  }
  const std::string text = read_file(value);
  nlohmann::json doc;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    doc = nlohmann::json::parse(text);
  } else {
    doc = crem::runner::parse_toml_subset(text);
  }
  if (doc.contains("spec")) doc = doc["spec"];
  const auto parsed = crem::runner::config_from_json(nlohmann::json{{"spec", doc}});
  cfg.spec_name = parsed.spec_name;
  cfg.breakpoints = parsed.breakpoints;
  cfg.slopes = parsed.slopes;
}

// "auto:EPS" selects the block schedule; integers give M directly.
void apply_M(const std::vector<std::string>& values, ExperimentConfig& cfg) {
  cfg.M.clear();
  cfg.epsilon.clear();
  for (const auto& v : values) {
    if (v.rfind("auto:", 0) == 0) {
      cfg.epsilon.push_back(std::stod(v.substr(5)));
    } else {
      cfg.M.push_back(std::stoi(v));
    }
  }
}

void apply_auto_ints(const std::vector<std::string>& values, std::vector<int>& out) {
  out.clear();
  for (const auto& v : values) {
    if (v != "auto") out.push_back(std::stoi(v));
  }
}

void apply_auto_reals(const std::vector<std::string>& values, std::vector<double>& out) {
  out.clear();
  for (const auto& v : values) {
    if (v != "auto") out.push_back(std::stod(v));
  }
}

ExperimentConfig build_config(const Options& o, const std::string& subcommand) {
  ExperimentConfig cfg;
  if (!o.config.empty()) cfg = crem::runner::parse_config_text(read_file(o.config));
  if (!subcommand.empty()) {
    if (!cfg.experiment.empty() && cfg.experiment != subcommand) {
      throw crem::runner::ValidationError(
          "experiment", "config describes '" + cfg.experiment + "' but the subcommand is '" +
                            subcommand + "'");
    }
    cfg.experiment = subcommand;
  }
  if (!o.seed.empty()) cfg.seed = crem::runner::parse_seed(o.seed);
  if (o.workers >= 0) cfg.workers = o.workers;
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (!o.format.empty()) cfg.format = o.format;
  if (o.plot) cfg.plot = true;
  if (!o.spec.empty()) apply_spec(o.spec, cfg);
  if (!o.beta.empty()) cfg.beta = o.beta;
  if (!o.N.empty()) cfg.N = o.N;
  if (!o.M.empty()) apply_M(o.M, cfg);
  if (!o.K.empty()) apply_auto_ints(o.K, cfg.K);
  if (!o.z.empty()) apply_auto_reals(o.z, cfg.z);
  if (o.reals >= 0) cfg.reals = o.reals;
  if (o.trials >= 0) cfg.trials = o.trials;
  if (o.reps >= 0) cfg.reps = o.reps;
  if (o.budget >= 0) cfg.budget = static_cast<std::uint64_t>(o.budget);
  if (!o.record.empty()) {
    cfg.record.clear();
    for (long long r : o.record) cfg.record.push_back(static_cast<std::uint64_t>(r));
  }
  if (!o.algorithm.empty()) cfg.algorithm = o.algorithm;
  if (!o.out.empty()) {
    const fs::path p(o.out);
    if (p.has_parent_path()) cfg.out_dir = p.parent_path().string();
    cfg.output = p.stem().string();
    if (p.extension() == ".json") cfg.format = "json";
    if (p.extension() == ".csv") cfg.format = "csv";
  }
  cfg.validate();
  return cfg;
}

std::string joined_args(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

int run_plot(const Options& o) {
  const auto table = crem::runner::parse_csv(read_file(o.plot_in));
  const std::string svg = crem::runner::emit_plot(table, o.plot_kind);
  std::ofstream out(o.plot_out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + o.plot_out + "'");
  out << svg;
  std::cerr << "wrote " << o.plot_out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling experiments for the continuous random energy model"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  Options o;
  app.add_option("--config", o.config, "TOML or JSON experiment config (or a manifest)");
  app.add_option("--seed", o.seed, "Base seed, decimal or 0x hex");
  app.add_option("--workers", o.workers, "Worker threads (0: CREM_WORKERS or all cores)");
  app.add_option("--out-dir", o.out_dir, "Output directory");
  app.add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--plot", o.plot, "Also write the default SVG figure");

  auto spec_opt = [&](CLI::App* sub) {
    sub->add_option("--spec", o.spec, "Profile name (identity, two-slope(a1,a2,t), ...) or file");
  };
  auto out_opt = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output table path (.csv or .json)");
  };

  auto* thermo = app.add_subcommand("thermo", "Closed-form free energies and thresholds");
  spec_opt(thermo);
  thermo->add_option("--beta-grid,--beta", o.beta, "Inverse temperatures");
  out_opt(thermo);

  auto* sample = app.add_subcommand("sample", "Draw leaves with the block sampler");
  spec_opt(sample);
  sample->add_option("--N", o.N, "Tree depth");
  sample->add_option("--M", o.M, "Block depth, or auto:EPS");
  sample->add_option("--beta", o.beta, "Inverse temperature");
  sample->add_option("--reps", o.reps, "Number of draws");
  out_opt(sample);

  auto* kl = app.add_subcommand("kl", "KL divergence of the sampler, per realization");
  spec_opt(kl);
  kl->add_option("--beta", o.beta, "Inverse temperature");
  kl->add_option("--N", o.N, "Tree depth");
  kl->add_option("--M", o.M, "Block depth, or auto:EPS");
  kl->add_option("--reals", o.reals, "Disorder realizations");
  out_opt(kl);

  auto* sweep = app.add_subcommand("kl-sweep", "Mean KL/N over a grid");
  spec_opt(sweep);
  sweep->add_option("--beta-grid,--beta", o.beta, "Inverse temperatures");
  sweep->add_option("--N-list,--N", o.N, "Tree depths");
  sweep->add_option("--M-list,--M", o.M, "Block depths, or auto:EPS entries");
  sweep->add_option("--reals", o.reals, "Disorder realizations per grid point");
  out_opt(sweep);

  auto* hard = app.add_subcommand("hardness", "Instrumented query runs with steep-chain detection");
  spec_opt(hard);
  hard->add_option("--beta", o.beta, "Inverse temperature");
  hard->add_option("--N", o.N, "Tree depth");
  hard->add_option("--K", o.K, "Number of chain blocks, or auto");
  hard->add_option("--z", o.z, "Steepness slack, or auto");
  hard->add_option("--M", o.M, "Sampler block depth, or auto:EPS");
  hard->add_option("--trials", o.trials, "Independent realizations");
  hard->add_option("--budget", o.budget, "Query budget per run");
  hard->add_option("--algorithm", o.algorithm, "sampler or uniform")
      ->check(CLI::IsMember({"sampler", "uniform"}));
  out_opt(hard);

  auto* steep = app.add_subcommand("steep-rate", "Probability that a chain holds a steep vertex");
  spec_opt(steep);
  steep->add_option("--z", o.z, "Steepness slack");
  steep->add_option("--K", o.K, "Number of chain blocks");
  steep->add_option("--N-list,--N", o.N, "Tree depths");
  steep->add_option("--trials", o.trials, "Realizations per depth");
  out_opt(steep);

  auto* brw = app.add_subcommand("brw", "Finite-depth branching random walk free energy");
  brw->add_option("--M-list,--M", o.M, "Depths");
  brw->add_option("--beta-grid,--beta", o.beta, "Inverse temperatures");
  brw->add_option("--trials", o.trials, "Realizations per depth");
  out_opt(brw);

  auto* plot = app.add_subcommand("plot", "Render an SVG figure from a CSV report");
  plot->add_option("--in", o.plot_in, "Input CSV")->required();
  plot->add_option("--kind", o.plot_kind, "Figure kind")
      ->required()
      ->check(CLI::IsMember(crem::runner::plot_kinds()));
  plot->add_option("--out", o.plot_out, "Output SVG")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (plot->parsed()) return run_plot(o);
    std::string sub;
    for (auto* s : app.get_subcommands()) sub = s->get_name();
    if (sub.empty() && o.config.empty()) {
      std::cerr << app.help();
      return 2;
    }
    const auto cfg = build_config(o, sub);
    const auto report = crem::runner::run_experiment(cfg);
    const auto files = crem::runner::write_report(report, cfg, joined_args(argc, argv));
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& f : report.failures) std::cerr << "FAILED: " << f << "\n";
    std::cerr << "wrote " << files.table << "\n";
    std::cerr << "wrote " << files.manifest << "\n";
    if (!files.plot.empty()) std::cerr << "wrote " << files.plot << "\n";
    return report.ok() ? 0 : 1;
  } catch (const crem::runner::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const crem::runner::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const crem::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
