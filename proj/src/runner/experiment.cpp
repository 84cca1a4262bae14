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

#include "crem/runner/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>

#include "crem/brw.hpp"
#include "crem/covariance.hpp"
#include "crem/error.hpp"
#include "crem/field.hpp"
#include "crem/hardness.hpp"
#include "crem/kl.hpp"
#include "crem/parallel.hpp"
#include "crem/random.hpp"
#include "crem/runner/plot.hpp"
#include "crem/sampler.hpp"
#include "crem/stats.hpp"

#ifndef CREM_VERSION
#define CREM_VERSION "0.0.0"
#endif

namespace crem::runner {

using nlohmann::json;

std::string code_version() { return std::string("crem ") + CREM_VERSION; }

namespace {

constexpr double kDecompositionTolerance = 1e-8;

std::string hex64(std::uint64_t x) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out = "0x";
  for (int i = 60; i >= 0; i -= 4) out.push_back(kDigits[(x >> i) & 0xF]);
  return out;
}

double beta_g_value(const CovarianceSpec& spec) {
  const auto bg = hardness_threshold(spec);
  return bg.is_infinite() ? std::numeric_limits<double>::infinity() : bg.value();
}

template <class Fn>
auto at_grid_point(const std::string& point, Fn&& fn) {
  try {
    return fn();
  } catch (const CapacityError& e) {
    throw CapacityError(std::string(e.what()) + " [grid point " + point + "]");
  }
}

int resolve_M(const ExperimentConfig& cfg, std::size_t i, int N) {
  if (!cfg.M.empty()) return cfg.M[i];
  return block_schedule(N, cfg.epsilon[i]);
}

std::size_t M_count(const ExperimentConfig& cfg) {
  return cfg.M.empty() ? cfg.epsilon.size() : cfg.M.size();
}

// ---------------------------------------------------------------------------

void run_thermo(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const auto spec = cfg.covariance();
  const double bg = beta_g_value(spec);
  const auto levels = ground_state_levels(spec);
  rep.table.columns = {"beta", "F", "F_tilde", "G", "G_prime", "beta_G", "x_gse", "x_star"};
  for (double beta : cfg.beta) {
    const double F = free_energy(spec, beta);
    const double alt = free_energy_critical_time_form(spec, beta);
    const auto gap = free_energy_gap(spec, beta);
    if (std::abs(F - alt) > 1e-10) {
      rep.failures.push_back("free energy forms disagree at beta=" + format_number(beta));
    }
    if (gap.value < 0.0) rep.failures.push_back("negative gap at beta=" + format_number(beta));
    rep.table.add_row({beta, F, block_free_energy(spec, beta), gap.value, gap.derivative, bg,
                       levels.x_gse, levels.x_star});
  }
  rep.plot_kind = "thermo";
}

void run_sample(const ExperimentConfig& cfg, ExperimentReport& rep, int workers) {
  const auto spec = cfg.covariance();
  const int N = cfg.N[0];
  const int M = resolve_M(cfg, 0, N);
  const SamplerConfig sc{cfg.beta[0], M, N};
  sc.validate();
  const std::uint64_t seed = *cfg.seed;
  const CremRealization real(spec, N, derive_seed(seed, "sample", 0, 0));
  const std::uint64_t budget = query_budget(N, M);
  const auto traces = parallel_map(static_cast<std::size_t>(cfg.reps), workers, [&](std::size_t r) {
    RandomStream rng(derive_seed(seed, "sample-rng", 0, r));
    return sample_path(real, sc, rng);
  });
  rep.table.columns = {"rep", "N", "M", "beta", "leaf", "leaf_value", "vertex_queries",
                       "leaf_evaluations", "query_budget"};
  for (std::size_t r = 0; r < traces.size(); ++r) {
    const auto& t = traces[r];
    if (t.leaf_evaluations > budget) {
      rep.failures.push_back("rep " + std::to_string(r) + " exceeded the query budget");
    }
    rep.table.add_row({static_cast<std::int64_t>(r), static_cast<std::int64_t>(N),
                       static_cast<std::int64_t>(M), cfg.beta[0], t.leaf.to_hex(), t.leaf_value,
                       t.vertex_queries, t.leaf_evaluations, budget});
  }
}

void check_decomposition(const KlReport& r, const std::string& where, ExperimentReport& rep) {
  const double err = std::abs(r.kl_direct - r.kl_decomposed);
  if (err > kDecompositionTolerance * std::max(1.0, std::abs(r.kl_direct))) {
    rep.failures.push_back("KL decomposition mismatch " + format_number(err) + " at " + where);
  }
}

void run_kl(const ExperimentConfig& cfg, ExperimentReport& rep, int workers) {
  const auto spec = cfg.covariance();
  const int N = cfg.N[0];
  const int M = resolve_M(cfg, 0, N);
  const double beta = cfg.beta[0];
  const std::string point = "N=" + std::to_string(N) + " M=" + std::to_string(M) +
                            " beta=" + format_number(beta);
  const auto ekl = at_grid_point(point, [&] {
    return expected_kl(spec, beta, M, N, cfg.reals, *cfg.seed, 0, workers, cfg.dense_cap);
  });
  rep.table.columns = {"realization", "N", "M", "beta", "kl_direct", "kl_decomposed",
                       "kl_per_n", "log_z_full", "sum_block_log_z", "alternative"};
  for (std::size_t r = 0; r < ekl.reports.size(); ++r) {
    const auto& k = ekl.reports[r];
    check_decomposition(k, point + " realization " + std::to_string(r), rep);
    rep.table.add_row({static_cast<std::int64_t>(r), static_cast<std::int64_t>(N),
                       static_cast<std::int64_t>(M), beta, k.kl_direct, k.kl_decomposed,
                       k.normalized, k.log_z_full, k.sum_block_log_z,
                       k.log_z_full - k.sum_level_mean_log_z});
  }
  if (!ekl.estimators_agree) {
    rep.warnings.push_back("alternative KL estimator differs by more than 3 se at " + point);
  }
}

void run_kl_sweep(const ExperimentConfig& cfg, ExperimentReport& rep, int workers) {
  const auto spec = cfg.covariance();
  const double bg = beta_g_value(spec);
  rep.table.columns = {"N", "M", "beta", "reals", "mean_kl_per_n", "stderr_kl_per_n",
                       "sd_kl_per_n", "alt_kl_per_n", "gap", "beta_G", "estimators_agree",
                       "max_decomposition_error"};
  for (std::size_t i = 0; i < cfg.N.size(); ++i) {
    const int N = cfg.N[i];
    for (std::size_t j = 0; j < M_count(cfg); ++j) {
      const int M = resolve_M(cfg, j, N);
      for (double beta : cfg.beta) {
        const std::string point = "N=" + std::to_string(N) + " M=" + std::to_string(M) +
                                  " beta=" + format_number(beta);
        const auto ekl = at_grid_point(point, [&] {
          return expected_kl(spec, beta, M, N, cfg.reals, *cfg.seed, i, workers, cfg.dense_cap);
        });
        double max_err = 0.0;
        for (const auto& k : ekl.reports) {
          max_err = std::max(max_err, std::abs(k.kl_direct - k.kl_decomposed));
          check_decomposition(k, point, rep);
        }
        if (!ekl.estimators_agree) {
          rep.warnings.push_back("alternative KL estimator differs by more than 3 se at " + point);
        }
        rep.table.add_row({static_cast<std::int64_t>(N), static_cast<std::int64_t>(M), beta,
                           static_cast<std::int64_t>(cfg.reals), ekl.kl.mean / N,
                           ekl.kl.std_error / N, ekl.kl.sample_sd / N, ekl.alternative.mean / N,
                           free_energy_gap(spec, beta).value, bg, ekl.estimators_agree, max_err});
      }
    }
  }
  rep.plot_kind = cfg.beta.size() > 1 ? "kl-vs-beta" : "deviation-vs-M";
}

void run_hardness(const ExperimentConfig& cfg, ExperimentReport& rep, int workers) {
  const auto spec = cfg.covariance();
  const int N = cfg.N[0];
  const double beta = cfg.beta[0];
  SteepParams params;
  if (cfg.K.empty() || cfg.z.empty()) {
    const auto chosen = select_steep_params(
        spec, beta, cfg.z.empty() ? kDefaultZGrid : std::vector<double>{cfg.z[0]},
        cfg.K.empty() ? kDefaultKGrid : std::vector<int>{cfg.K[0]});
    params = chosen;
  } else {
    params = {cfg.z[0], cfg.K[0], steep_margin(spec, beta, cfg.z[0], cfg.K[0])};
  }
  if (params.K > N) {
    throw ValidationError("grid.K", "K=" + std::to_string(params.K) + " exceeds N=" + std::to_string(N));
  }
  const SteepCriterion criterion(spec, N, params.z, params.K);
  const int M = !cfg.M.empty() ? cfg.M[0] : block_schedule(N, cfg.epsilon.empty() ? 1.0 : cfg.epsilon[0]);
  const bool dense = N <= cfg.dense_cap;
  const std::uint64_t seed = *cfg.seed;

  struct Row {
    InstrumentedRun run;
    bool output_steep = false;
    double steep_mass = std::numeric_limits<double>::quiet_NaN();
  };
  const std::string point = "N=" + std::to_string(N) + " M=" + std::to_string(M) +
                            " beta=" + format_number(beta);
  const auto rows = at_grid_point(point, [&] {
    return parallel_map(static_cast<std::size_t>(cfg.trials), workers, [&](std::size_t t) {
      const CremRealization real(spec, N, derive_seed(seed, "hardness", 0, t));
      RandomStream rng(derive_seed(seed, "hardness-rng", 0, t));
      Row row;
      if (cfg.algorithm == "uniform") {
        // Pure search: fresh leaves until a steep chain appears or the budget runs out.
        UniformLeafAlgorithm alg(N, false);
        row.run = run_instrumented(alg, real, criterion, rng, cfg.budget, true);
      } else {
        SamplerAlgorithm alg(SamplerConfig{beta, M, N});
        row.run = run_instrumented(alg, real, criterion, rng, cfg.budget);
      }
      if (row.run.output) row.output_steep = has_steep_ancestor(real, *row.run.output, criterion);
      if (dense) {
        row.steep_mass = steep_gibbs_mass(DenseTree::materialize(real, cfg.dense_cap), beta, criterion);
      }
      return row;
    });
  });

  rep.table.columns = {"trial", "N", "M", "beta", "K", "z", "margin", "tau", "tau_prime",
                       "queries", "censored", "output_steep", "steep_mass"};
  std::size_t censored = 0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto& r = rows[t];
    censored += r.run.censored ? 1 : 0;
    if (r.run.tau && r.run.tau_prime && *r.run.tau_prime > *r.run.tau) {
      rep.failures.push_back("tau_prime after tau in trial " + std::to_string(t));
    }
    rep.table.add_row({static_cast<std::int64_t>(t), static_cast<std::int64_t>(N),
                       static_cast<std::int64_t>(M), beta, static_cast<std::int64_t>(params.K),
                       params.z, params.margin,
                       r.run.tau ? Cell{*r.run.tau} : Cell{},
                       r.run.tau_prime ? Cell{*r.run.tau_prime} : Cell{}, r.run.queries,
                       r.run.censored, r.output_steep,
                       dense ? Cell{r.steep_mass} : Cell{}});
  }
  if (!cfg.record.empty()) {
    // Empirical survival P(tau' > n). A run without tau' is known to survive
    // up to its last query.
    nlohmann::json survival = nlohmann::json::array();
    for (std::uint64_t n : cfg.record) {
      std::size_t alive = 0;
      for (const auto& r : rows) {
        if (r.run.tau_prime ? *r.run.tau_prime > n : n <= r.run.queries) ++alive;
      }
      survival.push_back({{"n", n}, {"survival", static_cast<double>(alive) / rows.size()}});
    }
    rep.manifest["survival"] = survival;
  }
  if (censored > 0) {
    rep.warnings.push_back(std::to_string(censored) + " of " + std::to_string(rows.size()) +
                           " runs censored at the query budget " + std::to_string(cfg.budget));
  }
  rep.plot_kind = "tau-prime-survival";
}

void run_steep_rate(const ExperimentConfig& cfg, ExperimentReport& rep, int workers) {
  const auto spec = cfg.covariance();
  const int K = cfg.K[0];
  const double z = cfg.z[0];
  rep.table.columns = {"N", "K", "z", "trials", "successes", "p_hat", "wilson_lo", "wilson_hi",
                       "wilson_center", "rate_bound"};
  std::vector<double> xs, ys;
  const double rate = z * std::log(2.0) / K;
  for (std::size_t i = 0; i < cfg.N.size(); ++i) {
    const int N = cfg.N[i];
    const auto r = at_grid_point("N=" + std::to_string(N), [&] {
      return chain_steep_probability(spec, z, K, N, cfg.trials, *cfg.seed, i, workers);
    });
    const double center = 0.5 * (r.wilson.lo + r.wilson.hi);
    rep.table.add_row({static_cast<std::int64_t>(N), static_cast<std::int64_t>(K), z,
                       r.trials, r.successes, r.p_hat, r.wilson.lo, r.wilson.hi, center,
                       std::exp(-rate * N)});
    xs.push_back(N);
    ys.push_back(std::log(center));
  }
  if (xs.size() >= 2) {
    const auto fit = least_squares(xs, ys);
    rep.manifest["fit"] = {{"log_wilson_center_slope", fit.slope},
                           {"rate_reference", -rate}};
  }
  rep.plot_kind = "steep-rate";
}

void run_brw(const ExperimentConfig& cfg, ExperimentReport& rep, int workers) {
  rep.table.columns = {"M", "beta", "f_hat", "std_error", "f_limit", "g_hat", "exact",
                       "below_limit"};
  for (int M : cfg.M) {
    const auto grid = at_grid_point("M=" + std::to_string(M), [&] {
      return brw_free_energy_grid(M, cfg.beta, cfg.trials, *cfg.seed, workers);
    });
    for (const auto& e : grid.estimates) {
      const double f = brw_free_energy_limit(e.beta);
      const bool below = e.f_hat <= f + cfg.sigma * e.std_error + 1e-12;
      if (!below) {
        rep.warnings.push_back("f_hat above the limit by more than " + format_number(cfg.sigma) +
                               " se at M=" + std::to_string(M) + " beta=" + format_number(e.beta));
      }
      if (e.beta == 0.0 && e.f_hat != std::log(2.0)) {
        rep.failures.push_back("f_hat at beta=0 differs from log 2");
      }
      rep.table.add_row({static_cast<std::int64_t>(M), e.beta, e.f_hat, e.std_error, f,
                         g_transform(e.f_hat, e.beta), e.exact, below});
    }
  }
  rep.plot_kind = "brw";
}

std::vector<std::string> seed_tags(const std::string& experiment) {
  if (experiment == "sample") return {"sample", "sample-rng"};
  if (experiment == "kl" || experiment == "kl-sweep") return {"kl"};
  if (experiment == "hardness") return {"hardness", "hardness-rng"};
  if (experiment == "steep-rate") return {"steep-rate"};
  if (experiment == "brw") return {"brw"};
  return {};
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int workers = resolve_workers(cfg.workers);
  ExperimentReport rep;
  rep.experiment = cfg.experiment;
  rep.manifest = json::object();
  const auto start = std::chrono::steady_clock::now();

  const std::string& x = cfg.experiment;
  if (x == "thermo") run_thermo(cfg, rep);
  else if (x == "sample") run_sample(cfg, rep, workers);
  else if (x == "kl") run_kl(cfg, rep, workers);
  else if (x == "kl-sweep") run_kl_sweep(cfg, rep, workers);
  else if (x == "hardness") run_hardness(cfg, rep, workers);
  else if (x == "steep-rate") run_steep_rate(cfg, rep, workers);
  else if (x == "brw") run_brw(cfg, rep, workers);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.header = code_version() + " experiment=" + cfg.experiment + " config_hash=" + cfg.hash() +
               " seed=" + hex64(*cfg.seed);

  json& m = rep.manifest;
  m["manifest_version"] = 1;
  m["code_version"] = code_version();
  m["config"] = cfg.to_json();
  m["config_hash"] = cfg.hash();
  m["seeds"] = {
      {"base", hex64(*cfg.seed)},
      {"tags", seed_tags(cfg.experiment)},
      {"derivation",
       "derive_seed(seed, tag, grid_index, realization) = splitmix64(splitmix64(splitmix64("
       "seed ^ fnv1a64(tag)) + grid_index) + realization)"},
  };
  m["workers"] = workers;
  m["wall_time_seconds"] = {{cfg.experiment, wall}};
  m["rows"] = rep.table.rows.size();
  m["warnings"] = rep.warnings;
  m["failures"] = rep.failures;
  return rep;
}

std::string render_table(const ExperimentReport& report, const std::string& format) {
  if (format == "json") return to_json(report.table, report.header).dump(2) + "\n";
  return to_csv(report.table, report.header);
}

WrittenFiles write_report(const ExperimentReport& report, const ExperimentConfig& cfg,
                          const std::string& command_line) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir.empty() ? "." : cfg.out_dir);
  fs::create_directories(dir);
  const std::string stem = cfg.stem();
  auto write = [](const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << text;
  };

  WrittenFiles files;
  const fs::path table = dir / (stem + (cfg.format == "json" ? ".json" : ".csv"));
  write(table, render_table(report, cfg.format));
  files.table = table.string();

  json manifest = report.manifest;
  if (!command_line.empty()) manifest["command"] = command_line;
  manifest["outputs"] = {{"table", table.filename().string()}};
  if (cfg.plot && !report.plot_kind.empty() && !report.table.empty()) {
    const fs::path svg = dir / (stem + ".svg");
    write(svg, emit_plot(report.table, report.plot_kind));
    files.plot = svg.string();
    manifest["outputs"]["plot"] = svg.filename().string();
  }
  const fs::path mpath = dir / (stem + ".manifest.json");
  write(mpath, manifest.dump(2) + "\n");
  files.manifest = mpath.string();
  return files;
}

}  // namespace crem::runner
