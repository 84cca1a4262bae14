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

// Acceptance suite: one line per criterion, exit code 0 iff all pass.
// Each criterion builds a results table; the reproducibility criterion
// reruns every table at four workers and compares the CSV bytes.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "crem/brw.hpp"
#include "crem/covariance.hpp"
#include "crem/field.hpp"
#include "crem/hardness.hpp"
#include "crem/kl.hpp"
#include "crem/parallel.hpp"
#include "crem/random.hpp"
#include "crem/runner/config.hpp"
#include "crem/runner/experiment.hpp"
#include "crem/runner/table.hpp"
#include "crem/sampler.hpp"
#include "crem/stats.hpp"

using namespace crem;
using runner::Cell;
using runner::Table;

namespace {

std::uint64_t kSeed = 20260415;

CovarianceSpec s2() { return CovarianceSpec::two_slope(0.5, 1.5, 0.5); }

template <class T>
std::int64_t i64(T x) {
  return static_cast<std::int64_t>(x);
}

struct Outcome {
  bool pass = false;
  std::string detail;
  Table table;
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;  // 0: no runtime bound
  std::function<Outcome(int workers)> run;
};

std::string csv_of(const Criterion& c, const Outcome& o) {
  return runner::to_csv(o.table, fmt::format("acceptance criterion={} seed={}", c.id, kSeed));
}

// ---------------------------------------------------------------------------

Outcome thermodynamics(int) {
  const auto spec = s2();
  Outcome o;
  o.table.columns = {"quantity", "value", "target", "tolerance", "ok"};
  bool all = true;
  auto check = [&](const std::string& name, double value, double target, double tol) {
    const bool ok = std::abs(value - target) <= tol;
    all = all && ok;
    o.table.add_row({name, value, target, tol, ok});
  };
  const auto levels = ground_state_levels(spec);
  check("beta_G", hardness_threshold(spec).value(), 0.9613513, 1e-6);
  check("G(0.9)", free_energy_gap(spec, 0.9).value, 0.0, 1e-9);
  check("G(1.0)", free_energy_gap(spec, 1.0).value, 0.0005598, 1e-6);
  check("F(1.2)", free_energy(spec, 1.2), 1.4128920, 1e-6);
  check("x_gse", levels.x_gse, 1.1774100, 1e-6);
  check("x_star", levels.x_star, 1.1372910, 1e-6);
  o.pass = all;
  o.detail = fmt::format("beta_G={:.9f} G(1)={:.9f} F(1.2)={:.9f} x=({:.9f}, {:.9f})",
                         hardness_threshold(spec).value(), free_energy_gap(spec, 1.0).value,
                         free_energy(spec, 1.2), levels.x_gse, levels.x_star);
  return o;
}

Outcome free_energy_forms(int) {
  const std::vector<std::pair<std::string, CovarianceSpec>> specs{
      {"identity", CovarianceSpec::identity()},
      {"two-slope(0.5,1.5,0.5)", s2()},
      {"two-slope(1.5,0.5,0.5)", CovarianceSpec::two_slope(1.5, 0.5, 0.5)},
      {"three-slope(1.2,0.3,1.5)", CovarianceSpec::three_slope(1.2, 0.3, 1.5)},
      {"four-cell", CovarianceSpec({0, 0.2, 0.4, 0.7, 1}, {0.45, 2.0, 0.5, 1.2})},
  };
  Outcome o;
  o.table.columns = {"spec", "beta", "F_hull", "F_critical_time", "abs_diff"};
  double worst = 0.0;
  for (const auto& [name, spec] : specs) {
    for (int i = 0; i < 20; ++i) {
      const double beta = 0.2 * i;
      const double a = free_energy(spec, beta);
      const double b = free_energy_critical_time_form(spec, beta);
      worst = std::max(worst, std::abs(a - b));
      o.table.add_row({name, beta, a, b, std::abs(a - b)});
    }
  }
  o.pass = worst < 1e-10;
  o.detail = fmt::format("max |difference| = {:.3g} over 5 specs x 20 beta (tol 1e-10)", worst);
  return o;
}

Outcome decomposition_identity(int workers) {
  struct Job {
    std::string spec_name;
    int N;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const char* name : {"identity", "two-slope(0.5,1.5,0.5)"}) {
    for (int N = 1; N <= 10; ++N) {
      for (std::uint64_t s = 0; s < 5; ++s) jobs.push_back({name, N, s});
    }
  }
  using Rows = std::vector<std::vector<Cell>>;
  const auto results = parallel_map(jobs.size(), workers, [&](std::size_t j) {
    const auto& job = jobs[j];
    const CremRealization real(CovarianceSpec::from_name(job.spec_name), job.N,
                               derive_seed(kSeed, "decomposition", static_cast<std::uint64_t>(job.N), job.seed));
    const auto tree = DenseTree::materialize(real);
    Rows rows;
    for (int M = 1; M <= job.N; ++M) {
      for (double beta : {0.5, 1.0, 2.0}) {
        const auto rep = kl_decomposition(tree, {beta, M, job.N});
        const double rel = std::abs(rep.kl_direct - rep.kl_decomposed) / std::max(std::abs(rep.kl_direct), 1e-300);
        rows.push_back({job.spec_name, i64(job.N), i64(M), beta, job.seed, rep.kl_direct,
                        rep.kl_decomposed, rep.kl_direct == 0.0 ? 0.0 : rel});
      }
    }
    return rows;
  });
  Outcome o;
  o.table.columns = {"spec", "N", "M", "beta", "seed", "kl_direct", "kl_decomposed", "relative_error"};
  double worst = 0.0;
  bool all = true;
  for (const auto& rows : results) {
    for (const auto& r : rows) {
      const double direct = std::get<double>(r[5]);
      const double decomposed = std::get<double>(r[6]);
      // Relative error, with an absolute floor where both sides vanish.
      const double err = std::abs(direct - decomposed);
      const bool ok = err < 1e-8 * std::abs(direct) || err < 1e-14;
      all = all && ok;
      if (direct > 0.0) worst = std::max(worst, err / direct);
      o.table.add_row(r);
    }
  }
  o.pass = all;
  o.detail = fmt::format("{} cases, max relative error {:.3g} (tol 1e-8)", o.table.rows.size(), worst);
  return o;
}

Outcome sampler_law(int workers) {
  const int N = 6;
  const double beta = 1.5;
  const int draws = 200000;
  const int chunks = 100;
  const CremRealization real(s2(), N, derive_seed(kSeed, "sampler-law", 0, 0));
  const auto tree = DenseTree::materialize(real);
  Outcome o;
  o.table.columns = {"M", "tv_distance", "envelope", "inside"};
  bool all = true;
  std::string detail;
  for (int M : {1, 2, 3, 6}) {
    const SamplerConfig cfg{beta, M, N};
    const auto law = output_law_exact(tree, cfg);
    const auto partial = parallel_map(chunks, workers, [&](std::size_t c) {
      std::vector<std::uint64_t> counts(64, 0);
      RandomStream rng(derive_seed(kSeed, "sampler-law-draws", static_cast<std::uint64_t>(M), c));
      for (int i = 0; i < draws / chunks; ++i) ++counts[sample_path(real, cfg, rng).leaf.index()];
      return counts;
    });
    std::vector<std::uint64_t> counts(64, 0);
    for (const auto& p : partial) {
      for (std::size_t i = 0; i < 64; ++i) counts[i] += p[i];
    }
    // Envelope: half the sum of 3 multinomial standard deviations per leaf.
    double tv = 0.0, envelope = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
      const double p = law.probability(i);
      tv += 0.5 * std::abs(static_cast<double>(counts[i]) / draws - p);
      envelope += 1.5 * std::sqrt(p * (1 - p) / draws);
    }
    const bool inside = tv <= envelope;
    all = all && inside;
    detail += fmt::format("{}M={}: {:.5f} <= {:.5f}", detail.empty() ? "" : ", ", M, tv, envelope);
    o.table.add_row({i64(M), tv, envelope, inside});
  }
  o.pass = all;
  o.detail = "TV distance vs 3-sigma envelope, 2e5 draws; " + detail;
  return o;
}

Outcome covariance_law(int workers) {
  const int N = 12;
  const int n = 100000;
  const auto spec = s2();
  // Leaf pairs whose common ancestor sits at depth k.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
  std::vector<int> depth;
  auto add = [&](std::uint64_t v, int k) {
    const std::uint64_t w = k == N ? v : v ^ (std::uint64_t{1} << (N - 1 - k));
    pairs.emplace_back(v, w);
    depth.push_back(k);
  };
  for (int k = 0; k <= N; ++k) add(0x5A5 + 37 * static_cast<std::uint64_t>(k), k);
  for (int k : {0, 2, 4, 6, 8, 10, 11}) add(0xC3C ^ (13 * static_cast<std::uint64_t>(k)), k);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    pairs[p].first &= 0xFFF;
    pairs[p].second &= 0xFFF;
    depth[p] = common_ancestor_depth(VertexId::from_index(N, pairs[p].first),
                                     VertexId::from_index(N, pairs[p].second));
  }

  const int chunks = 50;
  const auto values = parallel_map(chunks, workers, [&](std::size_t c) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n / chunks) * pairs.size() * 2);
    for (int i = 0; i < n / chunks; ++i) {
      const std::uint64_t r = c * (n / chunks) + static_cast<std::uint64_t>(i);
      const CremRealization real(spec, N, derive_seed(kSeed, "covariance", 0, r));
      for (const auto& [v, w] : pairs) {
        out.push_back(real.field_value(VertexId::from_index(N, v)));
        out.push_back(real.field_value(VertexId::from_index(N, w)));
      }
    }
    return out;
  });

  Outcome o;
  o.table.columns = {"v", "w", "overlap_depth", "cov_over_N", "target", "std_error", "z_score", "inside"};
  bool all = true;
  double worst = 0.0;
  const std::size_t P = pairs.size();
  for (std::size_t p = 0; p < P; ++p) {
    double sx = 0, sy = 0;
    for (const auto& chunk : values) {
      for (std::size_t i = 0; i < chunk.size(); i += 2 * P) {
        sx += chunk[i + 2 * p];
        sy += chunk[i + 2 * p + 1];
      }
    }
    const double mx = sx / n, my = sy / n;
    double sxy = 0, sq = 0;
    for (const auto& chunk : values) {
      for (std::size_t i = 0; i < chunk.size(); i += 2 * P) {
        const double prod = (chunk[i + 2 * p] - mx) * (chunk[i + 2 * p + 1] - my);
        sxy += prod;
        sq += prod * prod;
      }
    }
    const double cov = sxy / (n - 1);
    const double var_prod = (sq / n - (sxy / n) * (sxy / n));
    const double se = std::sqrt(var_prod / n) / N;
    const double target = spec.value(static_cast<double>(depth[p]) / N);
    const double z = (cov / N - target) / se;
    const bool inside = std::abs(z) <= 3.0;
    all = all && inside;
    worst = std::max(worst, std::abs(z));
    o.table.add_row({pairs[p].first, pairs[p].second, i64(depth[p]), cov / N,
                     target, se, z, inside});
  }
  o.pass = all;
  o.detail = fmt::format("20 pairs, 1e5 realizations, max |z| = {:.3f} (envelope 3 se)", worst);
  return o;
}

Outcome concentration(int workers) {
  const auto rep = concentration_check(CovarianceSpec::identity(), 1.0, 16, {2, 4, 8}, 300,
                                       derive_seed(kSeed, "concentration", 0, 0), workers);
  Outcome o;
  o.table.columns = {"M", "mean_kl_per_n", "deviation_l1", "deviation_l2", "bound_l2", "ratio_to_previous"};
  bool all = !rep.any_violation;
  const double ratio_cap = 1.0 / std::sqrt(2.0) + 0.15;
  std::string ratios;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    all = all && r.deviation_l2 <= 4.0 * 1.0 / std::sqrt(static_cast<double>(r.M));
    Cell ratio{};
    if (i > 0) {
      ratio = rep.ratios[i - 1];
      all = all && rep.ratios[i - 1] <= ratio_cap;
      ratios += fmt::format("{}{:.3f}", ratios.empty() ? "" : ", ", rep.ratios[i - 1]);
    }
    o.table.add_row({i64(r.M), r.mean_kl_per_n, r.deviation_l1,
                     r.deviation_l2, r.bound_l2, ratio});
  }
  o.pass = all;
  o.detail = fmt::format("L2 deviations {:.4f}, {:.4f}, {:.4f} vs bounds 4/sqrt(M); ratios {} (cap {:.4f})",
                         rep.rows[0].deviation_l2, rep.rows[1].deviation_l2, rep.rows[2].deviation_l2,
                         ratios, ratio_cap);
  return o;
}

Outcome efficient_trend(int workers) {
  const std::vector<int> Ns{8, 12, 16, 20};
  Outcome o;
  o.table.columns = {"beta", "N", "M", "mean_kl_per_n", "stderr_kl_per_n", "query_budget", "N_squared"};
  bool all = true;
  std::string detail;
  for (double beta : {1.0, 2.0}) {
    const auto rows = convergence_gap_check(CovarianceSpec::identity(), beta, Ns, 1.0, 200,
                                            derive_seed(kSeed, "efficient", static_cast<std::uint64_t>(beta), 0),
                                            workers);
    detail += fmt::format("{}beta={}:", detail.empty() ? "" : "; ", beta);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      const auto budget = query_budget(r.N, r.M);
      all = all && budget <= static_cast<std::uint64_t>(r.N) * static_cast<std::uint64_t>(r.N);
      if (i > 0) all = all && r.mean_kl_per_n < rows[i - 1].mean_kl_per_n;
      detail += fmt::format(" {:.4f}", r.mean_kl_per_n);
      o.table.add_row({beta, i64(r.N), i64(r.M),
                       r.mean_kl_per_n, r.stderr_kl_per_n, budget,
                       static_cast<std::uint64_t>(r.N) * static_cast<std::uint64_t>(r.N)});
    }
  }
  o.pass = all;
  o.detail = "mean KL/N along N=8,12,16,20 must strictly decrease; " + detail;
  return o;
}

Outcome supercritical_gap(int workers) {
  const auto spec = s2();
  const double beta = 2.0;
  const int N = 20;
  const int M = block_schedule(N, 1.0);
  const auto e = expected_kl(spec, beta, M, N, 200, derive_seed(kSeed, "supercritical", 0, 0), 0, workers);
  const double mean = e.kl.mean / N;
  const double G = free_energy_gap(spec, beta).value;
  Outcome o;
  o.table.columns = {"N", "M", "beta", "mean_kl_per_n", "stderr_kl_per_n", "gap", "lower", "upper"};
  o.table.add_row({i64(N), i64(M), beta, mean, e.kl.std_error / N, G, 0.5 * G, 2 * G});
  o.pass = mean >= 0.5 * G && mean <= 2 * G;
  o.detail = fmt::format("mean KL/N = {:.5f} +- {:.5f}, window [{:.5f}, {:.5f}] from G = {:.7f}", mean,
                         e.kl.std_error / N, 0.5 * G, 2 * G, G);
  return o;
}

Outcome steep_mass(int workers) {
  const auto spec = s2();
  const double beta = 2.0;
  const auto params = select_steep_params(spec, beta);
  Outcome o;
  o.table.columns = {"N", "K", "z", "seeds", "mean_steep_mass", "std_error"};
  std::vector<double> means;
  for (int N : {12, 16, 20}) {
    const SteepCriterion crit(spec, N, params.z, params.K);
    const auto mass = parallel_map(100, workers, [&](std::size_t t) {
      const CremRealization real(spec, N, derive_seed(kSeed, "steep-mass", static_cast<std::uint64_t>(N), t));
      return steep_gibbs_mass(DenseTree::materialize(real), beta, crit);
    });
    const auto s = summarize(mass);
    means.push_back(s.mean);
    o.table.add_row({i64(N), i64(params.K), params.z,
                     i64(100), s.mean, s.std_error});
  }
  o.pass = means[0] < means[1] && means[1] < means[2] && means[2] > 0.5;
  o.detail = fmt::format("(z, K) = ({}, {}); mean mass {:.4f} < {:.4f} < {:.4f}, last > 0.5", params.z, params.K,
                         means[0], means[1], means[2]);
  return o;
}

Outcome steep_rarity(int workers) {
  const double z = 0.2;
  const int K = 4;
  Outcome o;
  o.table.columns = {"N", "trials", "successes", "p_hat", "wilson_lo", "wilson_hi", "wilson_center"};
  std::vector<double> xs, ys;
  std::uint64_t grid = 0;
  for (int N : {40, 60, 80}) {
    const auto r = chain_steep_probability(CovarianceSpec::identity(), z, K, N, 10000,
                                           derive_seed(kSeed, "steep-rarity", 0, 0), grid++, workers);
    const double center = 0.5 * (r.wilson.lo + r.wilson.hi);
    xs.push_back(N);
    ys.push_back(std::log(center));
    o.table.add_row({i64(N), r.trials, r.successes, r.p_hat, r.wilson.lo,
                     r.wilson.hi, center});
  }
  const auto fit = least_squares(xs, ys);
  const double cap = -(z * std::log(2.0)) / K + 0.01;
  o.pass = fit.slope <= cap;
  o.detail = fmt::format("fitted slope of log Wilson center = {:.5f} (must be <= {:.5f}); p = {:.5f}, {:.5f}, {:.5f}",
                         fit.slope, cap, std::get<double>(o.table.rows[0][3]),
                         std::get<double>(o.table.rows[1][3]), std::get<double>(o.table.rows[2][3]));
  return o;
}

Outcome tau_prime_survival(int workers) {
  const auto spec = s2();
  const int N = 80;
  const int K = 4;
  const double z = 0.2;
  const std::uint64_t budget = 50;
  const int runs = 200;
  const std::vector<std::uint64_t> recorded{10, 20, 30, 40, 50};

  const auto companion = chain_steep_probability(spec, z, K, N, 10000,
                                                 derive_seed(kSeed, "survival-companion", 0, 0), 0, workers);
  const double p_hi = companion.wilson.hi;

  const SteepCriterion crit(spec, N, z, K);
  const auto taus = parallel_map(runs, workers, [&](std::size_t t) {
    const CremRealization real(spec, N, derive_seed(kSeed, "survival", 0, t));
    RandomStream rng(derive_seed(kSeed, "survival-rng", 0, t));
    UniformLeafAlgorithm alg(N, false);
    const auto run = run_instrumented(alg, real, crit, rng, budget, true);
    // Runs without tau' survive the whole budget.
    return run.tau_prime ? *run.tau_prime : budget + 1;
  });

  Outcome o;
  o.table.columns = {"n", "survival", "geometric_bound", "p_hi", "dominates"};
  bool all = true;
  std::string detail;
  for (std::uint64_t n : recorded) {
    const auto alive = std::count_if(taus.begin(), taus.end(), [&](std::uint64_t t) { return t > n; });
    const double surv = static_cast<double>(alive) / runs;
    const double bound = std::pow(1.0 - p_hi, static_cast<double>(n));
    const bool ok = surv >= bound;
    all = all && ok;
    detail += fmt::format(" n={}: {:.3f}>={:.3f}", n, surv, bound);
    o.table.add_row({n, surv, bound, p_hi, ok});
  }
  o.pass = all;
  o.detail = fmt::format("p_hi = {:.5f} ({} / 10000);{}", p_hi, companion.successes, detail);
  return o;
}

Outcome brw_suite(int workers) {
  std::vector<double> betas;
  for (int i = 1; i <= 12; ++i) betas.push_back(0.25 * i);
  const auto rep = verify_gM_properties(betas, {4, 8, 12, 16}, 2000, derive_seed(kSeed, "brw-suite", 0, 0), workers);
  Outcome o;
  o.table.columns = {"M", "beta", "f_hat", "std_error", "f_limit", "g_hat", "below_limit"};
  for (const auto& r : rep.rows) {
    o.table.add_row({i64(r.M), r.beta, r.f_hat, r.std_error, r.f_limit, r.g_hat,
                     r.below_limit});
  }
  // Two-dimensional quadrature value of f_1(1) (scipy dblquad).
  const double f1 = brw_exact_depth_one(1.0);
  const double oracle = 0.9026619077200267;
  o.table.add_row({i64(1), 1.0, f1, 0.0, brw_free_energy_limit(1.0), g_transform(f1, 1.0), f1 <= 1.0 + std::log(2.0)});
  const bool f1_ok = std::abs(f1 - oracle) <= 1e-3;
  o.pass = rep.upper_bound_ok && rep.monotone_ok && rep.trend_ok && f1_ok;
  o.detail = fmt::format("upper bound {}, g monotone {}, sup error {:.4f} > {:.4f} > {:.4f} > {:.4f}, f_1(1) = {:.6f}",
                         rep.upper_bound_ok ? "ok" : "FAIL", rep.monotone_ok ? "ok" : "FAIL", rep.sup_error[0],
                         rep.sup_error[1], rep.sup_error[2], rep.sup_error[3], f1);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  bool skip_repro = false;
  std::string out_dir;
  app.add_option("--only", only, "Run only these criteria (1-12)");
  app.add_flag("--skip-reproducibility", skip_repro, "Skip the four-worker rerun");
  app.add_option("--seed", kSeed, "Master seed");
  app.add_option("--out-dir", out_dir, "Write each criterion's table as acNN.csv");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "thermodynamic closed forms", 1, thermodynamics},
      {2, "free-energy formula equivalence", 1, free_energy_forms},
      {3, "KL decomposition identity", 120, decomposition_identity},
      {4, "sampler law oracle", 60, sampler_law},
      {5, "covariance law", 120, covariance_law},
      {6, "concentration bound", 600, concentration},
      {7, "efficient-sampling trend", 900, efficient_trend},
      {8, "supercritical gap", 900, supercritical_gap},
      {9, "steep Gibbs mass", 600, steep_mass},
      {10, "steep-rarity rate", 600, steep_rarity},
      {11, "tau' geometric domination", 600, tau_prime_survival},
      {12, "finite-depth BRW suite", 300, brw_suite},
  };

  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  int failed = 0;
  std::vector<std::pair<const Criterion*, std::string>> csvs;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    std::string error;
    try {
      o = c.run(1);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_seconds <= 0 || secs < c.limit_seconds;
    const bool pass = error.empty() && o.pass && in_time;
    failed += pass ? 0 : 1;
    std::string detail = error.empty() ? o.detail : "error: " + error;
    if (!in_time) detail += fmt::format("; runtime over {} s", c.limit_seconds);
    std::printf("%s AC%-2d %-32s %8.2f s  %s\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(), secs,
                detail.c_str());
    std::fflush(stdout);
    if (error.empty()) {
      csvs.emplace_back(&c, csv_of(c, o));
      if (!out_dir.empty()) {
        std::ofstream(std::filesystem::path(out_dir) / fmt::format("ac{:02d}.csv", c.id)) << csvs.back().second;
      }
    }
  }

  if (!skip_repro) {
    const auto start = std::chrono::steady_clock::now();
    bool same = !csvs.empty();
    std::string differing;
    for (const auto& [c, csv] : csvs) {
      std::string again;
      try {
        again = csv_of(*c, c->run(4));
      } catch (const std::exception& e) {
        again = std::string("error: ") + e.what();
      }
      if (again != csv) {
        same = false;
        differing += fmt::format(" AC{}", c->id);
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += same ? 0 : 1;
    std::printf("%s AC13 %-32s %8.2f s  %s\n", same ? "PASS" : "FAIL", "reproducibility (workers 1 vs 4)", secs,
                same ? fmt::format("{} tables byte-identical", csvs.size()).c_str()
                     : ("differing:" + differing).c_str());
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
