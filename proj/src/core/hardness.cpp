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

#include "crem/hardness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crem/error.hpp"
#include "crem/parallel.hpp"
#include "crem/random.hpp"

namespace crem {
namespace {

constexpr double kLog2 = 0.6931471805599453;

std::vector<double> path_values(const CremRealization& real, const VertexId& v,
                                std::uint64_t* key_out) {
  std::vector<double> x(static_cast<std::size_t>(v.depth()) + 1, 0.0);
  std::uint64_t key = real.root_key();
  for (int i = 0; i < v.depth(); ++i) {
    key = child_key(key, v.bit(i));
    x[static_cast<std::size_t>(i) + 1] = x[static_cast<std::size_t>(i)] + real.increment(key, i + 1);
  }
  if (key_out) *key_out = key;
  return x;
}

}  // namespace

double block_increment_mean(const CovarianceSpec& spec, int K, int k) {
  if (K < 1 || k < 1 || k > K) throw DomainError("block index out of range");
  return (spec.value(static_cast<double>(k) / K) - spec.value(static_cast<double>(k - 1) / K)) / K;
}

double steep_threshold(const CovarianceSpec& spec, int N, int K, double z, int k) {
  return N * std::sqrt(2.0 * kLog2 * (1.0 + z) * block_increment_mean(spec, K, k));
}

SteepCriterion::SteepCriterion(const CovarianceSpec& spec, int N, double z, int K)
    : N_(N), K_(K), z_(z) {
  if (!(z > 0.0)) throw DomainError("steepness needs z > 0");
  if (K < 1 || K > N) throw DomainError("steepness needs 1 <= K <= N");
  boundary_.resize(static_cast<std::size_t>(K) + 1);
  threshold_.assign(static_cast<std::size_t>(K) + 1, 0.0);
  for (int k = 0; k <= K; ++k) {
    boundary_[static_cast<std::size_t>(k)] =
        static_cast<int>((static_cast<long long>(N) * k) / K);
  }
  for (int k = 1; k <= K; ++k) threshold_[static_cast<std::size_t>(k)] = steep_threshold(spec, N, K, z, k);
}

bool has_steep_ancestor(const CremRealization& real, const VertexId& v,
                        const SteepCriterion& criterion) {
  const auto x = path_values(real, v, nullptr);
  return criterion.has_steep_ancestor([&](int d) { return x[static_cast<std::size_t>(d)]; }, v.depth());
}

bool has_steep_ancestor(const DenseTree& tree, const VertexId& v,
                        const SteepCriterion& criterion) {
  const std::uint64_t index = v.index();
  const int depth = v.depth();
  return criterion.has_steep_ancestor(
      [&](int d) { return tree.value(d, index >> (depth - d)); }, depth);
}

ChainSpec chain_of_subtrees(const VertexId& v, int N, int K) {
  if (K < 1 || K > N) throw DomainError("chain needs 1 <= K <= N");
  if (v.depth() > N) throw DomainError("chain anchor lies below the tree");
  ChainSpec chain{v, {}};
  // Number of complete depth-N/K blocks above v.
  const int last = std::min(static_cast<int>((static_cast<long long>(K) * v.depth()) / N), K - 1);
  for (int k = 0; k <= last; ++k) {
    const int top = static_cast<int>((static_cast<long long>(N) * k) / K);
    const int bottom = static_cast<int>((static_cast<long long>(N) * (k + 1)) / K);
    chain.blocks.push_back({v.ancestor(top), bottom - top});
  }
  return chain;
}

double steep_margin(const CovarianceSpec& spec, double beta, double z, int K) {
  double block_sum = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double a = spec.ess_sup(static_cast<double>(k - 1) / K, static_cast<double>(k) / K);
    block_sum += brw_free_energy_limit(beta * std::sqrt(a));
  }
  return free_energy(spec, beta) - (1.0 + z) * block_sum / K;
}

SteepParams select_steep_params(const CovarianceSpec& spec, double beta,
                                const std::vector<double>& z_grid,
                                const std::vector<int>& K_grid) {
  const auto threshold = hardness_threshold(spec);
  if (threshold.is_infinite()) {
    throw DomainError("steep parameters need a finite hardness threshold");
  }
  if (!(beta > threshold.value())) {
    throw DomainError("steep parameters need beta above the hardness threshold");
  }
  for (double z : z_grid) {
    for (int K : K_grid) {
      const double c = steep_margin(spec, beta, z, K);
      if (c > 0.0) return {z, K, c};
    }
  }
  throw SearchExhausted("no certified parameters on the (z, K) grid");
}

double steep_gibbs_mass(const DenseTree& tree, double beta, const SteepCriterion& criterion) {
  if (criterion.N() != tree.depth()) throw DomainError("criterion depth differs from tree");
  const auto gibbs = exact_gibbs(tree, beta);
  const int N = tree.depth();
  double mass = 0.0;
  for (std::size_t i = 0; i < gibbs.size(); ++i) {
    const bool steep = criterion.has_steep_ancestor(
        [&](int d) { return tree.value(d, i >> (N - d)); }, N);
    if (steep) mass += gibbs.probability(i);
  }
  return std::clamp(mass, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Chain scanning

ChainScanner::ChainScanner(const CremRealization& real, const SteepCriterion& criterion)
    : real_(real), criterion_(criterion) {
  if (criterion.N() != real.depth()) throw DomainError("criterion depth differs from realization");
  const int N = real.depth();
  reach_.assign(static_cast<std::size_t>(N) + 1, 0.0);
  const double zmax = normal_bound();
  for (int d = N - 1; d >= 0; --d) {
    reach_[static_cast<std::size_t>(d)] =
        reach_[static_cast<std::size_t>(d) + 1] + zmax * real.increment_std(d + 1);
  }
}

bool ChainScanner::bottom_exceeds(std::uint64_t key, int depth, double partial, int bottom,
                                  double threshold) {
  const std::uint64_t k0 = child_key(key, 0);
  const std::uint64_t k1 = child_key(key, 1);
  double x0 = partial + real_.increment(k0, depth + 1);
  double x1 = partial + real_.increment(k1, depth + 1);
  nodes_visited_ += 2;
  if (depth + 1 == bottom) return x0 > threshold || x1 > threshold;
  const double room =
      (reach_[static_cast<std::size_t>(depth) + 1] - reach_[static_cast<std::size_t>(bottom)]) *
          (1.0 + 1e-12) +
      1e-12;
  std::uint64_t first = k0;
  std::uint64_t second = k1;
  if (x1 > x0) {
    std::swap(x0, x1);
    std::swap(first, second);
  }
  if (x0 + room <= threshold) return false;
  if (bottom_exceeds(first, depth + 1, x0, bottom, threshold)) return true;
  return x1 + room > threshold && bottom_exceeds(second, depth + 1, x1, bottom, threshold);
}

bool ChainScanner::block_has_steep(const VertexId& root) {
  if (auto it = cache_.find(root); it != cache_.end()) return it->second;
  const int D = root.depth();
  int k = -1;
  for (int j = 0; j < criterion_.K(); ++j) {
    if (criterion_.boundary(j) == D) {
      k = j;
      break;
    }
  }
  if (k < 0) throw DomainError("block root is not at a block boundary");
  ++blocks_scanned_;

  std::uint64_t key = 0;
  const auto x = path_values(real_, root, &key);
  auto at = [&](int d) { return x[static_cast<std::size_t>(d)]; };
  bool steep = false;
  for (int j = 1; j <= k && !steep; ++j) {
    steep = at(criterion_.boundary(j)) - at(criterion_.boundary(j - 1)) > criterion_.threshold(j);
  }
  const int bottom = criterion_.boundary(k + 1);
  if (!steep && criterion_.active_blocks(bottom) >= k + 1) {
    const double room = (reach_[static_cast<std::size_t>(D)] -
                         reach_[static_cast<std::size_t>(bottom)]) * (1.0 + 1e-12) + 1e-12;
    steep = room > criterion_.threshold(k + 1) &&
            bottom_exceeds(key, D, 0.0, bottom, criterion_.threshold(k + 1));
  }
  cache_.emplace(root, steep);
  return steep;
}

bool ChainScanner::chain_has_steep(const ChainSpec& chain) {
  for (const auto& block : chain.blocks) {
    if (block_has_steep(block.root)) return true;
  }
  return false;
}

bool ChainScanner::chain_has_steep(const VertexId& v) {
  return chain_has_steep(chain_of_subtrees(v, criterion_.N(), criterion_.K()));
}

// ---------------------------------------------------------------------------
// Instrumentation

InstrumentedRun run_instrumented(QueryAlgorithm& algorithm, const CremRealization& real,
                                 const SteepCriterion& criterion, RandomStream& rng,
                                 std::uint64_t budget, bool stop_at_tau_prime) {
  if (budget < 1) throw DomainError("query budget must be at least 1");
  ChainScanner scanner(real, criterion);
  InstrumentedRun run;
  QueryHistory history;
  algorithm.reset();
  history.emplace_back(VertexId::root(), 0.0);
  if (scanner.chain_has_steep(VertexId::root())) {
    run.tau_prime = 0;
    if (stop_at_tau_prime) return run;
  }
  for (std::uint64_t n = 1; n <= budget; ++n) {
    auto step = algorithm.next(history, rng);
    if (step.vertex.depth() > real.depth()) {
      throw DomainError("algorithm queried a vertex outside the tree");
    }
    history.emplace_back(step.vertex, real.field_value(step.vertex));
    run.queries = n;
    if (!run.tau_prime && scanner.chain_has_steep(step.vertex)) {
      run.tau_prime = n;
      if (stop_at_tau_prime && !step.terminal) return run;
    }
    if (step.terminal) {
      if (step.vertex.depth() != real.depth()) {
        throw DomainError("algorithm declared a non-leaf output");
      }
      run.tau = n;
      run.output = step.vertex;
      return run;
    }
  }
  run.censored = true;
  return run;
}

QueryAlgorithm::Step UniformLeafAlgorithm::next(const QueryHistory& history, RandomStream& rng) {
  VertexId v;
  std::uint64_t word = 0;
  for (int i = 0; i < N_; ++i) {
    if ((i & 63) == 0) word = rng();
    v = v.child(static_cast<unsigned>((word >> (i & 63)) & 1U));
  }
  return {std::move(v), output_first_ && history.size() == 1};
}

void SamplerAlgorithm::reset() {
  current_ = VertexId::root();
  current_value_ = 0.0;
  pending_.clear();
  pending_pos_ = 0;
  block_start_ = 0;
}

QueryAlgorithm::Step SamplerAlgorithm::next(const QueryHistory& history, RandomStream& rng) {
  if (pending_pos_ < pending_.size()) {
    return {pending_[pending_pos_++], false};
  }
  if (!pending_.empty()) {
    // The block below current_ has been revealed; draw its Gibbs leaf.
    const int leaf_depth = pending_.back().depth();
    std::vector<std::pair<VertexId, double>> leaves;
    for (std::size_t i = block_start_; i < history.size(); ++i) {
      if (history[i].first.depth() == leaf_depth) leaves.push_back(history[i]);
    }
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& [v, x] : leaves) peak = std::max(peak, cfg_.beta * (x - current_value_));
    double total = 0.0;
    for (const auto& [v, x] : leaves) total += std::exp(cfg_.beta * (x - current_value_) - peak);
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = leaves.size() - 1;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      acc += std::exp(cfg_.beta * (leaves[i].second - current_value_) - peak);
      if (target < acc) {
        pick = i;
        break;
      }
    }
    current_ = leaves[pick].first;
    current_value_ = leaves[pick].second;
    pending_.clear();
    pending_pos_ = 0;
  }
  if (current_.depth() == cfg_.N) return {current_, true};

  const int m = std::min(cfg_.M, cfg_.N - current_.depth());
  std::vector<VertexId> frontier{current_};
  for (int level = 0; level < m; ++level) {
    std::vector<VertexId> next_level;
    for (const auto& v : frontier) {
      next_level.push_back(v.child(0));
      next_level.push_back(v.child(1));
    }
    pending_.insert(pending_.end(), next_level.begin(), next_level.end());
    frontier = std::move(next_level);
  }
  block_start_ = history.size();
  pending_pos_ = 1;
  return {pending_[0], false};
}

QueryAlgorithm::Step ScriptedAlgorithm::next(const QueryHistory&, RandomStream&) {
  if (pos_ >= script_.size()) throw DomainError("scripted algorithm ran out of queries");
  const bool terminal = terminal_last_ && pos_ + 1 == script_.size();
  return {script_[pos_++], terminal};
}

SteepRate chain_steep_probability(const CovarianceSpec& spec, double z, int K, int N,
                                  int trials, std::uint64_t seed, std::uint64_t grid_index,
                                  int workers) {
  if (trials < 100) throw DomainError("steep-rate estimate needs at least 100 trials");
  const SteepCriterion criterion(spec, N, z, K);
  for (int k = 0; k < K; ++k) {
    if (criterion.boundary(k + 1) - criterion.boundary(k) > kMaxChainBlockDepth) {
      throw CapacityError("chain blocks deeper than " + std::to_string(kMaxChainBlockDepth) +
                          " levels (N/K too large)");
    }
  }
  VertexId anchor;
  for (int i = 0; i < N; ++i) anchor = anchor.child(0);
  const ChainSpec chain = chain_of_subtrees(anchor, N, K);
  const auto hits = parallel_map(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    const CremRealization real(spec, N, derive_seed(seed, "steep-rate", grid_index, t));
    ChainScanner scanner(real, criterion);
    return scanner.chain_has_steep(chain) ? 1.0 : 0.0;
  });
  SteepRate rate;
  rate.trials = static_cast<std::uint64_t>(trials);
  for (double h : hits) rate.successes += h > 0.0 ? 1 : 0;
  rate.p_hat = static_cast<double>(rate.successes) / static_cast<double>(rate.trials);
  rate.wilson = wilson_interval(rate.successes, rate.trials);
  rate.stats = summarize(hits);
  return rate;
}

}  // namespace crem
