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

// Steep ancestors, chains of subtrees and query-time instrumentation for the
// supercritical regime.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "crem/covariance.hpp"
#include "crem/field.hpp"
#include "crem/sampler.hpp"
#include "crem/stats.hpp"

namespace crem {

struct SteepParams {
  double z = 0.0;
  int K = 1;
  double margin = 0.0;
};

/// (A(k/K) - A((k-1)/K)) / K.
double block_increment_mean(const CovarianceSpec& spec, int K, int k);

/// N sqrt(2 log 2 (1+z) a_k).
double steep_threshold(const CovarianceSpec& spec, int N, int K, double z, int k);

/// Block boundaries floor(Nk/K) and the per-block thresholds for one (N, z, K).
class SteepCriterion {
 public:
  SteepCriterion(const CovarianceSpec& spec, int N, double z, int K);

  int N() const { return N_; }
  int K() const { return K_; }
  double z() const { return z_; }
  /// floor(N k / K) for k in [0, K].
  int boundary(int k) const { return boundary_[static_cast<std::size_t>(k)]; }
  /// Threshold for block k in [1, K].
  double threshold(int k) const { return threshold_[static_cast<std::size_t>(k)]; }
  /// floor(depth K / N): how many blocks a vertex at this depth can test.
  int active_blocks(int depth) const {
    return static_cast<int>((static_cast<long long>(depth) * K_) / N_);
  }

  /// True iff some k <= active_blocks(depth) has
  /// x(floor(Nk/K)) - x(floor(N(k-1)/K)) > threshold(k), where x(d) is the
  /// field value of the vertex's ancestor at depth d.
  template <class AncestorValue>
  bool has_steep_ancestor(AncestorValue&& x, int depth) const {
    const int last = active_blocks(depth);
    for (int k = 1; k <= last; ++k) {
      if (x(boundary(k)) - x(boundary(k - 1)) > threshold(k)) return true;
    }
    return false;
  }

 private:
  int N_;
  int K_;
  double z_;
  std::vector<int> boundary_;
  std::vector<double> threshold_;
};

/// Steepness of v read from a lazy realization (O(|v|) field reads).
bool has_steep_ancestor(const CremRealization& real, const VertexId& v,
                        const SteepCriterion& criterion);
/// Steepness of v read from a dense tree.
bool has_steep_ancestor(const DenseTree& tree, const VertexId& v,
                        const SteepCriterion& criterion);

struct ChainBlock {
  VertexId root;
  int depth;
};

struct ChainSpec {
  VertexId anchor;
  std::vector<ChainBlock> blocks;
};

/// Blocks k = 0 .. min(floor(K|v|/N), K-1), rooted at v[floor(Nk/K)] with
/// depth floor(N(k+1)/K) - floor(Nk/K).
ChainSpec chain_of_subtrees(const VertexId& v, int N, int K);

/// F - (1+z)(1/K) sum_k max over [(k-1)/K, k/K] of f(beta sqrt(a)).
double steep_margin(const CovarianceSpec& spec, double beta, double z, int K);

inline const std::vector<double> kDefaultZGrid{0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005};
inline const std::vector<int> kDefaultKGrid{2, 4, 8, 16, 32, 64, 128, 256};

/// First pair with positive margin, scanning z in the given (descending)
/// order and, for each z, K in ascending order. Throws DomainError when
/// beta does not exceed a finite hardness threshold and SearchExhausted
/// when no pair qualifies.
SteepParams select_steep_params(const CovarianceSpec& spec, double beta,
                                const std::vector<double>& z_grid = kDefaultZGrid,
                                const std::vector<int>& K_grid = kDefaultKGrid);

/// Gibbs mass of the leaves with a steep ancestor, by exact enumeration.
double steep_gibbs_mass(const DenseTree& tree, double beta, const SteepCriterion& criterion);

/// Decides whether a chain of subtrees contains a vertex with a steep
/// ancestor. Results are cached per block root. Bottom-of-block maxima are
/// found by an exact branch-and-bound search using the largest possible
/// Gaussian deviate as the bound.
class ChainScanner {
 public:
  ChainScanner(const CremRealization& real, const SteepCriterion& criterion);

  bool chain_has_steep(const VertexId& v);
  bool chain_has_steep(const ChainSpec& chain);
  /// Whether block k rooted at `root` (depth floor(Nk/K)) contains a vertex
  /// with a steep ancestor.
  bool block_has_steep(const VertexId& root);

  std::uint64_t blocks_scanned() const { return blocks_scanned_; }
  std::uint64_t nodes_visited() const { return nodes_visited_; }

 private:
  bool bottom_exceeds(std::uint64_t key, int depth, double partial, int bottom,
                      double threshold);

  const CremRealization& real_;
  const SteepCriterion& criterion_;
  std::vector<double> reach_;  // reach_[d]: largest possible sum of increments over (d, N]
  std::map<VertexId, bool> cache_;
  std::uint64_t blocks_scanned_ = 0;
  std::uint64_t nodes_visited_ = 0;
};

/// Revealed vertex and its field value.
using QueryHistory = std::vector<std::pair<VertexId, double>>;

/// A query-based search algorithm: each step names the next vertex to
/// query, or declares its output leaf.
class QueryAlgorithm {
 public:
  struct Step {
    VertexId vertex;
    bool terminal = false;
  };
  virtual ~QueryAlgorithm() = default;
  virtual void reset() {}
  virtual Step next(const QueryHistory& history, RandomStream& rng) = 0;
};

struct InstrumentedRun {
  std::optional<std::uint64_t> tau;
  std::optional<std::uint64_t> tau_prime;
  std::optional<VertexId> output;
  std::uint64_t queries = 0;
  bool censored = false;
};

inline constexpr std::uint64_t kDefaultQueryBudget = 10'000'000;

/// Drives `algorithm` against the lazy field. The root is revealed as v(0);
/// after each query v(n) the chain of v(n) is scanned. tau' is the first n
/// whose chain contains a vertex with a steep ancestor, tau the step
/// declaring the output leaf.
/// When `stop_at_tau_prime` is set the run ends as soon as tau' is known.
InstrumentedRun run_instrumented(QueryAlgorithm& algorithm, const CremRealization& real,
                                 const SteepCriterion& criterion, RandomStream& rng,
                                 std::uint64_t budget = kDefaultQueryBudget,
                                 bool stop_at_tau_prime = false);

/// Queries a fresh uniformly random leaf each step; with `output_first`
/// it declares the first leaf as its output.
class UniformLeafAlgorithm : public QueryAlgorithm {
 public:
  UniformLeafAlgorithm(int N, bool output_first) : N_(N), output_first_(output_first) {}
  Step next(const QueryHistory& history, RandomStream& rng) override;

 private:
  int N_;
  bool output_first_;
};

/// The recursive block sampler, one vertex query per step.
class SamplerAlgorithm : public QueryAlgorithm {
 public:
  explicit SamplerAlgorithm(SamplerConfig cfg) : cfg_(cfg) {}
  void reset() override;
  Step next(const QueryHistory& history, RandomStream& rng) override;

 private:
  SamplerConfig cfg_;
  VertexId current_;
  double current_value_ = 0.0;
  std::vector<VertexId> pending_;
  std::size_t pending_pos_ = 0;
  std::size_t block_start_ = 0;  // history index of the current block's first query
};

/// Replays a fixed list of queries; the last one is declared the output
/// when `terminal_last` is set.
class ScriptedAlgorithm : public QueryAlgorithm {
 public:
  ScriptedAlgorithm(std::vector<VertexId> script, bool terminal_last)
      : script_(std::move(script)), terminal_last_(terminal_last) {}
  void reset() override { pos_ = 0; }
  Step next(const QueryHistory& history, RandomStream& rng) override;

 private:
  std::vector<VertexId> script_;
  bool terminal_last_;
  std::size_t pos_ = 0;
};

inline constexpr int kMaxChainBlockDepth = 22;

struct SteepRate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double p_hat = 0.0;
  Interval wilson{0.0, 0.0};
  DisorderStats stats;
};

/// Probability that the chain of the leftmost leaf contains a vertex with a
/// steep ancestor. Trial t uses seed derive_seed(seed, "steep-rate", grid_index, t).
SteepRate chain_steep_probability(const CovarianceSpec& spec, double z, int K, int N,
                                  int trials, std::uint64_t seed,
                                  std::uint64_t grid_index = 0, int workers = 1);

}  // namespace crem
