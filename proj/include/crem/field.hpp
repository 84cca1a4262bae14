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

// Disorder realizations on the binary tree: lazily evaluated for any depth,
// or fully materialized for exact desk-scale computation.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crem/covariance.hpp"
#include "crem/random.hpp"

namespace crem {

/// A vertex of the binary tree: its depth and the bit path from the root
/// (0 = left child). Paths of any length are supported.
class VertexId {
 public:
  VertexId() = default;
  static VertexId root() { return VertexId(); }
  /// Vertex at `depth` whose path, read as a binary number with the first
  /// step most significant, equals `index`. Requires depth <= 63.
  static VertexId from_index(int depth, std::uint64_t index);

  int depth() const { return depth_; }
  /// The i-th step of the path, 0-based.
  unsigned bit(int i) const {
    return static_cast<unsigned>((words_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1U);
  }
  VertexId child(unsigned b) const;
  /// The ancestor at depth d (v[d]); d <= depth().
  VertexId ancestor(int d) const;
  /// Inverse of from_index. Requires depth <= 63.
  std::uint64_t index() const;

  /// Path as '0'/'1' characters; "" for the root.
  std::string to_string() const;
  /// Path packed most-significant-step first into hex digits, prefixed by
  /// the depth: "<depth>:<hex>".
  std::string to_hex() const;

  friend bool operator==(const VertexId&, const VertexId&) = default;
  friend auto operator<=>(const VertexId& a, const VertexId& b) {
    if (auto c = a.depth_ <=> b.depth_; c != 0) return c;
    return a.words_ <=> b.words_;
  }

 private:
  int depth_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Depth of the last common ancestor of v and w.
int common_ancestor_depth(const VertexId& v, const VertexId& w);

/// sqrt(N (A(k/N) - A((k-1)/N))): the standard deviation of an edge
/// increment into depth k.
double increment_std(const CovarianceSpec& spec, int N, int k);

/// One disorder sample. Edge increments are pure functions of (seed, path).
class CremRealization {
 public:
  CremRealization(CovarianceSpec spec, int N, std::uint64_t seed);

  const CovarianceSpec& spec() const { return spec_; }
  int depth() const { return N_; }
  std::uint64_t seed() const { return seed_; }

  double increment_std(int k) const { return stds_[static_cast<std::size_t>(k)]; }
  /// Standard deviations indexed by depth; entry 0 is unused.
  std::span<const double> increment_stds() const { return stds_; }

  std::uint64_t root_key() const { return root_; }
  std::uint64_t key(const VertexId& v) const;
  /// Increment into a vertex at depth k with the given key.
  double increment(std::uint64_t key, int k) const {
    const double s = stds_[static_cast<std::size_t>(k)];
    return s == 0.0 ? 0.0 : s * standard_normal(key);
  }

  double edge_increment(const VertexId& v) const;
  double field_value(const VertexId& v) const;

 private:
  CovarianceSpec spec_;
  int N_;
  std::uint64_t seed_;
  std::uint64_t root_;
  std::vector<double> stds_;
};

inline constexpr int kDefaultDenseCap = 24;
inline constexpr int kHardDenseCap = 28;

/// All field values X_v in breadth-first order: index (2^d - 1) + path index.
class DenseTree {
 public:
  /// Evaluates every vertex of the realization. Throws CapacityError when
  /// N exceeds `cap` (itself limited to kHardDenseCap).
  static DenseTree materialize(const CremRealization& real,
                               int cap = kDefaultDenseCap);
  /// Wraps explicit values (length 2^{N+1} - 1, root first, root must be 0).
  static DenseTree from_values(int N, std::vector<double> values);

  int depth() const { return N_; }
  double value(int d, std::uint64_t index) const {
    return values_[((std::size_t{1} << d) - 1) + index];
  }
  double value(const VertexId& v) const { return value(v.depth(), v.index()); }
  std::span<const double> level(int d) const {
    return {values_.data() + ((std::size_t{1} << d) - 1), std::size_t{1} << d};
  }
  std::span<const double> leaves() const { return level(N_); }
  std::span<const double> values() const { return values_; }

 private:
  DenseTree(int N, std::vector<double> values) : N_(N), values_(std::move(values)) {}
  int N_;
  std::vector<double> values_;
};

/// Numerically stable log(sum(exp(x))).
double log_sum_exp(std::span<const double> x);

/// A probability vector over the 2^N leaves, stored as log-probabilities in
/// path-index order.
struct LeafDistribution {
  int N = 0;
  std::vector<double> log_weights;

  std::size_t size() const { return log_weights.size(); }
  double probability(std::size_t i) const;
  /// log of the total mass; 0 for a normalized distribution.
  double log_total() const { return log_sum_exp(log_weights); }
};

/// log of the sum over the 2^M depth-M descendants u of v of exp(beta (X_u - X_v)).
double log_partition(const DenseTree& tree, const VertexId& v, int M, double beta);
double log_partition(const DenseTree& tree, int depth, std::uint64_t index,
                     int M, double beta);

/// log_partition for every vertex at `depth`, in index order.
std::vector<double> level_log_partitions(const DenseTree& tree, int depth,
                                         int M, double beta);

LeafDistribution exact_gibbs(const DenseTree& tree, double beta);

/// X_{vw} - X_v for the 2^M descendants w of v, in index order, read from a
/// lazy realization with O(2^M) memory.
std::vector<double> subtree_leaf_values(const CremRealization& real, const VertexId& v, int M);

/// Inverse-CDF sampler over a fixed leaf distribution.
class LeafSampler {
 public:
  explicit LeafSampler(const LeafDistribution& dist);
  std::uint64_t sample(RandomStream& rng) const;
  std::uint64_t sample_at(double u) const;

 private:
  std::vector<double> cdf_;
};

VertexId gibbs_sample(const DenseTree& tree, double beta, RandomStream& rng);

}  // namespace crem
