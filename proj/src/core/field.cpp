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

#include "crem/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crem/error.hpp"

namespace crem {

// ---------------------------------------------------------------------------
// VertexId

VertexId VertexId::from_index(int depth, std::uint64_t index) {
  if (depth < 0 || depth > 63) throw DomainError("from_index needs depth in [0,63]");
  if (depth < 64 && (index >> depth) != 0 && depth != 0) {
    throw DomainError("vertex index out of range for depth");
  }
  if (depth == 0 && index != 0) throw DomainError("root has index 0");
  VertexId v;
  for (int i = 0; i < depth; ++i) {
    v = v.child(static_cast<unsigned>((index >> (depth - 1 - i)) & 1U));
  }
  return v;
}

VertexId VertexId::child(unsigned b) const {
  VertexId c = *this;
  const auto word = static_cast<std::size_t>(depth_) >> 6;
  if (word >= c.words_.size()) c.words_.push_back(0);
  if (b & 1U) c.words_[word] |= std::uint64_t{1} << (depth_ & 63);
  ++c.depth_;
  return c;
}

VertexId VertexId::ancestor(int d) const {
  if (d < 0 || d > depth_) throw DomainError("ancestor depth out of range");
  VertexId a;
  a.depth_ = d;
  a.words_.assign(words_.begin(), words_.begin() + ((d + 63) >> 6));
  if ((d & 63) != 0) a.words_.back() &= (std::uint64_t{1} << (d & 63)) - 1;
  return a;
}

std::uint64_t VertexId::index() const {
  if (depth_ > 63) throw DomainError("index needs depth <= 63");
  std::uint64_t out = 0;
  for (int i = 0; i < depth_; ++i) out = (out << 1) | bit(i);
  return out;
}

std::string VertexId::to_string() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(depth_));
  for (int i = 0; i < depth_; ++i) out.push_back(bit(i) ? '1' : '0');
  return out;
}

std::string VertexId::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out = std::to_string(depth_) + ":";
  for (int i = 0; i < depth_; i += 4) {
    unsigned nibble = 0;
    for (int j = 0; j < 4; ++j) {
      nibble <<= 1;
      if (i + j < depth_) nibble |= bit(i + j);
    }
    out.push_back(kDigits[nibble]);
  }
  return out;
}

int common_ancestor_depth(const VertexId& v, const VertexId& w) {
  const int limit = std::min(v.depth(), w.depth());
  int d = 0;
  while (d < limit && v.bit(d) == w.bit(d)) ++d;
  return d;
}

// ---------------------------------------------------------------------------
// Realization

double increment_std(const CovarianceSpec& spec, int N, int k) {
  if (N < 1 || k < 1 || k > N) throw DomainError("increment depth out of range");
  const double hi = spec.value(static_cast<double>(k) / N);
  const double lo = spec.value(static_cast<double>(k - 1) / N);
  return std::sqrt(std::max(0.0, N * (hi - lo)));
}

CremRealization::CremRealization(CovarianceSpec spec, int N, std::uint64_t seed)
    : spec_(std::move(spec)), N_(N), seed_(seed), root_(crem::root_key(seed)) {
  if (N < 1) throw DomainError("tree depth must be at least 1");
  stds_.assign(static_cast<std::size_t>(N) + 1, 0.0);
  for (int k = 1; k <= N; ++k) stds_[static_cast<std::size_t>(k)] = crem::increment_std(spec_, N, k);
}

std::uint64_t CremRealization::key(const VertexId& v) const {
  std::uint64_t k = root_;
  for (int i = 0; i < v.depth(); ++i) k = child_key(k, v.bit(i));
  return k;
}

double CremRealization::edge_increment(const VertexId& v) const {
  if (v.depth() < 1) throw DomainError("the root has no incoming edge");
  if (v.depth() > N_) throw DomainError("vertex lies below the tree");
  return increment(key(v), v.depth());
}

double CremRealization::field_value(const VertexId& v) const {
  if (v.depth() > N_) throw DomainError("vertex lies below the tree");
  std::uint64_t k = root_;
  double x = 0.0;
  for (int i = 0; i < v.depth(); ++i) {
    k = child_key(k, v.bit(i));
    x += increment(k, i + 1);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Dense trees

namespace {

void fill_subtree(const CremRealization& real, std::vector<double>& values,
                  int d, std::uint64_t index, std::uint64_t key, double x) {
  values[((std::size_t{1} << d) - 1) + index] = x;
  if (d == real.depth()) return;
  for (unsigned b = 0; b < 2; ++b) {
    const std::uint64_t k = child_key(key, b);
    fill_subtree(real, values, d + 1, (index << 1) | b, k, x + real.increment(k, d + 1));
  }
}

}  // namespace

DenseTree DenseTree::materialize(const CremRealization& real, int cap) {
  const int limit = std::min(cap, kHardDenseCap);
  const int N = real.depth();
  if (N > limit) {
    const double bytes = std::ldexp(8.0, N + 1);
    throw CapacityError("dense tree of depth " + std::to_string(N) + " needs " +
                        std::to_string(static_cast<long long>(bytes / (1 << 20))) +
                        " MiB; cap is depth " + std::to_string(limit));
  }
  std::vector<double> values((std::size_t{1} << (N + 1)) - 1);
  fill_subtree(real, values, 0, 0, real.root_key(), 0.0);
  return DenseTree(N, std::move(values));
}

DenseTree DenseTree::from_values(int N, std::vector<double> values) {
  if (N < 0 || N > kHardDenseCap) throw CapacityError("dense tree depth out of range");
  if (values.size() != (std::size_t{1} << (N + 1)) - 1) {
    throw DomainError("dense tree needs 2^{N+1}-1 values");
  }
  if (values[0] != 0.0) throw DomainError("dense tree root value must be 0");
  return DenseTree(N, std::move(values));
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

double LeafDistribution::probability(std::size_t i) const {
  return std::exp(log_weights[i]);
}

double log_partition(const DenseTree& tree, int depth, std::uint64_t index,
                     int M, double beta) {
  if (M < 0 || depth < 0 || depth + M > tree.depth()) {
    throw DomainError("subtree exceeds tree depth");
  }
  if (M == 0) return 0.0;
  const double root = tree.value(depth, index);
  const auto level = tree.level(depth + M);
  const std::size_t first = static_cast<std::size_t>(index) << M;
  const std::size_t count = std::size_t{1} << M;
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) m = std::max(m, beta * (level[first + i] - root));
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i) s += std::exp(beta * (level[first + i] - root) - m);
  return m + std::log(s);
}

double log_partition(const DenseTree& tree, const VertexId& v, int M, double beta) {
  return log_partition(tree, v.depth(), v.index(), M, beta);
}

std::vector<double> level_log_partitions(const DenseTree& tree, int depth, int M,
                                         double beta) {
  std::vector<double> out(std::size_t{1} << depth);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = log_partition(tree, depth, i, M, beta);
  }
  return out;
}

LeafDistribution exact_gibbs(const DenseTree& tree, double beta) {
  if (!(beta >= 0.0)) throw DomainError("Gibbs measure needs beta >= 0");
  LeafDistribution dist;
  dist.N = tree.depth();
  const auto leaves = tree.leaves();
  dist.log_weights.resize(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) dist.log_weights[i] = beta * leaves[i];
  const double log_z = log_sum_exp(dist.log_weights);
  for (double& w : dist.log_weights) w -= log_z;
  return dist;
}

std::vector<double> subtree_leaf_values(const CremRealization& real, const VertexId& v, int M) {
  if (M < 0 || v.depth() + M > real.depth()) throw DomainError("subtree exceeds tree depth");
  if (M > kHardDenseCap) throw CapacityError("subtree too deep to enumerate");
  std::vector<double> rel{0.0};
  std::vector<std::uint64_t> keys{real.key(v)};
  for (int level = 1; level <= M; ++level) {
    std::vector<double> next_rel(rel.size() * 2);
    std::vector<std::uint64_t> next_keys(keys.size() * 2);
    for (std::size_t i = 0; i < rel.size(); ++i) {
      for (unsigned b = 0; b < 2; ++b) {
        const std::uint64_t k = child_key(keys[i], b);
        next_keys[2 * i + b] = k;
        next_rel[2 * i + b] = rel[i] + real.increment(k, v.depth() + level);
      }
    }
    rel = std::move(next_rel);
    keys = std::move(next_keys);
  }
  return rel;
}

LeafSampler::LeafSampler(const LeafDistribution& dist) {
  cdf_.resize(dist.size());
  const double m = *std::max_element(dist.log_weights.begin(), dist.log_weights.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    acc += std::exp(dist.log_weights[i] - m);
    cdf_[i] = acc;
  }
  for (double& c : cdf_) c /= acc;
}

std::uint64_t LeafSampler::sample_at(double u) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<std::uint64_t>(std::distance(cdf_.begin(), it));
}

std::uint64_t LeafSampler::sample(RandomStream& rng) const {
  return sample_at(rng.uniform());
}

VertexId gibbs_sample(const DenseTree& tree, double beta, RandomStream& rng) {
  const LeafSampler sampler(exact_gibbs(tree, beta));
  return VertexId::from_index(tree.depth(), sampler.sample(rng));
}

}  // namespace crem
