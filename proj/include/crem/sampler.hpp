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

// Recursive block sampler: descend the tree M levels at a time, each time
// drawing a block leaf from the exact Gibbs measure of the block below the
// current vertex.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "crem/field.hpp"

namespace crem {

struct SamplerConfig {
  double beta = 1.0;
  int M = 1;
  int N = 1;

  void validate() const;
};

struct SampleTrace {
  VertexId leaf;
  double leaf_value = 0.0;
  /// Distinct non-root vertices whose field value was read.
  std::uint64_t vertex_queries = 0;
  /// Block leaves evaluated; bounded by query_budget(N, M).
  std::uint64_t leaf_evaluations = 0;
  std::vector<VertexId> block_choices;
  /// Every queried vertex in query order, when requested.
  std::optional<std::vector<VertexId>> query_log;
};

/// Draws one leaf. The disorder comes from `real`, the block choices from
/// `rng`. Memory is O(2^M).
SampleTrace sample_path(const CremRealization& real, const SamplerConfig& cfg,
                        RandomStream& rng, bool record_queries = false);

/// Exact output law: log w(u) = beta X_u - sum_k log Z^{u[kM]}_{M ^ (N-kM)}.
LeafDistribution output_law_exact(const DenseTree& tree, const SamplerConfig& cfg);

/// The same law built as a product of block Gibbs weights along each path.
LeafDistribution output_law_recursive(const DenseTree& tree, const SamplerConfig& cfg);

/// max(1, floor(epsilon log2 N) ^ N).
int block_schedule(int N, double epsilon);

/// ceil(N/M) 2^M.
std::uint64_t query_budget(int N, int M);

}  // namespace crem
