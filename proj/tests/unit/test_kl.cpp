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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "crem/error.hpp"
#include "crem/kl.hpp"

using namespace crem;

namespace {

CovarianceSpec s2() { return CovarianceSpec({0.0, 0.5, 1.0}, {0.5, 1.5}); }

LeafDistribution from_probs(std::vector<double> p) {
  LeafDistribution d;
  d.N = 1;
  for (double x : p) d.log_weights.push_back(std::log(x));
  return d;
}

}  // namespace

TEST_CASE("two-point divergences") {
  const auto half = from_probs({0.5, 0.5});
  CHECK(kl_divergence(half, half) == 0.0);
  CHECK(kl_divergence(from_probs({1.0, 0.0}), half) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  // mpmath, 30 digits.
  CHECK(kl_divergence(from_probs({0.75, 0.25}), half) ==
        doctest::Approx(0.130812035941136959).epsilon(1e-14));
}

TEST_CASE("decomposition identity on every block depth") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const CremRealization r(s2(), 9, seed);
    const auto t = DenseTree::materialize(r);
    for (double beta : {0.5, 1.0, 2.0}) {
      for (int M = 1; M <= 9; ++M) {
        const auto rep = kl_decomposition(t, {beta, M, 9});
        CHECK(std::abs(rep.kl_direct - rep.kl_decomposed) < 1e-8 * std::max(1.0, rep.kl_direct));
        const auto direct = kl_divergence(output_law_exact(t, {beta, M, 9}), exact_gibbs(t, beta));
        CHECK(rep.kl_direct == doctest::Approx(direct).epsilon(1e-12));
        if (M == 9) {
          CHECK(std::abs(rep.kl_direct) < 1e-10);
          CHECK(std::abs(rep.kl_decomposed) < 1e-10);
        }
      }
    }
    const auto zero = kl_decomposition(t, {0.0, 3, 9});
    CHECK(std::abs(zero.kl_direct) < 1e-14);
  }
}

TEST_CASE("expected divergence") {
  SUBCASE("exact sampler and infinite temperature give zero") {
    const auto a = expected_kl(s2(), 1.3, 8, 8, 4, 1);
    CHECK(std::abs(a.kl.mean) < 1e-10);
    CHECK(a.kl.sample_sd < 1e-10);
    const auto b = expected_kl(s2(), 0.0, 2, 8, 4, 1);
    CHECK(std::abs(b.kl.mean) < 1e-12);
    CHECK(b.kl.sample_sd < 1e-12);
  }
  SUBCASE("worker count does not change results") {
    const auto a = expected_kl(CovarianceSpec::identity(), 1.0, 3, 10, 12, 5, 2, 1);
    const auto b = expected_kl(CovarianceSpec::identity(), 1.0, 3, 10, 12, 5, 2, 4);
    CHECK(a.kl.values == b.kl.values);
  }
  SUBCASE("deeper blocks help") {
    const auto spec = CovarianceSpec::identity();
    double prev = 1e300;
    for (int M : {2, 3, 4, 6}) {
      const auto e = expected_kl(spec, 1.0, M, 12, 60, 3);
      CHECK(e.kl.mean < prev);
      prev = e.kl.mean;
    }
  }
  CHECK_THROWS_AS(expected_kl(s2(), 1.0, 2, 30, 4, 1), CapacityError);
}

TEST_CASE("moment constants against the Gamma function") {
  // C1(p) = 2^{p/2+1} p * 2^{p/2-1} Gamma(p/2).
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.0}) {
    const double oracle = std::pow(2.0, p / 2 + 1) * p * std::pow(2.0, p / 2 - 1) * std::tgamma(p / 2);
    CHECK(gaussian_moment_constant(p) == doctest::Approx(oracle).epsilon(1e-10));
  }
  CHECK(gaussian_moment_constant(2.0) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(concentration_bound(1.0, 4, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(concentration_bound(2.0, 16, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(concentration_bound(0.0, 4, 2.0) == 0.0);
}

TEST_CASE("concentration at infinite temperature") {
  const auto rep = concentration_check(CovarianceSpec::identity(), 0.0, 8, {2, 4}, 5, 1);
  for (const auto& row : rep.rows) {
    CHECK(row.deviation_l1 < 1e-12);
    CHECK(row.deviation_l2 < 1e-12);
  }
}

TEST_CASE("sandwich envelope") {
  const double eps = 0.01;
  const auto id = sandwich_envelope(CovarianceSpec::identity(), 1.0, 16, 4, eps);
  REQUIRE(id.size() == 4);
  for (const auto& b : id) {
    CHECK(b.a_minus == 1.0);
    CHECK(b.a_plus == 1.0);
    CHECK(b.lower == doctest::Approx(brw_free_energy_limit(1.0) - eps));
    CHECK(b.upper == doctest::Approx(brw_free_energy_limit(1.0) + eps));
  }
  const auto s = sandwich_envelope(s2(), 1.0, 16, 4, eps);
  CHECK(s[0].a_minus == 0.5);
  CHECK(s[0].a_plus == 0.5);
  CHECK(s[3].a_minus == 1.5);
  const auto straddle = sandwich_envelope(s2(), 1.0, 12, 5, eps);
  CHECK(straddle[1].a_minus == 0.5);
  CHECK(straddle[1].a_plus == 1.5);
}

TEST_CASE("convergence rows at infinite temperature") {
  const auto rows = convergence_gap_check(CovarianceSpec::identity(), 0.0, {6, 8}, 1.0, 3, 2);
  for (const auto& row : rows) {
    CHECK(std::abs(row.mean_kl_per_n) < 1e-12);
    CHECK(row.gap == doctest::Approx(0.0));
  }
}
