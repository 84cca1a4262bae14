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

#include "crem/covariance.hpp"
#include "crem/error.hpp"

using namespace crem;

namespace {

const double kLog2 = std::log(2.0);

CovarianceSpec s2() { return CovarianceSpec({0.0, 0.5, 1.0}, {0.5, 1.5}); }

// Least concave majorant at a breakpoint by brute force: the largest chord
// value over all pairs of breakpoints straddling it.
double chord_majorant(const CovarianceSpec& spec, std::size_t i) {
  const auto t = spec.breakpoints();
  const auto a = spec.cumulative();
  double best = a[i];
  for (std::size_t l = 0; l <= i; ++l) {
    for (std::size_t r = i; r < t.size(); ++r) {
      if (l == r) continue;
      const double w = (t[i] - t[l]) / (t[r] - t[l]);
      best = std::max(best, a[l] + w * (a[r] - a[l]));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("profile values") {
  const auto s = s2();
  CHECK(s.value(0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s.value(0.0) == 0.0);
  CHECK(s.value(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(CovarianceSpec::identity().value(0.37) == doctest::Approx(0.37).epsilon(1e-15));
  CHECK(s.slope_at(0.25) == 0.5);
  CHECK(s.slope_at(0.5) == 1.5);
  CHECK(s.slope_at(1.0) == 1.5);
  CHECK_THROWS_AS(s.value(1.5), DomainError);
}

TEST_CASE("profile validation") {
  CHECK_THROWS_AS(CovarianceSpec({0.0, 1.0}, {0.9}), DomainError);            // A(1) != 1
  CHECK_THROWS_AS(CovarianceSpec({0.0, 0.5, 1.0}, {-0.5, 2.5}), DomainError);  // negative slope
  CHECK_THROWS_AS(CovarianceSpec({0.0, 0.6, 0.5, 1.0}, {1, 1, 1}), DomainError);
  CHECK_THROWS_AS(CovarianceSpec({0.1, 1.0}, {1.0}), DomainError);
  CHECK_THROWS_AS(CovarianceSpec({0.0, 1.0}, {1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(CovarianceSpec::from_name("two-slope(0.5,1.5)"), DomainError);
  CHECK_THROWS_AS(CovarianceSpec::from_name("wiggly"), DomainError);
}

TEST_CASE("named profiles") {
  const auto a = CovarianceSpec::from_name("two-slope(0.5,1.5,0.5)");
  CHECK(a.cells() == 2);
  CHECK(a.value(0.5) == doctest::Approx(0.25));
  const auto b = CovarianceSpec::from_name("three-slope(1.2,0.3,1.5)");
  CHECK(b.cells() == 3);
  CHECK(b.value(1.0) == doctest::Approx(1.0));
  const auto c = CovarianceSpec::from_name("identity");
  CHECK(c.is_concave());
}

TEST_CASE("concave hull") {
  SUBCASE("convex two-slope profile lies under a single chord") {
    const auto spec = s2();
    const auto& h = spec.hull();
    REQUIRE(h.segments() == 1);
    CHECK(h.slopes()[0] == doctest::Approx(1.0));
    REQUIRE(h.gaps().size() == 1);
    CHECK(h.gaps()[0].first_cell == 0);
    CHECK(h.gaps()[0].last_cell == 1);
    CHECK(h.contact_mask() == std::vector<bool>{false, false});
  }
  SUBCASE("concave inputs are their own hull") {
    for (const auto& spec : {CovarianceSpec::identity(), CovarianceSpec({0, 0.5, 1}, {1.5, 0.5})}) {
      CHECK(spec.is_concave());
      for (double t : {0.0, 0.2, 0.5, 0.8, 1.0}) {
        CHECK(spec.hull().value(t) == doctest::Approx(spec.value(t)).epsilon(1e-14));
      }
    }
  }
  SUBCASE("gaps end at hull vertices") {
    const CovarianceSpec spec({0, 0.2, 0.4, 0.7, 1}, {0.45, 2.0, 0.5, 1.2});
    const auto& gaps = spec.hull().gaps();
    REQUIRE(gaps.size() == 2);
    CHECK(gaps[0].last_cell == 1);
    CHECK(gaps[0].hull_slope == doctest::Approx(1.225));
    CHECK(gaps[1].first_cell == 2);
    CHECK(gaps[1].hull_slope == doctest::Approx(0.85));
  }
  SUBCASE("matches brute-force chord majorant") {
    const std::vector<CovarianceSpec> specs{
        CovarianceSpec({0, 1.0 / 3, 2.0 / 3, 1}, {1.2, 0.3, 1.5}),
        CovarianceSpec({0, 0.2, 0.4, 0.7, 1}, {0.45, 2.0, 0.5, 1.2}),
        CovarianceSpec({0, 0.1, 0.5, 0.6, 0.9, 1}, {3.0, 0.25, 2.0, 0.5, 2.5}),
        s2(),
    };
    for (const auto& spec : specs) {
      const auto t = spec.breakpoints();
      for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(spec.hull().value(t[i]) == doctest::Approx(chord_majorant(spec, i)).epsilon(1e-12));
      }
      // Concavity: hull slopes nonincreasing.
      const auto hs = spec.hull().slopes();
      for (std::size_t j = 1; j < hs.size(); ++j) CHECK(hs[j] <= hs[j - 1] + 1e-12);
    }
  }
}

TEST_CASE("hardness threshold") {
  // mpmath: sqrt(2 log 2 / 1.5)
  constexpr double kS2 = 0.961351257733922;
  CHECK(hardness_threshold(s2()).value() == doctest::Approx(kS2).epsilon(1e-13));
  CHECK(hardness_threshold(CovarianceSpec::identity()).is_infinite());
  const auto three = CovarianceSpec({0, 1.0 / 3, 2.0 / 3, 1}, {1.2, 0.3, 1.5});
  CHECK(hardness_threshold(three).value() == doctest::Approx(kS2).epsilon(1e-13));
}

TEST_CASE("branching random walk limit") {
  CHECK(brw_free_energy_limit(0.0) == doctest::Approx(kLog2));
  CHECK(brw_free_energy_limit(std::sqrt(2 * kLog2)) == doctest::Approx(2 * kLog2).epsilon(1e-15));
  CHECK(brw_free_energy_limit(2.0) == doctest::Approx(2.354820045030949).epsilon(1e-14));
  // Derivative against central differences on both branches.
  for (double b : {0.3, 0.9, 1.5, 2.5}) {
    const double h = 1e-6;
    const double fd = (brw_free_energy_limit(b + h) - brw_free_energy_limit(b - h)) / (2 * h);
    CHECK(brw_free_energy_limit_derivative(b) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("free energies of the two-slope profile") {
  const auto s = s2();
  // mpmath, 30 digits.
  CHECK(free_energy(s, 1.0) == doctest::Approx(1.19314718055994530).epsilon(1e-14));
  CHECK(free_energy(s, 1.2) == doctest::Approx(1.41289202701856963).epsilon(1e-14));
  CHECK(block_free_energy(s, 0.9) == doctest::Approx(1.09814718055994531).epsilon(1e-14));
  CHECK(block_free_energy(s, 1.0) == doctest::Approx(1.19258703358041416).epsilon(1e-14));
  for (double b : {0.0, 0.4, 0.9}) {
    const auto g = free_energy_gap(s, b);
    CHECK(g.value == doctest::Approx(0.0).epsilon(1e-15));
  }
  const auto g1 = free_energy_gap(s, 1.0);
  CHECK(g1.value == doctest::Approx(0.000560146979531146).epsilon(1e-10));
  CHECK(g1.derivative == doctest::Approx(0.0289865566995585).epsilon(1e-10));
  CHECK(free_energy_gap(s, 2.0).value == doctest::Approx(0.0802385472723686).epsilon(1e-10));
  for (const auto& spec : {CovarianceSpec::identity(), s}) CHECK(free_energy(spec, 0.0) == doctest::Approx(kLog2));
}

TEST_CASE("gap derivative against finite differences") {
  const auto three = CovarianceSpec({0, 0.2, 0.4, 0.7, 1}, {0.45, 2.0, 0.5, 1.2});
  for (double b : {0.7, 1.1, 1.6, 2.4, 3.1}) {
    const double h = 1e-6;
    const double fd = (free_energy_gap(three, b + h).value - free_energy_gap(three, b - h).value) / (2 * h);
    CHECK(free_energy_gap(three, b).derivative == doctest::Approx(fd).epsilon(1e-6));
    CHECK(free_energy_gap(three, b).value >= 0.0);
  }
}

TEST_CASE("critical-time form agrees with the hull integral") {
  const std::vector<CovarianceSpec> specs{
      CovarianceSpec::identity(), s2(), CovarianceSpec({0, 1.0 / 3, 2.0 / 3, 1}, {1.2, 0.3, 1.5}),
      CovarianceSpec({0, 0.2, 0.4, 0.7, 1}, {0.45, 2.0, 0.5, 1.2}),
      CovarianceSpec({0, 0.5, 1}, {1.5, 0.5})};
  for (const auto& spec : specs) {
    for (int i = 0; i <= 20; ++i) {
      const double b = 0.2 * i;
      CHECK(std::abs(free_energy(spec, b) - free_energy_critical_time_form(spec, b)) < 1e-10);
    }
  }
}

TEST_CASE("ground state levels") {
  const double c = std::sqrt(2 * kLog2);
  const auto lv = ground_state_levels(s2());
  CHECK(lv.x_gse == doctest::Approx(1.17741002251547466).epsilon(1e-14));
  CHECK(lv.x_star == doctest::Approx(1.13729074887929039).epsilon(1e-14));
  const auto id = ground_state_levels(CovarianceSpec::identity());
  CHECK(id.x_gse == doctest::Approx(c));
  CHECK(id.x_star == doctest::Approx(c));
  const auto cc = ground_state_levels(CovarianceSpec({0, 0.5, 1}, {1.5, 0.5}));
  CHECK(cc.x_gse == doctest::Approx(cc.x_star).epsilon(1e-14));
}

TEST_CASE("overlap distribution") {
  const double c = std::sqrt(2 * kLog2);
  CHECK(overlap_cdf(CovarianceSpec::identity(), 2.0, 0.5) == doctest::Approx(c / 2));
  CHECK(overlap_cdf(CovarianceSpec::identity(), 1.0, 0.5) == doctest::Approx(1.0));
  CHECK(overlap_cdf(s2(), 2.0, 0.3) == doctest::Approx(c / 2));
}

TEST_CASE("essential bounds of the slope") {
  const auto s = s2();
  CHECK(s.ess_inf(0.0, 0.25) == 0.5);
  CHECK(s.ess_sup(0.0, 0.25) == 0.5);
  CHECK(s.ess_inf(0.25, 0.75) == 0.5);
  CHECK(s.ess_sup(0.25, 0.75) == 1.5);
  CHECK(s.ess_inf(0.5, 1.0) == 1.5);
}
