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

#include <cmath>
#include <vector>

#include "crem/brw.hpp"
#include "crem/error.hpp"

using namespace crem;

namespace {
const double kLog2 = std::log(2.0);
}  // namespace

TEST_CASE("depth-one free energy against two-dimensional quadrature") {
  // scipy dblquad of log(e^{b x} + e^{b y}) against the bivariate normal density.
  CHECK(brw_exact_depth_one(0.5) == doctest::Approx(0.7522629793107751).epsilon(1e-9));
  CHECK(brw_exact_depth_one(1.0) == doctest::Approx(0.9026619077200267).epsilon(1e-9));
  CHECK(brw_exact_depth_one(2.0) == doctest::Approx(1.335396046248225).epsilon(1e-9));
  CHECK(brw_exact_depth_one(0.0) == kLog2);
  for (double b : {0.5, 1.0, 2.0, 3.0}) CHECK(brw_exact_depth_one(b) < brw_free_energy_limit(b));
}

TEST_CASE("estimates") {
  SUBCASE("exact routes") {
    const auto e = brw_free_energy(1, 1.0, 100, 1);
    CHECK(e.exact);
    CHECK(e.f_hat == brw_exact_depth_one(1.0));
    const auto z = brw_free_energy(7, 0.0, 100, 1);
    CHECK(z.exact);
    CHECK(z.f_hat == kLog2);
  }
  SUBCASE("Monte Carlo at depth one agrees with quadrature") {
    const auto e = brw_free_energy(1, 1.0, 20000, 5, 1, true);
    CHECK_FALSE(e.exact);
    CHECK(std::abs(e.f_hat - brw_exact_depth_one(1.0)) < 4 * e.std_error);
  }
  SUBCASE("finite depth stays below the limit") {
    for (int M : {2, 4, 8}) {
      const auto e = brw_free_energy(M, 1.5, 400, 3);
      CHECK(e.f_hat <= brw_free_energy_limit(1.5) + 3 * e.std_error);
    }
  }
  SUBCASE("shared realizations across the grid") {
    const auto g = brw_free_energy_grid(3, {0.0, 0.5, 1.0}, 50, 2);
    REQUIRE(g.log_z.size() == 50);
    CHECK(g.log_z[0].size() == 3);
    CHECK(g.log_z[0][0] == doctest::Approx(3 * kLog2));
    CHECK(g.estimates[1].f_hat == doctest::Approx(brw_free_energy(3, 0.5, 100, 2).f_hat).epsilon(0.2));
    const auto a = brw_free_energy_grid(3, {1.0}, 50, 2, 1);
    const auto b = brw_free_energy_grid(3, {1.0}, 50, 2, 4);
    CHECK(a.log_z == b.log_z);
  }
  CHECK_THROWS_AS(brw_free_energy(kMaxBrwDepth + 1, 1.0, 100, 1), CapacityError);
  CHECK_THROWS_AS(brw_free_energy(0, 1.0, 100, 1), DomainError);
  CHECK_THROWS_AS(brw_free_energy(2, 1.0, 10, 1), DomainError);
}

TEST_CASE("g transform") {
  CHECK(g_transform(1.0, 0.0) == 0.0);
  CHECK(g_transform(kLog2 + 0.5, 1.0) == doctest::Approx(0.5 - kLog2));
  CHECK(g_transform(4.0, 2.0) == doctest::Approx(2.0 - kLog2));
  // The limit transform is nondecreasing in beta.
  double prev = -1e300;
  for (int i = 1; i <= 40; ++i) {
    const double b = 0.1 * i;
    const double g = g_transform(brw_free_energy_limit(b), b);
    CHECK(g >= prev);
    prev = g;
  }
}

TEST_CASE("finite-depth properties") {
  const auto rep = verify_gM_properties({0.0, 0.5, 1.0, 1.5, 2.0}, {1, 2, 4}, 400, 7);
  CHECK(rep.rows.size() == 15);
  CHECK(rep.sup_error.size() == 3);
  CHECK(rep.upper_bound_ok);
  CHECK(rep.monotone_ok);
}

TEST_CASE("sandwich rows") {
  const CovarianceSpec s2({0.0, 0.5, 1.0}, {0.5, 1.5});
  const auto rows = sandwich_check(s2, 1.0, 12, 4, 3, 100);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].a_minus == 0.5);
  CHECK(rows[0].a_plus == 0.5);
  CHECK(rows[1].a_minus == 0.5);
  CHECK(rows[1].a_plus == 1.5);
  CHECK(rows[2].a_minus == 1.5);
  for (const auto& r : rows) {
    CHECK(r.epsilon > 0.0);
    CHECK(r.lower < r.upper);
  }
  CHECK_THROWS_AS(sandwich_check(s2, 1.0, 4, 5, 3, 100), DomainError);
}
