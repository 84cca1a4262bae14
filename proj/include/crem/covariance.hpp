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

// Covariance profiles with piecewise-constant derivative, their least concave
// majorant, and the closed-form thermodynamics that follow from them.

#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crem {

/// sqrt(2 log 2): the critical inverse temperature of the binary branching
/// random walk with unit-variance increments.
inline const double kCriticalBeta = 1.1774100225154747;

/// Absolute tolerance used to decide whether a breakpoint touches the hull.
inline constexpr double kHullTolerance = 1e-12;

/// The least concave majorant of a piecewise-linear profile. Stored as its
/// own breakpoints and slopes, together with per-cell contact flags for the
/// profile it was built from.
class ConcaveHull {
 public:
  /// Maximal run of consecutive non-contact cells, all lying under a single
  /// hull segment.
  struct Gap {
    std::size_t first_cell;
    std::size_t last_cell;  // inclusive
    double start;
    double end;
    double hull_slope;
  };

  ConcaveHull(std::vector<double> breakpoints, std::vector<double> slopes,
              std::vector<bool> contact_mask, std::vector<Gap> gaps);

  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> slopes() const { return slopes_; }
  const std::vector<bool>& contact_mask() const { return contact_mask_; }
  const std::vector<Gap>& gaps() const { return gaps_; }
  std::size_t segments() const { return slopes_.size(); }
  double segment_length(std::size_t j) const {
    return breakpoints_[j + 1] - breakpoints_[j];
  }

  /// Hull value at t in [0,1].
  double value(double t) const;
  /// Right derivative of the hull; the last segment's slope at t = 1.
  double slope_at(double t) const;
  bool is_concave_input() const { return gaps_.empty(); }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
  std::vector<bool> contact_mask_;
  std::vector<Gap> gaps_;
  std::vector<double> values_;
};

/// Covariance profile A on [0,1] with A(0) = 0, A(1) = 1 and derivative
/// a = slopes[i] on (t_{i-1}, t_i). Immutable; the concave hull is computed
/// once at construction.
class CovarianceSpec {
 public:
  CovarianceSpec(std::vector<double> breakpoints, std::vector<double> slopes);

  static CovarianceSpec identity();
  /// Slope a1 on [0, split], a2 on [split, 1].
  static CovarianceSpec two_slope(double a1, double a2, double split);
  static CovarianceSpec three_slope(double a1, double a2, double a3,
                                    double t1 = 1.0 / 3.0,
                                    double t2 = 2.0 / 3.0);
  /// Parses "identity", "two-slope(a1,a2,split)" or
  /// "three-slope(a1,a2,a3[,t1,t2])".
  static CovarianceSpec from_name(std::string_view name);

  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> slopes() const { return slopes_; }
  std::size_t cells() const { return slopes_.size(); }
  double cell_length(std::size_t i) const {
    return breakpoints_[i + 1] - breakpoints_[i];
  }
  /// A(t_i) for every breakpoint.
  std::span<const double> cumulative() const { return cumulative_; }
  const ConcaveHull& hull() const { return *hull_; }

  /// Exact integral of the slopes up to t. Throws DomainError outside [0,1].
  double value(double t) const;
  /// Right derivative a(t); the last slope at t = 1.
  double slope_at(double t) const;
  /// Essential supremum / infimum of a over [lo, hi] (cells overlapping the
  /// interval in positive length).
  double ess_sup(double lo, double hi) const;
  double ess_inf(double lo, double hi) const;

  bool is_concave() const { return hull_->is_concave_input(); }
  std::string describe() const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
  std::vector<double> cumulative_;
  std::shared_ptr<const ConcaveHull> hull_;
};

inline double evaluate_A(const CovarianceSpec& spec, double t) {
  return spec.value(t);
}

/// Upper convex hull of the profile's graph vertices via a monotone-chain
/// scan. Collinear vertices are dropped from the hull.
ConcaveHull concave_hull(const CovarianceSpec& spec);

/// A real number or +infinity.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr explicit ExtendedReal(double v) : value_(v) {}
  static constexpr ExtendedReal infinity() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }
  constexpr bool is_infinite() const {
    return value_ == std::numeric_limits<double>::infinity();
  }
  constexpr double value() const { return value_; }
  friend constexpr bool operator<(double x, const ExtendedReal& e) {
    return x < e.value_;
  }
  friend constexpr bool operator<=(double x, const ExtendedReal& e) {
    return x <= e.value_;
  }

 private:
  double value_ = 0.0;
};

/// sqrt(2 log 2) / sqrt(ess sup of a over {A != hull}); +infinity when the
/// profile is concave.
ExtendedReal hardness_threshold(const CovarianceSpec& spec);

/// Limiting free energy of the binary branching random walk:
/// log 2 + x^2/2 below kCriticalBeta, kCriticalBeta * x above.
double brw_free_energy_limit(double beta);
/// Derivative of brw_free_energy_limit.
double brw_free_energy_limit_derivative(double beta);

/// Integral of f(beta sqrt(hull slope)): the free energy of the model.
double free_energy(const CovarianceSpec& spec, double beta);
/// The same free energy written through the critical time t0(beta);
/// an independent algebraic route kept for cross-checking.
double free_energy_critical_time_form(const CovarianceSpec& spec, double beta);
/// t0(beta) = sup{t : hull slope(t) > 2 log 2 / beta^2}, sup of the empty set
/// taken as 0.
double critical_time(const CovarianceSpec& spec, double beta);

/// Integral of f(beta sqrt(a)): the free energy a blockwise sampler sees.
double block_free_energy(const CovarianceSpec& spec, double beta);

struct FreeEnergyGap {
  double value;
  double derivative;
};

/// F - F~ and its exact derivative in beta, accumulated gap by gap so that
/// contact cells contribute exactly zero.
FreeEnergyGap free_energy_gap(const CovarianceSpec& spec, double beta);

struct GroundStateLevels {
  double x_gse;   // sqrt(2 log 2) * integral sqrt(hull slope)
  double x_star;  // sqrt(2 log 2) * integral sqrt(a)
};

GroundStateLevels ground_state_levels(const CovarianceSpec& spec);

/// CDF of the limiting overlap distribution, clamped to [0,1].
double overlap_cdf(const CovarianceSpec& spec, double beta, double t);

}  // namespace crem
