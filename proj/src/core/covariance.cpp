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

#include "crem/covariance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "crem/error.hpp"

namespace crem {
namespace {

constexpr double kLog2 = 0.6931471805599453;
constexpr double kNormalizationTolerance = 1e-12;
// Cross products below this magnitude are treated as collinear.
constexpr double kCollinearTolerance = 1e-15;

// Index of the cell containing t, cells closed on the left.
std::size_t locate(std::span<const double> breakpoints, double t) {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  auto idx = static_cast<std::size_t>(std::distance(breakpoints.begin(), it));
  const std::size_t cells = breakpoints.size() - 1;
  if (idx == 0) return 0;
  return std::min(idx - 1, cells - 1);
}

std::vector<double> parse_arguments(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view token = text.substr(pos, comma - pos);
    while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front())))
      token.remove_prefix(1);
    while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back())))
      token.remove_suffix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
      throw DomainError("covariance profile: bad numeric argument '" +
                        std::string(token) + "'");
    }
    out.push_back(value);
    pos = comma + 1;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConcaveHull

ConcaveHull::ConcaveHull(std::vector<double> breakpoints,
                         std::vector<double> slopes,
                         std::vector<bool> contact_mask, std::vector<Gap> gaps)
    : breakpoints_(std::move(breakpoints)),
      slopes_(std::move(slopes)),
      contact_mask_(std::move(contact_mask)),
      gaps_(std::move(gaps)) {
  values_.resize(breakpoints_.size());
  values_[0] = 0.0;
  for (std::size_t j = 0; j < slopes_.size(); ++j) {
    values_[j + 1] = values_[j] + slopes_[j] * segment_length(j);
  }
  values_.back() = 1.0;
}

double ConcaveHull::value(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const std::size_t j = locate(breakpoints_, t);
  return values_[j] + slopes_[j] * (t - breakpoints_[j]);
}

double ConcaveHull::slope_at(double t) const {
  return slopes_[locate(breakpoints_, t)];
}

// ---------------------------------------------------------------------------
// CovarianceSpec

CovarianceSpec::CovarianceSpec(std::vector<double> breakpoints,
                               std::vector<double> slopes)
    : breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)) {
  if (breakpoints_.size() < 2) {
    throw DomainError("covariance profile needs at least two breakpoints");
  }
  if (slopes_.size() + 1 != breakpoints_.size()) {
    throw DomainError("covariance profile needs one slope per cell");
  }
  if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0) {
    throw DomainError("covariance breakpoints must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw DomainError("covariance breakpoints must be strictly increasing");
    }
  }
  for (double a : slopes_) {
    if (!std::isfinite(a) || a < 0.0) {
      throw DomainError("covariance slopes must be finite and nonnegative");
    }
  }
  cumulative_.resize(breakpoints_.size());
  cumulative_[0] = 0.0;
  for (std::size_t i = 0; i < slopes_.size(); ++i) {
    cumulative_[i + 1] = cumulative_[i] + slopes_[i] * cell_length(i);
  }
  if (std::abs(cumulative_.back() - 1.0) > kNormalizationTolerance) {
    std::ostringstream msg;
    msg << "covariance slopes must integrate to 1 (got "
        << cumulative_.back() << ")";
    throw DomainError(msg.str());
  }
  cumulative_.back() = 1.0;

  hull_ = std::make_shared<const ConcaveHull>(concave_hull(*this));
  for (const auto& gap : hull_->gaps()) {
    double peak = 0.0;
    for (std::size_t i = gap.first_cell; i <= gap.last_cell; ++i) {
      peak = std::max(peak, slopes_[i]);
    }
    if (peak <= 0.0) {
      throw DomainError("covariance profile has a hull gap with zero slope");
    }
  }
}

CovarianceSpec CovarianceSpec::identity() { return CovarianceSpec({0.0, 1.0}, {1.0}); }

CovarianceSpec CovarianceSpec::two_slope(double a1, double a2, double split) {
  return CovarianceSpec({0.0, split, 1.0}, {a1, a2});
}

CovarianceSpec CovarianceSpec::three_slope(double a1, double a2, double a3,
                                           double t1, double t2) {
  return CovarianceSpec({0.0, t1, t2, 1.0}, {a1, a2, a3});
}

CovarianceSpec CovarianceSpec::from_name(std::string_view name) {
  while (!name.empty() && std::isspace(static_cast<unsigned char>(name.front())))
    name.remove_prefix(1);
  while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back())))
    name.remove_suffix(1);
  if (name == "identity") return identity();

  const auto open = name.find('(');
  if (open == std::string_view::npos || name.back() != ')') {
    throw DomainError("unknown covariance profile '" + std::string(name) + "'");
  }
  const std::string_view kind = name.substr(0, open);
  const auto args = parse_arguments(name.substr(open + 1, name.size() - open - 2));
  if (kind == "two-slope") {
    if (args.size() != 3) throw DomainError("two-slope takes (a1,a2,split)");
    return two_slope(args[0], args[1], args[2]);
  }
  if (kind == "three-slope") {
    if (args.size() == 3) return three_slope(args[0], args[1], args[2]);
    if (args.size() == 5) {
      return three_slope(args[0], args[1], args[2], args[3], args[4]);
    }
    throw DomainError("three-slope takes (a1,a2,a3) or (a1,a2,a3,t1,t2)");
  }
  throw DomainError("unknown covariance profile '" + std::string(name) + "'");
}

double CovarianceSpec::value(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("covariance profile evaluated outside [0,1]");
  }
  if (t == 1.0) return 1.0;
  const std::size_t i = locate(breakpoints_, t);
  return cumulative_[i] + slopes_[i] * (t - breakpoints_[i]);
}

double CovarianceSpec::slope_at(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("covariance slope evaluated outside [0,1]");
  }
  return slopes_[locate(breakpoints_, t)];
}

double CovarianceSpec::ess_sup(double lo, double hi) const {
  if (!(hi > lo)) return slope_at(std::clamp(lo, 0.0, 1.0));
  double best = -1.0;
  for (std::size_t i = 0; i < cells(); ++i) {
    const double overlap =
        std::min(hi, breakpoints_[i + 1]) - std::max(lo, breakpoints_[i]);
    if (overlap > 0.0) best = std::max(best, slopes_[i]);
  }
  return best;
}

double CovarianceSpec::ess_inf(double lo, double hi) const {
  if (!(hi > lo)) return slope_at(std::clamp(lo, 0.0, 1.0));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cells(); ++i) {
    const double overlap =
        std::min(hi, breakpoints_[i + 1]) - std::max(lo, breakpoints_[i]);
    if (overlap > 0.0) best = std::min(best, slopes_[i]);
  }
  return best;
}

std::string CovarianceSpec::describe() const {
  std::ostringstream out;
  out.precision(17);
  out << "breakpoints=[";
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    out << (i ? "," : "") << breakpoints_[i];
  }
  out << "] slopes=[";
  for (std::size_t i = 0; i < slopes_.size(); ++i) {
    out << (i ? "," : "") << slopes_[i];
  }
  out << "]";
  return out.str();
}

// ---------------------------------------------------------------------------
// Hull

ConcaveHull concave_hull(const CovarianceSpec& spec) {
  const auto ts = spec.breakpoints();
  const auto as = spec.cumulative();
  const std::size_t n = ts.size();

  // Monotone chain over vertices sorted by t; keep only right turns.
  std::vector<std::size_t> chain;
  chain.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    while (chain.size() >= 2) {
      const std::size_t o = chain[chain.size() - 2];
      const std::size_t a = chain.back();
      const double cross =
          (ts[a] - ts[o]) * (as[i] - as[o]) - (as[a] - as[o]) * (ts[i] - ts[o]);
      if (cross >= -kCollinearTolerance) {
        chain.pop_back();
      } else {
        break;
      }
    }
    chain.push_back(i);
  }

  std::vector<double> hull_t;
  std::vector<double> hull_slopes;
  for (std::size_t j = 0; j < chain.size(); ++j) {
    hull_t.push_back(ts[chain[j]]);
    if (j + 1 < chain.size()) {
      const std::size_t a = chain[j];
      const std::size_t b = chain[j + 1];
      hull_slopes.push_back((as[b] - as[a]) / (ts[b] - ts[a]));
    }
  }

  // Hull value at each profile breakpoint, for the contact decision.
  std::vector<double> hull_at(n);
  {
    std::size_t seg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      while (seg + 1 < chain.size() - 1 && ts[i] >= ts[chain[seg + 1]]) ++seg;
      const std::size_t a = chain[seg];
      hull_at[i] = as[a] + hull_slopes[seg] * (ts[i] - ts[a]);
    }
  }

  const std::size_t cells = spec.cells();
  std::vector<bool> contact(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const bool left = hull_at[i] - as[i] <= kHullTolerance;
    const bool right = hull_at[i + 1] - as[i + 1] <= kHullTolerance;
    contact[i] = left && right;
  }

  std::vector<bool> vertex(n, false);
  for (std::size_t c : chain) vertex[c] = true;

  // A gap is a maximal run of non-contact cells under one hull segment.
  std::vector<ConcaveHull::Gap> gaps;
  for (std::size_t i = 0; i < cells;) {
    if (contact[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < cells && !contact[j + 1] && !vertex[j + 1]) ++j;
    const double start = ts[i];
    const double end = ts[j + 1];
    const double mid = 0.5 * (start + end);
    std::size_t seg = locate(hull_t, mid);
    gaps.push_back({i, j, start, end, hull_slopes[seg]});
    i = j + 1;
  }

  return ConcaveHull(std::move(hull_t), std::move(hull_slopes),
                     std::move(contact), std::move(gaps));
}

// ---------------------------------------------------------------------------
// Thermodynamics

ExtendedReal hardness_threshold(const CovarianceSpec& spec) {
  const auto& gaps = spec.hull().gaps();
  if (gaps.empty()) return ExtendedReal::infinity();
  double peak = 0.0;
  for (const auto& gap : gaps) {
    for (std::size_t i = gap.first_cell; i <= gap.last_cell; ++i) {
      peak = std::max(peak, spec.slopes()[i]);
    }
  }
  return ExtendedReal(kCriticalBeta / std::sqrt(peak));
}

double brw_free_energy_limit(double beta) {
  if (!(beta >= 0.0)) throw DomainError("free energy needs beta >= 0");
  if (beta < kCriticalBeta) return kLog2 + 0.5 * beta * beta;
  return kCriticalBeta * beta;
}

double brw_free_energy_limit_derivative(double beta) {
  if (!(beta >= 0.0)) throw DomainError("free energy needs beta >= 0");
  return beta < kCriticalBeta ? beta : kCriticalBeta;
}

double free_energy(const CovarianceSpec& spec, double beta) {
  const auto& hull = spec.hull();
  double total = 0.0;
  for (std::size_t j = 0; j < hull.segments(); ++j) {
    total += brw_free_energy_limit(beta * std::sqrt(hull.slopes()[j])) *
             hull.segment_length(j);
  }
  return total;
}

double critical_time(const CovarianceSpec& spec, double beta) {
  if (!(beta >= 0.0)) throw DomainError("critical time needs beta >= 0");
  if (beta == 0.0) return 0.0;
  const double level = 2.0 * kLog2 / (beta * beta);
  const auto& hull = spec.hull();
  double t0 = 0.0;
  for (std::size_t j = 0; j < hull.segments(); ++j) {
    if (hull.slopes()[j] > level) t0 = hull.breakpoints()[j + 1];
  }
  return t0;
}

double free_energy_critical_time_form(const CovarianceSpec& spec, double beta) {
  const double t0 = critical_time(spec, beta);
  const auto& hull = spec.hull();
  double root_integral = 0.0;
  for (std::size_t j = 0; j < hull.segments(); ++j) {
    if (hull.breakpoints()[j + 1] <= t0) {
      root_integral += std::sqrt(hull.slopes()[j]) * hull.segment_length(j);
    }
  }
  return beta * kCriticalBeta * root_integral +
         0.5 * beta * beta * (1.0 - hull.value(t0)) + kLog2 * (1.0 - t0);
}

double block_free_energy(const CovarianceSpec& spec, double beta) {
  double total = 0.0;
  for (std::size_t i = 0; i < spec.cells(); ++i) {
    total += brw_free_energy_limit(beta * std::sqrt(spec.slopes()[i])) *
             spec.cell_length(i);
  }
  return total;
}

FreeEnergyGap free_energy_gap(const CovarianceSpec& spec, double beta) {
  if (!(beta >= 0.0)) throw DomainError("free energy gap needs beta >= 0");
  FreeEnergyGap out{0.0, 0.0};
  for (const auto& gap : spec.hull().gaps()) {
    const double root_hat = std::sqrt(gap.hull_slope);
    const double length = gap.end - gap.start;
    double value = brw_free_energy_limit(beta * root_hat) * length;
    double slope = brw_free_energy_limit_derivative(beta * root_hat) * root_hat * length;
    for (std::size_t i = gap.first_cell; i <= gap.last_cell; ++i) {
      const double root = std::sqrt(spec.slopes()[i]);
      value -= brw_free_energy_limit(beta * root) * spec.cell_length(i);
      slope -= brw_free_energy_limit_derivative(beta * root) * root * spec.cell_length(i);
    }
    out.value += value;
    out.derivative += slope;
  }
  // Below the threshold both sums agree up to rounding.
  if (out.value < 0.0 && out.value > -1e-13) out.value = 0.0;
  if (std::abs(out.derivative) < 1e-13) out.derivative = 0.0;
  return out;
}

GroundStateLevels ground_state_levels(const CovarianceSpec& spec) {
  const auto& hull = spec.hull();
  double hull_root = 0.0;
  for (std::size_t j = 0; j < hull.segments(); ++j) {
    hull_root += std::sqrt(hull.slopes()[j]) * hull.segment_length(j);
  }
  double root = 0.0;
  for (std::size_t i = 0; i < spec.cells(); ++i) {
    root += std::sqrt(spec.slopes()[i]) * spec.cell_length(i);
  }
  return {kCriticalBeta * hull_root, kCriticalBeta * root};
}

double overlap_cdf(const CovarianceSpec& spec, double beta, double t) {
  if (!(beta > 0.0)) throw DomainError("overlap CDF needs beta > 0");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("overlap CDF needs t in [0,1]");
  const double t0 = critical_time(spec, beta);
  if (t > t0) return 1.0;
  const double hull_slope = spec.hull().slope_at(t);
  if (hull_slope <= 0.0) return 1.0;
  return std::clamp(kCriticalBeta / (beta * std::sqrt(hull_slope)), 0.0, 1.0);
}

}  // namespace crem
