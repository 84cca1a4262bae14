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

#include "crem/runner/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

namespace crem::runner {
namespace {

constexpr double kWidth = 680.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 78.0;
constexpr double kRight = 170.0;
constexpr double kTop = 44.0;
constexpr double kBottom = 56.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Axis {
  double lo;
  double hi;
  bool log;

  double value(double x) const { return log ? std::log10(x) : x; }
  bool usable(double x) const { return std::isfinite(x) && (!log || x > 0.0); }
};

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

Axis make_axis(std::vector<double> values, bool log) {
  Axis a{0.0, 1.0, log};
  std::vector<double> v;
  for (double x : values) {
    if (a.usable(x)) v.push_back(a.value(x));
  }
  if (v.empty()) return a;
  a.lo = *std::min_element(v.begin(), v.end());
  a.hi = *std::max_element(v.begin(), v.end());
  if (a.hi - a.lo < 1e-12) {
    const double pad = std::max(std::abs(a.lo) * 0.1, 0.5);
    a.lo -= pad;
    a.hi += pad;
  } else {
    const double pad = 0.05 * (a.hi - a.lo);
    a.lo -= pad;
    a.hi += pad;
  }
  return a;
}

std::string tick_label(double v, bool log) {
  if (log) return fmt::format("{:g}", std::pow(10.0, v));
  if (std::abs(v) < 1e-12) return "0";
  return fmt::format("{:g}", v);
}

}  // namespace

std::string render_svg(const Figure& fig) {
  std::vector<double> xs, ys;
  for (const auto& s : fig.series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
    ys.insert(ys.end(), s.lo.begin(), s.lo.end());
    ys.insert(ys.end(), s.hi.begin(), s.hi.end());
  }
  const Axis probe{0, 1, fig.log_x};
  if (std::none_of(xs.begin(), xs.end(), [&](double x) { return probe.usable(x); })) {
    throw PlotError("nothing to plot");
  }
  if (fig.marker_x && probe.usable(*fig.marker_x)) xs.push_back(*fig.marker_x);
  const Axis ax = make_axis(xs, fig.log_x);
  const Axis ay = make_axis(ys, fig.log_y);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (ax.value(x) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (ay.value(y) - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kWidth, kHeight);
  out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     kLeft + pw / 2, escape(fig.title));
  out += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
      kLeft, kTop, pw, ph);

  // Ticks.
  auto ticks = [&](const Axis& a, bool horizontal) {
    const double step = nice_step(a.hi - a.lo, 5);
    for (double t = std::ceil(a.lo / step) * step; t <= a.hi + 1e-12; t += step) {
      const double frac = (t - a.lo) / (a.hi - a.lo);
      if (horizontal) {
        const double x = kLeft + frac * pw;
        out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"black\"/>\n",
                           x, kTop + ph, kTop + ph + 5);
        out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", x,
                           kTop + ph + 18, tick_label(t, a.log));
      } else {
        const double y = kTop + ph - frac * ph;
        out += fmt::format("<line x1=\"{0}\" y1=\"{2:.2f}\" x2=\"{1}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n",
                           kLeft - 5, kLeft, y);
        out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 8,
                           y + 4, tick_label(t, a.log));
      }
    }
  };
  ticks(ax, true);
  ticks(ay, false);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2,
                     kHeight - 14, escape(fig.x_label));
  out += fmt::format(
      "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
      kTop + ph / 2, escape(fig.y_label));

  out += fmt::format("<clipPath id=\"plot\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/></clipPath>\n",
                     kLeft, kTop, pw, ph);
  out += "<g clip-path=\"url(#plot)\">\n";

  if (fig.marker_x && probe.usable(*fig.marker_x)) {
    const double x = px(*fig.marker_x);
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"gray\" "
        "stroke-dasharray=\"6 4\"/>\n",
        x, kTop, kTop + ph);
  }

  std::vector<std::string> legend;
  std::vector<std::string> legend_style;
  for (std::size_t si = 0; si < fig.series.size(); ++si) {
    const auto& s = fig.series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      points += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
      out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(s.x[i]),
                         py(s.y[i]), color);
      if (i < s.lo.size() && i < s.hi.size() && ay.usable(s.lo[i]) && ay.usable(s.hi[i])) {
        out += fmt::format(
            "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"{3}\"/>\n",
            px(s.x[i]), py(s.lo[i]), py(s.hi[i]), color);
      }
    }
    if (!s.markers_only && !points.empty()) {
      points.pop_back();
      out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                         points, color);
    }
    legend.push_back(s.name);
    legend_style.push_back(color);
  }

  if (fig.reference_slope && !fig.series.empty()) {
    const auto& s = fig.series.front();
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      const double x0 = ax.value(s.x[i]);
      const double y0 = ay.value(s.y[i]);
      auto sx = [&](double v) { return kLeft + (v - ax.lo) / (ax.hi - ax.lo) * pw; };
      auto sy = [&](double v) { return kTop + ph - (v - ay.lo) / (ay.hi - ay.lo) * ph; };
      const double y_lo = y0 + *fig.reference_slope * (ax.lo - x0);
      const double y_hi = y0 + *fig.reference_slope * (ax.hi - x0);
      out += fmt::format(
          "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\" "
          "stroke-dasharray=\"2 3\"/>\n",
          sx(ax.lo), sy(y_lo), sx(ax.hi), sy(y_hi));
      legend.push_back(fig.reference_label);
      legend_style.push_back("ref");
      break;
    }
  }
  out += "</g>\n";
  if (fig.marker_x && probe.usable(*fig.marker_x)) {
    legend.push_back(fig.marker_label);
    legend_style.push_back("marker");
  }

  for (std::size_t i = 0; i < legend.size(); ++i) {
    const double y = kTop + 12 + 18 * static_cast<double>(i);
    const double x = kWidth - kRight + 12;
    const std::string& st = legend_style[i];
    if (st == "ref" || st == "marker") {
      out += fmt::format(
          "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-dasharray=\"{}\"/>\n", x,
          y - 4, x + 20, y - 4, st == "ref" ? "black" : "gray", st == "ref" ? "2 3" : "6 4");
    } else {
      out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                         x, y - 4, x + 20, y - 4, st);
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", x + 26, y, escape(legend[i]));
  }
  out += "</svg>\n";
  return out;
}

const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> kinds{"thermo",     "kl-vs-beta", "kl-vs-M",
                                              "deviation-vs-M", "steep-rate",
                                              "tau-prime-survival", "brw"};
  return kinds;
}

namespace {

void require(const Table& t, std::initializer_list<const char*> cols) {
  for (const char* c : cols) {
    if (!t.has_column(c)) throw MissingColumn(c);
  }
  if (t.empty()) throw PlotError("cannot plot an empty report");
}

/// Splits rows into series keyed by the listed columns that exist.
std::vector<Series> grouped(const Table& t, const std::string& x_col, const std::string& y_col,
                            const std::vector<std::string>& keys, const std::string& err_col = "") {
  const auto x = t.numbers(x_col);
  const auto y = t.numbers(y_col);
  std::vector<double> err;
  if (!err_col.empty() && t.has_column(err_col)) err = t.numbers(err_col);
  std::vector<std::vector<std::string>> key_values;
  std::vector<std::string> present;
  for (const auto& k : keys) {
    if (t.has_column(k)) {
      present.push_back(k);
      key_values.push_back(t.strings(k));
    }
  }
  std::map<std::string, Series> by_key;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::string name;
    for (std::size_t k = 0; k < present.size(); ++k) {
      if (!name.empty()) name += ", ";
      name += present[k] + "=" + key_values[k][i];
    }
    if (name.empty()) name = y_col;
    auto [it, inserted] = by_key.try_emplace(name);
    if (inserted) {
      it->second.name = name;
      order.push_back(name);
    }
    it->second.x.push_back(x[i]);
    it->second.y.push_back(y[i]);
    if (!err.empty()) {
      it->second.lo.push_back(y[i] - err[i]);
      it->second.hi.push_back(y[i] + err[i]);
    }
  }
  std::vector<Series> out;
  for (const auto& name : order) {
    Series s = by_key[name];
    std::vector<std::size_t> idx(s.x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s.x[a] < s.x[b]; });
    Series sorted{s.name, {}, {}, {}, {}, false};
    for (auto i : idx) {
      sorted.x.push_back(s.x[i]);
      sorted.y.push_back(s.y[i]);
      if (!s.lo.empty()) {
        sorted.lo.push_back(s.lo[i]);
        sorted.hi.push_back(s.hi[i]);
      }
    }
    out.push_back(std::move(sorted));
  }
  return out;
}

std::optional<double> finite_marker(const Table& t) {
  if (!t.has_column("beta_G")) return std::nullopt;
  for (double v : t.numbers("beta_G")) {
    if (std::isfinite(v)) return v;
  }
  return std::nullopt;
}

}  // namespace

std::string emit_plot(const Table& t, const std::string& kind) {
  if (t.empty()) throw PlotError("cannot plot an empty report");
  Figure fig;
  if (kind == "thermo") {
    require(t, {"beta", "F", "F_tilde", "G"});
    fig.title = "Free energies";
    fig.x_label = "beta";
    fig.y_label = "free energy";
    for (const char* col : {"F", "F_tilde", "G"}) {
      auto s = grouped(t, "beta", col, {});
      fig.series.push_back(std::move(s.front()));
    }
    fig.marker_x = finite_marker(t);
    fig.marker_label = "beta_G";
  } else if (kind == "kl-vs-beta") {
    require(t, {"beta", "mean_kl_per_n"});
    fig.title = "KL/N against beta";
    fig.x_label = "beta";
    fig.y_label = "KL / N";
    fig.series = grouped(t, "beta", "mean_kl_per_n", {"N", "M"}, "stderr_kl_per_n");
    fig.marker_x = finite_marker(t);
    fig.marker_label = "beta_G";
  } else if (kind == "kl-vs-M") {
    require(t, {"M", "mean_kl_per_n"});
    fig.title = "KL/N against block depth";
    fig.x_label = "M";
    fig.y_label = "KL / N";
    fig.series = grouped(t, "M", "mean_kl_per_n", {"N", "beta"}, "stderr_kl_per_n");
  } else if (kind == "deviation-vs-M") {
    require(t, {"M", "sd_kl_per_n"});
    fig.title = "Fluctuation of KL/N";
    fig.x_label = "M";
    fig.y_label = "L2 deviation of KL / N";
    fig.log_x = fig.log_y = true;
    fig.series = grouped(t, "M", "sd_kl_per_n", {"N", "beta"});
    fig.reference_slope = -0.5;
    fig.reference_label = "slope -1/2";
  } else if (kind == "steep-rate") {
    require(t, {"N", "p_hat", "wilson_lo", "wilson_hi"});
    fig.title = "Chain steep probability";
    fig.x_label = "N";
    fig.y_label = "probability";
    fig.log_y = true;
    Series s{"p_hat", t.numbers("N"), t.numbers("p_hat"), t.numbers("wilson_lo"),
             t.numbers("wilson_hi"), false};
    fig.series.push_back(std::move(s));
    if (t.has_column("rate_bound")) {
      fig.series.push_back({"exp(-z log2 N / K)", t.numbers("N"), t.numbers("rate_bound"), {}, {}, false});
    }
  } else if (kind == "tau-prime-survival") {
    require(t, {"tau_prime"});
    fig.title = "Survival of tau'";
    fig.x_label = "queries n";
    fig.y_label = "P(tau' > n)";
    const auto tp = t.numbers("tau_prime");
    double hi = 1.0;
    for (double v : tp) {
      if (std::isfinite(v)) hi = std::max(hi, v);
    }
    Series s{"empirical", {}, {}, {}, {}, false};
    const double n_total = static_cast<double>(tp.size());
    for (double n = 0; n <= hi; n = n < 10 ? n + 1 : std::ceil(n * 1.25)) {
      const double alive = static_cast<double>(
          std::count_if(tp.begin(), tp.end(), [&](double v) { return !std::isfinite(v) || v > n; }));
      s.x.push_back(n);
      s.y.push_back(alive / n_total);
    }
    fig.series.push_back(std::move(s));
  } else if (kind == "brw") {
    require(t, {"M", "beta", "f_hat"});
    fig.title = "Branching random walk free energy";
    fig.x_label = "beta";
    fig.y_label = "f_M(beta)";
    fig.series = grouped(t, "beta", "f_hat", {"M"}, "std_error");
    if (t.has_column("f_limit")) {
      auto limit = grouped(t, "beta", "f_limit", {});
      limit.front().name = "limit f";
      // Keep one point per beta.
      Series dedup{"limit f", {}, {}, {}, {}, false};
      for (std::size_t i = 0; i < limit.front().x.size(); ++i) {
        if (dedup.x.empty() || limit.front().x[i] != dedup.x.back()) {
          dedup.x.push_back(limit.front().x[i]);
          dedup.y.push_back(limit.front().y[i]);
        }
      }
      fig.series.push_back(std::move(dedup));
    }
  } else {
    throw PlotError("unknown plot kind '" + kind + "'");
  }
  return render_svg(fig);
}

}  // namespace crem::runner
