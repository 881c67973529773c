// Copyright 2026 The qmimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reproduction drivers: diversity-gain region scan, DMT curves and the
// Monte-Carlo-vs-closed-form sweep report.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "qmimo/channels.hpp"
#include "qmimo/format.hpp"
#include "qmimo/mimo.hpp"
#include "qmimo/parallel.hpp"
#include "qmimo/tensor.hpp"

namespace qmimo {

struct Interval {
  double lo;
  double hi;

  /// Point i of an inclusive n-point grid.
  double at(std::size_t i, std::size_t n) const {
    if (n == 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
};

/// Uniform inclusive grid over (eta, eps, lambda). Ranges default to the
/// valid region 0 <= eta <= 1/2, 0 <= eps, lambda <= 1 and may be narrowed.
struct GridSpec {
  std::size_t points_per_axis = 200;
  Interval eta_range{0.0, 0.5};
  Interval eps_range{0.0, 1.0};
  Interval lambda_range{0.0, 1.0};

  std::size_t total_points() const { return points_per_axis * points_per_axis * points_per_axis; }

  void validate() const {
    if (points_per_axis < 2) throw ParameterError("points_per_axis", "must be at least 2");
    auto check = [](const char* name, Interval r, double hi) {
      if (!(r.lo >= 0.0 && r.lo <= r.hi && r.hi <= hi)) {
        throw ParameterError(name, "range must satisfy 0 <= lo <= hi <= " + format_double(hi));
      }
    };
    check("eta_range", eta_range, 0.5);
    check("eps_range", eps_range, 1.0);
    check("lambda_range", lambda_range, 1.0);
  }
};

struct RegionRow {
  double eta;
  double eps;
  double lambda;
  double f_mux;
  double f_div;
  bool gain;
};

struct RegionResult {
  double fraction = 0.0;
  std::uint64_t gain_points = 0;
  std::uint64_t grid_points = 0;
};

using RegionSink = std::function<void(const RegionRow&)>;

namespace detail {

inline RegionRow region_point(double eta, double eps, double lambda) {
  const ChannelParams p{eta, eps, lambda};
  const double f_mux = analytic_mux_fidelity(p).f11;
  const double f_div = analytic_div_fidelity(p).f11;
  // Strict comparison: ties are not a gain.
  return RegionRow{eta, eps, lambda, f_mux, f_div, f_div > f_mux};
}

}  // namespace detail

/// Fraction of grid points where two-clone diversity beats multiplexing.
/// With a sink, rows are emitted in grid order (eta slowest, lambda fastest)
/// on the calling thread; without one the scan runs in parallel over eta slices.
inline RegionResult region_scan(const GridSpec& grid, const RegionSink& sink = {}, unsigned threads = 0) {
  grid.validate();
  const std::size_t n = grid.points_per_axis;
  std::vector<std::uint64_t> wins(n, 0);
  auto slice = [&](std::size_t i) {
    const double eta = grid.eta_range.at(i, n);
    std::uint64_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double eps = grid.eps_range.at(j, n);
      for (std::size_t k = 0; k < n; ++k) {
        const RegionRow row = detail::region_point(eta, eps, grid.lambda_range.at(k, n));
        count += row.gain ? 1 : 0;
        if (sink) sink(row);
      }
    }
    wins[i] = count;
  };
  if (sink) {
    for (std::size_t i = 0; i < n; ++i) slice(i);
  } else {
    parallel_for(n, threads, slice);
  }
  RegionResult result;
  result.gain_points = std::accumulate(wins.begin(), wins.end(), std::uint64_t{0});
  result.grid_points = grid.total_points();
  result.fraction = static_cast<double>(result.gain_points) / static_cast<double>(result.grid_points);
  return result;
}

struct DmtPoint {
  std::size_t m;
  std::size_t x;
  std::size_t streams;          // 2^(m - x)
  std::size_t diversity_order;  // 2^x
  double fidelity;
};

/// General-model fidelity for x = 0..m with eta_i = eta0 / decay^i.
inline std::vector<DmtPoint> dmt_sweep(std::size_t m, double eps, double lambda, double eta0, double decay,
                                       bool allow_any_schedule = false) {
  if (m == 0) throw ParameterError("m", "must be at least 1");
  if (m > kMaxLayers) throw ParameterError("m", "at most " + std::to_string(kMaxLayers) + " layers");
  if (!(decay > 0.0)) throw ParameterError("decay", "must be positive");
  MimoConfig cfg;
  cfg.m = m;
  cfg.eta_schedule = geometric_schedule(m, eta0, decay);
  cfg.eps = eps;
  cfg.lambda = lambda;
  cfg.allow_any_schedule = allow_any_schedule;
  std::vector<DmtPoint> curve;
  curve.reserve(m + 1);
  for (std::size_t x = 0; x <= m; ++x) {
    cfg.x = x;
    curve.push_back(DmtPoint{m, x, cfg.num_streams(), cfg.clones_per_stream(), analytic_general_fidelity(cfg).f11});
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Monte Carlo verification sweeps

inline constexpr std::size_t kSweepPoints = 21;
inline constexpr std::array<const char*, 3> kSweptParams = {"eta", "eps", "lambda"};

struct McVerifyRow {
  std::string swept_param;
  double value;
  std::string strategy;  // "mux" or "div"
  Engine engine;
  double fidelity;
  std::optional<double> std_error;
  std::optional<std::size_t> n_samples;
};

/// One-dimensional sweeps of each channel parameter over [0, 1] in 21 steps,
/// holding the other two at `base`. Each point gets its own Haar input and Rng
/// stream. Emits, per point: mux analytic, mux Monte Carlo (n_mux Haar
/// samples of the second input), div analytic, div density (single run).
inline std::vector<McVerifyRow> mc_verify(const ChannelParams& base, std::size_t n_mux, const Rng& rng,
                                          unsigned threads = 0) {
  base.validate();
  if (n_mux == 0) throw ParameterError("n_samples", "must be positive");
  const std::size_t n_points = kSweptParams.size() * kSweepPoints;
  std::vector<std::array<McVerifyRow, 4>> slots(n_points);
  parallel_for(n_points, threads, [&](std::size_t point) {
    const std::size_t axis = point / kSweepPoints;
    const double value = static_cast<double>(point % kSweepPoints) / static_cast<double>(kSweepPoints - 1);
    ChannelParams p = base;
    (axis == 0 ? p.eta : axis == 1 ? p.eps : p.lambda) = value;

    Rng local = rng.derive(point);
    const PureState psi0 = haar_state(2, local);
    const auto mux_exact = analytic_mux_fidelity(p);
    const auto mux_mc = simulate_2x2_mux(psi0, p, n_mux, local);
    const auto div_exact = analytic_div_fidelity(p);
    const auto div_sim = simulate_2x2_div(psi0, p).report;
    const std::string name = kSweptParams[axis];
    slots[point] = {
        McVerifyRow{name, value, "mux", Engine::kAnalytic, mux_exact.f11, std::nullopt, std::nullopt},
        McVerifyRow{name, value, "mux", Engine::kDensity, mux_mc.f11, mux_mc.std_error, mux_mc.n_samples},
        McVerifyRow{name, value, "div", Engine::kAnalytic, div_exact.f11, std::nullopt, std::nullopt},
        McVerifyRow{name, value, "div", Engine::kDensity, div_sim.f11, div_sim.std_error, div_sim.n_samples},
    };
  });
  std::vector<McVerifyRow> rows;
  rows.reserve(4 * n_points);
  for (auto& s : slots) {
    for (auto& r : s) rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV schemas

inline void write_region_header(std::ostream& os) { os << "eta,eps,lambda,f_mux,f_div,gain\n"; }

inline void write_region_row(std::ostream& os, const RegionRow& r) {
  write_csv_row(os, {format_double(r.eta), format_double(r.eps), format_double(r.lambda), format_double(r.f_mux),
                     format_double(r.f_div), r.gain ? "1" : "0"});
}

inline void write_dmt_csv(std::ostream& os, const std::vector<DmtPoint>& points) {
  os << "m,x,streams,diversity_order,log2_streams,fidelity\n";
  for (const auto& p : points) {
    write_csv_row(os, {std::to_string(p.m), std::to_string(p.x), std::to_string(p.streams),
                       std::to_string(p.diversity_order), std::to_string(p.m - p.x), format_double(p.fidelity)});
  }
}

inline void write_mc_verify_csv(std::ostream& os, const std::vector<McVerifyRow>& rows) {
  os << "swept_param,value,strategy,engine,fidelity,stderr,n_samples\n";
  for (const auto& r : rows) {
    write_csv_row(os, {r.swept_param, format_double(r.value), r.strategy, std::string(to_string(r.engine)),
                       format_double(r.fidelity), format_optional(r.std_error), format_optional(r.n_samples)});
  }
}

}  // namespace qmimo
