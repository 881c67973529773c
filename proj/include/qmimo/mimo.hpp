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

// 2x2 and 2^m x 2^m MIMO fidelity engines.
//
// Three engines compute the same quantities by independent routes:
//   analytic    closed-form fidelity formulas
//   density     exact branch-ensemble simulation (m <= 3)
//   trajectory  Monte Carlo unraveling of swaps, erasures and depolarizing
//
// Channel layout for the general model: 2^m modes, stream j on the mode block
// [j 2^x, (j + 1) 2^x). Crosstalk layer i pairs adjacent blocks of size 2^i
// (block 2k with block 2k + 1) and swaps them with probability eta_i. Port p
// therefore ends up holding the content of port p ^ (1 << i) when layer i fires.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "qmimo/channels.hpp"
#include "qmimo/cloning.hpp"
#include "qmimo/errors.hpp"
#include "qmimo/parallel.hpp"
#include "qmimo/tensor.hpp"

namespace qmimo {

/// Largest layer count any engine accepts.
inline constexpr std::size_t kMaxLayers = 20;
/// Largest layer count the density engine builds (8 modes).
inline constexpr std::size_t kMaxDensityLayers = 3;

struct MimoConfig {
  std::size_t m = 1;                // crosstalk layers; 2^m channels
  std::size_t x = 0;                // 2^x clones per stream, 2^(m - x) streams
  std::vector<double> eta_schedule;  // eta_0 .. eta_(m-1)
  double eps = 0.0;
  double lambda = 0.0;
  bool allow_any_schedule = false;  // skip the strictly-decreasing check

  std::size_t num_channels() const { return std::size_t{1} << m; }
  std::size_t clones_per_stream() const { return std::size_t{1} << x; }
  std::size_t num_streams() const { return std::size_t{1} << (m - x); }

  void validate() const {
    if (m > kMaxLayers) throw ParameterError("m", "at most " + std::to_string(kMaxLayers) + " layers");
    if (x > m) throw ParameterError("x", "must satisfy 0 <= x <= m");
    if (eta_schedule.size() != m) {
      throw ParameterError("eta_schedule", "needs exactly m = " + std::to_string(m) + " entries, got " +
                                               std::to_string(eta_schedule.size()));
    }
    for (double eta : eta_schedule) require_unit_interval("eta_schedule", eta);
    require_unit_interval("eps", eps);
    require_unit_interval("lambda", lambda);
    if (!allow_any_schedule) {
      for (std::size_t i = 1; i < m; ++i) {
        if (!(eta_schedule[i - 1] > eta_schedule[i])) {
          throw ParameterError("eta_schedule",
                               "must be strictly decreasing (pass allow_any_schedule to override)");
        }
      }
    }
  }
};

/// eta_i = eta0 / decay^i for i < m.
inline std::vector<double> geometric_schedule(std::size_t m, double eta0, double decay) {
  if (!(decay > 0.0)) throw ParameterError("decay", "must be positive");
  std::vector<double> schedule(m);
  for (std::size_t i = 0; i < m; ++i) schedule[i] = eta0 / std::pow(decay, static_cast<double>(i));
  return schedule;
}

enum class Engine { kAnalytic, kDensity, kTrajectory };

inline std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::kAnalytic:
      return "analytic";
    case Engine::kDensity:
      return "density";
    case Engine::kTrajectory:
      return "trajectory";
  }
  return "unknown";
}

struct FidelityReport {
  double f11 = 0.0;
  std::optional<double> f12;
  Engine engine = Engine::kAnalytic;
  std::optional<double> std_error;  // Monte Carlo only
  std::optional<double> x_factor;   // X = (1 - lambda) prod (1 - eta_i), analytic only
  std::optional<std::size_t> n_samples;
};

// ---------------------------------------------------------------------------
// Analytic engine

/// Multiplexing: F11 = (1 - eps)(1 + (1 - eta)(1 - lambda)) / 2 and
/// F12 = (1 - eps)(1 + eta (1 - lambda)) / 2. With csi_swap the receivers swap
/// their outputs when eta > 1/2, so eta becomes min(eta, 1 - eta) for F11.
inline FidelityReport analytic_mux_fidelity(const ChannelParams& p, bool csi_swap = false) {
  p.validate();
  double eta_direct = p.eta;
  double eta_cross = p.eta;
  if (csi_swap) {
    eta_direct = std::min(p.eta, 1.0 - p.eta);
    eta_cross = std::max(p.eta, 1.0 - p.eta);
  }
  FidelityReport r;
  r.engine = Engine::kAnalytic;
  r.f11 = 0.5 * (1.0 - p.eps) * (1.0 + (1.0 - eta_direct) * (1.0 - p.lambda));
  r.f12 = 0.5 * (1.0 - p.eps) * (1.0 + eta_cross * (1.0 - p.lambda));
  return r;
}

/// Two-clone diversity: F = (1 - eps^2)(5/6 - lambda/3) on every port pair.
inline FidelityReport analytic_div_fidelity(const ChannelParams& p) {
  p.validate();
  FidelityReport r;
  r.engine = Engine::kAnalytic;
  r.f11 = (1.0 - p.eps * p.eps) * (5.0 / 6.0 - p.lambda / 3.0);
  r.f12 = r.f11;
  return r;
}

/// F = (1 - eps^(2^x)) (X F_clone(2^x) + (1 - X) / 2), X = (1 - lambda) prod_{i=x}^{m-1} (1 - eta_i).
inline FidelityReport analytic_general_fidelity(const MimoConfig& cfg) {
  cfg.validate();
  double x_factor = 1.0 - cfg.lambda;
  for (std::size_t i = cfg.x; i < cfg.m; ++i) x_factor *= 1.0 - cfg.eta_schedule[i];
  const double all_lost = std::pow(cfg.eps, static_cast<double>(cfg.clones_per_stream()));
  FidelityReport r;
  r.engine = Engine::kAnalytic;
  r.f11 = (1.0 - all_lost) * (x_factor * clone_fidelity_law(cfg.clones_per_stream()) + 0.5 * (1.0 - x_factor));
  r.x_factor = x_factor;
  return r;
}

// ---------------------------------------------------------------------------
// Receiver

/// Per branch, the lowest-index surviving port in `ports`, or nullopt when
/// every port was erased. Both clones arriving is resolved by discarding all
/// but the first.
inline std::vector<std::optional<std::size_t>> receiver_select(const BranchEnsemble& ens, ModeRange ports) {
  if (ports.count == 0) throw std::invalid_argument("receiver needs at least one port");
  if (ports.end() > ens.n_modes()) throw DimensionError("receiver ports out of range");
  std::vector<std::optional<std::size_t>> kept;
  kept.reserve(ens.size());
  for (const auto& b : ens.branches()) {
    std::optional<std::size_t> choice;
    for (std::size_t port = ports.first; port < ports.end(); ++port) {
      if (!b.is_erased(port)) {
        choice = port;
        break;
      }
    }
    kept.push_back(choice);
  }
  return kept;
}

/// Probability-weighted fidelity of the selected ports; erased selections score 0.
inline double selected_fidelity(const BranchEnsemble& ens, const std::vector<std::optional<std::size_t>>& kept,
                                const PureState& target) {
  double f = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const auto& b = ens.branches()[i];
    if (!kept[i] || b.prob == 0.0) continue;
    f += b.prob * fidelity_pure(branch_marginal(b, *kept[i]), target);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Density engine

namespace detail {

inline std::vector<Stage> two_by_two_stages(const ChannelParams& p) {
  std::vector<Stage> stages{CrosstalkStage{p.eta, {0, 1}, {1, 1}}};
  for (auto& s : link_noise_stages(2, p.eps, p.lambda)) stages.push_back(s);
  return stages;
}

struct PortFidelities {
  double f11;
  double f12;
};

inline PortFidelities mux_port_fidelities(const DensityMatrix& input, const ChannelParams& p,
                                          const PureState& psi0) {
  const auto stages = two_by_two_stages(p);
  const BranchEnsemble out = apply_pipeline(BranchEnsemble(input), stages);
  return {selected_fidelity(out, receiver_select(out, {0, 1}), psi0),
          selected_fidelity(out, receiver_select(out, {1, 1}), psi0)};
}

}  // namespace detail

/// Multiplexing with Tx 2 sending the Haar average I/2: exact and sample-free.
inline FidelityReport simulate_2x2_mux_deterministic(const PureState& psi0, const ChannelParams& p) {
  p.validate();
  if (psi0.dim() != 2) throw DimensionError("input must be a single qubit");
  const auto input = tensor_product(psi0.projector(), DensityMatrix::maximally_mixed(2));
  const auto f = detail::mux_port_fidelities(input, p, psi0);
  FidelityReport r;
  r.engine = Engine::kDensity;
  r.f11 = f.f11;
  r.f12 = f.f12;
  return r;
}

/// Multiplexing with Tx 2 sending a fresh Haar state per sample.
inline FidelityReport simulate_2x2_mux(const PureState& psi0, const ChannelParams& p, std::size_t n_samples,
                                       Rng& rng) {
  p.validate();
  if (psi0.dim() != 2) throw DimensionError("input must be a single qubit");
  if (n_samples == 0) throw ParameterError("n_samples", "must be positive");
  double mean11 = 0.0;
  double m2 = 0.0;
  double mean12 = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const PureState other = haar_state(2, rng);
    const auto input = tensor_product(psi0.projector(), other.projector());
    const auto f = detail::mux_port_fidelities(input, p, psi0);
    const double delta = f.f11 - mean11;
    mean11 += delta / static_cast<double>(s + 1);
    m2 += delta * (f.f11 - mean11);
    mean12 += (f.f12 - mean12) / static_cast<double>(s + 1);
  }
  FidelityReport r;
  r.engine = Engine::kDensity;
  r.f11 = mean11;
  r.f12 = mean12;
  r.n_samples = n_samples;
  r.std_error = n_samples > 1 ? std::sqrt(m2 / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples))
                            : 0.0;
  return r;
}

struct DiversitySimulation {
  FidelityReport report;
  /// State of the relayed clone given that at least one clone arrived; empty
  /// when both are always erased.
  std::optional<DensityMatrix> received_clone;
};

/// Two-clone diversity on the 2x2 channel. Deterministic: the clones are
/// swap-symmetric, so crosstalk does nothing and no sampling is needed.
inline DiversitySimulation simulate_2x2_div(const PureState& psi0, const ChannelParams& p) {
  p.validate();
  const CloneBatch clones = clone_1to2(psi0);
  const auto stages = detail::two_by_two_stages(p);
  const BranchEnsemble out = apply_pipeline(BranchEnsemble(clones.joint), stages);
  const auto kept = receiver_select(out, {0, 2});

  Matrix conditional = Matrix::Zero(2, 2);
  double received = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!kept[i]) continue;
    const auto& b = out.branches()[i];
    conditional += b.prob * branch_marginal(b, *kept[i]).matrix();
    received += b.prob;
  }

  DiversitySimulation sim;
  sim.report.engine = Engine::kDensity;
  sim.report.f11 = selected_fidelity(out, kept, psi0);
  sim.report.f12 = sim.report.f11;
  sim.report.n_samples = 1;
  sim.report.std_error = 0.0;
  if (received > 0.0) sim.received_clone = DensityMatrix::unchecked(conditional / received);
  return sim;
}

/// Crosstalk stages of the layered model on 2^m modes.
inline std::vector<Stage> layered_crosstalk_stages(std::size_t m, std::span<const double> eta_schedule) {
  std::vector<Stage> stages;
  const std::size_t n = std::size_t{1} << m;
  for (std::size_t layer = 0; layer < m; ++layer) {
    const std::size_t block = std::size_t{1} << layer;
    for (std::size_t start = 0; start < n; start += 2 * block) {
      stages.emplace_back(CrosstalkStage{eta_schedule[layer], {start, block}, {start + block, block}});
    }
  }
  return stages;
}

/// Exact simulation of the layered model for the stream on modes [0, 2^x).
/// Every other mode carries I/2: each crosstalk branch is a mode permutation,
/// so other streams only enter through their Haar-averaged single-mode state.
inline FidelityReport simulate_general_density(const MimoConfig& cfg, const PureState& psi0) {
  cfg.validate();
  if (cfg.m > kMaxDensityLayers) {
    throw CapacityError("density engine supports m <= " + std::to_string(kMaxDensityLayers) + ", got m = " +
                        std::to_string(cfg.m) + "; use the trajectory engine");
  }
  const CloneBatch clones = clone_1toM(psi0, cfg.clones_per_stream());
  const std::size_t others = cfg.num_channels() - cfg.clones_per_stream();
  DensityMatrix input = clones.joint;
  if (others > 0) input = tensor_product(input, DensityMatrix::maximally_mixed(std::size_t{1} << others));

  std::vector<Stage> stages = layered_crosstalk_stages(cfg.m, cfg.eta_schedule);
  for (auto& s : link_noise_stages(cfg.num_channels(), cfg.eps, cfg.lambda)) stages.push_back(s);
  const BranchEnsemble out = apply_pipeline(BranchEnsemble(std::move(input)), stages);

  FidelityReport r;
  r.engine = Engine::kDensity;
  r.f11 = selected_fidelity(out, receiver_select(out, {0, cfg.clones_per_stream()}), psi0);
  return r;
}

// ---------------------------------------------------------------------------
// Trajectory engine

struct TrajectoryOptions {
  unsigned threads = 0;
  std::size_t chunk_size = 4096;
};

namespace detail {

struct RunningMoments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }

  void merge(const RunningMoments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.n) / total;
    m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / total;
    n += o.n;
  }
};

/// One trajectory of the target stream; returns its fidelity score.
inline double sample_trajectory(const MimoConfig& cfg, double clone_fidelity, Rng& rng) {
  const std::size_t ports = cfg.clones_per_stream();

  // Index of the first surviving port: the number of leading erasures is
  // geometric with success probability 1 - eps.
  std::uint64_t kept = 0;
  if (cfg.eps >= 1.0) return 0.0;
  if (cfg.eps > 0.0) {
    std::geometric_distribution<std::uint64_t> leading_erasures(1.0 - cfg.eps);
    kept = leading_erasures(rng.engine());
    if (kept >= ports) return 0.0;
  }

  // Walk the kept port back through the crosstalk layers to its source mode.
  std::uint64_t source = kept;
  for (std::size_t layer = cfg.m; layer-- > 0;) {
    if (rng.bernoulli(cfg.eta_schedule[layer])) source ^= std::uint64_t{1} << layer;
  }
  const bool own_clone = source < ports;
  const bool depolarized = rng.bernoulli(cfg.lambda);
  return (own_clone && !depolarized) ? clone_fidelity : 0.5;
}

}  // namespace detail

/// Monte Carlo estimate of the general-model fidelity with standard error.
/// Samples are split into fixed-size chunks, each with its own derived Rng
/// stream, so the result does not depend on the thread count.
inline FidelityReport trajectory_estimate(const MimoConfig& cfg, std::size_t n_samples, const Rng& rng,
                                          const TrajectoryOptions& opts = {}) {
  cfg.validate();
  if (n_samples == 0) throw ParameterError("n_samples", "must be positive");
  const double clone_fidelity = clone_fidelity_law(cfg.clones_per_stream());
  const std::size_t chunk = std::max<std::size_t>(1, opts.chunk_size);
  const std::size_t n_chunks = (n_samples + chunk - 1) / chunk;
  std::vector<detail::RunningMoments> partial(n_chunks);
  parallel_for(n_chunks, opts.threads, [&](std::size_t c) {
    Rng local = rng.derive(c);
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(n_samples, begin + chunk);
    for (std::size_t s = begin; s < end; ++s) partial[c].add(detail::sample_trajectory(cfg, clone_fidelity, local));
  });
  detail::RunningMoments total;
  for (const auto& p : partial) total.merge(p);

  FidelityReport r;
  r.engine = Engine::kTrajectory;
  r.f11 = total.mean;
  r.n_samples = n_samples;
  r.std_error = n_samples > 1 ? std::sqrt(std::max(0.0, total.m2) / static_cast<double>(n_samples - 1) /
                                        static_cast<double>(n_samples))
                            : 0.0;
  return r;
}

}  // namespace qmimo
