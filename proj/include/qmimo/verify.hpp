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

// Built-in self-checks run by `qmimo verify`: cross-engine agreement,
// algebraic identities and the reproduction targets, each with a fixed
// tolerance and a fixed seed.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qmimo/channels.hpp"
#include "qmimo/cloning.hpp"
#include "qmimo/experiments.hpp"
#include "qmimo/format.hpp"
#include "qmimo/mimo.hpp"
#include "qmimo/tensor.hpp"

namespace qmimo {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 42;
  ChannelParams base{0.2, 0.2, 0.2};
  std::size_t n_mux = 200;
  std::size_t n_trajectory = 100000;
  unsigned threads = 0;
  /// Filled with the Monte Carlo sweep rows when non-null.
  std::vector<McVerifyRow>* sweep_rows = nullptr;
};

namespace detail {

struct MaxError {
  double worst = 0.0;
  void add(double a, double b) { worst = std::max(worst, std::abs(a - b)); }
  std::string str() const { return "max |diff| = " + format_double(worst); }
};

inline MimoConfig reference_config(std::size_t m, std::size_t x) {
  MimoConfig cfg;
  cfg.m = m;
  cfg.x = x;
  cfg.eta_schedule = geometric_schedule(m, 0.4, 1.2);
  cfg.eps = 0.1;
  cfg.lambda = 0.1;
  return cfg;
}

/// 20 configurations with m <= 3: every (m, x) pair at two noise levels.
inline std::vector<MimoConfig> density_grid() {
  const std::vector<std::vector<double>> schedules = {{}, {0.3}, {0.45, 0.2}, {0.4, 1.0 / 3.0, 0.4 / 1.44}};
  const double noise[][2] = {{0.1, 0.1}, {0.3, 0.05}};
  std::vector<MimoConfig> grid;
  for (std::size_t m = 1; m <= 3; ++m) {
    for (std::size_t x = 0; x <= m; ++x) {
      for (const auto& n : noise) {
        MimoConfig cfg;
        cfg.m = m;
        cfg.x = x;
        cfg.eta_schedule = schedules[m];
        cfg.eps = n[0];
        cfg.lambda = n[1];
        grid.push_back(cfg);
      }
    }
  }
  // m = 0: a single channel, no crosstalk.
  for (const auto& n : noise) {
    MimoConfig cfg;
    cfg.m = 0;
    cfg.eps = n[0];
    cfg.lambda = n[1];
    grid.push_back(cfg);
  }
  return grid;
}

}  // namespace detail

inline std::vector<CheckResult> run_self_checks(const VerifyOptions& opts) {
  std::vector<CheckResult> results;
  auto check = [&](std::string name, const std::function<std::pair<bool, std::string>()>& body) {
    CheckResult r{std::move(name), false, {}};
    try {
      auto [ok, detail] = body();
      r.passed = ok;
      r.detail = std::move(detail);
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(r));
  };
  const Rng root(opts.seed, 0);

  check("partial trace inverts tensor product", [&] {
    Rng rng = root.derive(1);
    detail::MaxError err;
    for (int t = 0; t < 20; ++t) {
      const auto a = random_density_matrix(2, rng);
      const auto b = random_density_matrix(4, rng);
      const std::size_t keep_a[] = {0};
      const std::size_t dims[] = {2, 4};
      const auto back = partial_trace(tensor_product(a, b), keep_a, dims);
      err.worst = std::max(err.worst, (back.matrix() - a.matrix()).cwiseAbs().maxCoeff());
    }
    return std::pair{err.worst <= kAlgebraicTol, err.str()};
  });

  check("symmetric projector is idempotent with trace M+1", [&] {
    double worst = 0.0;
    for (std::size_t m = 1; m <= 4; ++m) {
      const Matrix p = sym_projector(m);
      worst = std::max(worst, (p * p - p).cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(p.trace().real() - static_cast<double>(m + 1)));
    }
    return std::pair{worst <= kAlgebraicTol, "max residue = " + format_double(worst)};
  });

  check("Haar first moment is I/2", [&] {
    Rng rng = root.derive(2);
    Matrix acc = Matrix::Zero(2, 2);
    const int n = 10000;
    for (int i = 0; i < n; ++i) acc += haar_state(2, rng).projector().matrix();
    const double td = trace_distance(DensityMatrix::unchecked(acc / n), DensityMatrix::maximally_mixed(2));
    return std::pair{td <= 0.02, "trace distance = " + format_double(td)};
  });

  check("Fredkin dilation equals mixture crosstalk", [&] {
    Rng rng = root.derive(3);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const auto rho = random_density_matrix(4, rng);
      for (int k = 0; k < 10; ++k) {
        const double eta = k / 9.0;
        const auto a = crosstalk_dilation(rho, eta);
        const auto b = crosstalk_mixture(rho, eta, {0, 1}, {1, 1});
        worst = std::max(worst, (a.matrix() - b.matrix()).cwiseAbs().maxCoeff());
      }
    }
    return std::pair{worst <= kAlgebraicTol, "max entry diff = " + format_double(worst)};
  });

  check("clone marginals follow (2M+1)/(3M)", [&] {
    Rng rng = root.derive(4);
    detail::MaxError err;
    for (std::size_t m : {1, 2, 3, 4, 8}) {
      for (int t = 0; t < (m == 8 ? 3 : 20); ++t) {
        const PureState psi = haar_state(2, rng);
        const CloneBatch batch = clone_1toM(psi, m);
        err.add(fidelity_pure(batch.marginal(m - 1), psi), clone_fidelity_law(m));
      }
    }
    return std::pair{err.worst <= kTraceTol, err.str()};
  });

  check("1->2 projection cloner equals the explicit two-clone state", [&] {
    Rng rng = root.derive(5);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const PureState psi = haar_state(2, rng);
      worst = std::max(worst, (clone_1toM(psi, 2).joint.matrix() - clone_1to2(psi).joint.matrix()).cwiseAbs().maxCoeff());
    }
    return std::pair{worst <= kAlgebraicTol, "max entry diff = " + format_double(worst)};
  });

  check("2x2 density engine matches closed forms", [&] {
    Rng rng = root.derive(6);
    detail::MaxError err;
    for (int t = 0; t < 100; ++t) {
      const ChannelParams p{rng.uniform(), rng.uniform(), rng.uniform()};
      const PureState psi = haar_state(2, rng);
      const auto mux = simulate_2x2_mux_deterministic(psi, p);
      err.add(mux.f11, 0.5 * (1 - p.eps) * (1 + (1 - p.eta) * (1 - p.lambda)));
      err.add(*mux.f12, 0.5 * (1 - p.eps) * (1 + p.eta * (1 - p.lambda)));
      err.add(simulate_2x2_div(psi, p).report.f11, (1 - p.eps * p.eps) * (5.0 / 6.0 - p.lambda / 3.0));
    }
    return std::pair{err.worst <= kTraceTol, err.str()};
  });

  check("general formula reduces to the 2x2 formulas", [&] {
    Rng rng = root.derive(7);
    detail::MaxError err;
    for (int t = 0; t < 30; ++t) {
      const ChannelParams p{rng.uniform(), rng.uniform(), rng.uniform()};
      MimoConfig cfg{1, 0, {p.eta}, p.eps, p.lambda, false};
      err.add(analytic_general_fidelity(cfg).f11, analytic_mux_fidelity(p).f11);
      cfg.x = 1;
      err.add(analytic_general_fidelity(cfg).f11, analytic_div_fidelity(p).f11);
    }
    return std::pair{err.worst <= 1e-14, err.str()};
  });

  check("density engine matches general formula (m <= 3)", [&] {
    Rng rng = root.derive(8);
    detail::MaxError err;
    for (const auto& cfg : detail::density_grid()) {
      const PureState psi = haar_state(2, rng);
      err.add(simulate_general_density(cfg, psi).f11, analytic_general_fidelity(cfg).f11);
    }
    return std::pair{err.worst <= kTraceTol, err.str()};
  });

  check("trajectory engine within 3 stderr of general formula (m <= 7)", [&] {
    double worst_z = 0.0;
    std::uint64_t stream = 100;
    for (std::size_t m = 1; m <= 7; ++m) {
      for (std::size_t x : {std::size_t{0}, m / 2, m}) {
        const auto cfg = detail::reference_config(m, x);
        const auto est = trajectory_estimate(cfg, opts.n_trajectory, root.derive(stream++), {opts.threads});
        const double diff = std::abs(est.f11 - analytic_general_fidelity(cfg).f11);
        const double se = *est.std_error;
        const double z = se > 0 ? diff / se : (diff == 0 ? 0.0 : INFINITY);
        worst_z = std::max(worst_z, z);
      }
    }
    return std::pair{worst_z <= 3.0, "max |z| = " + format_double(worst_z)};
  });

  check("diversity fidelity ignores crosstalk", [&] {
    Rng rng = root.derive(9);
    const PureState psi = haar_state(2, rng);
    detail::MaxError err;
    const double ref2 = simulate_2x2_div(psi, {0.0, 0.2, 0.2}).report.f11;
    MimoConfig cfg{2, 1, {0.0, 0.2}, 0.1, 0.1, true};
    const double ref4 = simulate_general_density(cfg, psi).f11;
    for (double eta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      err.add(simulate_2x2_div(psi, {eta, 0.2, 0.2}).report.f11, ref2);
      cfg.eta_schedule[0] = eta;
      err.add(simulate_general_density(cfg, psi).f11, ref4);
    }
    return std::pair{err.worst <= kAlgebraicTol, err.str()};
  });

  check("DMT curve shape", [&] {
    bool ok = true;
    for (std::size_t m = 1; m <= 7; ++m) {
      const auto curve = dmt_sweep(m, 0.1, 0.1, 0.4, 1.2);
      for (std::size_t i = 1; i < curve.size(); ++i) ok = ok && curve[i].fidelity >= curve[i - 1].fidelity;
      const auto quiet = dmt_sweep(m, 0.0, 0.0, 0.0, 1.2, true);
      for (std::size_t i = 0; i < quiet.size(); ++i) {
        ok = ok && std::abs(quiet[i].fidelity - clone_fidelity_law(quiet[i].diversity_order)) <= kAlgebraicTol;
        if (i) ok = ok && quiet[i].fidelity < quiet[i - 1].fidelity;
      }
    }
    return std::pair{ok, std::string(ok ? "noisy: non-decreasing; noiseless: strictly decreasing" : "shape violated")};
  });

  check("diversity-gain region covers 94-96% of the 200^3 grid", [&] {
    const RegionResult r = region_scan(GridSpec{}, {}, opts.threads);
    return std::pair{r.fraction >= 0.94 && r.fraction <= 0.96, "fraction = " + format_double(r.fraction)};
  });

  check("Monte Carlo sweeps agree with closed forms", [&] {
    const auto rows = mc_verify(opts.base, opts.n_mux, root.derive(10), opts.threads);
    double worst_z = 0.0;
    double worst_div = 0.0;
    for (std::size_t i = 0; i < rows.size(); i += 4) {
      const auto& mux_exact = rows[i];
      const auto& mux_mc = rows[i + 1];
      const auto& div_exact = rows[i + 2];
      const auto& div_sim = rows[i + 3];
      const double diff = std::abs(mux_mc.fidelity - mux_exact.fidelity);
      const double se = *mux_mc.std_error;
      if (diff > kAlgebraicTol) worst_z = std::max(worst_z, se > 0 ? diff / se : INFINITY);
      worst_div = std::max(worst_div, std::abs(div_sim.fidelity - div_exact.fidelity));
    }
    if (opts.sweep_rows) *opts.sweep_rows = rows;
    std::ostringstream detail;
    detail << "mux max |z| = " << format_double(worst_z) << ", div " << "max |diff| = " << format_double(worst_div);
    return std::pair{worst_z <= 3.0 && worst_div <= kTraceTol, detail.str()};
  });

  return results;
}

inline void print_check_table(std::ostream& os, const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    os << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  (" << r.detail << ")\n";
  }
}

}  // namespace qmimo
