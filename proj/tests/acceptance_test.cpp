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

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qmimo/cli.hpp"
#include "qmimo/qmimo.hpp"

using namespace qmimo;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double mux_oracle(double eta, double eps, double lambda) {
  return 0.5 * (1.0 - eps) * (1.0 + (1.0 - eta) * (1.0 - lambda));
}

double div_oracle(double eps, double lambda) { return (1.0 - eps * eps) * (5.0 / 6.0 - lambda / 3.0); }

double general_oracle(const MimoConfig& c) {
  double big_x = 1.0 - c.lambda;
  for (std::size_t i = c.x; i < c.m; ++i) big_x *= 1.0 - c.eta_schedule[i];
  const double k = std::pow(2.0, static_cast<double>(c.x));
  return (1.0 - std::pow(c.eps, k)) * (big_x * (2.0 * k + 1.0) / (3.0 * k) + 0.5 * (1.0 - big_x));
}

MimoConfig make_config(std::size_t m, std::size_t x, std::vector<double> schedule, double eps, double lambda) {
  MimoConfig c;
  c.m = m;
  c.x = x;
  c.eta_schedule = std::move(schedule);
  c.eps = eps;
  c.lambda = lambda;
  return c;
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct CliRun {
  int code;
  std::string out;
};

CliRun cli_run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::main_entry(args, out, err);
  return {code, out.str()};
}

// 1. Region fraction on the 200^3 grid, under a minute.
Outcome region_reproduction() {
  const auto t0 = Clock::now();
  const CliRun r = cli_run({"region", "--points-per-axis", "200"});
  const double elapsed = seconds_since(t0);
  if (r.code != 0) return {false, "region exited with " + std::to_string(r.code)};
  const auto j = nlohmann::json::parse(r.out);
  const double fraction = j["fraction"].get<double>();
  const auto points = j["grid_points"].get<std::uint64_t>();
  const bool ok = fraction >= 0.94 && fraction <= 0.96 && points == 8000000u && elapsed < 60.0;
  return {ok, "fraction = " + format_double(fraction) + " over " + std::to_string(points) + " points in " +
                  num(elapsed) + " s"};
}

// 2. Density engine against the two closed forms at 100 random points.
Outcome two_by_two_cross_check() {
  const auto t0 = Clock::now();
  Rng rng(2002, 0);
  double worst_mux = 0.0;
  double worst_div = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double eta = rng.uniform();
    const double eps = rng.uniform();
    const double lambda = rng.uniform();
    const PureState psi = haar_state(2, rng);
    const auto mux = simulate_2x2_mux_deterministic(psi, {eta, eps, lambda});
    worst_mux = std::max(worst_mux, std::abs(mux.f11 - mux_oracle(eta, eps, lambda)));
    const auto div = simulate_2x2_div(psi, {eta, eps, lambda}).report;
    worst_div = std::max(worst_div, std::abs(div.f11 - div_oracle(eps, lambda)));
  }
  return {worst_mux <= 1e-10 && worst_div <= 1e-10,
          "max |diff| mux = " + num(worst_mux) + ", div = " + num(worst_div) + ", " + num(seconds_since(t0)) + " s"};
}

// 3. Parameter sweeps: Monte Carlo mux within 3 stderr, cloning exact.
Outcome sweep_regeneration() {
  // Same stream the verify command uses for its sweep.
  const auto rows = mc_verify({0.2, 0.2, 0.2}, 200, Rng(42, 0).derive(10));
  bool ok = rows.size() == 3 * kSweepPoints * 4;
  double worst_z = 0.0;
  double worst_div = 0.0;
  std::size_t outside = 0;
  for (std::size_t i = 0; i + 3 < rows.size(); i += 4) {
    const auto& mux_exact = rows[i];
    const auto& mux_mc = rows[i + 1];
    const auto& div_exact = rows[i + 2];
    const auto& div_sim = rows[i + 3];
    // Parameters not being swept stay at 0.2.
    ok = ok && std::abs(mux_exact.fidelity - mux_oracle(mux_exact.swept_param == "eta" ? mux_exact.value : 0.2,
                                                         mux_exact.swept_param == "eps" ? mux_exact.value : 0.2,
                                                         mux_exact.swept_param == "lambda" ? mux_exact.value : 0.2)) <=
                       1e-14;
    ok = ok && *mux_mc.n_samples == 200 && *div_sim.n_samples == 1 && *div_sim.std_error == 0.0;
    const double diff = std::abs(mux_mc.fidelity - mux_exact.fidelity);
    // A zero-variance point (the second input never reaches port 1) is exact up to rounding.
    if (diff > 1e-12) {
      const double z = diff / *mux_mc.std_error;
      worst_z = std::max(worst_z, z);
      if (z > 3.0) ++outside;
    }
    worst_div = std::max(worst_div, std::abs(div_sim.fidelity - div_exact.fidelity));
  }
  ok = ok && outside == 0 && worst_div <= 1e-10;
  return {ok, "mux points outside 3 stderr = " + std::to_string(outside) + " (max |z| = " + num(worst_z) +
                  "), cloning max |diff| = " + num(worst_div)};
}

// 4. General formula reduces to the 2x2 formulas.
Outcome general_reductions() {
  Rng rng(2004, 0);
  double worst = 0.0;
  for (int t = 0; t < 30; ++t) {
    const double eta = rng.uniform();
    const double eps = rng.uniform();
    const double lambda = rng.uniform();
    worst = std::max(worst, std::abs(analytic_general_fidelity(make_config(1, 0, {eta}, eps, lambda)).f11 -
                                     mux_oracle(eta, eps, lambda)));
    worst = std::max(worst, std::abs(analytic_general_fidelity(make_config(1, 1, {eta}, eps, lambda)).f11 -
                                     div_oracle(eps, lambda)));
  }
  return {worst <= 1e-14, "max |diff| = " + num(worst)};
}

// 5. Density, trajectory and closed form agree.
Outcome engine_triangle() {
  Rng rng(2005, 0);
  double worst_density = 0.0;
  std::size_t configs = 0;
  const std::vector<std::vector<double>> schedules = {{0.3}, {0.45, 0.2}, {0.4, 0.4 / 1.2, 0.4 / 1.44}};
  for (std::size_t m = 1; m <= 3; ++m) {
    for (std::size_t x = 0; x <= m; ++x) {
      for (auto [eps, lambda] : {std::pair{0.1, 0.1}, std::pair{0.3, 0.05}}) {
        const auto cfg = make_config(m, x, schedules[m - 1], eps, lambda);
        worst_density =
            std::max(worst_density, std::abs(simulate_general_density(cfg, haar_state(2, rng)).f11 -
                                             general_oracle(cfg)));
        ++configs;
      }
    }
  }
  for (auto [eps, lambda] : {std::pair{0.1, 0.1}, std::pair{0.3, 0.05}}) {
    const auto cfg = make_config(0, 0, {}, eps, lambda);
    worst_density =
        std::max(worst_density, std::abs(simulate_general_density(cfg, haar_state(2, rng)).f11 - general_oracle(cfg)));
    ++configs;
  }

  double worst_z = 0.0;
  std::size_t runs = 0;
  bool reference_seen = false;
  for (std::size_t m = 1; m <= 7; ++m) {
    std::vector<std::size_t> xs = {0, m / 2, m};
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (std::size_t x : xs) {
      const auto cfg = make_config(m, x, geometric_schedule(m, 0.4, 1.2), 0.1, 0.1);
      const auto r = trajectory_estimate(cfg, 100000, Rng(2005, 100 + runs));
      const double diff = std::abs(r.f11 - general_oracle(cfg));
      if (diff > 1e-12) worst_z = std::max(worst_z, diff / *r.std_error);
      reference_seen = reference_seen || (m == 3 && x == 1);
      ++runs;
    }
  }
  const bool ok = configs == 20 && worst_density <= 1e-10 && worst_z <= 3.0 && reference_seen;
  return {ok, std::to_string(configs) + " density configs max |diff| = " + num(worst_density) + "; " +
                  std::to_string(runs) + " trajectory runs max |z| = " + num(worst_z)};
}

// 6. DMT curve shape.
Outcome dmt_shape() {
  bool ok = true;
  for (std::size_t m = 1; m <= 7; ++m) {
    const auto noisy = dmt_sweep(m, 0.1, 0.1, 0.4, 1.2);
    for (std::size_t x = 1; x <= m; ++x) ok = ok && noisy[x].fidelity >= noisy[x - 1].fidelity;
    const auto quiet = dmt_sweep(m, 0.0, 0.0, 0.0, 1.2, true);
    for (std::size_t x = 0; x <= m; ++x) {
      const double k = std::pow(2.0, static_cast<double>(x));
      ok = ok && std::abs(quiet[x].fidelity - (2.0 * k + 1.0) / (3.0 * k)) <= 1e-14;
      if (x > 0) ok = ok && quiet[x].fidelity < quiet[x - 1].fidelity;
    }
  }
  return {ok, "m = 1..7"};
}

// 7. Cloning laws.
Outcome cloning_laws() {
  Rng rng(2007, 0);
  double worst_law = 0.0;
  for (std::size_t m : {1u, 2u, 3u, 4u, 8u}) {
    const double law = (2.0 * m + 1.0) / (3.0 * m);
    for (int t = 0; t < 20; ++t) {
      const PureState psi = haar_state(2, rng);
      worst_law = std::max(worst_law, std::abs(fidelity_pure(clone_1toM(psi, m).marginal(0), psi) - law));
    }
  }
  double worst_state = 0.0;
  for (int t = 0; t < 20; ++t) {
    const PureState psi = haar_state(2, rng);
    const Vector& a = psi.amplitudes();
    const Vector b = orthogonal_complement(psi).amplitudes();
    const Vector aa = kron(a, a);
    const Vector sym = kron(a, b) + kron(b, a);
    const Matrix expected = (2.0 / 3.0) * aa * aa.adjoint() + (1.0 / 6.0) * sym * sym.adjoint();
    worst_state = std::max(worst_state, (clone_1to2(psi).joint.matrix() - expected).cwiseAbs().maxCoeff());
  }
  return {worst_law <= 1e-10 && worst_state <= 1e-12,
          "law max |diff| = " + num(worst_law) + ", two-clone state max entry diff = " + num(worst_state)};
}

// 8. Controlled-swap dilation equals the mixture.
Outcome dilation_equivalence() {
  Rng rng(2008, 0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const DensityMatrix rho = random_density_matrix(4, rng);
    for (int k = 0; k < 10; ++k) {
      const double eta = k / 9.0;
      worst = std::max(worst, (crosstalk_dilation(rho, eta).matrix() -
                               crosstalk_mixture(rho, eta, {0, 1}, {1, 1}).matrix())
                                  .cwiseAbs()
                                  .maxCoeff());
    }
  }
  return {worst <= 1e-12, "max entry diff = " + num(worst)};
}

// 9. Diversity ignores crosstalk it cannot see.
Outcome symmetry_no_ops() {
  Rng rng(2009, 0);
  const PureState psi = haar_state(2, rng);
  const double etas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  const double ref2 = simulate_2x2_div(psi, {0.0, 0.2, 0.2}).report.f11;
  // eta_0 sweeps through values at or below eta_1, so the ordering check is off.
  auto layered = make_config(2, 1, {0.0, 0.2}, 0.2, 0.2);
  layered.allow_any_schedule = true;
  const double ref4 = simulate_general_density(layered, psi).f11;
  double worst = 0.0;
  for (double eta : etas) {
    worst = std::max(worst, std::abs(simulate_2x2_div(psi, {eta, 0.2, 0.2}).report.f11 - ref2));
    layered.eta_schedule[0] = eta;
    worst = std::max(worst, std::abs(simulate_general_density(layered, psi).f11 - ref4));
  }
  return {worst <= 1e-12, "max |diff| = " + num(worst)};
}

// 10. Same seed, same bytes.
Outcome determinism() {
  const std::vector<std::vector<std::string>> commands = {
      {"fidelity", "--mode", "general", "--m", "3", "--x", "1", "--eps", "0.1", "--lambda", "0.1", "--eta0", "0.4",
       "--decay", "1.2"},
      {"simulate", "--mode", "mux", "--eta", "0.2", "--eps", "0.2", "--lambda", "0.2", "--n-samples", "200"},
      {"simulate", "--mode", "div", "--eps", "0.2", "--lambda", "0.2"},
      {"simulate", "--mode", "general", "--engine", "density", "--m", "3", "--x", "1", "--eps", "0.1", "--lambda",
       "0.1", "--eta0", "0.4", "--decay", "1.2"},
      {"simulate", "--mode", "general", "--engine", "trajectory", "--m", "7", "--x", "3", "--eps", "0.1", "--lambda",
       "0.1", "--eta0", "0.4", "--decay", "1.2"},
      {"region", "--points-per-axis", "200"},
      {"dmt", "--m", "7", "--eps", "0.1", "--lambda", "0.1", "--eta0", "0.4", "--decay", "1.2"},
      {"verify"},
  };
  std::size_t identical = 0;
  for (const auto& cmd : commands) {
    const CliRun a = cli_run(cmd);
    const CliRun b = cli_run(cmd);
    if (a.code == b.code && a.out == b.out && !a.out.empty()) ++identical;
  }
  return {identical == commands.size(),
          std::to_string(identical) + "/" + std::to_string(commands.size()) + " commands byte-identical"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"region reproduction", region_reproduction},
      {"2x2 closed-form cross-check", two_by_two_cross_check},
      {"Monte Carlo sweep regeneration", sweep_regeneration},
      {"general-formula reductions", general_reductions},
      {"engine triangle", engine_triangle},
      {"DMT curve shape", dmt_shape},
      {"cloning laws", cloning_laws},
      {"dilation equivalence", dilation_equivalence},
      {"symmetry no-ops", symmetry_no_ops},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << (i + 1) << "] " << criteria[i].first << "  (" << o.detail
              << ")" << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
