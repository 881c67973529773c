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

// Link noise for the MIMO model: crosstalk, erasure and depolarizing maps.
//
// Erasure is carried as a classical branch label rather than an extra Hilbert
// space level. A BranchEnsemble is a probability mixture of erasure patterns;
// each branch holds the quantum state of its surviving modes only, in
// ascending mode order.

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qmimo/errors.hpp"
#include "qmimo/tensor.hpp"

namespace qmimo {

/// The (eta, eps, lambda) triple: crosstalk strength, erasure probability,
/// depolarizing strength.
struct ChannelParams {
  double eta = 0.0;
  double eps = 0.0;
  double lambda = 0.0;

  void validate() const {
    require_unit_interval("eta", eta);
    require_unit_interval("eps", eps);
    require_unit_interval("lambda", lambda);
  }
};

/// Contiguous run of modes [first, first + count).
struct ModeRange {
  std::size_t first = 0;
  std::size_t count = 0;

  std::size_t end() const noexcept { return first + count; }
  bool contains(std::size_t mode) const noexcept { return mode >= first && mode < end(); }
};

using ErasureMask = std::uint32_t;

struct Branch {
  double prob = 1.0;
  ErasureMask erased = 0;  // bit k set: mode k erased
  DensityMatrix state;     // over surviving modes, ascending

  bool is_erased(std::size_t mode) const noexcept { return (erased >> mode) & 1U; }
};

class BranchEnsemble {
 public:
  /// Single unerased branch holding `state` over all of its modes.
  explicit BranchEnsemble(DensityMatrix state) : n_modes_(state.num_qubits()) {
    if (n_modes_ > 32) throw CapacityError("at most 32 modes per ensemble");
    branches_.push_back(Branch{1.0, 0, std::move(state)});
  }

  BranchEnsemble(std::size_t n_modes, std::vector<Branch> branches)
      : n_modes_(n_modes), branches_(std::move(branches)) {}

  std::size_t n_modes() const noexcept { return n_modes_; }
  const std::vector<Branch>& branches() const noexcept { return branches_; }
  std::size_t size() const noexcept { return branches_.size(); }

  double total_probability() const {
    double total = 0.0;
    for (const auto& b : branches_) total += b.prob;
    return total;
  }

  bool is_valid(std::string* why = nullptr) const {
    auto fail = [&](std::string msg) {
      if (why) *why = std::move(msg);
      return false;
    };
    for (const auto& b : branches_) {
      if (b.prob < 0.0) return fail("negative branch probability");
      const auto surviving = n_modes_ - static_cast<std::size_t>(std::popcount(b.erased));
      if (b.state.dim() != (std::size_t{1} << surviving)) return fail("branch state dim mismatch");
      std::string inner;
      if (!b.state.is_valid(&inner)) return fail("branch state: " + inner);
    }
    if (std::abs(total_probability() - 1.0) > kTraceTol) return fail("probabilities do not sum to 1");
    return true;
  }

 private:
  std::size_t n_modes_;
  std::vector<Branch> branches_;
};

namespace detail {

/// Position of `mode` among the surviving modes of a branch.
inline std::size_t local_position(ErasureMask erased, std::size_t mode) {
  const ErasureMask below = (ErasureMask{1} << mode) - 1U;
  return mode - static_cast<std::size_t>(std::popcount(erased & below));
}

inline void check_mode(const BranchEnsemble& ens, std::size_t mode) {
  if (mode >= ens.n_modes()) {
    throw DimensionError("mode " + std::to_string(mode) + " out of range for " +
                         std::to_string(ens.n_modes()) + " modes");
  }
}

/// Traces qubit `pos` out of an n-qubit state.
inline DensityMatrix drop_qubit(const DensityMatrix& rho, std::size_t pos) {
  const std::size_t n = rho.num_qubits();
  if (n == 1) return DensityMatrix::scalar_one();
  std::vector<std::size_t> keep;
  keep.reserve(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    if (k != pos) keep.push_back(k);
  }
  return partial_trace_qubits(rho, keep);
}

/// Replaces qubit `pos` of `rho` by I/2: pi_pos (x) Tr_pos(rho), re-interleaved.
inline Matrix replace_with_mixed(const DensityMatrix& rho, std::size_t pos) {
  const std::size_t n = rho.num_qubits();
  const DensityMatrix reduced = drop_qubit(rho, pos);
  const std::size_t bit = mode_bit(n, pos);
  const std::size_t low_mask = (std::size_t{1} << bit) - 1U;
  auto squeeze = [&](std::size_t idx) { return ((idx >> (bit + 1)) << bit) | (idx & low_mask); };
  const auto dim = static_cast<Eigen::Index>(rho.dim());
  Matrix out = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      if (((ui >> bit) & 1U) != ((uj >> bit) & 1U)) continue;
      out(i, j) = 0.5 * reduced(squeeze(ui), squeeze(uj));
    }
  }
  return out;
}

}  // namespace detail

/// Erasure channel on one mode. Each branch in which `mode` survives splits
/// into a (1 - eps) copy and an eps copy with the mode erased and traced out.
/// Only eps == 0 skips the split, so branch counts do not depend on rounding.
inline BranchEnsemble erase(const BranchEnsemble& ens, double eps, std::size_t mode) {
  require_unit_interval("eps", eps);
  detail::check_mode(ens, mode);
  if (eps == 0.0) return ens;
  std::vector<Branch> out;
  out.reserve(2 * ens.size());
  const ErasureMask flag = ErasureMask{1} << mode;
  for (const auto& b : ens.branches()) {
    if (b.is_erased(mode)) {
      out.push_back(b);
      continue;
    }
    out.push_back(Branch{b.prob * (1.0 - eps), b.erased, b.state});
    out.push_back(Branch{b.prob * eps, b.erased | flag,
                         detail::drop_qubit(b.state, detail::local_position(b.erased, mode))});
  }
  return BranchEnsemble(ens.n_modes(), std::move(out));
}

/// Depolarizing channel on one mode: rho -> (1 - lambda) rho + lambda (mode replaced by I/2).
/// Branches where the mode was erased are left alone.
inline BranchEnsemble depolarize(const BranchEnsemble& ens, double lambda, std::size_t mode) {
  require_unit_interval("lambda", lambda);
  detail::check_mode(ens, mode);
  std::vector<Branch> out;
  out.reserve(ens.size());
  for (const auto& b : ens.branches()) {
    if (b.is_erased(mode) || lambda == 0.0) {
      out.push_back(b);
      continue;
    }
    const std::size_t pos = detail::local_position(b.erased, mode);
    Matrix m = (1.0 - lambda) * b.state.matrix() + lambda * detail::replace_with_mixed(b.state, pos);
    out.push_back(Branch{b.prob, b.erased, DensityMatrix::unchecked(std::move(m))});
  }
  return BranchEnsemble(ens.n_modes(), std::move(out));
}

/// Crosstalk between two equal-size disjoint blocks of modes:
/// (1 - eta) rho + eta S rho S^dagger with S the block swap.
inline DensityMatrix crosstalk_mixture(const DensityMatrix& rho, double eta, ModeRange block_a,
                                       ModeRange block_b) {
  require_unit_interval("eta", eta);
  const std::size_t n = rho.num_qubits();
  if (block_a.count == 0 || block_a.count != block_b.count) {
    throw DimensionError("crosstalk blocks must be non-empty and of equal size");
  }
  if (block_a.end() > n || block_b.end() > n) throw DimensionError("crosstalk block out of range");
  if (block_a.first < block_b.end() && block_b.first < block_a.end()) {
    throw DimensionError("crosstalk blocks overlap");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < n; ++k) perm[k] = k;
  for (std::size_t k = 0; k < block_a.count; ++k) {
    std::swap(perm[block_a.first + k], perm[block_b.first + k]);
  }
  const DensityMatrix swapped = permute_modes(rho, perm);
  return mix(1.0 - eta, rho, swapped);
}

/// Two-qubit crosstalk built from its physical dilation: an environment control
/// qubit in sqrt(1 - eta)|0> + sqrt(eta)|1> drives a Fredkin gate, then is
/// traced out.
inline DensityMatrix crosstalk_dilation(const DensityMatrix& rho, double eta) {
  require_unit_interval("eta", eta);
  if (rho.dim() != 4) throw DimensionError("crosstalk dilation acts on two-qubit states");
  Vector c(2);
  c(0) = std::sqrt(1.0 - eta);
  c(1) = std::sqrt(eta);
  const DensityMatrix control = PureState::normalized(c).projector();
  const DensityMatrix joint = tensor_product(control, rho);

  // Fredkin with the control as mode 0: swaps |1 0 1> and |1 1 0>.
  Matrix fredkin = Matrix::Identity(8, 8);
  fredkin(5, 5) = 0.0;
  fredkin(6, 6) = 0.0;
  fredkin(5, 6) = 1.0;
  fredkin(6, 5) = 1.0;

  const DensityMatrix evolved = DensityMatrix::unchecked(fredkin * joint.matrix() * fredkin.adjoint());
  const std::size_t keep[] = {1, 2};
  return partial_trace_qubits(evolved, keep);
}

struct CrosstalkStage {
  double eta;
  ModeRange block_a;
  ModeRange block_b;
};

struct ErasureStage {
  double eps;
  std::size_t mode;
};

struct DepolarizingStage {
  double lambda;
  std::size_t mode;
};

using Stage = std::variant<CrosstalkStage, ErasureStage, DepolarizingStage>;

/// Lifts crosstalk to an ensemble. Only defined before any erasure.
inline BranchEnsemble apply_crosstalk(const BranchEnsemble& ens, const CrosstalkStage& stage) {
  std::vector<Branch> out;
  out.reserve(ens.size());
  for (const auto& b : ens.branches()) {
    if (b.erased != 0) throw OrderingError("crosstalk must precede erasure in a pipeline");
    out.push_back(Branch{b.prob, 0, crosstalk_mixture(b.state, stage.eta, stage.block_a, stage.block_b)});
  }
  return BranchEnsemble(ens.n_modes(), std::move(out));
}

/// Applies `stages` left to right.
inline BranchEnsemble apply_pipeline(BranchEnsemble ens, std::span<const Stage> stages) {
  for (const auto& stage : stages) {
    ens = std::visit(
        [&](const auto& s) -> BranchEnsemble {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, CrosstalkStage>) {
            return apply_crosstalk(ens, s);
          } else if constexpr (std::is_same_v<S, ErasureStage>) {
            return erase(ens, s.eps, s.mode);
          } else {
            return depolarize(ens, s.lambda, s.mode);
          }
        },
        stage);
  }
  return ens;
}

/// Per-link loss then noise on every mode: all erasures first, then all
/// depolarizing maps.
inline std::vector<Stage> link_noise_stages(std::size_t n_modes, double eps, double lambda) {
  std::vector<Stage> stages;
  stages.reserve(2 * n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) stages.emplace_back(ErasureStage{eps, k});
  for (std::size_t k = 0; k < n_modes; ++k) stages.emplace_back(DepolarizingStage{lambda, k});
  return stages;
}

/// Single-mode marginal of a branch. Requires the mode to survive.
inline DensityMatrix branch_marginal(const Branch& b, std::size_t mode) {
  if (b.is_erased(mode)) throw std::invalid_argument("marginal of an erased mode");
  const std::size_t keep[] = {detail::local_position(b.erased, mode)};
  if (b.state.dim() == 2) return b.state;
  return partial_trace_qubits(b.state, keep);
}

}  // namespace qmimo
