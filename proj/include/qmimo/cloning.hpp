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

// Symmetric universal quantum cloning of a single qubit.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qmimo/errors.hpp"
#include "qmimo/tensor.hpp"

namespace qmimo {

/// Largest clone register built densely.
inline constexpr std::size_t kMaxExactClones = kMaxExactQubits;

/// Joint state of M clones of `source`. Only the clone register is kept; the
/// cloner's ancilla never enters the channel.
struct CloneBatch {
  DensityMatrix joint;
  std::size_t num_clones;
  PureState source;

  /// Marginal of clone `k`.
  DensityMatrix marginal(std::size_t k) const {
    if (k >= num_clones) throw DimensionError("clone index out of range");
    if (num_clones == 1) return joint;
    const std::size_t keep[] = {k};
    return partial_trace_qubits(joint, keep);
  }

  /// Support on the symmetric subspace and identical single-clone marginals.
  bool is_symmetric(double tol = kAlgebraicTol) const {
    const Matrix p = sym_projector(num_clones);
    if ((p * joint.matrix() * p - joint.matrix()).cwiseAbs().maxCoeff() > tol) return false;
    const DensityMatrix first = marginal(0);
    for (std::size_t k = 1; k < num_clones; ++k) {
      if ((marginal(k).matrix() - first.matrix()).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
  }
};

/// Per-clone fidelity of the optimal symmetric 1 -> M qubit cloner, (2M + 1) / (3M).
inline double clone_fidelity_law(std::size_t num_clones) {
  if (num_clones == 0) throw std::invalid_argument("number of clones must be at least 1");
  const double m = static_cast<double>(num_clones);
  return (2.0 * m + 1.0) / (3.0 * m);
}

/// The explicit two-clone state
///   2/3 |psi psi><psi psi| + 1/6 (|psi psi_perp> + |psi_perp psi>)(h.c.).
inline CloneBatch clone_1to2(const PureState& psi) {
  if (psi.dim() != 2) throw DimensionError("cloning acts on a single qubit");
  const PureState perp = orthogonal_complement(psi);
  const Vector& a = psi.amplitudes();
  const Vector& b = perp.amplitudes();

  Vector same(4);
  Vector sym(4);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      same(2 * i + j) = a(i) * a(j);
      sym(2 * i + j) = a(i) * b(j) + b(i) * a(j);
    }
  }
  Matrix joint = (2.0 / 3.0) * same * same.adjoint() + (1.0 / 6.0) * sym * sym.adjoint();
  return CloneBatch{DensityMatrix::unchecked(std::move(joint)), 2, psi};
}

/// Symmetric-projection cloner:
///   joint = c * P_sym (|psi><psi| (x) I^(M-1)) P_sym,
/// with c fixing the trace to 1.
inline CloneBatch clone_1toM(const PureState& psi, std::size_t num_clones) {
  if (psi.dim() != 2) throw DimensionError("cloning acts on a single qubit");
  if (num_clones == 0) throw std::invalid_argument("number of clones must be at least 1");
  if (num_clones > kMaxExactClones) {
    throw CapacityError("1 -> " + std::to_string(num_clones) + " cloning exceeds the exact cap of " +
                        std::to_string(kMaxExactClones) + " clones");
  }
  if (num_clones == 1) return CloneBatch{psi.projector(), 1, psi};

  const auto rest = static_cast<Eigen::Index>(std::size_t{1} << (num_clones - 1));
  const Matrix proj = psi.projector().matrix();
  const Eigen::Index dim = 2 * rest;
  Matrix seed = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      seed.block(i * rest, j * rest, rest, rest) = proj(i, j) * Matrix::Identity(rest, rest);
    }
  }
  const Matrix p = sym_projector(num_clones);
  Matrix joint = p * seed * p;
  joint /= joint.trace().real();
  return CloneBatch{DensityMatrix::unchecked(std::move(joint)), num_clones, psi};
}

}  // namespace qmimo
