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

// Dense complex linear algebra for small multi-qubit registers.
//
// Index convention: subsystem 0 is the most significant tensor factor. For an
// n-qubit register, mode k occupies bit (n - 1 - k) of a basis index, so
// |b0 b1 ... b(n-1)> has index b0 * 2^(n-1) + ... + b(n-1).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qmimo/errors.hpp"

namespace qmimo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kAlgebraicTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;

/// Largest register the dense engines will build: 8 qubits, dim 256.
inline constexpr std::size_t kMaxExactQubits = 8;
inline constexpr std::size_t kMaxExactDim = std::size_t{1} << kMaxExactQubits;

namespace detail {

inline std::size_t qubit_count(std::size_t dim) {
  if (dim == 0 || !std::has_single_bit(dim)) {
    throw DimensionError("dimension " + std::to_string(dim) + " is not a power of two");
  }
  return static_cast<std::size_t>(std::countr_zero(dim));
}

inline std::size_t mode_bit(std::size_t n_modes, std::size_t mode) {
  return n_modes - 1 - mode;
}

}  // namespace detail

class DensityMatrix;

/// Normalized complex amplitude vector.
class PureState {
 public:
  /// Takes amplitudes that are already normalized (squared norm 1 within 1e-12).
  static PureState from_amplitudes(Vector amplitudes) {
    if (amplitudes.size() == 0) throw DimensionError("empty state vector");
    const double norm2 = amplitudes.squaredNorm();
    if (std::abs(norm2 - 1.0) > kAlgebraicTol) {
      throw std::invalid_argument("state vector is not normalized (|psi|^2 = " +
                                  std::to_string(norm2) + ")");
    }
    return PureState(std::move(amplitudes));
  }

  static PureState normalized(Vector amplitudes) {
    const double norm = amplitudes.norm();
    if (amplitudes.size() == 0 || norm == 0.0) {
      throw std::invalid_argument("cannot normalize a zero vector");
    }
    amplitudes /= norm;
    return PureState(std::move(amplitudes));
  }

  static PureState basis(std::size_t dim, std::size_t index) {
    if (index >= dim) throw DimensionError("basis index out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return PureState(std::move(v));
  }

  const Vector& amplitudes() const noexcept { return amplitudes_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
  Complex operator[](std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }

  Complex inner(const PureState& other) const {
    if (other.dim() != dim()) throw DimensionError("inner product of states with different dims");
    return amplitudes_.dot(other.amplitudes_);  // conjugates *this
  }

  DensityMatrix projector() const;

 private:
  explicit PureState(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {}

  Vector amplitudes_;
};

/// Hermitian, positive semidefinite, unit-trace matrix.
///
/// Construction through from_matrix() checks every invariant, including an
/// eigenvalue floor of -1e-10. Internal kernels whose outputs are valid by
/// construction go through unchecked() to avoid an eigensolve per step.
class DensityMatrix {
 public:
  static DensityMatrix from_matrix(Matrix m) {
    DensityMatrix rho(std::move(m));
    std::string why;
    if (!rho.is_valid(&why)) throw std::invalid_argument("invalid density matrix: " + why);
    return rho;
  }

  static DensityMatrix unchecked(Matrix m) { return DensityMatrix(std::move(m)); }

  static DensityMatrix maximally_mixed(std::size_t dim) {
    if (dim == 0) throw DimensionError("dimension must be positive");
    const auto d = static_cast<Eigen::Index>(dim);
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(dim));
  }

  /// The 1x1 state [1]; the state of a register with no surviving modes.
  static DensityMatrix scalar_one() { return DensityMatrix(Matrix::Ones(1, 1)); }

  const Matrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  std::size_t num_qubits() const { return detail::qubit_count(dim()); }
  Complex operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  Complex trace() const { return m_.trace(); }

  bool is_valid(std::string* why = nullptr) const {
    auto fail = [&](std::string msg) {
      if (why) *why = std::move(msg);
      return false;
    };
    if (m_.rows() == 0 || m_.rows() != m_.cols()) return fail("not a non-empty square matrix");
    if (!m_.allFinite()) return fail("non-finite entries");
    const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kAlgebraicTol) return fail("not Hermitian (residue " + std::to_string(herm) + ")");
    const Complex tr = m_.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > kTraceTol) {
      return fail("trace " + std::to_string(tr.real()) + " != 1");
    }
    const Matrix h = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < -kTraceTol) return fail("negative eigenvalue " + std::to_string(min_eig));
    return true;
  }

 private:
  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}

  Matrix m_;
};

inline DensityMatrix PureState::projector() const {
  return DensityMatrix::unchecked(amplitudes_ * amplitudes_.adjoint());
}

/// Convex combination w * a + (1 - w) * b.
inline DensityMatrix mix(double w, const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionError("mixing states of different dims");
  return DensityMatrix::unchecked(w * a.matrix() + (1.0 - w) * b.matrix());
}

/// Seeded random stream. Identical (seed, stream) pairs produce identical
/// sample sequences; workers derive private streams with derive().
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Independent child stream keyed by `index`; does not advance *this.
  Rng derive(std::uint64_t index) const {
    return Rng(seed_, mix64(stream_ ^ mix64(index + 0x632be59bd9b4e019ULL)));
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Kronecker product with `a` on the most significant index.
inline DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b,
                                    std::size_t max_dim = kMaxExactDim) {
  const std::size_t da = a.dim();
  const std::size_t db = b.dim();
  if (da * db > max_dim) {
    throw CapacityError("tensor product dimension " + std::to_string(da * db) +
                        " exceeds the exact-simulation limit " + std::to_string(max_dim));
  }
  const auto n = static_cast<Eigen::Index>(da * db);
  Matrix out(n, n);
  const auto ea = static_cast<Eigen::Index>(da);
  const auto eb = static_cast<Eigen::Index>(db);
  for (Eigen::Index i = 0; i < ea; ++i) {
    for (Eigen::Index j = 0; j < ea; ++j) {
      out.block(i * eb, j * eb, eb, eb) = a.matrix()(i, j) * b.matrix();
    }
  }
  return DensityMatrix::unchecked(std::move(out));
}

/// Traces out every subsystem not listed in `keep`. Kept subsystems appear in
/// ascending index order in the result.
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep,
                                   std::span<const std::size_t> dims) {
  if (dims.empty()) throw DimensionError("no subsystem dimensions given");
  const std::size_t total =
      std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  if (total != rho.dim()) {
    throw DimensionError("subsystem dims multiply to " + std::to_string(total) +
                         " but the state has dim " + std::to_string(rho.dim()));
  }
  if (keep.empty()) throw DimensionError("partial trace must keep at least one subsystem");

  std::vector<bool> kept(dims.size(), false);
  for (std::size_t k : keep) {
    if (k >= dims.size()) throw DimensionError("kept subsystem index out of range");
    if (kept[k]) throw DimensionError("kept subsystem listed twice");
    kept[k] = true;
  }

  // Strides of each subsystem within the full index (subsystem 0 most significant).
  std::vector<std::size_t> stride(dims.size());
  std::size_t s = 1;
  for (std::size_t k = dims.size(); k-- > 0;) {
    stride[k] = s;
    s *= dims[k];
  }

  // The full index separates into (kept part) + (traced part), so precompute
  // both offset tables.
  auto offsets = [&](bool want_kept) {
    std::vector<std::size_t> table{0};
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (kept[k] != want_kept) continue;
      std::vector<std::size_t> next;
      next.reserve(table.size() * dims[k]);
      for (std::size_t base : table) {
        for (std::size_t d = 0; d < dims[k]; ++d) next.push_back(base + d * stride[k]);
      }
      table = std::move(next);
    }
    return table;
  };
  const std::vector<std::size_t> keep_off = offsets(true);
  const std::vector<std::size_t> trace_off = offsets(false);

  const auto n = static_cast<Eigen::Index>(keep_off.size());
  Matrix out = Matrix::Zero(n, n);
  const Matrix& m = rho.matrix();
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      Complex acc = 0.0;
      for (std::size_t t : trace_off) {
        acc += m(static_cast<Eigen::Index>(keep_off[a] + t), static_cast<Eigen::Index>(keep_off[b] + t));
      }
      out(a, b) = acc;
    }
  }
  return DensityMatrix::unchecked(std::move(out));
}

/// partial_trace() for an all-qubit register.
inline DensityMatrix partial_trace_qubits(const DensityMatrix& rho, std::span<const std::size_t> keep) {
  const std::vector<std::size_t> dims(rho.num_qubits(), 2);
  return partial_trace(rho, keep, dims);
}

/// <psi|rho|psi>, clamped to [0, 1] against rounding dust.
inline double fidelity_pure(const DensityMatrix& rho, const PureState& psi) {
  if (rho.dim() != psi.dim()) {
    throw DimensionError("fidelity: state dim " + std::to_string(rho.dim()) + " vs vector dim " +
                         std::to_string(psi.dim()));
  }
  const Complex f = psi.amplitudes().dot(rho.matrix() * psi.amplitudes());
  return std::clamp(f.real(), 0.0, 1.0);
}

/// Haar-random pure state: i.i.d. standard complex Gaussian amplitudes, normalized.
inline PureState haar_state(std::size_t dim, Rng& rng) {
  if (dim < 2) throw DimensionError("Haar sampling needs dim >= 2");
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v(i) = Complex(re, im);
  }
  return PureState::normalized(std::move(v));
}

/// Random full-rank mixed state G G^dagger / tr, G a complex Ginibre matrix.
inline DensityMatrix random_density_matrix(std::size_t dim, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(re, im);
    }
  }
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix::unchecked(0.5 * (rho + rho.adjoint()));
}

/// For psi = (a, b) returns (-conj(b), conj(a)).
inline PureState orthogonal_complement(const PureState& psi) {
  if (psi.dim() != 2) throw DimensionError("orthogonal complement is defined for qubits only");
  Vector v(2);
  v(0) = -std::conj(psi[1]);
  v(1) = std::conj(psi[0]);
  return PureState::from_amplitudes(std::move(v));
}

/// Maps an output basis index to the input index it reads from, where output
/// mode k carries input mode perm[k].
inline std::vector<std::size_t> permutation_index_map(std::span<const std::size_t> perm) {
  const std::size_t n = perm.size();
  const std::size_t dim = std::size_t{1} << n;
  std::vector<std::size_t> source(dim, 0);
  for (std::size_t out = 0; out < dim; ++out) {
    std::size_t in = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t bit = (out >> detail::mode_bit(n, k)) & 1U;
      in |= bit << detail::mode_bit(n, perm[k]);
    }
    source[out] = in;
  }
  return source;
}

inline void check_permutation(std::span<const std::size_t> perm) {
  std::vector<std::size_t> sorted(perm.begin(), perm.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != i) throw std::invalid_argument("not a permutation of the modes");
  }
}

/// Unitary that moves input mode perm[k] to output mode k.
inline Matrix mode_permutation_operator(std::span<const std::size_t> perm) {
  check_permutation(perm);
  const auto source = permutation_index_map(perm);
  const auto dim = static_cast<Eigen::Index>(source.size());
  Matrix p = Matrix::Zero(dim, dim);
  for (Eigen::Index out = 0; out < dim; ++out) p(out, static_cast<Eigen::Index>(source[out])) = 1.0;
  return p;
}

/// P rho P^dagger for a mode permutation, by index remapping.
inline DensityMatrix permute_modes(const DensityMatrix& rho, std::span<const std::size_t> perm) {
  if (perm.size() != rho.num_qubits()) throw DimensionError("permutation size != qubit count");
  check_permutation(perm);
  const auto source = permutation_index_map(perm);
  const auto dim = static_cast<Eigen::Index>(source.size());
  Matrix out(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      out(i, j) = rho.matrix()(static_cast<Eigen::Index>(source[i]), static_cast<Eigen::Index>(source[j]));
    }
  }
  return DensityMatrix::unchecked(std::move(out));
}

/// Projector onto the symmetric subspace of `num_qubits` qubits, built as the
/// average of all qubit-permutation operators. Trace is num_qubits + 1.
inline Matrix sym_projector(std::size_t num_qubits) {
  if (num_qubits == 0) throw DimensionError("symmetric projector needs at least one qubit");
  if (num_qubits > kMaxExactQubits) {
    throw CapacityError("symmetric projector on " + std::to_string(num_qubits) +
                        " qubits exceeds the cap of " + std::to_string(kMaxExactQubits));
  }
  std::vector<std::size_t> perm(num_qubits);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << num_qubits);
  Matrix acc = Matrix::Zero(dim, dim);
  std::size_t count = 0;
  do {
    const auto source = permutation_index_map(perm);
    for (Eigen::Index out = 0; out < dim; ++out) acc(out, static_cast<Eigen::Index>(source[out])) += 1.0;
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc / static_cast<double>(count);
}

/// Trace distance 0.5 * ||a - b||_1.
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionError("trace distance of states with different dims");
  const Matrix diff = a.matrix() - b.matrix();
  const Matrix h = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace qmimo
