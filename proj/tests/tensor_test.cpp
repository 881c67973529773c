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

#include "qmimo/tensor.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"

using namespace qmimo;

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

DensityMatrix ket(std::size_t dim, std::size_t index) { return PureState::basis(dim, index).projector(); }

}  // namespace

TEST(TensorProduct, basis_states) {
  const auto rho = tensor_product(ket(2, 0), ket(2, 1));
  EXPECT_LT(max_abs(rho.matrix() - ket(4, 1).matrix()), kAlgebraicTol);
}

TEST(TensorProduct, maximally_mixed_composite) {
  const auto rho = tensor_product(DensityMatrix::maximally_mixed(2), DensityMatrix::maximally_mixed(2));
  EXPECT_LT(max_abs(rho.matrix() - Matrix::Identity(4, 4) / 4.0), kAlgebraicTol);
}

TEST(TensorProduct, trace_is_multiplicative_and_output_valid) {
  Rng rng(7, 0);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_density_matrix(2, rng);
    const auto b = random_density_matrix(8, rng);
    const auto ab = tensor_product(a, b);
    EXPECT_EQ(ab.dim(), 16u);
    EXPECT_NEAR(ab.trace().real(), 1.0, kTraceTol);
    EXPECT_TRUE(ab.is_valid());
  }
}

TEST(TensorProduct, overflow_is_a_capacity_error) {
  const auto big = DensityMatrix::maximally_mixed(32);
  EXPECT_THROW(tensor_product(big, big), CapacityError);
}

TEST(PartialTrace, product_state) {
  const std::size_t keep[] = {0};
  const std::size_t dims[] = {2, 2};
  const auto reduced = partial_trace(ket(4, 1), keep, dims);
  EXPECT_LT(max_abs(reduced.matrix() - ket(2, 0).matrix()), kAlgebraicTol);
}

TEST(PartialTrace, bell_state_marginal_is_maximally_mixed) {
  Vector phi = Vector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  const auto bell = PureState::from_amplitudes(phi).projector();
  const std::size_t keep[] = {0};
  const std::size_t dims[] = {2, 2};
  const auto reduced = partial_trace(bell, keep, dims);
  EXPECT_LT(max_abs(reduced.matrix() - DensityMatrix::maximally_mixed(2).matrix()), kAlgebraicTol);
}

TEST(PartialTrace, inverts_tensor_product) {
  Rng rng(11, 0);
  for (int t = 0; t < 25; ++t) {
    const auto a = random_density_matrix(4, rng);
    const auto b = random_density_matrix(2, rng);
    const std::size_t dims[] = {4, 2};
    const std::size_t keep_a[] = {0};
    const std::size_t keep_b[] = {1};
    const auto ab = tensor_product(a, b);
    EXPECT_LT(max_abs(partial_trace(ab, keep_a, dims).matrix() - a.matrix()), kAlgebraicTol);
    EXPECT_LT(max_abs(partial_trace(ab, keep_b, dims).matrix() - b.matrix()), kAlgebraicTol);
  }
}

// Oracle: Tr_B(rho) = sum_b (I (x) <b| (x) I) rho (I (x) |b> (x) I) on a 2 x 3 x 2 register.
TEST(PartialTrace, matches_explicit_basis_sum_on_middle_subsystem) {
  Rng rng(3, 0);
  const auto rho = random_density_matrix(12, rng);
  Matrix expected = Matrix::Zero(4, 4);
  for (Eigen::Index b = 0; b < 3; ++b) {
    Matrix e = Matrix::Zero(3, 1);
    e(b, 0) = 1.0;
    const Matrix v = kron(kron(Matrix::Identity(2, 2), e), Matrix::Identity(2, 2));
    expected += v.adjoint() * rho.matrix() * v;
  }
  const std::size_t keep[] = {0, 2};
  const std::size_t dims[] = {2, 3, 2};
  const auto reduced = partial_trace(rho, keep, dims);
  EXPECT_LT(max_abs(reduced.matrix() - expected), kAlgebraicTol);
  EXPECT_TRUE(reduced.is_valid());
}

TEST(PartialTrace, rejects_inconsistent_dims) {
  const auto rho = DensityMatrix::maximally_mixed(4);
  const std::size_t keep[] = {0};
  const std::size_t bad_dims[] = {2, 3};
  const std::size_t dims[] = {2, 2};
  EXPECT_THROW(partial_trace(rho, keep, bad_dims), DimensionError);
  EXPECT_THROW(partial_trace(rho, std::span<const std::size_t>{}, dims), DimensionError);
  const std::size_t out_of_range[] = {2};
  EXPECT_THROW(partial_trace(rho, out_of_range, dims), DimensionError);
}

TEST(FidelityPure, reference_values) {
  EXPECT_DOUBLE_EQ(fidelity_pure(ket(2, 0), PureState::basis(2, 0)), 1.0);
  EXPECT_DOUBLE_EQ(fidelity_pure(DensityMatrix::maximally_mixed(2), PureState::basis(2, 0)), 0.5);
  EXPECT_DOUBLE_EQ(fidelity_pure(ket(2, 0), PureState::basis(2, 1)), 0.0);
  EXPECT_THROW(fidelity_pure(ket(4, 0), PureState::basis(2, 0)), DimensionError);
}

TEST(FidelityPure, is_linear_in_the_state) {
  Rng rng(5, 0);
  for (int t = 0; t < 50; ++t) {
    const auto r1 = random_density_matrix(4, rng);
    const auto r2 = random_density_matrix(4, rng);
    const PureState psi = haar_state(4, rng);
    const double p = rng.uniform();
    const double lhs = fidelity_pure(mix(p, r1, r2), psi);
    const double rhs = p * fidelity_pure(r1, psi) + (1 - p) * fidelity_pure(r2, psi);
    EXPECT_NEAR(lhs, rhs, kAlgebraicTol);
    const Complex raw = psi.amplitudes().dot(r1.matrix() * psi.amplitudes());
    EXPECT_LT(std::abs(raw.imag()), kAlgebraicTol);
  }
}

TEST(HaarState, normalized_and_deterministic) {
  Rng a(42, 3);
  Rng b(42, 3);
  for (int t = 0; t < 100; ++t) {
    const PureState x = haar_state(2, a);
    const PureState y = haar_state(2, b);
    EXPECT_NEAR(x.amplitudes().squaredNorm(), 1.0, kAlgebraicTol);
    EXPECT_EQ(x.amplitudes(), y.amplitudes());
  }
  Rng c(42, 4);
  EXPECT_NE(haar_state(2, c).amplitudes(), haar_state(2, a).amplitudes());
}

TEST(HaarState, first_moment_is_maximally_mixed) {
  Rng rng(2024, 0);
  Matrix acc = Matrix::Zero(2, 2);
  const int n = 10000;
  for (int i = 0; i < n; ++i) acc += haar_state(2, rng).projector().matrix();
  const double td = trace_distance(DensityMatrix::unchecked(acc / n), DensityMatrix::maximally_mixed(2));
  EXPECT_LT(td, 0.02);
}

// |<psi0|psi>|^2 is uniform on [0, 1] for qubits: mean 1/2, variance 1/12.
TEST(HaarState, mean_overlap_with_fixed_state_is_one_half) {
  Rng rng(99, 0);
  const PureState psi0 = haar_state(2, rng);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::norm(psi0.inner(haar_state(2, rng)));
  const double sigma = std::sqrt(1.0 / 12.0 / n);
  EXPECT_NEAR(sum / n, 0.5, 3 * sigma);
}

TEST(HaarState, rejects_scalar_dimension) {
  Rng rng(1, 1);
  EXPECT_THROW(haar_state(1, rng), DimensionError);
}

TEST(Rng, derived_streams_are_reproducible_and_leave_parent_untouched) {
  const Rng parent(9, 1);
  Rng a = parent.derive(5);
  Rng b = parent.derive(5);
  Rng c = parent.derive(6);
  const double va = a.uniform();
  EXPECT_EQ(va, b.uniform());
  EXPECT_NE(va, c.uniform());
  Rng fresh(9, 1);
  Rng copy = parent;
  EXPECT_EQ(fresh.uniform(), copy.uniform());
}

TEST(OrthogonalComplement, basis_and_plus_states) {
  const PureState one = orthogonal_complement(PureState::basis(2, 0));
  EXPECT_NEAR(std::norm(one[1]), 1.0, kAlgebraicTol);
  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const PureState p = PureState::from_amplitudes(plus);
  EXPECT_LT(std::abs(p.inner(orthogonal_complement(p))), kAlgebraicTol);
}

TEST(OrthogonalComplement, fixed_phase_convention) {
  Vector v(2);
  v << 0.6, Complex(0.0, 0.8);
  const PureState psi = PureState::from_amplitudes(v);
  const PureState perp = orthogonal_complement(psi);
  EXPECT_LT(std::abs(perp[0] - Complex(0.0, 0.8)), kAlgebraicTol);
  EXPECT_LT(std::abs(perp[1] - Complex(0.6, 0.0)), kAlgebraicTol);
  EXPECT_LT(std::abs(psi.inner(perp)), kAlgebraicTol);
  EXPECT_THROW(orthogonal_complement(PureState::basis(4, 0)), DimensionError);
}

TEST(SymProjector, one_qubit_is_identity) {
  EXPECT_LT(max_abs(sym_projector(1) - Matrix::Identity(2, 2)), kAlgebraicTol);
}

TEST(SymProjector, two_qubits_is_triplet_projector) {
  const Matrix p = sym_projector(2);
  EXPECT_NEAR(p.trace().real(), 3.0, kAlgebraicTol);
  Vector singlet = Vector::Zero(4);
  singlet(1) = 1.0 / std::sqrt(2.0);
  singlet(2) = -1.0 / std::sqrt(2.0);
  EXPECT_LT((p * singlet).norm(), kAlgebraicTol);
}

TEST(SymProjector, idempotent_with_trace_m_plus_one) {
  for (std::size_t m = 1; m <= 5; ++m) {
    const Matrix p = sym_projector(m);
    EXPECT_NEAR(p.trace().real(), static_cast<double>(m + 1), kAlgebraicTol) << "m=" << m;
    EXPECT_LT(max_abs(p * p - p), kAlgebraicTol) << "m=" << m;
    EXPECT_LT(max_abs(p - p.adjoint()), kAlgebraicTol);
  }
}

TEST(SymProjector, commutes_with_every_qubit_permutation) {
  for (std::size_t m = 1; m <= 4; ++m) {
    const Matrix p = sym_projector(m);
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      const Matrix u = mode_permutation_operator(perm);
      EXPECT_LT(max_abs(u * p - p * u), kAlgebraicTol);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST(SymProjector, capped_at_eight_qubits) {
  EXPECT_THROW(sym_projector(9), CapacityError);
  EXPECT_THROW(sym_projector(0), DimensionError);
}

TEST(PermuteModes, matches_operator_conjugation) {
  Rng rng(8, 0);
  const auto rho = random_density_matrix(8, rng);
  const std::size_t perm[] = {2, 0, 1};
  const Matrix u = mode_permutation_operator(perm);
  EXPECT_LT(max_abs(permute_modes(rho, perm).matrix() - u * rho.matrix() * u.adjoint()), kAlgebraicTol);
}

TEST(PermuteModes, moves_input_mode_to_output_position) {
  // |100> with perm {1, 2, 0}: output mode 2 carries input mode 0.
  const std::size_t perm[] = {1, 2, 0};
  const auto out = permute_modes(ket(8, 4), perm);
  EXPECT_NEAR(out(1, 1).real(), 1.0, kAlgebraicTol);
}

TEST(DensityMatrix, rejects_invalid_matrices) {
  Matrix not_hermitian = Matrix::Identity(2, 2) / 2.0;
  not_hermitian(0, 1) = 0.3;
  EXPECT_THROW(DensityMatrix::from_matrix(not_hermitian), std::invalid_argument);
  EXPECT_THROW(DensityMatrix::from_matrix(Matrix::Identity(2, 2)), std::invalid_argument);
  Matrix negative = Matrix::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix::from_matrix(negative), std::invalid_argument);
  EXPECT_NO_THROW(DensityMatrix::from_matrix(Matrix::Identity(4, 4) / 4.0));
}

TEST(PureState, normalization_is_enforced) {
  Vector v(2);
  v << 1.0, 1.0;
  EXPECT_THROW(PureState::from_amplitudes(v), std::invalid_argument);
  EXPECT_NEAR(PureState::normalized(v).amplitudes().squaredNorm(), 1.0, kAlgebraicTol);
}
