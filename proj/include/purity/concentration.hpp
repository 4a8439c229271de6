// Copyright 2026 The puredistill Authors
//
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
#pragma once

#include <vector>

#include "purity/operator_core.hpp"

namespace purity {

struct SupportProjector {
  Matrix projector;
  Matrix basis;  // columns: the kept eigenvectors, descending
  Matrix complement;  // columns: the discarded eigenvectors, descending
  std::size_t rank = 0;
  double captured_mass = 0.0;
};

/// Projector onto the eigenvectors that survive truncating an eps-tail of
/// the spectrum.
SupportProjector build_projector(const DensityOperator& rho, double eps);

struct ConcentrationUnitary {
  Matrix unitary;
  HilbertDims output_dims;  // (A_g, A_p)
  double distance = 0.0;    // ||U rho U^dag - rho~ (x) |0><0| ||_1
  double bound = 0.0;       // 3 sqrt(eps) with eps = 1 - Tr[P rho]
};

/// Unitary on a d = d1 * d2 dimensional space that sends the range of a
/// rank-d1 projector onto A_g (x) |0>. Output index is g * d2 + p.
ConcentrationUnitary concentration_unitary(const DensityOperator& rho, const Matrix& projector, std::size_t d1,
                                           std::size_t d2);

struct ConcentrationReport {
  double rate_bits = 0.0;
  double ancilla_bits = 0.0;
  double gross_bits = 0.0;
  double h_max_tilde = 0.0;
  double achieved_distance = 0.0;  // full output against rho~ (x) |0><0|
  double pure_distance = 0.0;      // A_p marginal against |0><0|
  double removed_mass = 0.0;
  double eps_used = 0.0;
  double bound = 0.0;
  std::size_t d_a = 0;
  std::size_t d_c = 0;
  Matrix unitary;  // input index a * d_c + c, output index g * d_a + p
  HilbertDims input_dims;
  HilbertDims output_dims;
  DensityOperator garbage;  // normalized rho~ on A_g
};

/// Borrows an ancilla of dimension rank(P) and concentrates rho into a
/// pure register of dimension d_A.
ConcentrationReport run_concentration(const DensityOperator& rho, double eps);

/// The same construction for a diagonal state, simulated as a permutation.
/// For input symbol y (ancilla at 0) the output is (garbage[y], pure[y]).
struct ClassicalConcentration {
  std::size_t rank = 0;
  std::vector<std::size_t> garbage;
  std::vector<std::size_t> pure;
  std::vector<std::size_t> order;  // symbols by descending probability
  double removed_mass = 0.0;
  double distance = 0.0;
  double pure_distance = 0.0;
};
ClassicalConcentration concentrate_classical(const RealVector& probs, double eps);

}  // namespace purity
