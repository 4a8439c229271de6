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

#include <cstdint>
#include <string>
#include <vector>

#include "purity/operator_core.hpp"

namespace purity::testing {

inline HilbertDims qudit(std::size_t d, const std::string& label = "A") { return HilbertDims::single(label, d); }

inline HilbertDims parties(std::vector<std::size_t> dims) {
  std::vector<Subsystem> parts;
  const char* names = "ABCDEFGH";
  for (std::size_t i = 0; i < dims.size(); ++i) parts.push_back({std::string(1, names[i]), dims[i]});
  return HilbertDims(parts);
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline DensityOperator diag_state(std::vector<double> p, const std::string& label = "A") {
  RealVector v = Eigen::Map<RealVector>(p.data(), static_cast<Eigen::Index>(p.size()));
  return DensityOperator::diagonal(qudit(p.size(), label), v);
}

inline Matrix projector_onto(const Vector& v) { return v * v.adjoint(); }

}  // namespace purity::testing
