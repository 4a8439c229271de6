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
#include <random>

#include "purity/operator_core.hpp"

namespace purity {

using Rng = std::mt19937_64;

/// Normalized Wishart sample G G^dagger / Tr with G of shape d x rank.
DensityOperator random_density(std::size_t d, std::size_t rank, std::uint64_t seed);
DensityOperator random_density(const HilbertDims& dims, std::size_t rank, std::uint64_t seed);

/// Haar unitary from the QR decomposition of a complex Ginibre matrix.
Matrix haar_unitary(std::size_t d, std::uint64_t seed);

/// Rank-one POVM with k outcomes built from the first d columns of a Haar
/// k x k unitary; k = d gives an orthonormal basis measurement.
RankOnePovm random_rank_one_povm(std::size_t d, std::size_t k, std::uint64_t seed);

Matrix ginibre(std::size_t rows, std::size_t cols, Rng& rng);

/// Seeds derived from a base seed and a stream index, for independent sweeps.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace purity
