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
#include "purity/random.hpp"

#include <cmath>

namespace purity {

Matrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < g.cols(); ++c) {
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      double re = normal(rng);
      double im = normal(rng);
      g(r, c) = cplx(re, im);
    }
  }
  return g;
}

DensityOperator random_density(const HilbertDims& dims, std::size_t rank, std::uint64_t seed) {
  std::size_t d = dims.total();
  if (rank == 0 || rank > d) throw DomainError("rank must lie in [1, d]");
  Rng rng(seed);
  Matrix g = ginibre(d, rank, rng);
  Matrix w = g * g.adjoint();
  w /= w.trace().real();
  return DensityOperator(dims, (w + w.adjoint()) / 2.0, true);
}

DensityOperator random_density(std::size_t d, std::size_t rank, std::uint64_t seed) {
  return random_density(HilbertDims::single("A", d), rank, seed);
}

Matrix haar_unitary(std::size_t d, std::uint64_t seed) {
  if (d == 0) throw DomainError("dimension must be positive");
  Rng rng(seed);
  Matrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    cplx diag = r(i, i);
    double mag = std::abs(diag);
    if (mag > 0.0) q.col(i) *= diag / mag;
  }
  return q;
}

RankOnePovm random_rank_one_povm(std::size_t d, std::size_t k, std::uint64_t seed) {
  if (d == 0 || k < d) throw DomainError("a rank-one POVM needs at least d outcomes");
  Matrix u = haar_unitary(k, seed);
  Matrix v = u.leftCols(static_cast<Eigen::Index>(d));
  std::vector<double> weights;
  std::vector<Vector> vectors;
  for (std::size_t x = 0; x < k; ++x) {
    Vector w = v.row(static_cast<Eigen::Index>(x)).adjoint();
    double c = w.squaredNorm();
    weights.push_back(c);
    if (c > 0.0) {
      vectors.push_back(w / std::sqrt(c));
    } else {
      Vector e = Vector::Zero(static_cast<Eigen::Index>(d));
      e[0] = 1.0;
      vectors.push_back(e);
    }
  }
  if (k == d) {
    // An orthonormal basis measurement: rows of a unitary already have unit norm.
    for (auto& c : weights) c = 1.0;
  }
  return RankOnePovm(d, weights, vectors);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace purity
