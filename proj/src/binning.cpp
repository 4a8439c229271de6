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
#include <algorithm>
#include <cmath>
#include <numeric>

#include "purity/distillation.hpp"
#include "purity/random.hpp"

namespace purity {

std::vector<std::size_t> prune_good_set(const std::vector<double>& p, double eps) {
  if (!(eps >= 0.0) || !(eps < 1.0)) throw DomainError("eps must lie in [0, 1)");
  if (p.empty()) throw DomainError("empty distribution");
  RealVector v = Eigen::Map<const RealVector>(p.data(), static_cast<Eigen::Index>(p.size()));
  if (v.minCoeff() < -kPsdTol) throw DomainError("distribution has a negative entry");
  auto ds = eigh_diagonal(v);
  auto t = truncate_spectrum(ds.values, eps);
  return {ds.order.begin(), ds.order.begin() + static_cast<std::ptrdiff_t>(t.kept)};
}

std::size_t bin_size(std::size_t labels, double i_h, double eps) {
  if (labels == 0) throw DomainError("binning needs at least one label");
  if (!(eps > 0.0) || !(eps < 1.0)) throw DomainError("binning requires eps in (0, 1)");
  if (std::isinf(i_h) && i_h > 0.0) return labels;
  double exponent = i_h + 2.0 * std::log2(eps);
  if (exponent > 62.0) return labels;
  double n = std::floor(std::exp2(exponent) + 1e-9);
  if (!(n >= 1.0)) return 1;
  return std::min(labels, static_cast<std::size_t>(n));
}

Binning make_binning(std::size_t labels, double i_h, double eps, std::uint64_t seed) {
  Binning b;
  b.labels = labels;
  b.i_h = i_h;
  b.seed = seed;
  b.n = bin_size(labels, i_h, eps);
  b.m = (labels + b.n - 1) / b.n;
  b.padding = b.m * b.n - labels;
  std::vector<std::size_t> position(b.padded());
  std::iota(position.begin(), position.end(), 0);
  Rng rng(seed);
  std::shuffle(position.begin(), position.end(), rng);
  b.permutation = position;
  b.members.assign(b.m, std::vector<std::size_t>(b.n, kNoLabel));
  for (std::size_t y = 0; y < labels; ++y) b.members[b.block(y)][b.slot(y)] = y;
  return b;
}

Binning make_binning(const CqState& cq, double eps, std::uint64_t seed) {
  double i_h = i_h_cq(cq, eps).summary.value;
  return make_binning(cq.size(), i_h, eps, seed);
}

namespace {

void check_collision_args(std::size_t domain, std::size_t block_size) {
  if (domain < 2) throw DomainError("collision rate needs at least two labels");
  if (block_size == 0 || domain % block_size != 0) throw DomainError("block size must divide the domain");
}

std::size_t colliding_pairs(const std::vector<std::size_t>& position, std::size_t block_size) {
  std::size_t count = 0;
  for (std::size_t x = 0; x < position.size(); ++x) {
    for (std::size_t y = x + 1; y < position.size(); ++y) {
      if (position[x] / block_size == position[y] / block_size) ++count;
    }
  }
  return count;
}

}  // namespace

Rational collision_probability_exact(std::size_t domain, std::size_t block_size) {
  check_collision_args(domain, block_size);
  if (domain > 7) throw DomainError("exact enumeration supports domains up to 7 labels");
  std::vector<std::size_t> position(domain);
  std::iota(position.begin(), position.end(), 0);
  BigInt hits = 0, total = 0;
  const std::size_t pairs = domain * (domain - 1) / 2;
  do {
    hits += colliding_pairs(position, block_size);
    total += pairs;
  } while (std::next_permutation(position.begin(), position.end()));
  return Rational(hits, total);
}

double collision_probability_sampled(std::size_t domain, std::size_t block_size, std::uint64_t seed,
                                     std::size_t trials) {
  check_collision_args(domain, block_size);
  if (trials == 0) throw DomainError("sampling needs at least one trial");
  std::vector<std::size_t> position(domain);
  std::iota(position.begin(), position.end(), 0);
  Rng rng(seed);
  double hits = 0.0;
  const double pairs = static_cast<double>(domain) * static_cast<double>(domain - 1) / 2.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::shuffle(position.begin(), position.end(), rng);
    hits += static_cast<double>(colliding_pairs(position, block_size));
  }
  return hits / (pairs * static_cast<double>(trials));
}

SequentialDecoder build_decoders(const CqState& cq, const Binning& binning, const std::vector<Matrix>& projectors) {
  if (binning.labels != cq.size()) throw DomainError("binning and cq state disagree on the label count");
  if (projectors.size() != cq.size()) throw DomainError("one projector per label is required");
  const auto d = static_cast<Eigen::Index>(cq.b_dim());
  const Matrix id = Matrix::Identity(d, d);
  SequentialDecoder dec;
  for (std::size_t m = 0; m < binning.m; ++m) {
    DecoderBlock blk;
    blk.slot_label = binning.members[m];
    blk.raw_theta.assign(binning.n, Matrix::Zero(d, d));
    for (std::size_t s = 0; s < binning.n; ++s) {
      std::size_t y = blk.slot_label[s];
      if (y != kNoLabel && cq.prob(y) > 0.0) blk.order.push_back(s);
    }
    Matrix rest = id;  // (I - P_{l-1}) ... (I - P_1)
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t s : blk.order) {
      const Matrix& p = projectors[blk.slot_label[s]];
      if (p.rows() != d || p.cols() != d) throw DomainError("projector dimension mismatch");
      Matrix k = p * rest;
      Matrix theta = k.adjoint() * k;
      theta = (theta + theta.adjoint()) / 2.0;
      blk.raw_theta[s] = theta;
      sum += theta;
      rest = (id - p) * rest;
    }
    blk.abort = id - sum;
    blk.abort = (blk.abort + blk.abort.adjoint()) / 2.0;
    if (eigh(blk.abort).values.minCoeff() < -1e-8) throw DomainError("decoder outcomes exceed the identity");
    blk.abort_slot = blk.order.empty() ? 0 : blk.order.back();
    for (std::size_t s = 0; s < binning.n; ++s) {
      if (std::find(blk.order.begin(), blk.order.end(), s) == blk.order.end()) {
        blk.abort_slot = s;
        break;
      }
    }
    blk.theta = blk.raw_theta;
    blk.theta[blk.abort_slot] += blk.abort;
    dec.blocks.push_back(std::move(blk));
  }
  return dec;
}

DecodingError decoding_error(const CqState& cq, const Binning& binning, const SequentialDecoder& decoder,
                             const std::vector<Matrix>& projectors, double eps) {
  if (decoder.blocks.size() != binning.m) throw DomainError("decoder and binning disagree on the block count");
  const auto d = static_cast<Eigen::Index>(cq.b_dim());
  const Matrix id = Matrix::Identity(d, d);
  DecodingError out;
  out.bound = std::sqrt(2.0 * eps) + eps;
  out.per_label.assign(cq.size(), 0.0);
  out.sequential.assign(cq.size(), 0.0);
  out.union_bound.assign(cq.size(), 0.0);
  out.union_terms.assign(cq.size(), 0.0);
  double total = 0.0;
  for (std::size_t y = 0; y < cq.size(); ++y) {
    double p = cq.prob(y);
    if (!(p > 0.0)) continue;
    const auto& blk = decoder.blocks[binning.block(y)];
    std::size_t s = binning.slot(y);
    const Matrix& rho = cq.conditional(y).matrix();
    out.per_label[y] = std::max(0.0, 1.0 - (blk.theta[s] * rho).trace().real());
    out.sequential[y] = std::max(0.0, 1.0 - (blk.raw_theta[s] * rho).trace().real());
    double terms = ((id - projectors[y]) * rho).trace().real();
    for (std::size_t t : blk.order) {
      if (t == s) break;
      terms += (projectors[blk.slot_label[t]] * rho).trace().real();
    }
    out.union_terms[y] = std::max(0.0, terms);
    out.union_bound[y] = 2.0 * std::sqrt(out.union_terms[y]);
    out.average += p * out.per_label[y];
    total += p;
  }
  if (total > 0.0) out.average /= total;
  return out;
}

BobUnitary bob_unitary(const SequentialDecoder& decoder) {
  BobUnitary out;
  for (const auto& blk : decoder.blocks) {
    const auto n = static_cast<Eigen::Index>(blk.theta.size());
    const auto d = blk.theta.front().rows();
    Matrix cols(n * d, d);
    for (Eigen::Index k = 0; k < n; ++k) cols.block(k * d, 0, d, d) = sqrt_psd(blk.theta[static_cast<std::size_t>(k)]);
    Matrix wdag = complete_unitary(cols);
    Matrix w = wdag.adjoint();
    double res = (w * wdag - Matrix::Identity(n * d, n * d)).cwiseAbs().maxCoeff();
    out.unitarity_residual = std::max(out.unitarity_residual, res);
    out.blocks.push_back(std::move(w));
  }
  if (out.unitarity_residual > 1e-8) throw DomainError("decoder unitary is not unitary within 1e-8");
  return out;
}

}  // namespace purity
