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

#include "purity/entropies.hpp"

namespace purity {

namespace {

constexpr double kBetaFloor = 1e-15;

// One block of a block-diagonal hypothesis pair (rho_j, sigma_j).
struct Block {
  bool diagonal = false;
  Matrix rho, sigma;
  RealVector drho, dsigma;
  double rho_scale = 0.0;
  double sigma_scale = 0.0;
};

struct BlockEval {
  RealVector lam;  // eigenvalues of mu rho - sigma
  RealVector w;    // rho weight of each eigenvector
  RealVector s;    // sigma weight of each eigenvector
  Matrix vecs;     // eigenvectors (dense blocks only)
};

bool is_diag(const Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r != c && m(r, c) != cplx(0.0, 0.0)) return false;
    }
  }
  return true;
}

Block make_block(const Matrix& rho, const Matrix& sigma) {
  Block b;
  b.diagonal = is_diag(rho) && is_diag(sigma);
  if (b.diagonal) {
    b.drho = rho.diagonal().real();
    b.dsigma = sigma.diagonal().real();
  } else {
    b.rho = rho;
    b.sigma = sigma;
  }
  b.rho_scale = std::max(0.0, rho.trace().real());
  b.sigma_scale = std::max(0.0, sigma.trace().real());
  return b;
}

Block make_block(const RealVector& rho, const RealVector& sigma) {
  Block b;
  b.diagonal = true;
  b.drho = rho;
  b.dsigma = sigma;
  b.rho_scale = std::max(0.0, rho.sum());
  b.sigma_scale = std::max(0.0, sigma.sum());
  return b;
}

BlockEval evaluate(const Block& b, double mu, bool vectors) {
  BlockEval e;
  if (b.diagonal) {
    e.lam = mu * b.drho - b.dsigma;
    e.w = b.drho;
    e.s = b.dsigma;
    return e;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(mu * b.rho - b.sigma);
  e.lam = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  e.w = (v.adjoint() * b.rho * v).diagonal().real();
  if (vectors) {
    e.s = (v.adjoint() * b.sigma * v).diagonal().real();
    e.vecs = v;
  }
  return e;
}

double positive_mass(const std::vector<Block>& blocks, double mu) {
  double m = 0.0;
  for (const auto& b : blocks) {
    if (b.rho_scale == 0.0) continue;
    auto e = evaluate(b, mu, false);
    for (Eigen::Index i = 0; i < e.lam.size(); ++i) {
      if (e.lam[i] > 0.0) m += e.w[i];
    }
  }
  return m;
}

// Per-eigenvector coefficient in the fractional test and in its rounding.
struct BlockSolution {
  BlockEval eval;
  RealVector test;
  RealVector rounded;
};

struct Solution {
  NpSummary summary;
  std::vector<BlockSolution> blocks;
};

Solution solve_support(const std::vector<Block>& blocks) {
  Solution sol;
  double alpha = 0.0, beta = 0.0;
  for (const auto& b : blocks) {
    BlockSolution bs;
    if (b.diagonal) {
      bs.eval.lam = b.drho;
      bs.eval.w = b.drho;
      bs.eval.s = b.dsigma;
    } else {
      auto spectrum = eigh(b.rho);
      bs.eval.lam = spectrum.values;
      bs.eval.vecs = spectrum.vectors;
      bs.eval.w = (spectrum.vectors.adjoint() * b.rho * spectrum.vectors).diagonal().real();
      bs.eval.s = (spectrum.vectors.adjoint() * b.sigma * spectrum.vectors).diagonal().real();
    }
    const double tol = kSupportTol * std::max(b.rho_scale, 1e-300);
    bs.test = RealVector::Zero(bs.eval.lam.size());
    for (Eigen::Index i = 0; i < bs.test.size(); ++i) {
      if (bs.eval.lam[i] > tol) bs.test[i] = 1.0;
    }
    bs.rounded = bs.test;
    alpha += bs.test.dot(bs.eval.w);
    beta += bs.test.dot(bs.eval.s);
    sol.blocks.push_back(std::move(bs));
  }
  sol.summary.multiplier = kInf;
  sol.summary.threshold = 0.0;
  sol.summary.boundary_weight = 0.0;
  sol.summary.alpha = alpha;
  sol.summary.beta = std::max(0.0, beta);
  sol.summary.dual_value = sol.summary.beta;
  sol.summary.value = sol.summary.beta <= kBetaFloor ? kInf : -std::log2(sol.summary.beta);
  return sol;
}

Solution solve(const std::vector<Block>& blocks, double eps) {
  if (!(eps >= 0.0) || !(eps < 1.0)) throw DomainError("eps must lie in [0, 1)");
  double total = 0.0;
  for (const auto& b : blocks) total += b.rho_scale;
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("hypothesis rho must be normalized");
  if (eps == 0.0) return solve_support(blocks);

  const double target = 1.0 - eps;
  double hi = 1.0;
  int guard = 0;
  while (positive_mass(blocks, hi) < target) {
    hi *= 2.0;
    if (++guard > 2000) throw DomainError("Neyman-Pearson bracketing failed");
  }
  double lo = 0.0;
  while (lo == 0.0) {
    double mid = hi / 2.0;
    if (mid < 1e-300) break;
    if (positive_mass(blocks, mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    double mid = lo + (hi - lo) / 2.0;
    if (!(mid > lo && mid < hi)) break;
    if (positive_mass(blocks, mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  const double mu = hi;
  Solution sol;
  double m_plus = 0.0, m_zero = 0.0, s_plus = 0.0, s_zero = 0.0, lam_plus = 0.0;
  std::vector<std::vector<int>> cls;
  for (const auto& b : blocks) {
    BlockSolution bs;
    bs.eval = evaluate(b, mu, true);
    const double tol = 1e-12 * (mu * b.rho_scale + b.sigma_scale) + 4.0 * (hi - lo) * b.rho_scale;
    std::vector<int> c(static_cast<std::size_t>(bs.eval.lam.size()));
    for (Eigen::Index i = 0; i < bs.eval.lam.size(); ++i) {
      double l = bs.eval.lam[i];
      if (l > 0.0) lam_plus += l;
      if (l > tol) {
        c[i] = 1;
        m_plus += bs.eval.w[i];
        s_plus += bs.eval.s[i];
      } else if (l >= -tol) {
        c[i] = 0;
        m_zero += bs.eval.w[i];
        s_zero += bs.eval.s[i];
      } else {
        c[i] = -1;
      }
    }
    cls.push_back(std::move(c));
    sol.blocks.push_back(std::move(bs));
  }
  double gamma = 0.0;
  if (m_zero > 0.0) gamma = std::clamp((target - m_plus) / m_zero, 0.0, 1.0);
  for (std::size_t j = 0; j < sol.blocks.size(); ++j) {
    auto& bs = sol.blocks[j];
    bs.test = RealVector::Zero(bs.eval.lam.size());
    bs.rounded = RealVector::Zero(bs.eval.lam.size());
    for (Eigen::Index i = 0; i < bs.test.size(); ++i) {
      if (cls[j][i] == 1) bs.test[i] = 1.0;
      if (cls[j][i] == 0) bs.test[i] = gamma;
      if (cls[j][i] >= 0) bs.rounded[i] = 1.0;
    }
  }
  auto& s = sol.summary;
  s.multiplier = mu;
  s.threshold = 1.0 / mu;
  s.boundary_weight = gamma;
  s.alpha = m_plus + gamma * m_zero;
  s.beta = std::max(0.0, s_plus + gamma * s_zero);
  s.dual_value = mu * target - lam_plus;
  s.value = s.beta <= kBetaFloor ? kInf : -std::log2(s.beta);
  return sol;
}

Matrix assemble(const BlockSolution& bs, const RealVector& coeff) {
  if (bs.eval.vecs.size() == 0) {
    Matrix m = Matrix::Zero(coeff.size(), coeff.size());
    m.diagonal() = coeff.cast<cplx>();
    return m;
  }
  return bs.eval.vecs * coeff.cast<cplx>().asDiagonal() * bs.eval.vecs.adjoint();
}

std::vector<Block> cq_blocks(const CqState& cq) {
  Matrix rho_b = cq.marginal_b();
  std::vector<Block> blocks;
  for (std::size_t x = 0; x < cq.size(); ++x) {
    double p = cq.prob(x);
    blocks.push_back(make_block(Matrix(p * cq.conditional(x).matrix()), Matrix(p * rho_b)));
  }
  return blocks;
}

}  // namespace

NeymanPearsonTest neyman_pearson(const DensityOperator& rho, const DensityOperator& sigma, double eps) {
  if (rho.dim() != sigma.dim()) throw DomainError("dimension mismatch");
  if (!rho.normalized()) throw DomainError("hypothesis rho must be normalized");
  auto sol = solve({make_block(rho.matrix(), sigma.matrix())}, eps);
  const auto& bs = sol.blocks.front();
  return {sol.summary, HermitianOperator(rho.dims(), assemble(bs, bs.test))};
}

double d_h(const DensityOperator& rho, const DensityOperator& sigma, double eps) {
  return neyman_pearson(rho, sigma, eps).summary.value;
}

double i_h(const DensityOperator& rho_ab, double eps, std::size_t split) {
  auto [a, b] = bipartition(rho_ab.dims(), split);
  auto product = tensor(partial_trace(rho_ab, a), partial_trace(rho_ab, b));
  return d_h(rho_ab, product, eps);
}

CqTest i_h_cq(const CqState& cq, double eps) {
  if (std::abs(cq.total() - 1.0) > 1e-9) throw DomainError("cq state must be normalized");
  auto sol = solve(cq_blocks(cq), eps);
  CqTest out;
  out.summary = sol.summary;
  for (const auto& bs : sol.blocks) {
    out.tests.push_back(assemble(bs, bs.test));
    out.projectors.push_back(assemble(bs, bs.rounded));
  }
  return out;
}

ClassicalCqTest i_h_cq(const ClassicalCq& cq, double eps) {
  RealVector rho_b = cq.marginal_b();
  std::vector<Block> blocks;
  for (std::size_t x = 0; x < cq.size(); ++x) {
    double p = cq.prob(x);
    blocks.push_back(make_block(RealVector(p * cq.conditionals().row(static_cast<Eigen::Index>(x)).transpose()),
                                RealVector(p * rho_b)));
  }
  auto sol = solve(blocks, eps);
  ClassicalCqTest out;
  out.summary = sol.summary;
  out.tests.resize(static_cast<Eigen::Index>(cq.size()), static_cast<Eigen::Index>(cq.b_dim()));
  out.projectors.resize(out.tests.rows(), out.tests.cols());
  for (std::size_t x = 0; x < cq.size(); ++x) {
    out.tests.row(static_cast<Eigen::Index>(x)) = sol.blocks[x].test.transpose();
    out.projectors.row(static_cast<Eigen::Index>(x)) = sol.blocks[x].rounded.transpose();
  }
  return out;
}

double i_h_cond_cq(const std::vector<CqState>& family, const std::vector<double>& weights, double eps) {
  if (family.empty() || family.size() != weights.size()) throw DomainError("family/weight count mismatch");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("negative family weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw DomainError("family weights must sum to 1");
  std::vector<Block> blocks;
  for (std::size_t k = 0; k < family.size(); ++k) {
    const auto& cq = family[k];
    if (cq.b_dim() != family.front().b_dim()) throw DomainError("family members have different B dims");
    if (std::abs(cq.total() - 1.0) > 1e-9) throw DomainError("family member must be normalized");
    Matrix rho_b = cq.marginal_b();
    for (std::size_t l = 0; l < cq.size(); ++l) {
      double p = weights[k] * cq.prob(l);
      blocks.push_back(make_block(Matrix(p * cq.conditional(l).matrix()), Matrix(p * rho_b)));
    }
  }
  return solve(blocks, eps).summary.value;
}

}  // namespace purity
