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

#include <limits>
#include <string>
#include <vector>

#include "purity/operator_core.hpp"

namespace purity {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Classical-quantum state sum_x p(x) |x><x| (x) rho_x with normalized
/// conditionals. The probabilities may sum to less than one.
class CqState {
 public:
  CqState() = default;
  CqState(std::vector<double> probs, std::vector<DensityOperator> conditionals,
          std::vector<std::string> labels = {});

  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }
  double prob(std::size_t x) const { return probs_[x]; }
  const DensityOperator& conditional(std::size_t x) const { return conditionals_[x]; }
  const std::vector<DensityOperator>& conditionals() const { return conditionals_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const HilbertDims& b_dims() const { return conditionals_.front().dims(); }
  std::size_t b_dim() const { return conditionals_.front().dim(); }
  double total() const;

  /// sum_x p(x) rho_x
  Matrix marginal_b() const;
  /// The full block-diagonal operator on X (x) B.
  DensityOperator joint() const;
  bool is_classical() const;

 private:
  std::vector<double> probs_;
  std::vector<DensityOperator> conditionals_;
  std::vector<std::string> labels_;
};

/// Commuting cq state: row x of `conditionals` is the distribution of B given x.
class ClassicalCq {
 public:
  ClassicalCq() = default;
  ClassicalCq(std::vector<double> probs, Eigen::MatrixXd conditionals);
  static ClassicalCq from(const CqState& cq);

  std::size_t size() const { return probs_.size(); }
  std::size_t b_dim() const { return static_cast<std::size_t>(cond_.cols()); }
  const std::vector<double>& probs() const { return probs_; }
  double prob(std::size_t x) const { return probs_[x]; }
  const Eigen::MatrixXd& conditionals() const { return cond_; }
  RealVector marginal_b() const;
  CqState to_dense() const;

 private:
  std::vector<double> probs_;
  Eigen::MatrixXd cond_;
};

double von_neumann(const DensityOperator& rho);
double shannon(const RealVector& p);

/// Renyi-1/2 entropy 2 log2 Tr sqrt(rho); accepts substates.
double h_max(const DensityOperator& rho);

/// Result of zeroing the smallest eigenvalues whose total stays within eps.
/// `kept_values` is in descending order with removed entries set to zero.
struct Truncation {
  RealVector kept_values;
  std::size_t kept = 0;
  double removed_mass = 0.0;
  double min_kept = 0.0;
};
Truncation truncate_spectrum(const RealVector& descending, double eps);

DensityOperator truncate_tail(const DensityOperator& rho, double eps);
/// Probability-vector form, returned in the input's index order.
RealVector truncate_tail(const RealVector& probs, double eps);

double h_max_tilde(const DensityOperator& rho, double eps);
double h_max_prime(const DensityOperator& rho, double eps);
double h_max_smooth_ub(const DensityOperator& rho, double eps);
double h_max_tilde(const RealVector& probs, double eps);
double h_max_prime(const RealVector& probs, double eps);
double h_max_smooth_ub(const RealVector& probs, double eps);

/// -log2 sum_x p(x) lambda_max(rho_x)
double h_min_cond_cq(const CqState& cq);

double d_max(const DensityOperator& rho, const DensityOperator& sigma);
double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma);

/// Max-information between the first `split` subsystems and the rest.
double i_max(const DensityOperator& rho_ab, std::size_t split = 1);

struct ModifiedMaxInformation {
  double value = 0.0;
  DensityOperator sigma_star;
  /// log2 of a dual-feasible objective; value - lower_bound is the gap.
  double lower_bound = 0.0;
  /// min_x lambda_min(2^value sigma* - rho_x); nonnegative when certified.
  double certificate_margin = 0.0;
  int newton_steps = 0;
};

/// min over states sigma of max_x D_max(rho_x || sigma), computed as
/// log2 of min Tr S subject to S >= rho_x by a log-barrier interior-point
/// method.
ModifiedMaxInformation i_max_mod_cq(const CqState& cq, double gap_tol = 1e-10, int max_newton = 2000);

struct NpSummary {
  double multiplier = 0.0;  // mu in the dual; the test is {mu rho - sigma > 0}
  double threshold = 0.0;   // t = 1 / mu, the test is {rho - t sigma > 0}
  double boundary_weight = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double dual_value = 0.0;
  double value = 0.0;  // -log2 beta, +inf when beta vanishes
};

struct NeymanPearsonTest {
  NpSummary summary;
  HermitianOperator test;
};

/// Optimal test for rho against sigma at type-I error eps.
NeymanPearsonTest neyman_pearson(const DensityOperator& rho, const DensityOperator& sigma, double eps);
double d_h(const DensityOperator& rho, const DensityOperator& sigma, double eps);

double i_h(const DensityOperator& rho_ab, double eps, std::size_t split = 1);

struct CqTest {
  NpSummary summary;
  std::vector<Matrix> tests;        // fractional optimal test blocks
  std::vector<Matrix> projectors;   // {mu p rho_x - p rho_B >= 0} blocks
};
CqTest i_h_cq(const CqState& cq, double eps);

struct ClassicalCqTest {
  NpSummary summary;
  Eigen::MatrixXd tests;
  Eigen::MatrixXd projectors;  // 0/1 entries
};
ClassicalCqTest i_h_cq(const ClassicalCq& cq, double eps);

/// D_H between the K-block-diagonal joint and its K-blockwise product of marginals.
double i_h_cond_cq(const std::vector<CqState>& family, const std::vector<double>& weights, double eps);

/// Spectrum of the n-fold tensor power, never materializing a d^n matrix.
SpectralMultiset iid_power(const SpectralMultiset& single, std::size_t n);

struct SpectralTruncation {
  BigInt kept = 0;
  double removed_mass = 0.0;
  double min_kept = 0.0;
  double sqrt_sum = 0.0;
};
SpectralTruncation truncate_tail(const SpectralMultiset& ms, double eps);

struct AepPoint {
  std::size_t n = 0;
  double h_tilde = 0.0;
  double h_prime = 0.0;
  double h_smooth_ub = 0.0;
};
/// Per-copy smoothed max-entropies of rho^{(x)n} for n = 1..n_max.
std::vector<AepPoint> aep_sweep(const SpectralMultiset& single, double eps, std::size_t n_max,
                                std::size_t threads = 1);
std::vector<AepPoint> aep_sweep(const DensityOperator& rho, double eps, std::size_t n_max,
                                std::size_t threads = 1);

enum class BoundKind { exact, upper, lower };
std::string to_string(BoundKind kind);

struct EntropyEntry {
  std::string name;
  double value = 0.0;
  BoundKind kind = BoundKind::exact;
  std::string note;
};

struct EntropyReport {
  std::vector<EntropyEntry> entries;
  std::vector<std::pair<std::string, std::string>> symbolic;

  void add(std::string name, double value, BoundKind kind, std::string note = {});
  const EntropyEntry& at(const std::string& name) const;
};

/// Post-measurement cq state on X (outcomes of `povm` on the first `split`
/// subsystems) and the remaining subsystems. Zero-probability outcomes are
/// kept with a maximally mixed placeholder conditional.
CqState measure_cq(const DensityOperator& rho_ab, const RankOnePovm& povm, std::size_t split = 1);

/// The separate terms of the one-way distillation rate lower bound for a
/// given rank-one POVM. Constants of unspecified size are reported as text.
EntropyReport distillation_rate_terms(const DensityOperator& rho_ab, const RankOnePovm& povm, double eps,
                                      std::size_t split = 1);

}  // namespace purity
