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
#include "purity/entropies.hpp"

#include <algorithm>
#include <cmath>

namespace purity {

namespace {

void check_eps_open(double eps) {
  if (!(eps >= 0.0) || !(eps < 1.0)) throw DomainError("eps must lie in [0, 1)");
}

RealVector spectrum_of(const DensityOperator& rho) {
  return eigh(rho.op()).values.cwiseMax(0.0);
}

double xlogx_sum(const RealVector& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log2(p[i]);
  }
  return h;
}

RealVector sorted_descending(const RealVector& p) { return eigh_diagonal(p).values; }

Truncation truncate_checked(const RealVector& descending, double eps) {
  check_eps_open(eps);
  auto t = truncate_spectrum(descending, eps);
  if (t.kept == 0) throw DomainError("truncation left an empty support");
  return t;
}

double smooth_ub_from(const Truncation& t) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < t.kept_values.size(); ++i) s += std::sqrt(std::max(0.0, t.kept_values[i]));
  return 2.0 * std::log2(s);
}

}  // namespace

// --------------------------------------------------------------------- CqState

CqState::CqState(std::vector<double> probs, std::vector<DensityOperator> conditionals,
                 std::vector<std::string> labels)
    : probs_(std::move(probs)), conditionals_(std::move(conditionals)), labels_(std::move(labels)) {
  if (probs_.empty()) throw DomainError("cq state needs at least one label");
  if (probs_.size() != conditionals_.size()) throw DomainError("cq probability/conditional count mismatch");
  double total = 0.0;
  for (std::size_t x = 0; x < probs_.size(); ++x) {
    if (!(probs_[x] >= 0.0)) throw DomainError("cq probability " + std::to_string(x) + " is negative");
    total += probs_[x];
    if (!conditionals_[x].normalized()) {
      throw DomainError("cq conditional " + std::to_string(x) + " is not normalized");
    }
    if (!(conditionals_[x].dims() == conditionals_.front().dims())) {
      throw DomainError("cq conditional " + std::to_string(x) + " has different dims");
    }
  }
  if (total > 1.0 + kTraceTol) throw DomainError("cq probabilities sum above 1");
  if (labels_.empty()) {
    for (std::size_t x = 0; x < probs_.size(); ++x) labels_.push_back(std::to_string(x));
  }
  if (labels_.size() != probs_.size()) throw DomainError("cq label count mismatch");
}

double CqState::total() const {
  double t = 0.0;
  for (double p : probs_) t += p;
  return t;
}

Matrix CqState::marginal_b() const {
  auto n = static_cast<Eigen::Index>(b_dim());
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t x = 0; x < size(); ++x) m += probs_[x] * conditionals_[x].matrix();
  return m;
}

DensityOperator CqState::joint() const {
  auto nb = static_cast<Eigen::Index>(b_dim());
  auto nx = static_cast<Eigen::Index>(size());
  Matrix m = Matrix::Zero(nx * nb, nx * nb);
  for (Eigen::Index x = 0; x < nx; ++x) m.block(x * nb, x * nb, nb, nb) = probs_[x] * conditionals_[x].matrix();
  auto dims = HilbertDims::single("X", size()).concat(b_dims());
  bool normalized = std::abs(total() - 1.0) <= kTraceTol;
  return DensityOperator(dims, m, normalized);
}

bool CqState::is_classical() const {
  return std::all_of(conditionals_.begin(), conditionals_.end(),
                     [](const DensityOperator& r) { return r.op().is_diagonal(); });
}

// ------------------------------------------------------------------ ClassicalCq

ClassicalCq::ClassicalCq(std::vector<double> probs, Eigen::MatrixXd conditionals)
    : probs_(std::move(probs)), cond_(std::move(conditionals)) {
  if (probs_.empty()) throw DomainError("cq state needs at least one label");
  if (static_cast<Eigen::Index>(probs_.size()) != cond_.rows()) {
    throw DomainError("cq probability/conditional count mismatch");
  }
  double total = 0.0;
  for (std::size_t x = 0; x < probs_.size(); ++x) {
    if (!(probs_[x] >= 0.0)) throw DomainError("cq probability " + std::to_string(x) + " is negative");
    total += probs_[x];
    auto row = cond_.row(static_cast<Eigen::Index>(x));
    if (row.minCoeff() < -kPsdTol || std::abs(row.sum() - 1.0) > kTraceTol) {
      throw DomainError("cq conditional " + std::to_string(x) + " is not a distribution");
    }
  }
  if (total > 1.0 + kTraceTol) throw DomainError("cq probabilities sum above 1");
}

ClassicalCq ClassicalCq::from(const CqState& cq) {
  if (!cq.is_classical()) throw DomainError("cq state has non-diagonal conditionals");
  Eigen::MatrixXd cond(static_cast<Eigen::Index>(cq.size()), static_cast<Eigen::Index>(cq.b_dim()));
  for (std::size_t x = 0; x < cq.size(); ++x) {
    cond.row(static_cast<Eigen::Index>(x)) = cq.conditional(x).matrix().diagonal().real().transpose();
  }
  return ClassicalCq(cq.probs(), cond);
}

RealVector ClassicalCq::marginal_b() const {
  RealVector m = RealVector::Zero(cond_.cols());
  for (std::size_t x = 0; x < size(); ++x) m += probs_[x] * cond_.row(static_cast<Eigen::Index>(x)).transpose();
  return m;
}

CqState ClassicalCq::to_dense() const {
  auto dims = HilbertDims::single("B", b_dim());
  std::vector<DensityOperator> cond;
  for (std::size_t x = 0; x < size(); ++x) {
    cond.push_back(DensityOperator::diagonal(dims, cond_.row(static_cast<Eigen::Index>(x)).transpose()));
  }
  return CqState(probs_, std::move(cond));
}

// ------------------------------------------------------------------ entropies

double von_neumann(const DensityOperator& rho) {
  if (!rho.normalized()) throw DomainError("entropy requires a normalized state");
  return xlogx_sum(spectrum_of(rho));
}

double shannon(const RealVector& p) {
  if (p.minCoeff() < -kPsdTol || std::abs(p.sum() - 1.0) > kTraceTol) {
    throw DomainError("entropy requires a normalized distribution");
  }
  return xlogx_sum(p);
}

double h_max(const DensityOperator& rho) {
  RealVector s = spectrum_of(rho);
  double root = s.cwiseSqrt().sum();
  if (!(root > 0.0)) throw DomainError("max-entropy of the zero operator");
  return 2.0 * std::log2(root);
}

Truncation truncate_spectrum(const RealVector& descending, double eps) {
  if (!(eps >= 0.0) || eps > 1.0) throw DomainError("eps must lie in [0, 1]");
  Truncation t;
  t.kept_values = descending;
  auto n = descending.size();
  Eigen::Index keep = n;
  double removed = 0.0;
  // Walk from the smallest value (highest index) so ties keep the lower index.
  while (keep > 0) {
    double v = std::max(0.0, descending[keep - 1]);
    if (removed + v > eps + 1e-12) break;
    removed += v;
    --keep;
  }
  for (Eigen::Index i = keep; i < n; ++i) t.kept_values[i] = 0.0;
  t.kept = static_cast<std::size_t>(keep);
  t.removed_mass = removed;
  t.min_kept = keep > 0 ? descending[keep - 1] : 0.0;
  return t;
}

DensityOperator truncate_tail(const DensityOperator& rho, double eps) {
  auto s = eigh(rho.op());
  auto t = truncate_spectrum(s.values, eps);
  if (t.removed_mass == 0.0 && t.kept == static_cast<std::size_t>(s.values.size())) return rho;
  if (t.kept == 0) throw DomainError("truncation left an empty support");
  Matrix m = s.vectors * t.kept_values.cast<cplx>().asDiagonal() * s.vectors.adjoint();
  return DensityOperator(HermitianOperator(rho.dims(), m), false);
}

RealVector truncate_tail(const RealVector& probs, double eps) {
  auto ds = eigh_diagonal(probs);
  auto t = truncate_spectrum(ds.values, eps);
  RealVector out = probs;
  for (std::size_t i = t.kept; i < ds.order.size(); ++i) out[static_cast<Eigen::Index>(ds.order[i])] = 0.0;
  return out;
}

double h_max_tilde(const DensityOperator& rho, double eps) {
  return std::log2(static_cast<double>(truncate_checked(spectrum_of(rho), eps).kept));
}

double h_max_prime(const DensityOperator& rho, double eps) {
  return -std::log2(truncate_checked(spectrum_of(rho), eps).min_kept);
}

double h_max_smooth_ub(const DensityOperator& rho, double eps) {
  return smooth_ub_from(truncate_checked(spectrum_of(rho), eps));
}

double h_max_tilde(const RealVector& probs, double eps) {
  return std::log2(static_cast<double>(truncate_checked(sorted_descending(probs), eps).kept));
}

double h_max_prime(const RealVector& probs, double eps) {
  return -std::log2(truncate_checked(sorted_descending(probs), eps).min_kept);
}

double h_max_smooth_ub(const RealVector& probs, double eps) {
  return smooth_ub_from(truncate_checked(sorted_descending(probs), eps));
}

double h_min_cond_cq(const CqState& cq) {
  double guess = 0.0;
  for (std::size_t x = 0; x < cq.size(); ++x) {
    if (cq.prob(x) == 0.0) continue;
    guess += cq.prob(x) * std::min(eigh(cq.conditional(x).op()).values[0], 1.0);
  }
  if (!(guess > 0.0)) throw DomainError("cq state has empty support");
  return -std::log2(std::min(guess, 1.0));
}

// -------------------------------------------------------- relative entropies

double d_max(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw DomainError("dimension mismatch");
  Matrix p = support_projector(sigma.matrix());
  auto n = static_cast<Eigen::Index>(rho.dim());
  double outside = ((Matrix::Identity(n, n) - p) * rho.matrix()).trace().real();
  if (outside > 1e-9 * std::max(rho.trace(), 1e-300)) return kInf;
  Matrix s = inverse_sqrt_on_support(sigma.matrix());
  Matrix m = s * rho.matrix() * s;
  double top = eigh(Matrix((m + m.adjoint()) / 2.0)).values[0];
  return log2_safe(top);
}

double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw DomainError("dimension mismatch");
  auto sr = eigh(rho.op());
  auto ss = eigh(sigma.op());
  double smax = std::max(ss.values.cwiseAbs().maxCoeff(), 1e-300);
  double d = 0.0;
  for (Eigen::Index i = 0; i < sr.values.size(); ++i) {
    double r = sr.values[i];
    if (r <= kSupportTol) continue;
    d += r * std::log2(r);
    for (Eigen::Index j = 0; j < ss.values.size(); ++j) {
      double overlap = std::norm(sr.vectors.col(i).dot(ss.vectors.col(j)));
      if (overlap <= 1e-14) continue;
      if (ss.values[j] <= kSupportTol * smax) return kInf;
      d -= r * overlap * std::log2(ss.values[j]);
    }
  }
  return d;
}

double i_max(const DensityOperator& rho_ab, std::size_t split) {
  auto [a, b] = bipartition(rho_ab.dims(), split);
  auto product = tensor(partial_trace(rho_ab, a), partial_trace(rho_ab, b));
  return d_max(rho_ab, product);
}

// --------------------------------------------------------------- reporting

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::exact:
      return "exact";
    case BoundKind::upper:
      return "upper-bound";
    case BoundKind::lower:
      return "lower-bound";
  }
  return "exact";
}

void EntropyReport::add(std::string name, double value, BoundKind kind, std::string note) {
  entries.push_back({std::move(name), value, kind, std::move(note)});
}

const EntropyEntry& EntropyReport::at(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw DomainError("report has no entry '" + name + "'");
}

CqState measure_cq(const DensityOperator& rho_ab, const RankOnePovm& povm, std::size_t split) {
  auto [a_labels, b_labels] = bipartition(rho_ab.dims(), split);
  std::vector<std::size_t> a_idx, b_idx;
  for (std::size_t i = 0; i < rho_ab.dims().size(); ++i) (i < split ? a_idx : b_idx).push_back(i);
  auto a_dims = rho_ab.dims().select(a_idx);
  auto b_dims = rho_ab.dims().select(b_idx);
  const auto da = static_cast<Eigen::Index>(a_dims.total());
  const auto db = static_cast<Eigen::Index>(b_dims.total());
  if (static_cast<Eigen::Index>(povm.dim()) != da) throw DomainError("POVM dimension does not match subsystem");
  std::vector<double> probs;
  std::vector<DensityOperator> cond;
  for (std::size_t x = 0; x < povm.size(); ++x) {
    Matrix k = Matrix::Zero(da * db, db);
    const Vector& psi = povm.vector(x);
    for (Eigen::Index a = 0; a < da; ++a) k.block(a * db, 0, db, db) = psi[a] * Matrix::Identity(db, db);
    Matrix block = povm.weight(x) * (k.adjoint() * rho_ab.matrix() * k);
    double p = block.trace().real();
    if (p > 1e-14) {
      probs.push_back(p);
      cond.emplace_back(b_dims, Matrix(block / p), true);
    } else {
      probs.push_back(0.0);
      cond.push_back(DensityOperator::maximally_mixed(b_dims));
    }
  }
  return CqState(probs, cond);
}

EntropyReport distillation_rate_terms(const DensityOperator& rho_ab, const RankOnePovm& povm, double eps,
                                      std::size_t split) {
  check_eps_open(eps);
  auto [a, b] = bipartition(rho_ab.dims(), split);
  auto rho_a = partial_trace(rho_ab, a);
  auto rho_b = partial_trace(rho_ab, b);
  const double eps_a = eps * eps / 48.0;
  const double eps0 = std::pow(eps, 0.25);

  EntropyReport r;
  r.add("log_dA_dB", std::log2(static_cast<double>(rho_ab.dim())), BoundKind::exact);
  double ha = h_max_tilde(rho_a, eps_a);
  r.add("h_max_tilde_A", ha, BoundKind::exact, "smoothing eps^2/48");
  r.add("h_max_tilde_B", h_max_tilde(rho_b, eps), BoundKind::exact, "smoothing eps");
  auto cq = measure_cq(rho_ab, povm, split);
  r.add("i_h_X_B", i_h_cq(cq, eps0).summary.value, BoundKind::exact,
        "smoothing eps0 = eps^(1/4), coefficient 1; lower-bounds the optimized one-way term");
  double surrogate = eps > 0.0 ? ha - 2.0 * std::log2(eps * eps / 24.0) : kInf;
  r.add("communication_surrogate", surrogate, BoundKind::upper, "h_max_tilde_A - 2 log2(eps^2/24)");
  r.symbolic.emplace_back("O(1)", "unspecified additive constant");
  r.symbolic.emplace_back("O(log eps)", "unspecified multiple of log2(eps)");
  r.symbolic.emplace_back("eps_prime", "unspecified rational power of eps");
  return r;
}

}  // namespace purity
