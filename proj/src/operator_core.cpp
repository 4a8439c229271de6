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
#include "purity/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace purity {

namespace {

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

std::vector<std::size_t> group_starts(const RealVector& values) {
  std::vector<std::size_t> starts;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (i == 0 || values[i - 1] - values[i] >= kDegeneracyGap) {
      starts.push_back(static_cast<std::size_t>(i));
    }
  }
  return starts;
}

void average_groups(RealVector& values, const std::vector<std::size_t>& starts) {
  for (std::size_t g = 0; g < starts.size(); ++g) {
    std::size_t begin = starts[g];
    std::size_t end = g + 1 < starts.size() ? starts[g + 1] : static_cast<std::size_t>(values.size());
    if (end - begin < 2) continue;
    double mean = values.segment(begin, end - begin).mean();
    values.segment(begin, end - begin).setConstant(mean);
  }
}

// Pivoted Gram-Schmidt on the columns of a projector: yields a basis of its
// range that depends only on the projector itself.
Matrix canonical_basis(const Matrix& projector, std::size_t rank) {
  const Eigen::Index n = projector.rows();
  Matrix residual = projector;
  Matrix basis(n, static_cast<Eigen::Index>(rank));
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (std::size_t k = 0; k < rank; ++k) {
    RealVector norms = residual.colwise().norm().transpose();
    double best = -1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!used[j]) best = std::max(best, norms[j]);
    }
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!used[j] && norms[j] >= best * (1.0 - 1e-9)) {
        pick = j;
        break;
      }
    }
    used[pick] = true;
    Vector q = residual.col(pick) / norms[pick];
    q -= basis.leftCols(k) * (basis.leftCols(k).adjoint() * q);
    q.normalize();
    basis.col(k) = q;
    residual -= q * (q.adjoint() * residual);
  }
  return basis;
}

void check_same_dims(const DensityOperator& a, const DensityOperator& b) {
  if (a.dim() != b.dim()) throw DomainError("dimension mismatch");
}

}  // namespace

// ---------------------------------------------------------------- HilbertDims

HilbertDims::HilbertDims(std::vector<Subsystem> parts) : parts_(std::move(parts)) {
  std::set<std::string> seen;
  for (const auto& p : parts_) {
    if (p.dim == 0) throw DomainError("subsystem '" + p.label + "' has zero dimension");
    if (!seen.insert(p.label).second) throw DomainError("duplicate subsystem label '" + p.label + "'");
  }
}

HilbertDims HilbertDims::single(std::string label, std::size_t dim) {
  return HilbertDims({Subsystem{std::move(label), dim}});
}

std::size_t HilbertDims::total() const {
  std::size_t t = 1;
  for (const auto& p : parts_) t *= p.dim;
  return t;
}

std::size_t HilbertDims::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i].label == label) return i;
  }
  throw DomainError("unknown subsystem label '" + label + "'");
}

bool HilbertDims::contains(const std::string& label) const {
  return std::any_of(parts_.begin(), parts_.end(), [&](const Subsystem& s) { return s.label == label; });
}

std::size_t HilbertDims::dim_of(const std::string& label) const { return parts_[index_of(label)].dim; }

HilbertDims HilbertDims::concat(const HilbertDims& other) const {
  auto parts = parts_;
  parts.insert(parts.end(), other.parts_.begin(), other.parts_.end());
  return HilbertDims(std::move(parts));
}

HilbertDims HilbertDims::select(const std::vector<std::size_t>& indices) const {
  std::vector<Subsystem> parts;
  for (auto i : indices) parts.push_back(parts_.at(i));
  return HilbertDims(std::move(parts));
}

std::vector<std::string> HilbertDims::labels() const {
  std::vector<std::string> out;
  for (const auto& p : parts_) out.push_back(p.label);
  return out;
}

// --------------------------------------------------------- HermitianOperator

HermitianOperator::HermitianOperator(HilbertDims dims, const Matrix& m) : dims_(std::move(dims)) {
  if (m.rows() != m.cols()) throw DomainError("operator is not square");
  if (static_cast<std::size_t>(m.rows()) != dims_.total()) {
    throw DomainError("matrix size " + std::to_string(m.rows()) + " does not match dims total " +
                      std::to_string(dims_.total()));
  }
  if (!m.allFinite()) throw DomainError("operator has non-finite entries");
  double scale = std::max(max_abs(m), 1.0);
  if (max_abs(m - m.adjoint()) > kHermiticityTol * scale) {
    throw DomainError("operator is not Hermitian");
  }
  m_ = (m + m.adjoint()) / 2.0;
}

HermitianOperator HermitianOperator::identity(const HilbertDims& dims) {
  auto n = static_cast<Eigen::Index>(dims.total());
  return HermitianOperator(dims, Matrix::Identity(n, n));
}

HermitianOperator HermitianOperator::diagonal(const HilbertDims& dims, const RealVector& d) {
  Matrix m = Matrix::Zero(d.size(), d.size());
  m.diagonal() = d.cast<cplx>();
  return HermitianOperator(dims, m);
}

bool HermitianOperator::is_diagonal() const {
  for (Eigen::Index c = 0; c < m_.cols(); ++c) {
    for (Eigen::Index r = 0; r < m_.rows(); ++r) {
      if (r != c && m_(r, c) != cplx(0.0, 0.0)) return false;
    }
  }
  return true;
}

// ----------------------------------------------------------- DensityOperator

DensityOperator::DensityOperator(HermitianOperator op, bool normalized)
    : op_(std::move(op)), normalized_(normalized) {
  double tr = op_.trace();
  if (!(tr > 0.0) || tr > 1.0 + kTraceTol) {
    throw DomainError("trace " + std::to_string(tr) + " outside (0, 1]");
  }
  if (normalized_ && std::abs(tr - 1.0) > kTraceTol) {
    throw DomainError("trace " + std::to_string(tr) + " differs from 1 for a normalized state");
  }
  double min_eig = op_.is_diagonal()
                       ? op_.matrix().diagonal().real().minCoeff()
                       : Eigen::SelfAdjointEigenSolver<Matrix>(op_.matrix(), Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  if (min_eig < -kPsdTol) {
    throw DomainError("operator has negative eigenvalue " + std::to_string(min_eig));
  }
}

DensityOperator::DensityOperator(const HilbertDims& dims, const Matrix& m, bool normalized)
    : DensityOperator(HermitianOperator(dims, m), normalized) {}

DensityOperator DensityOperator::diagonal(const HilbertDims& dims, const RealVector& p, bool normalized) {
  return DensityOperator(HermitianOperator::diagonal(dims, p), normalized);
}

DensityOperator DensityOperator::maximally_mixed(const HilbertDims& dims) {
  auto n = static_cast<Eigen::Index>(dims.total());
  return diagonal(dims, RealVector::Constant(n, 1.0 / static_cast<double>(n)));
}

// ----------------------------------------------------------- PureStateVector

PureStateVector::PureStateVector(HilbertDims dims, Vector amplitudes)
    : dims_(std::move(dims)), v_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(v_.size()) != dims_.total()) throw DomainError("vector size does not match dims");
  if (std::abs(v_.norm() - 1.0) > 1e-10) throw DomainError("state vector is not normalized");
}

PureStateVector PureStateVector::basis(const HilbertDims& dims, std::size_t index) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dims.total()));
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return PureStateVector(dims, v);
}

DensityOperator PureStateVector::density() const {
  return DensityOperator(dims_, v_ * v_.adjoint(), true);
}

// --------------------------------------------------------------- RankOnePovm

RankOnePovm::RankOnePovm(std::size_t dim, std::vector<double> weights, std::vector<Vector> vectors,
                         std::vector<std::string> labels)
    : dim_(dim), weights_(std::move(weights)), vectors_(std::move(vectors)), labels_(std::move(labels)) {
  if (weights_.size() != vectors_.size()) throw DomainError("POVM weight/vector count mismatch");
  if (labels_.empty()) {
    for (std::size_t x = 0; x < weights_.size(); ++x) labels_.push_back(std::to_string(x));
  }
  if (labels_.size() != weights_.size()) throw DomainError("POVM label count mismatch");
  auto n = static_cast<Eigen::Index>(dim_);
  Matrix sum = Matrix::Zero(n, n);
  for (std::size_t x = 0; x < weights_.size(); ++x) {
    if (!(weights_[x] >= 0.0)) throw DomainError("POVM weight " + std::to_string(x) + " is negative");
    if (vectors_[x].size() != n) throw DomainError("POVM vector " + std::to_string(x) + " has wrong dimension");
    if (std::abs(vectors_[x].norm() - 1.0) > 1e-10) {
      throw DomainError("POVM vector " + std::to_string(x) + " is not a unit vector");
    }
    sum += weights_[x] * vectors_[x] * vectors_[x].adjoint();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(sum - Matrix::Identity(n, n), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().cwiseAbs().maxCoeff() > 1e-8) throw DomainError("POVM is not complete");
}

RankOnePovm RankOnePovm::computational_basis(std::size_t dim) {
  std::vector<double> w(dim, 1.0);
  std::vector<Vector> v;
  for (std::size_t x = 0; x < dim; ++x) {
    Vector e = Vector::Zero(static_cast<Eigen::Index>(dim));
    e[static_cast<Eigen::Index>(x)] = 1.0;
    v.push_back(e);
  }
  return RankOnePovm(dim, w, v);
}

Matrix RankOnePovm::element(std::size_t x) const {
  return weights_[x] * vectors_[x] * vectors_[x].adjoint();
}

// ---------------------------------------------------------- SpectralMultiset

SpectralMultiset::SpectralMultiset(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  double mass = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].value < -kPsdTol || atoms_[i].value > 1.0 + kTraceTol) {
      throw DomainError("spectral value outside [0, 1]");
    }
    if (atoms_[i].multiplicity < 0) throw DomainError("negative multiplicity");
    if (i > 0 && !(atoms_[i].value < atoms_[i - 1].value)) {
      throw DomainError("spectral values must be strictly descending");
    }
    mass += atoms_[i].value * atoms_[i].multiplicity.convert_to<double>();
  }
  if (mass > 1.0 + kTraceTol) throw DomainError("spectral mass exceeds 1");
}

SpectralMultiset SpectralMultiset::from_values(const RealVector& values) {
  auto spectrum = eigh_diagonal(values);
  std::vector<Atom> atoms;
  for (std::size_t g = 0; g < spectrum.group_start.size(); ++g) {
    std::size_t begin = spectrum.group_start[g];
    std::size_t end = g + 1 < spectrum.group_start.size() ? spectrum.group_start[g + 1]
                                                        : static_cast<std::size_t>(values.size());
    atoms.push_back({std::max(0.0, spectrum.values[static_cast<Eigen::Index>(begin)]), BigInt(end - begin)});
  }
  return SpectralMultiset(std::move(atoms));
}

BigInt SpectralMultiset::count() const {
  BigInt c = 0;
  for (const auto& a : atoms_) c += a.multiplicity;
  return c;
}

double SpectralMultiset::mass() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.value * a.multiplicity.convert_to<double>();
  return m;
}

// ---------------------------------------------------------------------- eigh

DiagonalSpectrum eigh_diagonal(const RealVector& diag) {
  DiagonalSpectrum out;
  out.order.resize(static_cast<std::size_t>(diag.size()));
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return diag[a] > diag[b]; });
  out.values.resize(diag.size());
  for (std::size_t i = 0; i < out.order.size(); ++i) out.values[i] = diag[out.order[i]];
  out.group_start = group_starts(out.values);
  // Within a group the original index order is kept, matching the canonical
  // basis that eigh produces for diagonal input.
  for (std::size_t g = 0; g < out.group_start.size(); ++g) {
    std::size_t begin = out.group_start[g];
    std::size_t end = g + 1 < out.group_start.size() ? out.group_start[g + 1] : out.order.size();
    std::sort(out.order.begin() + begin, out.order.begin() + end);
  }
  average_groups(out.values, out.group_start);
  return out;
}

Spectrum eigh(const Matrix& m) {
  if (m.rows() != m.cols()) throw DomainError("operator is not square");
  double scale = std::max(max_abs(m), 1.0);
  if (max_abs(m - m.adjoint()) > kHermiticityTol * scale) throw DomainError("operator is not Hermitian");
  const Eigen::Index n = m.rows();
  Spectrum out;
  bool diagonal = true;
  for (Eigen::Index c = 0; c < n && diagonal; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r != c && m(r, c) != cplx(0.0, 0.0)) {
        diagonal = false;
        break;
      }
    }
  }
  if (diagonal) {
    auto ds = eigh_diagonal(m.diagonal().real());
    out.values = ds.values;
    out.group_start = ds.group_start;
    out.vectors = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) out.vectors(static_cast<Eigen::Index>(ds.order[i]), i) = 1.0;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
  out.values = es.eigenvalues().reverse();
  Matrix raw = es.eigenvectors().rowwise().reverse();
  out.group_start = group_starts(out.values);
  average_groups(out.values, out.group_start);
  out.vectors.resize(n, n);
  for (std::size_t g = 0; g < out.group_start.size(); ++g) {
    std::size_t begin = out.group_start[g];
    std::size_t end = g + 1 < out.group_start.size() ? out.group_start[g + 1] : static_cast<std::size_t>(n);
    auto len = static_cast<Eigen::Index>(end - begin);
    Matrix block = raw.middleCols(static_cast<Eigen::Index>(begin), len);
    Matrix projector = block * block.adjoint();
    out.vectors.middleCols(static_cast<Eigen::Index>(begin), len) = canonical_basis(projector, end - begin);
  }
  return out;
}

Spectrum eigh(const HermitianOperator& op) { return eigh(op.matrix()); }

// ------------------------------------------------------------- tensor / trace

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  const Matrix& x = a.matrix();
  const Matrix& y = b.matrix();
  Matrix k(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      k.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return HermitianOperator(a.dims().concat(b.dims()), k);
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  return DensityOperator(tensor(a.op(), b.op()), a.normalized() && b.normalized());
}

Matrix partial_trace(const Matrix& m, const HilbertDims& dims, const std::vector<std::size_t>& keep) {
  const std::size_t k = dims.size();
  std::vector<bool> kept(k, false);
  for (auto i : keep) kept.at(i) = true;
  std::vector<std::size_t> dim(k);
  for (std::size_t i = 0; i < k; ++i) dim[i] = dims.parts()[i].dim;

  std::size_t dk = 1, dt = 1;
  for (std::size_t i = 0; i < k; ++i) (kept[i] ? dk : dt) *= dim[i];

  // Full index of (kept multi-index a, traced multi-index t).
  auto compose = [&](std::size_t a, std::size_t t) {
    std::size_t idx = 0;
    std::size_t ra = a, rt = t;
    std::vector<std::size_t> digits(k);
    for (std::size_t i = k; i-- > 0;) {
      if (kept[i]) {
        digits[i] = ra % dim[i];
        ra /= dim[i];
      } else {
        digits[i] = rt % dim[i];
        rt /= dim[i];
      }
    }
    for (std::size_t i = 0; i < k; ++i) idx = idx * dim[i] + digits[i];
    return idx;
  };

  std::vector<std::size_t> table(dk * dt);
  for (std::size_t a = 0; a < dk; ++a) {
    for (std::size_t t = 0; t < dt; ++t) table[a * dt + t] = compose(a, t);
  }
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::size_t a = 0; a < dk; ++a) {
    for (std::size_t b = 0; b < dk; ++b) {
      cplx s = 0.0;
      for (std::size_t t = 0; t < dt; ++t) {
        s += m(static_cast<Eigen::Index>(table[a * dt + t]), static_cast<Eigen::Index>(table[b * dt + t]));
      }
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = s;
    }
  }
  return out;
}

HermitianOperator partial_trace(const HermitianOperator& op, const std::vector<std::string>& keep) {
  std::vector<std::size_t> idx;
  for (const auto& l : keep) idx.push_back(op.dims().index_of(l));
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return HermitianOperator(op.dims().select(idx), partial_trace(op.matrix(), op.dims(), idx));
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& keep) {
  auto reduced = partial_trace(rho.op(), keep);
  bool normalized = rho.normalized();
  return DensityOperator(std::move(reduced), normalized);
}

// ------------------------------------------------------------------ distances

double trace_norm(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((hermitian + hermitian.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  check_same_dims(a, b);
  return trace_norm(a.matrix() - b.matrix());
}

Matrix sqrt_psd(const Matrix& m) {
  auto s = eigh(m);
  RealVector r = s.values.cwiseMax(0.0).cwiseSqrt();
  return s.vectors * r.cast<cplx>().asDiagonal() * s.vectors.adjoint();
}

Matrix inverse_sqrt_on_support(const Matrix& m, double tol) {
  auto s = eigh(m);
  double scale = std::max(s.values.size() ? s.values.cwiseAbs().maxCoeff() : 0.0, 1e-300);
  RealVector r(s.values.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = s.values[i] > tol * scale ? 1.0 / std::sqrt(s.values[i]) : 0.0;
  return s.vectors * r.cast<cplx>().asDiagonal() * s.vectors.adjoint();
}

Matrix support_projector(const Matrix& m, double tol) {
  auto s = eigh(m);
  double scale = std::max(s.values.size() ? s.values.cwiseAbs().maxCoeff() : 0.0, 1e-300);
  RealVector r(s.values.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = s.values[i] > tol * scale ? 1.0 : 0.0;
  return s.vectors * r.cast<cplx>().asDiagonal() * s.vectors.adjoint();
}

bool is_projector(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= tol && max_abs(m * m - m) <= tol;
}

double generalized_fidelity(const DensityOperator& a, const DensityOperator& b) {
  check_same_dims(a, b);
  Matrix prod = sqrt_psd(a.matrix()) * sqrt_psd(b.matrix());
  Eigen::JacobiSVD<Matrix> svd(prod);
  double f = svd.singularValues().sum();
  double ta = std::min(1.0, a.trace());
  double tb = std::min(1.0, b.trace());
  return f + std::sqrt((1.0 - ta) * (1.0 - tb));
}

// --------------------------------------------------------- purify / dephase

PureStateVector purify(const DensityOperator& rho, const std::string& reference_label) {
  if (!rho.normalized()) throw DomainError("purify requires a normalized state");
  if (rho.dims().contains(reference_label)) {
    throw DomainError("reference label '" + reference_label + "' already used");
  }
  auto s = eigh(rho.op());
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    if (s.values[i] > kSupportTol) ++rank;
  }
  const auto d = static_cast<Eigen::Index>(rho.dim());
  const auto r = static_cast<Eigen::Index>(rank);
  Vector v = Vector::Zero(d * r);
  for (Eigen::Index i = 0; i < r; ++i) {
    double amp = std::sqrt(s.values[i]);
    for (Eigen::Index a = 0; a < d; ++a) v[a * r + i] = amp * s.vectors(a, i);
  }
  v.normalize();
  auto dims = rho.dims().concat(HilbertDims::single(reference_label, rank));
  return PureStateVector(dims, v);
}

DensityOperator dephase(const DensityOperator& rho, const std::string& label) {
  const auto& dims = rho.dims();
  std::size_t pos = dims.index_of(label);
  std::size_t inner = 1;
  for (std::size_t i = pos + 1; i < dims.size(); ++i) inner *= dims.parts()[i].dim;
  std::size_t d = dims.parts()[pos].dim;
  Matrix m = rho.matrix();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::size_t xr = (static_cast<std::size_t>(r) / inner) % d;
      std::size_t xc = (static_cast<std::size_t>(c) / inner) % d;
      if (xr != xc) m(r, c) = 0.0;
    }
  }
  return DensityOperator(HermitianOperator(dims, m), rho.normalized());
}

// -------------------------------------------------------------------- checks

InequalityCheck gentle_measurement_check(const DensityOperator& rho, const HermitianOperator& lam) {
  if (lam.dim() != rho.dim()) throw DomainError("dimension mismatch");
  auto s = eigh(lam);
  if (s.values.minCoeff() < -1e-9 || s.values.maxCoeff() > 1.0 + 1e-9) {
    throw DomainError("measurement operator outside [0, I]");
  }
  Matrix root = sqrt_psd(lam.matrix());
  InequalityCheck out;
  out.eps = std::max(0.0, 1.0 - (lam.matrix() * rho.matrix()).trace().real());
  out.lhs = trace_norm(rho.matrix() - root * rho.matrix() * root);
  out.rhs = 2.0 * std::sqrt(out.eps);
  return out;
}

InequalityCheck sequential_success(const DensityOperator& rho, const std::vector<HermitianOperator>& projectors) {
  const auto n = static_cast<Eigen::Index>(rho.dim());
  Matrix chain = Matrix::Identity(n, n);
  double miss = 0.0;
  for (const auto& p : projectors) {
    if (p.dim() != rho.dim()) throw DomainError("dimension mismatch");
    if (!is_projector(p.matrix())) throw DomainError("sequence element is not a projector");
    chain = p.matrix() * chain;
    miss += std::max(0.0, ((Matrix::Identity(n, n) - p.matrix()) * rho.matrix()).trace().real());
  }
  InequalityCheck out;
  out.eps = miss;
  out.lhs = (chain * rho.matrix() * chain.adjoint()).trace().real();
  out.rhs = rho.trace() - 2.0 * std::sqrt(miss);
  return out;
}

// ---------------------------------------------------------------- completion

Matrix complete_unitary(const Matrix& cols) {
  const Eigen::Index n = cols.rows();
  const Eigen::Index k = cols.cols();
  if (k > n) throw DomainError("more columns than dimension");
  Matrix overlap = cols.adjoint() * cols - Matrix::Identity(k, k);
  if (k > 0 && max_abs(overlap) > 1e-8) throw DomainError("columns are not orthonormal");
  Matrix u(n, n);
  u.leftCols(k) = cols;
  // Residuals of each computational basis vector against the current span.
  Matrix residual = Matrix::Identity(n, n) - cols * cols.adjoint();
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index c = k; c < n; ++c) {
    RealVector norms = residual.colwise().norm().transpose();
    double best = -1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!used[j]) best = std::max(best, norms[j]);
    }
    if (best < 1e-8) throw DomainError("unitary completion failed: rank deficiency");
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!used[j] && norms[j] >= best * (1.0 - 1e-9)) {
        pick = j;
        break;
      }
    }
    used[pick] = true;
    Vector q = residual.col(pick) / norms[pick];
    for (int pass = 0; pass < 2; ++pass) {
      q -= u.leftCols(c) * (u.leftCols(c).adjoint() * q);
      q.normalize();
    }
    u.col(c) = q;
    residual -= q * (q.adjoint() * residual);
  }
  return u;
}

double log2_safe(double x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log2(x);
}

std::pair<std::vector<std::string>, std::vector<std::string>> bipartition(const HilbertDims& dims,
                                                                          std::size_t split) {
  if (split == 0 || split >= dims.size()) {
    throw DomainError("bipartition needs 1 <= split < number of subsystems");
  }
  std::pair<std::vector<std::string>, std::vector<std::string>> out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    (i < split ? out.first : out.second).push_back(dims.parts()[i].label);
  }
  return out;
}

}  // namespace purity
