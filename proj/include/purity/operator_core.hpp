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

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

namespace purity {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using BigInt = boost::multiprecision::cpp_int;

/// Thrown when an input violates a documented precondition or invariant.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kDegeneracyGap = 1e-9;
inline constexpr double kSupportTol = 1e-12;

struct Subsystem {
  std::string label;
  std::size_t dim = 1;

  bool operator==(const Subsystem&) const = default;
};

/// Ordered tensor factors; the first factor is the most significant index.
class HilbertDims {
 public:
  HilbertDims() = default;
  explicit HilbertDims(std::vector<Subsystem> parts);
  static HilbertDims single(std::string label, std::size_t dim);

  const std::vector<Subsystem>& parts() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  std::size_t total() const;
  std::size_t index_of(const std::string& label) const;
  bool contains(const std::string& label) const;
  std::size_t dim_of(const std::string& label) const;
  HilbertDims concat(const HilbertDims& other) const;
  HilbertDims select(const std::vector<std::size_t>& indices) const;
  std::vector<std::string> labels() const;

  bool operator==(const HilbertDims&) const = default;

 private:
  std::vector<Subsystem> parts_;
};

class HermitianOperator {
 public:
  HermitianOperator() = default;
  /// Rejects matrices whose anti-Hermitian part exceeds the tolerance, then
  /// stores the exactly symmetrized matrix.
  HermitianOperator(HilbertDims dims, const Matrix& m);

  static HermitianOperator identity(const HilbertDims& dims);
  static HermitianOperator diagonal(const HilbertDims& dims, const RealVector& d);

  const HilbertDims& dims() const { return dims_; }
  const Matrix& matrix() const { return m_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  double trace() const { return m_.trace().real(); }
  bool is_diagonal() const;

 private:
  HilbertDims dims_;
  Matrix m_;
};

/// Positive semidefinite operator with trace in (0, 1]; a substate unless
/// `normalized` is set.
class DensityOperator {
 public:
  DensityOperator() = default;
  DensityOperator(HermitianOperator op, bool normalized);
  DensityOperator(const HilbertDims& dims, const Matrix& m, bool normalized = true);

  static DensityOperator diagonal(const HilbertDims& dims, const RealVector& p,
                                  bool normalized = true);
  static DensityOperator maximally_mixed(const HilbertDims& dims);

  const HermitianOperator& op() const { return op_; }
  const Matrix& matrix() const { return op_.matrix(); }
  const HilbertDims& dims() const { return op_.dims(); }
  std::size_t dim() const { return op_.dim(); }
  bool normalized() const { return normalized_; }
  double trace() const { return op_.trace(); }

 private:
  HermitianOperator op_;
  bool normalized_ = true;
};

class PureStateVector {
 public:
  PureStateVector() = default;
  PureStateVector(HilbertDims dims, Vector amplitudes);

  static PureStateVector basis(const HilbertDims& dims, std::size_t index);

  const HilbertDims& dims() const { return dims_; }
  const Vector& amplitudes() const { return v_; }
  std::size_t dim() const { return static_cast<std::size_t>(v_.size()); }
  DensityOperator density() const;

 private:
  HilbertDims dims_;
  Vector v_;
};

/// Weighted rank-one POVM {c_x |psi_x><psi_x|}.
class RankOnePovm {
 public:
  RankOnePovm() = default;
  RankOnePovm(std::size_t dim, std::vector<double> weights, std::vector<Vector> vectors,
              std::vector<std::string> labels = {});

  static RankOnePovm computational_basis(std::size_t dim);

  std::size_t size() const { return weights_.size(); }
  std::size_t dim() const { return dim_; }
  double weight(std::size_t x) const { return weights_[x]; }
  const Vector& vector(std::size_t x) const { return vectors_[x]; }
  const std::string& label(std::size_t x) const { return labels_[x]; }
  Matrix element(std::size_t x) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> weights_;
  std::vector<Vector> vectors_;
  std::vector<std::string> labels_;
};

/// Eigenvalues with (possibly huge) multiplicities, strictly descending.
class SpectralMultiset {
 public:
  struct Atom {
    double value = 0.0;
    BigInt multiplicity = 0;
  };

  SpectralMultiset() = default;
  explicit SpectralMultiset(std::vector<Atom> atoms);
  static SpectralMultiset from_values(const RealVector& values);

  const std::vector<Atom>& atoms() const { return atoms_; }
  BigInt count() const;
  double mass() const;

 private:
  std::vector<Atom> atoms_;
};

/// Eigen-decomposition with descending values. Eigenvalues closer than
/// kDegeneracyGap are merged into a group carrying the group mean, and each
/// group's basis is canonicalized so the result depends only on the input.
struct Spectrum {
  RealVector values;
  Matrix vectors;
  std::vector<std::size_t> group_start;
};

Spectrum eigh(const HermitianOperator& op);
Spectrum eigh(const Matrix& hermitian);

/// Descending order of a real diagonal, grouped exactly as eigh groups it.
/// `order[i]` is the original index of the i-th eigenvalue.
struct DiagonalSpectrum {
  RealVector values;
  std::vector<std::size_t> order;
  std::vector<std::size_t> group_start;
};
DiagonalSpectrum eigh_diagonal(const RealVector& diag);

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

HermitianOperator partial_trace(const HermitianOperator& op, const std::vector<std::string>& keep);
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& keep);
Matrix partial_trace(const Matrix& m, const HilbertDims& dims, const std::vector<std::size_t>& keep);

/// Unhalved trace norm distance ||a - b||_1.
double trace_distance(const DensityOperator& a, const DensityOperator& b);
double trace_norm(const Matrix& hermitian);

double generalized_fidelity(const DensityOperator& a, const DensityOperator& b);

PureStateVector purify(const DensityOperator& rho, const std::string& reference_label = "R");

DensityOperator dephase(const DensityOperator& rho, const std::string& label);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double eps = 0.0;
};

/// lhs = ||rho - sqrt(L) rho sqrt(L)||_1, rhs = 2 sqrt(eps), eps = 1 - Tr[L rho].
InequalityCheck gentle_measurement_check(const DensityOperator& rho, const HermitianOperator& lam);

/// lhs = Tr[P_k..P_1 rho P_1..P_k], rhs = Tr rho - 2 sqrt(sum_i Tr[(I - P_i) rho]).
InequalityCheck sequential_success(const DensityOperator& rho,
                                   const std::vector<HermitianOperator>& projectors);

Matrix sqrt_psd(const Matrix& m);
Matrix inverse_sqrt_on_support(const Matrix& m, double tol = kSupportTol);
Matrix support_projector(const Matrix& m, double tol = kSupportTol);
bool is_projector(const Matrix& m, double tol = 1e-8);

/// Extends the orthonormal columns of `cols` to an n x n unitary. Candidates
/// are the computational basis vectors; at each step the one with the largest
/// residual is taken, with ties going to the lowest index.
Matrix complete_unitary(const Matrix& cols);

double log2_safe(double x);

/// Labels of the first `split` subsystems and of the remaining ones.
std::pair<std::vector<std::string>, std::vector<std::string>> bipartition(const HilbertDims& dims,
                                                                          std::size_t split);

}  // namespace purity
