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
#include <cmath>
#include <optional>
#include <sstream>

#include "purity/entropies.hpp"

namespace purity {

namespace {

struct Entry {
  Eigen::Index row, col;
  cplx coeff;
};

// Orthonormal basis of the real vector space of d x d Hermitian matrices.
std::vector<std::vector<Entry>> hermitian_basis(Eigen::Index d) {
  std::vector<std::vector<Entry>> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index k = 0; k < d; ++k) basis.push_back({{k, k, 1.0}});
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index l = k + 1; l < d; ++l) {
      basis.push_back({{k, l, r}, {l, k, r}});
      basis.push_back({{k, l, cplx(0.0, -r)}, {l, k, cplx(0.0, r)}});
    }
  }
  return basis;
}

Matrix from_coords(const std::vector<std::vector<Entry>>& basis, const RealVector& s, Eigen::Index d) {
  Matrix m = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (const auto& e : basis[i]) m(e.row, e.col) += s[static_cast<Eigen::Index>(i)] * e.coeff;
  }
  return m;
}

// Barrier value t Tr S - sum_x log det(S - rho_x), or nullopt outside the domain.
std::optional<double> barrier(const Matrix& s, const std::vector<Matrix>& rhos, double t) {
  double f = t * s.trace().real();
  for (const auto& r : rhos) {
    Eigen::LLT<Matrix> llt(s - r);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      double d = l(i, i).real();
      if (!(d > 0.0)) return std::nullopt;
      f -= 2.0 * std::log(d);
    }
  }
  return f;
}

}  // namespace

ModifiedMaxInformation i_max_mod_cq(const CqState& cq, double gap_tol, int max_newton) {
  if (std::abs(cq.total() - 1.0) > 1e-9) throw DomainError("cq state must be normalized");
  const auto d = static_cast<Eigen::Index>(cq.b_dim());
  if (d > 32) throw DomainError("max-information solver supports B dimension up to 32");
  std::vector<Matrix> rhos;
  for (std::size_t x = 0; x < cq.size(); ++x) {
    if (cq.prob(x) > 0.0) rhos.push_back(cq.conditional(x).matrix());
  }
  const auto basis = hermitian_basis(d);
  const auto nb = static_cast<Eigen::Index>(basis.size());
  const double m = static_cast<double>(rhos.size());

  RealVector s = RealVector::Zero(nb);
  for (Eigen::Index k = 0; k < d; ++k) s[k] = 2.0;
  Matrix smat = from_coords(basis, s, d);
  double t = m * static_cast<double>(d) / smat.trace().real();
  int steps = 0;

  while (true) {
    // Centering by damped Newton steps, at most 60 per barrier weight.
    for (int inner = 0; inner < 60; ++inner) {
      if (++steps > max_newton) {
        std::ostringstream msg;
        msg << "max-information solver did not converge: duality gap " << m * static_cast<double>(d) / t
            << " after " << max_newton << " Newton steps";
        throw DomainError(msg.str());
      }
      RealVector g = RealVector::Zero(nb);
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nb, nb);
      for (Eigen::Index k = 0; k < d; ++k) g[k] = t;
      for (const auto& r : rhos) {
        Matrix a = (smat - r).inverse();
        a = (a + a.adjoint()) / 2.0;
        for (Eigen::Index i = 0; i < nb; ++i) {
          cplx tr = 0.0;
          for (const auto& e : basis[i]) tr += e.coeff * a(e.col, e.row);
          g[i] -= tr.real();
          for (Eigen::Index j = i; j < nb; ++j) {
            cplx acc = 0.0;
            for (const auto& ei : basis[i]) {
              for (const auto& ej : basis[j]) acc += ei.coeff * ej.coeff * a(ej.col, ei.row) * a(ei.col, ej.row);
            }
            h(i, j) += acc.real();
          }
        }
      }
      h = h.selfadjointView<Eigen::Upper>();
      RealVector delta = h.ldlt().solve(-g);
      double decrement = -g.dot(delta);
      if (decrement / 2.0 <= 1e-10) break;
      auto f0 = barrier(smat, rhos, t);
      double step = 1.0;
      // Full step in the quadratic region.
      const bool quadratic = decrement < 0.0625;
      for (int ls = 0; ls < 80; ++ls) {
        Matrix trial = from_coords(basis, s + step * delta, d);
        auto f = barrier(trial, rhos, t);
        if (f && (quadratic || *f <= *f0 - 0.25 * step * decrement)) break;
        step *= 0.5;
      }
      s += step * delta;
      smat = from_coords(basis, s, d);
      if (step < 1e-12) break;
    }
    double trace = smat.trace().real();
    if (m * static_cast<double>(d) / t <= gap_tol * trace) break;
    t *= 8.0;
  }

  ModifiedMaxInformation out;
  smat = (smat + smat.adjoint()) / 2.0;
  double trace = smat.trace().real();
  out.value = std::log2(trace);
  auto dims = cq.b_dims();
  out.sigma_star = DensityOperator(dims, Matrix(smat / trace), true);
  out.newton_steps = steps;
  double margin = kInf;
  Matrix y = Matrix::Zero(d, d);
  std::vector<Matrix> ys;
  for (const auto& r : rhos) {
    Matrix gap = smat - r;
    margin = std::min(margin, eigh(Matrix((gap + gap.adjoint()) / 2.0)).values.minCoeff());
    Matrix a = gap.inverse() / t;
    ys.push_back((a + a.adjoint()) / 2.0);
    y += ys.back();
  }
  out.certificate_margin = margin;
  Matrix yinv = inverse_sqrt_on_support(y);
  double dual = 0.0;
  for (std::size_t x = 0; x < rhos.size(); ++x) dual += (yinv * ys[x] * yinv * rhos[x]).trace().real();
  out.lower_bound = log2_safe(dual);
  return out;
}

}  // namespace purity
