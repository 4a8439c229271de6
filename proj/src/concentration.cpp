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
#include "purity/concentration.hpp"

#include <cmath>

#include "purity/entropies.hpp"

namespace purity {

SupportProjector build_projector(const DensityOperator& rho, double eps) {
  if (!rho.normalized()) throw DomainError("concentration requires a normalized state");
  if (!(eps >= 0.0) || !(eps < 1.0)) throw DomainError("eps must lie in [0, 1)");
  auto s = eigh(rho.op());
  auto t = truncate_spectrum(s.values, eps);
  if (t.kept == 0) throw DomainError("truncation left an empty support");
  SupportProjector out;
  out.rank = t.kept;
  auto r = static_cast<Eigen::Index>(t.kept);
  out.basis = s.vectors.leftCols(r);
  out.complement = s.vectors.rightCols(s.vectors.cols() - r);
  out.projector = out.basis * out.basis.adjoint();
  out.captured_mass = (out.projector * rho.matrix()).trace().real();
  return out;
}

ConcentrationUnitary concentration_unitary(const DensityOperator& rho, const Matrix& projector, std::size_t d1,
                                           std::size_t d2) {
  const auto n = static_cast<Eigen::Index>(rho.dim());
  if (projector.rows() != n || projector.cols() != n) throw DomainError("projector dimension mismatch");
  if (d1 * d2 != rho.dim()) throw DomainError("split does not factorize the dimension");
  if (!is_projector(projector)) throw DomainError("input is not a projector");
  auto spectrum = eigh(projector);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < spectrum.values.size(); ++i) {
    if (spectrum.values[i] > 0.5) ++rank;
  }
  if (rank != d1) throw DomainError("projector rank does not match the garbage dimension");

  // Columns of U^dag: outputs (g, 0) take the range basis, all other outputs
  // take the kernel basis in ascending output order.
  Matrix udag(n, n);
  std::size_t next_kernel = d1;
  for (std::size_t out = 0; out < rho.dim(); ++out) {
    std::size_t g = out / d2, p = out % d2;
    std::size_t src = p == 0 ? g : next_kernel++;
    udag.col(static_cast<Eigen::Index>(out)) = spectrum.vectors.col(static_cast<Eigen::Index>(src));
  }
  ConcentrationUnitary res;
  res.unitary = udag.adjoint();
  res.output_dims = HilbertDims({{"A_g", d1}, {"A_p", d2}});
  const Matrix& u = res.unitary;
  Matrix kept = projector * rho.matrix() * projector;
  double mass = kept.trace().real();
  if (!(mass > 0.0)) throw DomainError("projector captures no weight");
  Matrix out_state = u * rho.matrix() * u.adjoint();
  Matrix target = u * (kept / mass) * u.adjoint();
  res.distance = trace_norm(out_state - target);
  res.bound = 3.0 * std::sqrt(std::max(0.0, 1.0 - mass));
  return res;
}

ConcentrationReport run_concentration(const DensityOperator& rho, double eps) {
  auto proj = build_projector(rho, eps);
  const std::size_t d = rho.dim();
  const std::size_t r = proj.rank;
  auto spectrum = eigh(rho.op());
  const auto nd = static_cast<Eigen::Index>(d);
  const auto nr = static_cast<Eigen::Index>(r);

  ConcentrationReport rep;
  rep.d_a = d;
  rep.d_c = r;
  rep.eps_used = eps;
  rep.input_dims = HilbertDims({{"A", d}, {"C", r}});
  rep.output_dims = HilbertDims({{"A_g", r}, {"A_p", d}});

  // Eigenvector i with ancilla value c goes to (i, c) when i is kept and to
  // (c, i) otherwise; the map is a bijection of {0..d-1} x {0..r-1}.
  auto output_of = [&](Eigen::Index i, Eigen::Index c) {
    return i < nr ? i * nd + c : c * nd + i;
  };
  Matrix u = Matrix::Zero(nd * nr, nd * nr);
  for (Eigen::Index i = 0; i < nd; ++i) {
    for (Eigen::Index c = 0; c < nr; ++c) {
      Eigen::Index out = output_of(i, c);
      for (Eigen::Index a = 0; a < nd; ++a) u(out, a * nr + c) = std::conj(spectrum.vectors(a, i));
    }
  }
  rep.unitary = u;

  // Columns of U acting on A (x) |0>_C.
  Matrix k(nd * nr, nd);
  for (Eigen::Index a = 0; a < nd; ++a) k.col(a) = u.col(a * nr);
  Matrix omega = k * rho.matrix() * k.adjoint();

  // Garbage state: the p = 0 block of the output, renormalized.
  Matrix g_block(nr, nr);
  for (Eigen::Index g = 0; g < nr; ++g) {
    for (Eigen::Index h = 0; h < nr; ++h) g_block(g, h) = omega(g * nd, h * nd);
  }
  double mass = g_block.trace().real();
  Matrix target = Matrix::Zero(nd * nr, nd * nr);
  for (Eigen::Index g = 0; g < nr; ++g) {
    for (Eigen::Index h = 0; h < nr; ++h) target(g * nd, h * nd) = g_block(g, h) / mass;
  }
  Matrix delta = omega - target;
  Matrix reduced = k.adjoint() * delta * k;
  if ((delta - k * reduced * k.adjoint()).cwiseAbs().maxCoeff() <= 1e-12) {
    rep.achieved_distance = trace_norm(reduced);
  } else {
    rep.achieved_distance = trace_norm(delta);
  }
  Matrix pure = partial_trace(omega, rep.output_dims, {1});
  Matrix zero = Matrix::Zero(nd, nd);
  zero(0, 0) = 1.0;
  rep.pure_distance = trace_norm(pure - zero);
  rep.removed_mass = std::max(0.0, 1.0 - mass);
  rep.h_max_tilde = std::log2(static_cast<double>(r));
  rep.gross_bits = std::log2(static_cast<double>(d));
  rep.ancilla_bits = std::log2(static_cast<double>(r));
  rep.rate_bits = rep.gross_bits - rep.ancilla_bits;
  rep.bound = 3.0 * std::sqrt(eps);
  Matrix gn = (g_block / mass + (g_block / mass).adjoint()) / 2.0;
  rep.garbage = DensityOperator(HilbertDims::single("A_g", r), gn, true);
  return rep;
}

ClassicalConcentration concentrate_classical(const RealVector& probs, double eps) {
  if (!(eps >= 0.0) || !(eps < 1.0)) throw DomainError("eps must lie in [0, 1)");
  if (probs.minCoeff() < -kPsdTol || probs.sum() > 1.0 + kTraceTol) {
    throw DomainError("concentration requires a (sub)distribution");
  }
  auto ds = eigh_diagonal(probs);
  double total = probs.sum();
  auto t = truncate_spectrum(ds.values, eps);
  if (t.kept == 0) throw DomainError("truncation left an empty support");
  ClassicalConcentration out;
  out.rank = t.kept;
  out.order = ds.order;
  const std::size_t n = ds.order.size();
  out.garbage.assign(n, 0);
  out.pure.assign(n, 0);
  double kept_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t y = ds.order[i];
    if (i < t.kept) {
      out.garbage[y] = i;
      out.pure[y] = 0;
      kept_mass += probs[static_cast<Eigen::Index>(y)];
    } else {
      out.garbage[y] = 0;
      out.pure[y] = i;
    }
  }
  out.removed_mass = std::max(0.0, total - kept_mass);
  // Simulated output against (renormalized kept part) (x) |0>.
  double dist = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    double p = probs[static_cast<Eigen::Index>(y)];
    double target = out.pure[y] == 0 ? p / kept_mass * total : 0.0;
    dist += std::abs(p - target);
  }
  out.distance = dist;
  double zero_mass = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    if (out.pure[y] == 0) zero_mass += probs[static_cast<Eigen::Index>(y)];
  }
  out.pure_distance = std::abs(total - zero_mass) + (total - zero_mass);
  return out;
}

}  // namespace purity
