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
#include "purity/distillation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "purity/concentration.hpp"
#include "purity/random.hpp"

namespace purity {

PureStateVector coherent_measure(const PureStateVector& phi, const RankOnePovm& povm, std::size_t split) {
  const auto& dims = phi.dims();
  if (split == 0 || split > dims.size()) throw DomainError("measured subsystems out of range");
  if (dims.contains("X")) throw DomainError("label 'X' is reserved for the measurement register");
  std::size_t da = 1;
  for (std::size_t i = 0; i < split; ++i) da *= dims.parts()[i].dim;
  if (povm.dim() != da) throw DomainError("POVM dimension does not match the measured subsystems");
  const auto nda = static_cast<Eigen::Index>(da);
  const auto rest = static_cast<Eigen::Index>(phi.dim() / da);
  const auto nx = static_cast<Eigen::Index>(povm.size());
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> in(
      phi.amplitudes().data(), nda, rest);
  Vector out(nx * nda * rest);
  for (Eigen::Index x = 0; x < nx; ++x) {
    const Vector& psi = povm.vector(static_cast<std::size_t>(x));
    double amp = std::sqrt(povm.weight(static_cast<std::size_t>(x)));
    Eigen::RowVectorXcd overlap = psi.adjoint() * in;
    for (Eigen::Index a = 0; a < nda; ++a) {
      out.segment((x * nda + a) * rest, rest) = (amp * psi[a] * overlap).transpose();
    }
  }
  double norm = out.norm();
  if (std::abs(norm - 1.0) > 1e-10) throw DomainError("coherent measurement is not norm preserving: POVM incomplete");
  auto out_dims = HilbertDims::single("X", povm.size()).concat(dims);
  return PureStateVector(out_dims, out);
}

Matrix relabel_unitary(const RankOnePovm& povm) {
  const auto d = static_cast<Eigen::Index>(povm.dim());
  const auto nx = static_cast<Eigen::Index>(povm.size());
  Matrix u = Matrix::Zero(nx * d, nx * d);
  for (Eigen::Index x = 0; x < nx; ++x) {
    Matrix block = Matrix::Identity(d, d);
    if (povm.weight(static_cast<std::size_t>(x)) > 0.0) {
      const Vector& psi = povm.vector(static_cast<std::size_t>(x));
      cplx phase = std::abs(psi[0]) > 0.0 ? psi[0] / std::abs(psi[0]) : cplx(1.0);
      Vector w = psi;
      w[0] -= phase;
      double wn = w.squaredNorm();
      if (wn > 1e-28) block = Matrix::Identity(d, d) - 2.0 * w * w.adjoint() / wn;
      block /= phase;
    }
    u.block(x * d, x * d, d, d) = block;
  }
  return u;
}

const StageCheck& DistillationReport::stage(const std::string& name) const {
  for (const auto& s : stages) {
    if (s.name == name) return s;
  }
  throw DomainError("no stage named '" + name + "'");
}

bool DistillationReport::all_hold() const {
  return std::all_of(stages.begin(), stages.end(), [](const StageCheck& s) { return s.holds(); });
}

ClassicalJoint ClassicalJoint::from(const DensityOperator& rho_ab, std::size_t split) {
  if (!rho_ab.op().is_diagonal()) throw DomainError("classical path requires a diagonal state");
  auto [a_labels, b_labels] = bipartition(rho_ab.dims(), split);
  ClassicalJoint j;
  j.d_a = 1;
  for (const auto& l : a_labels) j.d_a *= rho_ab.dims().dim_of(l);
  j.d_b = rho_ab.dim() / j.d_a;
  const auto da = static_cast<Eigen::Index>(j.d_a), db = static_cast<Eigen::Index>(j.d_b);
  j.p.resize(da, db);
  for (Eigen::Index a = 0; a < da; ++a) {
    for (Eigen::Index b = 0; b < db; ++b) j.p(a, b) = rho_ab.matrix()(a * db + b, a * db + b).real();
  }
  return j;
}

ClassicalJoint ClassicalJoint::iid(const Eigen::MatrixXd& p, std::size_t n) {
  if (n == 0) throw DomainError("need at least one copy");
  Eigen::MatrixXd acc = p;
  for (std::size_t k = 1; k < n; ++k) {
    Eigen::MatrixXd next(acc.rows() * p.rows(), acc.cols() * p.cols());
    for (Eigen::Index a = 0; a < acc.rows(); ++a) {
      for (Eigen::Index b = 0; b < acc.cols(); ++b) {
        next.block(a * p.rows(), b * p.cols(), p.rows(), p.cols()) = acc(a, b) * p;
      }
    }
    acc = std::move(next);
  }
  ClassicalJoint j;
  j.d_a = static_cast<std::size_t>(acc.rows());
  j.d_b = static_cast<std::size_t>(acc.cols());
  j.p = std::move(acc);
  return j;
}

DensityOperator ClassicalJoint::density() const {
  RealVector diag(static_cast<Eigen::Index>(d_a * d_b));
  const auto db = static_cast<Eigen::Index>(d_b);
  for (Eigen::Index a = 0; a < p.rows(); ++a) {
    for (Eigen::Index b = 0; b < db; ++b) diag[a * db + b] = p(a, b);
  }
  return DensityOperator::diagonal(HilbertDims({{"A", d_a}, {"B", d_b}}), diag);
}

namespace {

// Alice's concentration of the dephased X register. Labels outside the
// good set end in garbage symbol 0.
struct XStage {
  std::vector<std::size_t> good;  // labels by descending probability
  std::vector<std::size_t> symbol;  // garbage symbol per label
  std::vector<bool> in_good;
  double good_mass = 0.0;
  double distance = 0.0;
};

XStage alice_x_stage(const std::vector<double>& p, double eps) {
  RealVector v = Eigen::Map<const RealVector>(p.data(), static_cast<Eigen::Index>(p.size()));
  auto cc = concentrate_classical(v, eps);
  XStage xs;
  xs.good.assign(cc.order.begin(), cc.order.begin() + static_cast<std::ptrdiff_t>(cc.rank));
  if (xs.good != prune_good_set(p, eps)) throw std::logic_error("good set and concentration support disagree");
  xs.symbol.assign(p.size(), 0);
  xs.in_good.assign(p.size(), false);
  for (std::size_t g = 0; g < xs.good.size(); ++g) {
    xs.symbol[xs.good[g]] = g;
    xs.in_good[xs.good[g]] = true;
    xs.good_mass += p[xs.good[g]];
  }
  xs.distance = cc.distance;
  return xs;
}

Ledger make_ledger(std::size_t d_a, std::size_t alphabet, std::size_t good, const Binning& b, std::size_t d_b,
                   std::size_t r_b) {
  auto lg = [](std::size_t v) { return std::log2(static_cast<double>(v)); };
  Ledger l;
  l.alice_register = lg(d_a);
  l.x_register = lg(alphabet);
  l.intra_bin = lg(b.n);
  l.bob_register = lg(b.m * d_b);
  l.borrowed_x = lg(alphabet);
  l.borrowed_alice = lg(good);
  l.borrowed_padding = lg(b.padded()) - lg(good);
  l.borrowed_bob = lg(r_b);
  l.gross = l.alice_register + l.x_register + l.intra_bin + l.bob_register;
  l.borrowed = l.borrowed_x + l.borrowed_alice + l.borrowed_padding + l.borrowed_bob;
  l.net = l.gross - l.borrowed;
  l.alice_net = l.alice_register + l.x_register - l.borrowed_x - l.borrowed_alice - l.borrowed_padding;
  l.bob_net = l.intra_bin + l.bob_register - l.borrowed_bob;
  l.communication = lg(b.m * b.n);
  l.good_set = lg(good);
  l.alphabet = lg(alphabet);
  return l;
}

template <class Attempt, class Run>
Attempt search_binning(std::uint64_t seed, double bound, Run&& run) {
  Attempt best;
  bool have = false;
  for (int a = 0; a < kMaxBinningRetries; ++a) {
    std::uint64_t s = a == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(a));
    Attempt cur = run(s);
    cur.attempts = a + 1;
    if (cur.error <= bound + 1e-12) return cur;
    if (!have || cur.error < best.error) {
      best = std::move(cur);
      have = true;
    }
  }
  std::ostringstream msg;
  msg << "decoding error " << best.error << " exceeds " << bound << " after " << kMaxBinningRetries
      << " binnings; best seed " << best.binning.seed;
  throw DomainError(msg.str());
}

void finish_report(DistillationReport& rep, double eps, double relabel_distance, const XStage& xs,
                   double decoding_bound, double union_slack, double n_register, double b_marginal,
                   double eps_pp, double bob_distance, double final_distance) {
  double x_bound = 3.0 * std::sqrt(eps);
  double n_bound = 2.0 * std::sqrt(rep.decoding_error);
  double b_bound = 2.0 * eps_pp;
  double bob_bound = 3.0 * std::sqrt(eps);
  rep.stages = {
      {"relabel", relabel_distance, 1e-9, "A marginal against |0><0|"},
      {"x_concentration", xs.distance, x_bound, "Alice's X register, 3 sqrt(eps)"},
      {"decoding", rep.decoding_error, decoding_bound, "average over labels, sqrt(2 eps) + eps"},
      {"sequential_union", union_slack, 0.0, "max over labels of error minus 2 sqrt(union terms)"},
      {"n_register", n_register, n_bound, "N marginal against |0><0|, 2 sqrt(decoding error)"},
      {"b_marginal", b_marginal, b_bound, "B disturbance, 2 sum_x p ||rho - sqrt(T) rho sqrt(T)||"},
      {"bob_concentration", bob_distance, bob_bound, "Bob's concentration of M B, 3 sqrt(eps)"},
  };
  rep.accumulated_bound = relabel_distance + x_bound + n_bound + b_bound + bob_bound;
  rep.final_distance = final_distance;
  rep.stages.push_back({"final", final_distance, rep.accumulated_bound, "pure registers against |0...0>"});
}

struct DenseAttempt {
  Binning binning;
  SequentialDecoder decoder;
  DecodingError err;
  double error = 0.0;
  int attempts = 0;
};

DistillationReport run_cq_dense(const CqState& cq, std::size_t d_a, double eps, std::uint64_t seed,
                                double relabel_distance) {
  const std::size_t nx = cq.size();
  const auto d = static_cast<Eigen::Index>(cq.b_dim());
  auto xs = alice_x_stage(cq.probs(), eps);
  const std::size_t ns = xs.good.size();

  std::vector<double> bp;
  std::vector<DensityOperator> bc;
  for (std::size_t y : xs.good) {
    bp.push_back(cq.prob(y) / xs.good_mass);
    bc.push_back(cq.conditional(y));
  }
  CqState binned(bp, bc);
  auto test = i_h_cq(binned, eps);
  const double i_h = test.summary.value;
  const double bound = std::sqrt(2.0 * eps) + eps;

  auto found = search_binning<DenseAttempt>(seed, bound, [&](std::uint64_t s) {
    DenseAttempt at;
    at.binning = make_binning(ns, i_h, eps, s);
    at.decoder = build_decoders(binned, at.binning, test.projectors);
    at.err = decoding_error(binned, at.binning, at.decoder, test.projectors, eps);
    at.error = at.err.average;
    return at;
  });
  const Binning& bin = found.binning;
  auto w = bob_unitary(found.decoder);
  const auto nn = static_cast<Eigen::Index>(bin.n);
  const auto mm = static_cast<Eigen::Index>(bin.m);

  // Block states on N (x) B before Bob's unitary: the good branch with
  // normalized weights, and every label (garbage symbol 0 outside the set).
  std::vector<Matrix> good_branch(bin.m, Matrix::Zero(nn * d, nn * d));
  std::vector<Matrix> all_branches(bin.m, Matrix::Zero(nn * d, nn * d));
  for (std::size_t y = 0; y < nx; ++y) {
    double p = cq.prob(y);
    if (!(p > 0.0)) continue;
    std::size_t g = xs.symbol[y];
    auto m = bin.block(g);
    auto n = static_cast<Eigen::Index>(bin.slot(g));
    const Matrix& rho = cq.conditional(y).matrix();
    all_branches[m].block(n * d, n * d, d, d) += p * rho;
    if (xs.in_good[y]) good_branch[m].block(n * d, n * d, d, d) += (p / xs.good_mass) * rho;
  }
  for (std::size_t m = 0; m < bin.m; ++m) {
    good_branch[m] = w.blocks[m] * good_branch[m] * w.blocks[m].adjoint();
    all_branches[m] = w.blocks[m] * all_branches[m] * w.blocks[m].adjoint();
  }

  Matrix nu = Matrix::Zero(nn, nn);
  Matrix beta = Matrix::Zero(d, d);
  for (std::size_t m = 0; m < bin.m; ++m) {
    for (Eigen::Index n = 0; n < nn; ++n) {
      beta += good_branch[m].block(n * d, n * d, d, d);
      for (Eigen::Index k = 0; k < nn; ++k) nu(n, k) += good_branch[m].block(n * d, k * d, d, d).trace();
    }
  }
  Matrix zero_n = Matrix::Zero(nn, nn);
  zero_n(0, 0) = 1.0;
  double n_register = trace_norm(nu - zero_n);
  Matrix expected = binned.marginal_b();
  double b_marginal = trace_norm(beta - expected);
  double eps_pp = 0.0;
  for (std::size_t g = 0; g < ns; ++g) {
    const auto& blk = found.decoder.blocks[bin.block(g)];
    Matrix root = sqrt_psd(blk.theta[bin.slot(g)]);
    const Matrix& rho = binned.conditional(g).matrix();
    eps_pp += binned.prob(g) * trace_norm(rho - root * rho * root);
  }
  double union_slack = -kInf;
  std::size_t unscaled = 0;
  for (std::size_t g = 0; g < ns; ++g) {
    union_slack = std::max(union_slack, found.err.sequential[g] - found.err.union_bound[g]);
    if (found.err.sequential[g] > std::sqrt(found.err.union_terms[g]) + 1e-9) ++unscaled;
  }

  // Bob's concentration of M (x) B, index m * d_B + b.
  const Eigen::Index dmb = mm * d;
  Matrix rho_mb = Matrix::Zero(dmb, dmb);
  for (std::size_t m = 0; m < bin.m; ++m) {
    auto mi = static_cast<Eigen::Index>(m);
    for (Eigen::Index n = 0; n < nn; ++n) rho_mb.block(mi * d, mi * d, d, d) += all_branches[m].block(n * d, n * d, d, d);
  }
  rho_mb = (rho_mb + rho_mb.adjoint()) / 2.0;
  auto spectrum = eigh(rho_mb);
  auto trunc = truncate_spectrum(spectrum.values, eps);
  if (trunc.kept == 0) throw DomainError("Bob's truncation left an empty support");
  const auto r = static_cast<Eigen::Index>(trunc.kept);
  Matrix kept_basis = spectrum.vectors.leftCols(r);
  Matrix proj = kept_basis * kept_basis.adjoint();
  Matrix kept = proj * rho_mb * proj;
  double bob_distance = trace_norm(rho_mb - kept / kept.trace().real());

  // Pure registers N and P on the good branch: eigenvector i < r goes to
  // (garbage i, P = 0), eigenvector i >= r to (garbage 0, P = i).
  std::vector<Matrix> xi(static_cast<std::size_t>(nn * nn), Matrix::Zero(dmb, dmb));
  for (Eigen::Index n = 0; n < nn; ++n) {
    for (Eigen::Index k = 0; k < nn; ++k) {
      Matrix t = Matrix::Zero(dmb, dmb);
      for (Eigen::Index m = 0; m < mm; ++m) {
        t.block(m * d, m * d, d, d) = xs.good_mass * good_branch[static_cast<std::size_t>(m)].block(n * d, k * d, d, d);
      }
      xi[static_cast<std::size_t>(n * nn + k)] = spectrum.vectors.adjoint() * t * spectrum.vectors;
    }
  }
  Matrix omega = Matrix::Zero(nn * dmb, nn * dmb);
  for (Eigen::Index n = 0; n < nn; ++n) {
    for (Eigen::Index k = 0; k < nn; ++k) {
      const Matrix& x = xi[static_cast<std::size_t>(n * nn + k)];
      cplx kept_sum = 0.0;
      for (Eigen::Index i = 0; i < r; ++i) kept_sum += x(i, i);
      omega(n * dmb, k * dmb) = kept_sum;
      for (Eigen::Index p = r; p < dmb; ++p) {
        omega(n * dmb, k * dmb + p) = x(0, p);
        omega(n * dmb + p, k * dmb) = x(p, 0);
        for (Eigen::Index q = r; q < dmb; ++q) omega(n * dmb + p, k * dmb + q) = x(p, q);
      }
    }
  }
  Matrix target = Matrix::Zero(nn * dmb, nn * dmb);
  target(0, 0) = 1.0;
  double final_distance = trace_norm(omega - target) + (1.0 - xs.good_mass) + relabel_distance;

  DistillationReport rep;
  rep.alphabet = nx;
  rep.good_set = ns;
  rep.good_mass = xs.good_mass;
  rep.m = bin.m;
  rep.n = bin.n;
  rep.padding = bin.padding;
  rep.bob_rank = trunc.kept;
  rep.i_h = i_h;
  rep.eps = eps;
  rep.seed = seed;
  rep.seed_used = bin.seed;
  rep.attempts = found.attempts;
  rep.decoding_error = found.err.average;
  rep.union_bound_unscaled_violations = unscaled;
  rep.ledger = make_ledger(d_a, nx, ns, bin, cq.b_dim(), trunc.kept);
  finish_report(rep, eps, relabel_distance, xs, bound, union_slack, n_register, b_marginal, eps_pp, bob_distance,
                final_distance);
  return rep;
}

std::string unused_label(const HilbertDims& dims, std::string base) {
  while (dims.contains(base)) base += "'";
  return base;
}

// Classical decoder of one block: the slot accepted for each outcome b.
struct ClassicalBlock {
  std::vector<std::size_t> decoded;
  std::vector<std::size_t> below;              // below[n]: outcomes decoded to a slot < n
  std::vector<std::vector<std::size_t>> hits;  // hits[n]: outcomes decoded to n, ascending
};

struct ClassicalAttempt {
  Binning binning;
  std::vector<ClassicalBlock> blocks;
  std::vector<double> per_label, sequential, union_bound, union_terms;
  double error = 0.0;
  int attempts = 0;
};

ClassicalAttempt classical_attempt(const ClassicalCq& cq, const Eigen::MatrixXd& proj, double i_h, double eps,
                                   std::uint64_t seed) {
  ClassicalAttempt at;
  const std::size_t ns = cq.size();
  const std::size_t db = cq.b_dim();
  at.binning = make_binning(ns, i_h, eps, seed);
  const Binning& bin = at.binning;
  at.per_label.assign(ns, 0.0);
  at.sequential.assign(ns, 0.0);
  at.union_bound.assign(ns, 0.0);
  at.union_terms.assign(ns, 0.0);
  const auto& c = cq.conditionals();
  std::vector<double> before(db);
  std::vector<std::size_t> raw(db);
  for (std::size_t m = 0; m < bin.m; ++m) {
    std::vector<std::size_t> order;
    for (std::size_t s = 0; s < bin.n; ++s) {
      std::size_t y = bin.members[m][s];
      if (y != kNoLabel && cq.prob(y) > 0.0) order.push_back(s);
    }
    std::size_t abort_slot = order.empty() ? 0 : order.back();
    for (std::size_t s = 0; s < bin.n; ++s) {
      if (std::find(order.begin(), order.end(), s) == order.end()) {
        abort_slot = s;
        break;
      }
    }
    std::fill(raw.begin(), raw.end(), kNoLabel);
    std::fill(before.begin(), before.end(), 0.0);
    for (std::size_t s : order) {
      std::size_t y = bin.members[m][s];
      auto yi = static_cast<Eigen::Index>(y);
      double terms = 0.0;
      for (std::size_t b = 0; b < db; ++b) {
        auto bi = static_cast<Eigen::Index>(b);
        double cb = c(yi, bi);
        if (cb == 0.0) continue;
        terms += cb * ((1.0 - proj(yi, bi)) + before[b]);
      }
      at.union_terms[y] = terms;
      at.union_bound[y] = 2.0 * std::sqrt(terms);
      for (std::size_t b = 0; b < db; ++b) {
        auto bi = static_cast<Eigen::Index>(b);
        if (proj(yi, bi) > 0.5) {
          before[b] += 1.0;
          if (raw[b] == kNoLabel) raw[b] = s;
        }
      }
    }
    ClassicalBlock blk;
    blk.decoded.resize(db);
    blk.hits.assign(bin.n, {});
    for (std::size_t b = 0; b < db; ++b) {
      blk.decoded[b] = raw[b] == kNoLabel ? abort_slot : raw[b];
      blk.hits[blk.decoded[b]].push_back(b);
    }
    blk.below.assign(bin.n + 1, 0);
    for (std::size_t n = 0; n < bin.n; ++n) blk.below[n + 1] = blk.below[n] + blk.hits[n].size();
    for (std::size_t s : order) {
      std::size_t y = bin.members[m][s];
      auto yi = static_cast<Eigen::Index>(y);
      double wrong = 0.0, seq = 0.0;
      for (std::size_t b = 0; b < db; ++b) {
        double cb = c(yi, static_cast<Eigen::Index>(b));
        if (cb == 0.0) continue;
        if (blk.decoded[b] != s) wrong += cb;
        if (raw[b] != s) seq += cb;
      }
      at.per_label[y] = wrong;
      at.sequential[y] = seq;
      at.error += cq.prob(y) * wrong;
    }
    at.blocks.push_back(std::move(blk));
  }
  return at;
}

// Bob's unitary as a permutation of N x B: decoded inputs go to (0, b), the
// rest fill the outputs with n >= 1 in ascending order.
std::pair<std::size_t, std::size_t> bob_permute(const ClassicalBlock& blk, std::size_t db, std::size_t n,
                                                std::size_t b) {
  if (blk.decoded[b] == n) return {0, b};
  const auto& h = blk.hits[n];
  std::size_t same = static_cast<std::size_t>(std::lower_bound(h.begin(), h.end(), b) - h.begin());
  std::size_t rank = n * db + b - (blk.below[n] + same);
  std::size_t out = db + rank;
  return {out / db, out % db};
}

}  // namespace

DistillationReport run_distillation(const DensityOperator& rho_ab, const RankOnePovm& povm, double eps,
                                    std::uint64_t seed, std::size_t split) {
  if (!rho_ab.normalized()) throw DomainError("distillation requires a normalized state");
  if (!(eps > 0.0) || !(eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  auto [a_labels, b_labels] = bipartition(rho_ab.dims(), split);
  std::vector<std::size_t> b_idx;
  for (std::size_t i = split; i < rho_ab.dims().size(); ++i) b_idx.push_back(i);
  auto b_dims = rho_ab.dims().select(b_idx);
  const std::size_t d_b = b_dims.total();

  auto phi = purify(rho_ab, unused_label(rho_ab.dims(), "R"));
  auto psi = coherent_measure(phi, povm, split);
  const auto da = static_cast<Eigen::Index>(povm.dim());
  const auto nx = static_cast<Eigen::Index>(povm.size());
  const auto rest = static_cast<Eigen::Index>(phi.dim()) / da;
  const auto r = rest / static_cast<Eigen::Index>(d_b);

  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> amps(
      psi.amplitudes().data(), nx * da, rest);
  Matrix relabeled = relabel_unitary(povm) * amps;

  Matrix rho_a = Matrix::Zero(da, da);
  for (Eigen::Index x = 0; x < nx; ++x) {
    auto rows = relabeled.middleRows(x * da, da);
    rho_a += rows * rows.adjoint();
  }
  Matrix zero_a = Matrix::Zero(da, da);
  zero_a(0, 0) = 1.0;
  double relabel_distance = trace_norm((rho_a + rho_a.adjoint()) / 2.0 - zero_a);

  std::vector<double> probs;
  std::vector<DensityOperator> cond;
  for (Eigen::Index x = 0; x < nx; ++x) {
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> chi = relabeled.row(x * da);
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> c(
        chi.data(), static_cast<Eigen::Index>(d_b), r);
    Matrix rb = c * c.adjoint();
    double p = rb.trace().real();
    if (p > 1e-14) {
      probs.push_back(p);
      cond.emplace_back(b_dims, Matrix(rb / p), true);
    } else {
      probs.push_back(0.0);
      cond.push_back(DensityOperator::maximally_mixed(b_dims));
    }
  }
  CqState cq(probs, cond, {});
  return run_cq_dense(cq, povm.dim(), eps, seed, relabel_distance);
}

DistillationReport run_distillation(const ClassicalJoint& joint, double eps, std::uint64_t seed) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  if (joint.p.rows() != static_cast<Eigen::Index>(joint.d_a) || joint.p.cols() != static_cast<Eigen::Index>(joint.d_b)) {
    throw DomainError("joint distribution shape does not match its dimensions");
  }
  if (joint.p.minCoeff() < -kPsdTol || std::abs(joint.p.sum() - 1.0) > 1e-9) {
    throw DomainError("joint distribution must be normalized and non-negative");
  }
  const std::size_t nx = joint.d_a;
  const std::size_t db = joint.d_b;
  std::vector<double> px(nx);
  for (std::size_t a = 0; a < nx; ++a) px[a] = joint.p.row(static_cast<Eigen::Index>(a)).sum();
  auto xs = alice_x_stage(px, eps);
  const std::size_t ns = xs.good.size();

  std::vector<double> bp;
  Eigen::MatrixXd bc(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(db));
  for (std::size_t g = 0; g < ns; ++g) {
    std::size_t y = xs.good[g];
    bp.push_back(px[y] / xs.good_mass);
    bc.row(static_cast<Eigen::Index>(g)) = joint.p.row(static_cast<Eigen::Index>(y)) / px[y];
  }
  ClassicalCq binned(bp, bc);
  auto test = i_h_cq(binned, eps);
  const double i_h = test.summary.value;
  const double bound = std::sqrt(2.0 * eps) + eps;
  auto found = search_binning<ClassicalAttempt>(
      seed, bound, [&](std::uint64_t s) { return classical_attempt(binned, test.projectors, i_h, eps, s); });
  const Binning& bin = found.binning;

  std::vector<double> nu(bin.n, 0.0), beta(db, 0.0), expected(db, 0.0);
  std::vector<double> r_mb(bin.m * db, 0.0);
  for (std::size_t y = 0; y < nx; ++y) {
    if (!(px[y] > 0.0)) continue;
    std::size_t g = xs.symbol[y];
    std::size_t m = bin.block(g), n = bin.slot(g);
    for (std::size_t b = 0; b < db; ++b) {
      double pj = joint.p(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(b));
      if (pj == 0.0) continue;
      auto [n_out, b_out] = bob_permute(found.blocks[m], db, n, b);
      r_mb[m * db + b_out] += pj;
      if (xs.in_good[y]) {
        double q = pj / xs.good_mass;
        nu[n_out] += q;
        beta[b_out] += q;
        expected[b] += q;
      }
    }
  }
  double n_register = (1.0 - nu[0]);
  for (std::size_t n = 1; n < bin.n; ++n) n_register += nu[n];
  double b_marginal = 0.0;
  for (std::size_t b = 0; b < db; ++b) b_marginal += std::abs(beta[b] - expected[b]);
  // For commuting states ||rho - sqrt(T) rho sqrt(T)|| is the mass outside T.
  double eps_pp = found.error;

  RealVector rv = Eigen::Map<const RealVector>(r_mb.data(), static_cast<Eigen::Index>(r_mb.size()));
  auto bob = concentrate_classical(rv, eps);

  double omega00 = 0.0;
  for (std::size_t y = 0; y < nx; ++y) {
    if (!(px[y] > 0.0) || !xs.in_good[y]) continue;
    std::size_t g = xs.symbol[y];
    std::size_t m = bin.block(g), n = bin.slot(g);
    for (std::size_t b = 0; b < db; ++b) {
      double pj = joint.p(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(b));
      if (pj == 0.0) continue;
      auto [n_out, b_out] = bob_permute(found.blocks[m], db, n, b);
      if (n_out == 0 && bob.pure[m * db + b_out] == 0) omega00 += pj;
    }
  }
  double final_distance = (1.0 - omega00) + (xs.good_mass - omega00) + (1.0 - xs.good_mass);

  double union_slack = -kInf;
  std::size_t unscaled = 0;
  for (std::size_t g = 0; g < ns; ++g) {
    union_slack = std::max(union_slack, found.sequential[g] - found.union_bound[g]);
    if (found.sequential[g] > std::sqrt(found.union_terms[g]) + 1e-9) ++unscaled;
  }

  DistillationReport rep;
  rep.alphabet = nx;
  rep.good_set = ns;
  rep.good_mass = xs.good_mass;
  rep.m = bin.m;
  rep.n = bin.n;
  rep.padding = bin.padding;
  rep.bob_rank = bob.rank;
  rep.i_h = i_h;
  rep.eps = eps;
  rep.seed = seed;
  rep.seed_used = bin.seed;
  rep.attempts = found.attempts;
  rep.decoding_error = found.error;
  rep.union_bound_unscaled_violations = unscaled;
  rep.ledger = make_ledger(joint.d_a, nx, ns, bin, db, bob.rank);
  finish_report(rep, eps, 0.0, xs, bound, union_slack, n_register, b_marginal, eps_pp, bob.distance,
                final_distance);
  return rep;
}

}  // namespace purity
