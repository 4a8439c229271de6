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

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "purity/entropies.hpp"
#include "purity/operator_core.hpp"

namespace purity {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr std::size_t kNoLabel = std::numeric_limits<std::size_t>::max();

/// V = sum_x |x> sqrt(Lambda_x) on the leading `split` subsystems of phi.
/// The output carries a new leading register X.
PureStateVector coherent_measure(const PureStateVector& phi, const RankOnePovm& povm, std::size_t split = 1);

/// Block-diagonal sum_x |x><x| (x) U_x on X (x) A with U_x psi_x = |0>.
/// Zero-weight outcomes get the identity block.
Matrix relabel_unitary(const RankOnePovm& povm);

/// Labels kept after dropping the lightest outcomes of total mass <= eps,
/// heaviest first. Ties drop the higher label first.
std::vector<std::size_t> prune_good_set(const std::vector<double>& p, double eps);

/// Random binning of labels 0..labels-1 padded to M * N symbols.
struct Binning {
  std::vector<std::size_t> permutation;  // padded label -> M x N position
  std::size_t labels = 0;
  std::size_t padding = 0;
  std::size_t m = 1;
  std::size_t n = 1;
  double i_h = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> members;  // members[m][slot], kNoLabel for padding

  std::size_t padded() const { return labels + padding; }
  std::size_t block(std::size_t label) const { return permutation[label] / n; }
  std::size_t slot(std::size_t label) const { return permutation[label] % n; }
};

/// N = max(1, floor(2^{i_h + 2 log2 eps})), capped at the label count.
std::size_t bin_size(std::size_t labels, double i_h, double eps);
Binning make_binning(std::size_t labels, double i_h, double eps, std::uint64_t seed);
Binning make_binning(const CqState& cq, double eps, std::uint64_t seed);

/// Exact collision rate of f_sigma over all permutations and label pairs.
Rational collision_probability_exact(std::size_t domain, std::size_t block_size);
double collision_probability_sampled(std::size_t domain, std::size_t block_size, std::uint64_t seed,
                                     std::size_t trials);

struct DecoderBlock {
  std::vector<std::size_t> slot_label;  // per slot, kNoLabel for padding
  std::vector<std::size_t> order;       // slots tested, in sequence
  std::vector<Matrix> raw_theta;        // per slot, before the abort outcome is placed
  std::vector<Matrix> theta;            // per slot, sums to I
  Matrix abort;
  std::size_t abort_slot = 0;
};

struct SequentialDecoder {
  std::vector<DecoderBlock> blocks;
};

/// Sequential projective decoders per block. `projectors[label]` is the
/// hypothesis-test projector of each label.
SequentialDecoder build_decoders(const CqState& cq, const Binning& binning, const std::vector<Matrix>& projectors);

struct DecodingError {
  double average = 0.0;                // with the abort outcome placed
  double bound = 0.0;                  // sqrt(2 eps) + eps
  std::vector<double> per_label;       // Pr[wrong guess | label], abort placed
  std::vector<double> sequential;      // Pr[no correct acceptance | label]
  std::vector<double> union_bound;   // 2 sqrt(Tr[(I - P_x) rho_x] + sum_{i<l} Tr[P_i rho_x])
  std::vector<double> union_terms;   // the same without the factor and the root
};
DecodingError decoding_error(const CqState& cq, const Binning& binning, const SequentialDecoder& decoder,
                             const std::vector<Matrix>& projectors, double eps);

struct BobUnitary {
  std::vector<Matrix> blocks;  // W(m) on N (x) B, index n * d_B + b
  double unitarity_residual = 0.0;
};
BobUnitary bob_unitary(const SequentialDecoder& decoder);

struct StageCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  std::string note;
  bool holds() const { return measured <= bound + 1e-9; }
};

/// Purity accounting in bits. Net equals gross minus borrowed exactly.
struct Ledger {
  double alice_register = 0.0;  // log d_A, left pure by the relabeling
  double x_register = 0.0;      // log |X|, the pure part of Alice's concentration
  double intra_bin = 0.0;       // log N, freed by Bob's decoder
  double bob_register = 0.0;    // log (M d_B), input to Bob's concentration
  double borrowed_x = 0.0;      // log |X|, the measurement register
  double borrowed_alice = 0.0;  // log |S|, Alice's concentration ancilla
  double borrowed_padding = 0.0;
  double borrowed_bob = 0.0;    // log r_B, Bob's concentration ancilla
  double gross = 0.0;
  double borrowed = 0.0;
  double net = 0.0;
  double alice_net = 0.0;
  double bob_net = 0.0;
  double communication = 0.0;   // log (M N)
  double good_set = 0.0;        // log |S|
  double alphabet = 0.0;        // log |X|
};

struct DistillationReport {
  Ledger ledger;
  std::vector<StageCheck> stages;
  std::size_t alphabet = 0;
  std::size_t good_set = 0;
  double good_mass = 0.0;
  std::size_t m = 1;
  std::size_t n = 1;
  std::size_t padding = 0;
  std::size_t bob_rank = 0;
  double i_h = 0.0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t seed_used = 0;
  int attempts = 0;
  double decoding_error = 0.0;
  double final_distance = 0.0;
  double accumulated_bound = 0.0;
  std::size_t union_bound_unscaled_violations = 0;

  const StageCheck& stage(const std::string& name) const;
  bool all_hold() const;
};

inline constexpr int kMaxBinningRetries = 64;

/// One-way protocol on an explicit bipartite state with Alice's rank-one
/// POVM on the leading `split` subsystems.
DistillationReport run_distillation(const DensityOperator& rho_ab, const RankOnePovm& povm, double eps,
                                    std::uint64_t seed, std::size_t split = 1);

/// Joint distribution p(a, b) of a diagonal bipartite state.
struct ClassicalJoint {
  std::size_t d_a = 0;
  std::size_t d_b = 0;
  Eigen::MatrixXd p;  // rows a, columns b

  static ClassicalJoint from(const DensityOperator& rho_ab, std::size_t split = 1);
  /// n copies of the pair distribution p, flattened big-endian.
  static ClassicalJoint iid(const Eigen::MatrixXd& p, std::size_t n);
  DensityOperator density() const;
};

/// The same protocol with the computational-basis POVM, simulated on
/// distributions.
DistillationReport run_distillation(const ClassicalJoint& joint, double eps, std::uint64_t seed);

template <class Real>
struct ExpurgationResult {
  std::vector<std::pair<std::size_t, std::size_t>> good_pairs;
  std::vector<std::size_t> good_k;
  std::vector<Real> eta;  // Pr[good pair | k], 1 for k of zero mass
  Real pr_good_pairs = 0;
  Real pr_good_k = 0;
  bool pairs_bound = false;        // Pr[Good_KL] >= 1 - 2 sqrt(e)
  bool k_bound = false;            // Pr[Good_K] >= 1 - 2 e^{1/4}
  bool conditional_bound = false;  // Pr[Bad | k] <= e^{1/4} on Good_K
};

/// Markov selection of the indices k whose conditional good mass is at
/// least 1 - e^{1/4}. All comparisons are root-free, so rational inputs are
/// decided exactly.
template <class Real>
ExpurgationResult<Real> expurgate_pairs(const std::vector<std::vector<Real>>& p_kl,
                                        const std::function<bool(std::size_t, std::size_t)>& good,
                                        const Real& eps_pp) {
  if (eps_pp < Real(0)) throw DomainError("eps must be non-negative");
  ExpurgationResult<Real> out;
  std::vector<Real> mass(p_kl.size(), Real(0)), good_mass(p_kl.size(), Real(0));
  for (std::size_t k = 0; k < p_kl.size(); ++k) {
    for (std::size_t l = 0; l < p_kl[k].size(); ++l) {
      const Real& p = p_kl[k][l];
      if (p < Real(0)) throw DomainError("joint distribution has a negative entry");
      mass[k] += p;
      if (good(k, l)) {
        good_mass[k] += p;
        out.pr_good_pairs += p;
        out.good_pairs.emplace_back(k, l);
      }
    }
  }
  auto sq = [](const Real& x) { return x * x; };
  Real slack = (Real(1) - out.pr_good_pairs) / Real(2);
  out.pairs_bound = slack <= Real(0) || sq(slack) <= eps_pp;
  if (!out.pairs_bound) throw DomainError("good pairs carry less than 1 - 2 sqrt(eps) of the mass");
  out.conditional_bound = true;
  for (std::size_t k = 0; k < p_kl.size(); ++k) {
    Real eta = mass[k] > Real(0) ? Real(good_mass[k] / mass[k]) : Real(1);
    out.eta.push_back(eta);
    Real bad = Real(1) - eta;
    if (sq(sq(bad)) <= eps_pp) {
      out.good_k.push_back(k);
      out.pr_good_k += mass[k];
    }
  }
  for (std::size_t k : out.good_k) {
    Real bad = Real(1) - out.eta[k];
    if (sq(sq(bad)) > eps_pp) out.conditional_bound = false;
  }
  Real k_slack = (Real(1) - out.pr_good_k) / Real(2);
  out.k_bound = k_slack <= Real(0) || sq(sq(k_slack)) <= eps_pp;
  return out;
}

}  // namespace purity
