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
#include <map>
#include <random>

#include <doctest.h>

#include "purity/entropies.hpp"
#include "purity/random.hpp"
#include "support.hpp"

using namespace purity;
using namespace purity::testing;

namespace {

RealVector vec(std::vector<double> v) { return Eigen::Map<RealVector>(v.data(), static_cast<Eigen::Index>(v.size())); }

// Sort-and-cumsum: number of atoms left after dropping the smallest ones
// while their total stays within eps.
std::size_t kept_by_cumsum(std::vector<double> p, double eps) {
  std::sort(p.begin(), p.end());
  double acc = 0.0;
  std::size_t dropped = 0;
  for (double v : p) {
    if (acc + v > eps + 1e-12) break;
    acc += v;
    ++dropped;
  }
  return p.size() - dropped;
}

RealVector random_distribution(std::size_t d, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  RealVector p(static_cast<Eigen::Index>(d));
  for (auto& x : p) x = e(rng);
  return p / p.sum();
}

CqState classical_cq(const std::vector<double>& probs, const std::vector<std::vector<double>>& rows) {
  std::vector<DensityOperator> cond;
  for (const auto& r : rows) cond.push_back(diag_state(r, "B"));
  return CqState(probs, cond);
}

// Binomial spectrum of a diagonal qubit power, truncated by class.
struct BinomialTruncation {
  long double kept = 0;
  long double min_kept = 0;
};
BinomialTruncation binomial_truncation(double p, std::size_t n, double eps) {
  std::vector<std::pair<long double, long double>> classes;  // value, count
  for (std::size_t k = 0; k <= n; ++k) {
    long double v = std::pow((long double)p, (long double)(n - k)) * std::pow((long double)(1 - p), (long double)k);
    long double c = 1;
    for (std::size_t j = 0; j < k; ++j) c = c * (n - j) / (j + 1);
    classes.emplace_back(v, std::round(c));
  }
  std::sort(classes.begin(), classes.end());
  long double removed = 0, total = 0;
  for (auto& c : classes) total += c.second;
  BinomialTruncation out;
  out.kept = total;
  for (auto& [v, c] : classes) {
    long double room = (eps + 1e-12 - removed) / v;
    long double take = std::min(c, std::floor(room));
    if (take <= 0) {
      out.min_kept = v;
      return out;
    }
    removed += take * v;
    out.kept -= take;
    if (take < c) {
      out.min_kept = v;
      return out;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("von Neumann and Shannon entropies") {
  CHECK(von_neumann(random_density(4, 1, 2)) == doctest::Approx(0.0).scale(1.0));
  CHECK(von_neumann(DensityOperator::maximally_mixed(qudit(8))) == doctest::Approx(3.0));
  double h = -0.9 * std::log2(0.9) - 0.1 * std::log2(0.1);
  CHECK(von_neumann(diag_state({.9, .1})) == doctest::Approx(h).epsilon(1e-12));
  CHECK(shannon(vec({.9, .1})) == doctest::Approx(0.468995593589281).epsilon(1e-12));
  RealVector sub(2);
  sub << 0.3, 0.3;
  CHECK_THROWS_AS(von_neumann(DensityOperator::diagonal(qudit(2), sub, false)), DomainError);
}

TEST_CASE("order one half entropy") {
  CHECK(h_max(random_density(3, 1, 5)) == doctest::Approx(0.0).scale(1.0));
  CHECK(h_max(diag_state({.5, .5})) == doctest::Approx(1.0));
  double root = std::sqrt(.5) + std::sqrt(.3) + std::sqrt(.15) + std::sqrt(.05);
  CHECK(h_max(diag_state({.5, .3, .15, .05})) == doctest::Approx(2 * std::log2(root)).epsilon(1e-12));
  CHECK(h_max(diag_state({.5, .3, .15, .05})) == doctest::Approx(1.79949).epsilon(1e-5));
  CHECK_THROWS_AS(DensityOperator::diagonal(qudit(2), RealVector::Zero(2), false), DomainError);
}

TEST_CASE("tail truncation examples") {
  auto rho = diag_state({.5, .3, .15, .05});
  CHECK(truncate_tail(rho, 0.0).matrix() == rho.matrix());
  auto cut = truncate_tail(rho, 0.1);
  CHECK_FALSE(cut.normalized());
  CHECK(max_abs(cut.matrix() - Matrix(vec({.5, .3, .15, 0}).cast<cplx>().asDiagonal())) < 1e-12);

  RealVector uniform = RealVector::Constant(8, 0.125);
  RealVector kept = truncate_tail(uniform, 0.25);
  CHECK((kept.array() > 0).count() == 6);
  CHECK(kept_by_cumsum(std::vector<double>(8, 0.125), 0.25) == 6);
  // ties keep the lower index
  CHECK(kept(0) > 0);
  CHECK(kept(5) > 0);
  CHECK(kept(6) == 0.0);
  CHECK(kept(7) == 0.0);
}

TEST_CASE("truncation agrees with the sort-and-cumsum oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t d = 2 + trial % 9;
    RealVector p = random_distribution(d, rng);
    double eps = (trial % 10) / 10.0;
    std::vector<double> pv(p.data(), p.data() + p.size());
    RealVector kept = truncate_tail(p, eps);
    CHECK(static_cast<std::size_t>((kept.array() > 0).count()) == kept_by_cumsum(pv, eps));
    CHECK(p.sum() - kept.sum() <= eps + 1e-12);
    CHECK((kept.array() <= p.array()).all());
  }
}

TEST_CASE("smoothed max-entropy variants") {
  auto pure = random_density(3, 1, 4);
  for (double eps : {0.0, 0.3, 0.9}) {
    CHECK(h_max_tilde(pure, eps) == doctest::Approx(0.0).scale(1.0));
    CHECK(h_max_prime(pure, eps) == doctest::Approx(0.0).scale(1.0));
    CHECK(h_max_smooth_ub(pure, eps) == doctest::Approx(0.0).scale(1.0));
  }
  auto rho = diag_state({.5, .3, .15, .05});
  CHECK(h_max_tilde(rho, 0.1) == doctest::Approx(std::log2(3.0)));
  CHECK(h_max_prime(rho, 0.1) == doctest::Approx(std::log2(1 / 0.15)));
  CHECK(h_max_prime(rho, 0.1) == doctest::Approx(2.737).epsilon(1e-3));
  double root = std::sqrt(.5) + std::sqrt(.3) + std::sqrt(.15);
  CHECK(h_max_smooth_ub(rho, 0.1) == doctest::Approx(2 * std::log2(root)));
  CHECK(h_max_tilde(DensityOperator::maximally_mixed(qudit(4)), 0.2) == doctest::Approx(2.0));
  CHECK_THROWS_AS(h_max_tilde(rho, 1.0), DomainError);
}

TEST_CASE("max-entropy chain with the logarithmic endpoint") {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    std::size_t d = 2 + s % 7;
    auto rho = random_density(d, 1 + (s / 7) % d, s);
    double eps = 0.01 + 0.98 * static_cast<double>((s * 37) % 100) / 100.0;
    double ub = h_max_smooth_ub(rho, eps);
    double ht = h_max_tilde(rho, eps);
    double hp = h_max_prime(rho, eps);
    CHECK(ub <= ht + 1e-9);
    CHECK(ht <= hp + 1e-9);
    CHECK(hp <= std::log2(d / eps) + 1e-9);
  }
}

TEST_CASE("conditional min-entropy of cq states") {
  auto orth = classical_cq({.5, .5}, {{1, 0}, {0, 1}});
  CHECK(h_min_cond_cq(orth) == doctest::Approx(0.0).scale(1.0));
  auto flat = classical_cq({.5, .5}, {{.5, .5}, {.5, .5}});
  CHECK(h_min_cond_cq(flat) == doctest::Approx(1.0));
  auto mixed = classical_cq({.7, .3}, {{.9, .1}, {.6, .4}});
  CHECK(h_min_cond_cq(mixed) == doctest::Approx(-std::log2(0.81)));
  CHECK(h_min_cond_cq(mixed) == doctest::Approx(0.304).epsilon(1e-3));

  Rng rng(3);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    std::size_t k = 1 + s % 4;
    std::size_t d = 2 + s % 3;
    RealVector p = random_distribution(k, rng);
    std::vector<DensityOperator> cond;
    for (std::size_t x = 0; x < k; ++x) cond.push_back(random_density(d, 1 + (s + x) % d, 10 * s + x));
    CHECK(h_min_cond_cq(CqState(std::vector<double>(p.data(), p.data() + k), cond)) >= -1e-12);
  }
}

TEST_CASE("max-relative entropy and max-information") {
  auto r = random_density(3, 3, 1);
  CHECK(d_max(r, r) == doctest::Approx(0.0).scale(1.0));
  CHECK(d_max(diag_state({1, 0}), diag_state({.5, .5})) == doctest::Approx(1.0));
  CHECK(d_max(diag_state({1, 0}), diag_state({0, 1})) == kInf);

  auto prod = tensor(random_density(qudit(2, "A"), 2, 3), random_density(qudit(3, "B"), 3, 4));
  CHECK(std::abs(i_max(prod)) < 1e-8);

  auto corr = DensityOperator::diagonal(parties({2, 2}), vec({.5, 0, 0, .5}));
  CHECK(i_max(corr) == doctest::Approx(1.0));

  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1 / std::sqrt(2.0);
  CHECK(i_max(DensityOperator(parties({2, 2}), projector_onto(bell))) == doctest::Approx(2.0));
}

TEST_CASE("modified max-information of cq states") {
  auto one = CqState({1.0}, {random_density(qudit(3, "B"), 2, 6)});
  auto m1 = i_max_mod_cq(one);
  CHECK(std::abs(m1.value) < 1e-6);
  CHECK(max_abs(m1.sigma_star.matrix() - one.conditional(0).matrix()) < 1e-5);

  auto orth = classical_cq({.5, .5}, {{1, 0}, {0, 1}});
  auto m2 = i_max_mod_cq(orth);
  CHECK(m2.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(max_abs(m2.sigma_star.matrix() - Matrix::Identity(2, 2) / 2.0) < 1e-5);

  // commuting case: min Tr S over S >= q_x is sum_b max_x q_x(b)
  Rng rng(11);
  for (int s = 0; s < 50; ++s) {
    std::size_t k = 2 + s % 3;
    std::vector<std::vector<double>> rows;
    std::vector<double> probs(k, 1.0 / static_cast<double>(k));
    double lp = 0.0;
    std::vector<double> col_max(3, 0.0);
    for (std::size_t x = 0; x < k; ++x) {
      RealVector q = random_distribution(3, rng);
      rows.emplace_back(q.data(), q.data() + 3);
      for (int b = 0; b < 3; ++b) col_max[b] = std::max(col_max[b], q(b));
    }
    for (double v : col_max) lp += v;
    auto m = i_max_mod_cq(classical_cq(probs, rows));
    CHECK(std::abs(m.value - std::log2(lp)) <= 1e-4);
    CHECK(m.certificate_margin >= -1e-7);
    CHECK(m.lower_bound <= m.value + 1e-9);
  }
}

TEST_CASE("modified max-information of a post-measurement reference stays below the surrogate") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    std::size_t d = 2 + s % 3;
    auto rho = random_density(d, d, s);
    auto phi = purify(rho).density();
    auto povm = random_rank_one_povm(d, d + 1 + s % 2, 100 + s);
    auto cq = measure_cq(phi, povm, 1);
    double eps = 0.1 + 0.2 * static_cast<double>(s % 4);
    double surrogate = h_max_tilde(rho, eps * eps / 48) - 2 * std::log2(eps * eps / 24);
    auto m = i_max_mod_cq(cq);
    CHECK(m.value <= surrogate);
    CHECK(m.value - m.lower_bound <= 1e-6);
  }
}

TEST_CASE("tensor powers of spectra") {
  auto pure = iid_power(SpectralMultiset::from_values(vec({1.0})), 9);
  REQUIRE(pure.atoms().size() == 1);
  CHECK(pure.atoms()[0].value == 1.0);
  CHECK(pure.atoms()[0].multiplicity == 1);

  auto flat = iid_power(SpectralMultiset::from_values(vec({.5, .5})), 3);
  REQUIRE(flat.atoms().size() == 1);
  CHECK(flat.atoms()[0].value == doctest::Approx(0.125));
  CHECK(flat.atoms()[0].multiplicity == 8);

  CHECK_THROWS_AS(iid_power(flat, 0), DomainError);

  // brute force: all d^n products, grouped
  std::vector<double> base = {.6, .3, .1};
  for (std::size_t n = 1; n <= 5; ++n) {
    std::vector<double> all = {1.0};
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> next;
      for (double a : all)
        for (double b : base) next.push_back(a * b);
      all = next;
    }
    std::sort(all.rbegin(), all.rend());
    auto ms = iid_power(SpectralMultiset::from_values(vec(base)), n);
    std::size_t pos = 0;
    for (const auto& atom : ms.atoms()) {
      auto m = static_cast<std::size_t>(atom.multiplicity);
      for (std::size_t j = 0; j < m; ++j) CHECK(all[pos + j] == doctest::Approx(atom.value).epsilon(1e-12));
      pos += m;
    }
    CHECK(pos == all.size());
    CHECK(ms.mass() == doctest::Approx(1.0).epsilon(1e-12));
  }

  auto big = iid_power(SpectralMultiset::from_values(vec({.7, .3})), 200);
  CHECK(big.count() == BigInt(1) << 200);
}

TEST_CASE("tensor power truncation matches a binomial oracle") {
  auto single = SpectralMultiset::from_values(vec({.9, .1}));
  auto sweep = aep_sweep(single, 0.01, 30);
  REQUIRE(sweep.size() == 30);
  for (std::size_t n : {1u, 5u, 10u, 20u, 30u}) {
    auto oracle = binomial_truncation(0.9, n, 0.01);
    const auto& pt = sweep[n - 1];
    CHECK(pt.n == n);
    CHECK(pt.h_tilde == doctest::Approx(static_cast<double>(std::log2(oracle.kept) / n)).epsilon(1e-12));
    CHECK(pt.h_prime == doctest::Approx(static_cast<double>(-std::log2(oracle.min_kept) / n)).epsilon(1e-12));
    CHECK(pt.h_smooth_ub <= pt.h_tilde + 1e-12);
  }
  CHECK(sweep[29].h_tilde == doctest::Approx(0.70947).epsilon(1e-4));

  double h = shannon(vec({.9, .1}));
  CHECK(std::abs(sweep[29].h_tilde - h) < std::abs(sweep[4].h_tilde - h));
  CHECK(std::abs(sweep[29].h_prime - h) < std::abs(sweep[4].h_prime - h));

  auto dense = aep_sweep(diag_state({.9, .1}), 0.01, 30, 4);
  for (std::size_t i = 0; i < 30; ++i) CHECK(dense[i].h_tilde == sweep[i].h_tilde);
}

TEST_CASE("sweeps do not depend on the thread count") {
  auto single = SpectralMultiset::from_values(vec({.5, .3, .2}));
  auto a = aep_sweep(single, 0.05, 25, 1);
  auto b = aep_sweep(single, 0.05, 25, 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].h_tilde == b[i].h_tilde);
    CHECK(a[i].h_prime == b[i].h_prime);
    CHECK(a[i].h_smooth_ub == b[i].h_smooth_ub);
  }
}

TEST_CASE("rate terms for the maximally correlated bit pair") {
  auto rho = DensityOperator::diagonal(parties({2, 2}), vec({.5, 0, 0, .5}));
  auto r = distillation_rate_terms(rho, RankOnePovm::computational_basis(2), 0.0);
  CHECK(r.at("log_dA_dB").value == doctest::Approx(2.0));
  CHECK(r.at("h_max_tilde_A").value == doctest::Approx(1.0));
  CHECK(r.at("h_max_tilde_B").value == doctest::Approx(1.0));
  CHECK(r.at("i_h_X_B").value == doctest::Approx(1.0));
  CHECK(r.at("communication_surrogate").kind == BoundKind::upper);
  CHECK(r.symbolic.size() == 3);
  CHECK_THROWS_AS(r.at("missing"), DomainError);
}

TEST_CASE("rate terms for a product pure state") {
  auto rho = DensityOperator::diagonal(parties({2, 2}), vec({1, 0, 0, 0}));
  double eps = 0.2;
  auto r = distillation_rate_terms(rho, RankOnePovm::computational_basis(2), eps);
  CHECK(r.at("h_max_tilde_A").value == doctest::Approx(0.0).scale(1.0));
  CHECK(r.at("h_max_tilde_B").value == doctest::Approx(0.0).scale(1.0));
  CHECK(r.at("i_h_X_B").value == doctest::Approx(std::log2(1 / (1 - std::pow(eps, 0.25)))).epsilon(1e-9));
}

TEST_CASE("rate terms are finite on random two-qubit states") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto rho = random_density(parties({2, 2}), 1 + s % 4, s);
    auto povm = random_rank_one_povm(2, 2 + s % 3, 50 + s);
    auto r = distillation_rate_terms(rho, povm, 0.3);
    CHECK(r.entries.size() == 5);
    for (const auto& e : r.entries) CHECK(std::isfinite(e.value));
  }
}
