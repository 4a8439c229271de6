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
#include <numeric>
#include <random>
#include <set>

#include <doctest.h>

#include "purity/distillation.hpp"
#include "purity/random.hpp"
#include "support.hpp"

using namespace purity;
using namespace purity::testing;

namespace {

Eigen::MatrixXd correlated_bits(double flip) {
  Eigen::MatrixXd p(2, 2);
  p << (1 - flip) / 2, flip / 2, flip / 2, (1 - flip) / 2;
  return p;
}

CqState random_cq(std::size_t k, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(k);
  for (auto& x : p) x = e(rng);
  double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= s;
  std::vector<DensityOperator> cond;
  for (std::size_t x = 0; x < k; ++x) cond.push_back(random_density(qudit(d, "B"), 1 + (seed + x) % d, 7 * seed + x));
  return CqState(p, cond);
}

// i_h value that makes bin_size return exactly n at this eps.
double i_h_for(std::size_t n, double eps) { return std::log2(static_cast<double>(n)) - 2 * std::log2(eps); }

void check_ledger(const Ledger& l) {
  CHECK(l.gross == l.alice_register + l.x_register + l.intra_bin + l.bob_register);
  CHECK(l.borrowed == l.borrowed_x + l.borrowed_alice + l.borrowed_padding + l.borrowed_bob);
  CHECK(l.borrowed + l.net - l.gross == 0.0);
  CHECK(l.alice_net + l.bob_net == doctest::Approx(l.net).epsilon(1e-12));
  CHECK(l.good_set <= l.alphabet + 1e-12);
  CHECK(l.communication >= l.good_set - 1e-12);
}

}  // namespace

TEST_CASE("good set pruning") {
  CHECK(prune_good_set({.5, 0, .5}, 0.0) == std::vector<std::size_t>{0, 2});
  auto uniform = prune_good_set(std::vector<double>(8, 0.125), 0.25);
  CHECK(uniform.size() == 6);
  std::sort(uniform.begin(), uniform.end());
  CHECK(uniform == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK(prune_good_set({.5, .3, .15, .05}, 0.1) == std::vector<std::size_t>{0, 1, 2});
  CHECK(prune_good_set({.05, .15, .3, .5}, 0.1) == std::vector<std::size_t>{3, 2, 1});
  CHECK_THROWS_AS(prune_good_set({.5, .5}, 1.0), DomainError);
}

TEST_CASE("collision law by enumeration") {
  CHECK(collision_probability_exact(4, 2) == Rational(1, 3));
  CHECK(collision_probability_exact(6, 3) == Rational(2, 5));
  CHECK(collision_probability_exact(5, 5) == Rational(1));
  for (std::size_t domain = 2; domain <= 6; ++domain) {
    for (std::size_t n = 1; n <= domain; ++n) {
      if (domain % n != 0) continue;
      CHECK(collision_probability_exact(domain, n) == Rational(n - 1, domain - 1));
    }
  }
  CHECK_THROWS_AS(collision_probability_exact(8, 2), DomainError);
  CHECK_THROWS_AS(collision_probability_exact(6, 4), DomainError);
  double sampled = collision_probability_sampled(12, 4, 3, 20000);
  CHECK(sampled == doctest::Approx(3.0 / 11.0).epsilon(0.02));
  CHECK(collision_probability_sampled(12, 4, 3, 500) == collision_probability_sampled(12, 4, 3, 500));
}

TEST_CASE("bin size and padding") {
  CHECK(bin_size(8, 0.1, 0.05) == 1);
  CHECK(bin_size(8, kInf, 0.05) == 8);
  CHECK_THROWS_AS(bin_size(8, 1.0, 0.0), DomainError);

  // 6 perfectly correlated uniform bits at eps = 1/4: I_H = 6 + log2(4/3),
  // so the exponent is 2 + log2(4/3) and floor(2^exponent) = floor(16/3) = 5
  std::vector<DensityOperator> cond;
  for (std::size_t x = 0; x < 64; ++x) {
    RealVector e = RealVector::Zero(64);
    e[static_cast<Eigen::Index>(x)] = 1.0;
    cond.push_back(DensityOperator::diagonal(qudit(64, "B"), e));
  }
  CqState bits(std::vector<double>(64, 1.0 / 64), cond);
  auto b = make_binning(bits, 0.25, 1);
  CHECK(b.i_h == doctest::Approx(6 + std::log2(4.0 / 3.0)));
  CHECK(b.n == 5);
  CHECK(b.m == 13);
  CHECK(b.padding == 1);

  auto five = make_binning(5, i_h_for(2, 0.5), 0.5, 9);
  CHECK(five.n == 2);
  CHECK(five.m == 3);
  CHECK(five.padding == 1);
  CHECK(five.padded() == 6);
}

TEST_CASE("binning is a seeded bijection onto blocks") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    std::size_t labels = 3 + s % 10;
    auto b = make_binning(labels, i_h_for(1 + s % 4, 0.3), 0.3, s);
    CHECK(b.m * b.n == b.padded());
    CHECK(b.padding < b.n);
    std::set<std::size_t> seen(b.permutation.begin(), b.permutation.end());
    CHECK(seen.size() == b.padded());
    CHECK(*seen.rbegin() == b.padded() - 1);
    for (std::size_t y = 0; y < labels; ++y) CHECK(b.members[b.block(y)][b.slot(y)] == y);
    std::size_t members = 0;
    for (const auto& blk : b.members) members += static_cast<std::size_t>(std::count_if(blk.begin(), blk.end(), [](auto v) { return v != kNoLabel; }));
    CHECK(members == labels);
    CHECK(make_binning(labels, b.i_h, 0.3, s).permutation == b.permutation);
  }
}

TEST_CASE("coherent measurement examples") {
  auto zero = purify(diag_state({1, 0}));
  auto out = coherent_measure(zero, RankOnePovm::computational_basis(2));
  CHECK(out.dims().labels() == std::vector<std::string>{"X", "A", "R"});
  CHECK(std::abs(out.amplitudes()[0]) == doctest::Approx(1.0));

  auto mixed = purify(diag_state({.5, .5}));
  auto px = partial_trace(coherent_measure(mixed, RankOnePovm::computational_basis(2)).density(), {"X"});
  CHECK(px.matrix()(0, 0).real() == doctest::Approx(0.5));
  CHECK(px.matrix()(1, 1).real() == doctest::Approx(0.5));

  for (std::uint64_t s = 0; s < 100; ++s) {
    auto rho = random_density(3, 1 + s % 3, s);
    auto povm = random_rank_one_povm(3, 3 + s % 4, 500 + s);
    auto v = coherent_measure(purify(rho), povm);
    CHECK(v.amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-12));
    Matrix x = partial_trace(v.density(), {"X"}).matrix();
    for (std::size_t k = 0; k < povm.size(); ++k) {
      double direct = (povm.element(k) * rho.matrix()).trace().real();
      CHECK(std::abs(x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real() - direct) <= 1e-10);
    }
  }
}

TEST_CASE("relabeling returns A to the zero state") {
  Matrix id = relabel_unitary(RankOnePovm::computational_basis(3));
  CHECK(max_abs(id.block(0, 0, 3, 3) - Matrix::Identity(3, 3)) < 1e-15);

  Vector one = Vector::Unit(2, 1);
  RankOnePovm flip(2, {1.0, 1.0}, {Vector::Unit(2, 0), one});
  Matrix u = relabel_unitary(flip);
  CHECK(max_abs(u.block(0, 0, 2, 2) - Matrix::Identity(2, 2)) < 1e-15);
  Vector mapped = u.block(2, 2, 2, 2) * one;
  CHECK(std::abs(mapped[0]) == doctest::Approx(1.0));
  CHECK(std::abs(mapped[1]) < 1e-15);

  for (std::uint64_t s = 0; s < 100; ++s) {
    std::size_t d = 2 + s % 3;
    auto rho = random_density(d, d, s);
    auto povm = random_rank_one_povm(d, d + s % 3, 900 + s);
    Matrix r = relabel_unitary(povm);
    CHECK(max_abs(r.adjoint() * r - Matrix::Identity(r.rows(), r.rows())) < 1e-12);
    for (std::size_t x = 0; x < povm.size(); ++x) {
      auto xi = static_cast<Eigen::Index>(x * d);
      auto di = static_cast<Eigen::Index>(d);
      CHECK(std::abs(std::abs((r.block(xi, xi, di, di) * povm.vector(x))[0]) - 1.0) <= 1e-12);
    }
    auto v = coherent_measure(purify(rho), povm);
    const auto rest = static_cast<Eigen::Index>(v.dim()) / r.rows();
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> amps(v.amplitudes().data(),
                                                                                               r.rows(), rest);
    Matrix after = r * amps;
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = after;
    PureStateVector w(v.dims(), Eigen::Map<Vector>(rm.data(), rm.size()));
    Matrix a = partial_trace(w.density(), {"A"}).matrix();
    CHECK(a(0, 0).real() >= 1 - 1e-9);
  }
}

TEST_CASE("decoders for one label per block are the test projectors") {
  auto cq = random_cq(4, 3, 2);
  auto test = i_h_cq(cq, 0.2);
  auto b = make_binning(4, 0.0, 0.2, 5);
  REQUIRE(b.n == 1);
  auto dec = build_decoders(cq, b, test.projectors);
  for (std::size_t y = 0; y < 4; ++y) {
    const auto& blk = dec.blocks[b.block(y)];
    CHECK(max_abs(blk.raw_theta[0] - test.projectors[y]) < 1e-12);
    CHECK(max_abs(blk.theta[0] - Matrix::Identity(3, 3)) < 1e-12);
  }
  auto w = bob_unitary(dec);
  for (const auto& blk : w.blocks) CHECK(max_abs(blk - Matrix::Identity(3, 3)) < 1e-12);
  CHECK(decoding_error(cq, b, dec, test.projectors, 0.2).average <= 1e-12);
}

TEST_CASE("orthogonal conditionals decode without error") {
  std::vector<DensityOperator> cond;
  for (std::size_t x = 0; x < 4; ++x) {
    RealVector e = RealVector::Zero(4);
    e[static_cast<Eigen::Index>(x)] = 1.0;
    cond.push_back(DensityOperator::diagonal(qudit(4, "B"), e));
  }
  CqState cq({.4, .3, .2, .1}, cond);
  auto test = i_h_cq(cq, 0.01);
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto b = make_binning(4, i_h_for(2, 0.01), 0.01, s);
    REQUIRE(b.n == 2);
    auto dec = build_decoders(cq, b, test.projectors);
    auto err = decoding_error(cq, b, dec, test.projectors, 0.01);
    CHECK(err.average <= 1e-12);
    CHECK(bob_unitary(dec).unitarity_residual <= 1e-8);
  }
}

TEST_CASE("decoder outcomes stay below the identity") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    std::size_t k = 2 + s % 5;
    auto cq = random_cq(k, 4, s);
    double eps = 0.1 + 0.05 * static_cast<double>(s % 5);
    auto test = i_h_cq(cq, eps);
    auto b = make_binning(k, i_h_for(2, eps), eps, s);
    auto dec = build_decoders(cq, b, test.projectors);
    for (const auto& blk : dec.blocks) {
      Matrix raw = Matrix::Zero(4, 4), full = Matrix::Zero(4, 4);
      for (std::size_t n = 0; n < blk.theta.size(); ++n) {
        CHECK(eigh(blk.raw_theta[n]).values.minCoeff() >= -1e-10);
        raw += blk.raw_theta[n];
        full += blk.theta[n];
      }
      CHECK(eigh(Matrix(Matrix::Identity(4, 4) - raw)).values.minCoeff() >= -1e-8);
      CHECK(max_abs(blk.abort - (Matrix::Identity(4, 4) - raw)) < 1e-12);
      CHECK(max_abs(full - Matrix::Identity(4, 4)) < 1e-12);
    }
    auto w = bob_unitary(dec);
    CHECK(w.unitarity_residual <= 1e-8);
  }
}

TEST_CASE("sequential decoding obeys the union bound with its factor two") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    std::size_t k = 3 + s % 4;
    auto cq = random_cq(k, 3, 1000 + s);
    double eps = 0.2;
    auto test = i_h_cq(cq, eps);
    auto b = make_binning(k, i_h_for(k, eps), eps, s);
    auto dec = build_decoders(cq, b, test.projectors);
    auto err = decoding_error(cq, b, dec, test.projectors, eps);
    for (std::size_t y = 0; y < k; ++y) {
      if (cq.prob(y) == 0.0) continue;
      CHECK(err.sequential[y] <= err.union_bound[y] + 1e-9);
      CHECK(err.per_label[y] <= err.sequential[y] + 1e-12);
    }
  }
}

TEST_CASE("the union bound without its factor two fails at a quarter turn") {
  const double t = std::acos(-1.0) / 4;
  Vector a = Vector::Unit(2, 0);
  Vector b(2);
  b << std::cos(t), std::sin(t);
  CqState cq({.5, .5}, {DensityOperator(qudit(2, "B"), projector_onto(a)), DensityOperator(qudit(2, "B"), projector_onto(b))});
  std::vector<Matrix> proj = {projector_onto(a), projector_onto(b)};
  auto bin = make_binning(2, kInf, 0.1, 0);
  REQUIRE(bin.n == 2);
  auto dec = build_decoders(cq, bin, proj);
  auto err = decoding_error(cq, bin, dec, proj, 0.1);
  std::size_t second = dec.blocks[0].slot_label[dec.blocks[0].order[1]];
  CHECK(err.sequential[second] == doctest::Approx(0.75));
  CHECK(err.union_terms[second] == doctest::Approx(0.5));
  CHECK(err.sequential[second] > std::sqrt(err.union_terms[second]));
  CHECK(err.sequential[second] <= err.union_bound[second]);
}

TEST_CASE("maximally correlated bit pair gains one qubit from one bit of communication") {
  Eigen::MatrixXd p(2, 2);
  p << .5, 0, 0, .5;
  ClassicalJoint joint{2, 2, p};
  auto fast = run_distillation(joint, 0.25, 1);
  auto dense = run_distillation(joint.density(), RankOnePovm::computational_basis(2), 0.25, 1);
  for (const auto* r : {&fast, &dense}) {
    CHECK(r->ledger.net == doctest::Approx(1.0));
    CHECK(r->ledger.bob_net == doctest::Approx(1.0));
    CHECK(std::abs(r->ledger.alice_net) < 1e-12);
    CHECK(r->ledger.communication == doctest::Approx(1.0));
    CHECK(r->final_distance <= 1e-9);
    CHECK(r->all_hold());
    check_ledger(r->ledger);
  }
}

TEST_CASE("product pure state needs no communication") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, 2);
  p(0, 0) = 1.0;
  ClassicalJoint joint{2, 2, p};
  auto fast = run_distillation(joint, 0.1, 3);
  auto dense = run_distillation(joint.density(), RankOnePovm::computational_basis(2), 0.1, 3);
  for (const auto* r : {&fast, &dense}) {
    CHECK(r->n == 1);
    CHECK(r->ledger.net == doctest::Approx(2.0));
    CHECK(r->ledger.communication == 0.0);
    CHECK(r->final_distance <= 1e-9);
  }
}

TEST_CASE("eight correlated bit pairs") {
  auto joint = ClassicalJoint::iid(correlated_bits(0.0), 8);
  auto r = run_distillation(joint, 0.25, 4);
  CHECK(r.ledger.net >= 1.0);
  CHECK(r.ledger.communication <= 8.0 + 1e-12);
  CHECK(r.final_distance <= r.accumulated_bound);
  CHECK(r.all_hold());
  check_ledger(r.ledger);
}

TEST_CASE("noisy pairs keep every stage within its bound") {
  for (std::size_t n = 1; n <= 6; ++n) {
    for (double flip : {0.0, 0.05, 0.2}) {
      auto r = run_distillation(ClassicalJoint::iid(correlated_bits(flip), n), 0.1, 10 * n);
      CHECK(r.all_hold());
      CHECK(r.decoding_error <= std::sqrt(0.2) + 0.1);
      check_ledger(r.ledger);
    }
  }
}

TEST_CASE("diagonal fast path agrees with the dense pipeline") {
  std::vector<std::pair<std::size_t, double>> cases = {{1, 0.0}, {1, 0.1}, {2, 0.0}, {2, 0.05}, {3, 0.0}};
  for (auto [n, flip] : cases) {
    for (double eps : {0.1, 0.25}) {
      auto joint = ClassicalJoint::iid(correlated_bits(flip), n);
      auto fast = run_distillation(joint, eps, 77);
      auto dense = run_distillation(joint.density(), RankOnePovm::computational_basis(joint.d_a), eps, 77);
      CHECK(fast.m == dense.m);
      CHECK(fast.n == dense.n);
      CHECK(fast.bob_rank == dense.bob_rank);
      CHECK(fast.seed_used == dense.seed_used);
      const Ledger& a = fast.ledger;
      const Ledger& b = dense.ledger;
      for (auto [x, y] : std::vector<std::pair<double, double>>{{a.net, b.net},
                                                                {a.gross, b.gross},
                                                                {a.borrowed, b.borrowed},
                                                                {a.alice_net, b.alice_net},
                                                                {a.bob_net, b.bob_net},
                                                                {a.communication, b.communication}}) {
        CHECK(std::abs(x - y) <= 1e-9);
      }
      CHECK(std::abs(fast.decoding_error - dense.decoding_error) <= 1e-9);
      CHECK(std::abs(fast.final_distance - dense.final_distance) <= 1e-9);
    }
  }
}

TEST_CASE("dense pipeline on random states and measurements") {
  for (std::uint64_t s = 0; s < 12; ++s) {
    auto dims = HilbertDims({{"A", 2}, {"B", 2 + s % 2}});
    auto rho = random_density(dims, 1 + s % dims.total(), s);
    auto povm = random_rank_one_povm(2, 2 + s % 3, 40 + s);
    auto r = run_distillation(rho, povm, 0.2, s);
    CHECK(r.all_hold());
    CHECK(r.final_distance <= r.accumulated_bound);
    check_ledger(r.ledger);
    CHECK(r.attempts >= 1);
    CHECK(r.attempts <= kMaxBinningRetries);
  }
  CHECK_THROWS_AS(run_distillation(random_density(parties({2, 2}), 2, 1), RankOnePovm::computational_basis(3), 0.2, 0),
                  DomainError);
  CHECK_THROWS_AS(run_distillation(random_density(parties({2, 2}), 2, 1), RankOnePovm::computational_basis(2), 0.0, 0),
                  DomainError);
}

TEST_CASE("expurgation examples") {
  using R = Rational;
  std::vector<std::vector<R>> uniform(10, std::vector<R>(10, R(1, 100)));
  auto all = expurgate_pairs<R>(uniform, [](auto, auto) { return true; }, R(1, 100));
  CHECK(all.good_k.size() == 10);
  for (const auto& e : all.eta) CHECK(e == R(1));
  CHECK(all.pr_good_pairs == R(1));

  // 10% bad mass, all of it in row 3
  auto one = expurgate_pairs<R>(uniform, [](auto k, auto) { return k != 3; }, R(1, 100));
  CHECK(one.pr_good_pairs == R(9, 10));
  CHECK(std::find(one.good_k.begin(), one.good_k.end(), 3u) == one.good_k.end());
  CHECK(one.good_k.size() == 9);
  CHECK(one.pairs_bound);
  CHECK(one.k_bound);
  CHECK(one.conditional_bound);

  CHECK_THROWS_AS(expurgate_pairs<R>(uniform, [](auto k, auto) { return k > 4; }, R(1, 100)), DomainError);

  std::vector<std::vector<R>> with_empty = {{R(1, 2), R(1, 2)}, {R(0), R(0)}};
  auto empty = expurgate_pairs<R>(with_empty, [](auto, auto) { return true; }, R(1, 100));
  CHECK(empty.eta[1] == R(1));
}

TEST_CASE("expurgation bounds at the edge of the precondition") {
  using R = Rational;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(s);
    std::size_t kk = 2 + s % 7, ll = 2 + (s / 7) % 5;
    std::uniform_int_distribution<int> w(1, 20);
    std::vector<std::vector<int>> units(kk, std::vector<int>(ll));
    long total = 0;
    for (auto& row : units)
      for (auto& u : row) total += (u = w(rng));
    // bad mass exactly 2 sqrt(eps''): pick the bad units, then eps'' = (bad / 2 total)^2
    long bad_units = std::max<long>(1, total / (4 + static_cast<long>(s % 20)));
    std::vector<std::vector<bool>> bad(kk, std::vector<bool>(ll, false));
    std::vector<std::vector<int>> mass = units;
    std::vector<std::vector<bool>> split(kk, std::vector<bool>(ll, false));
    long placed = 0;
    auto strategy = s % 3;
    for (std::size_t i = 0; i < kk * ll && placed < bad_units; ++i) {
      // 0: fill rows in order, 1: round robin over rows, 2: heaviest rows last
      std::size_t k = strategy == 0 ? i / ll : strategy == 1 ? i % kk : kk - 1 - i / ll;
      std::size_t l = strategy == 1 ? i / kk : i % ll;
      long take = std::min<long>(mass[k][l], bad_units - placed);
      if (take < mass[k][l]) {
        // split the cell so the bad mass is exact
        mass[k][l] = static_cast<int>(take);
        units[k][l] -= static_cast<int>(take);
        bad[k][l] = true;
        split[k][l] = true;
        placed += take;
        break;
      }
      bad[k][l] = true;
      placed += take;
    }
    // keep the split remainder as a separate good column
    std::vector<std::vector<R>> p(kk);
    std::vector<std::vector<bool>> is_bad(kk);
    for (std::size_t k = 0; k < kk; ++k) {
      for (std::size_t l = 0; l < ll; ++l) {
        if (bad[k][l]) {
          p[k].push_back(R(mass[k][l], total));
          is_bad[k].push_back(true);
          if (split[k][l]) {
            p[k].push_back(R(units[k][l], total));
            is_bad[k].push_back(false);
          }
        } else {
          p[k].push_back(R(units[k][l], total));
          is_bad[k].push_back(false);
        }
      }
    }
    R sum = 0, bad_mass = 0;
    for (std::size_t k = 0; k < kk; ++k)
      for (std::size_t l = 0; l < p[k].size(); ++l) {
        sum += p[k][l];
        if (is_bad[k][l]) bad_mass += p[k][l];
      }
    REQUIRE(sum == R(1));
    R root = bad_mass / 2;  // sqrt(eps'')
    R eps_pp = root * root;
    auto res = expurgate_pairs<R>(p, [&](std::size_t k, std::size_t l) { return !is_bad[k][l]; }, eps_pp);
    CHECK(res.pr_good_pairs == R(1) - 2 * root);
    CHECK(res.pairs_bound);
    CHECK(res.k_bound);
    CHECK(res.conditional_bound);
    // independent recount of Good_K: (1 - eta)^4 <= eps''
    R good_k_mass = 0;
    for (std::size_t k = 0; k < kk; ++k) {
      R row = 0, good = 0;
      for (std::size_t l = 0; l < p[k].size(); ++l) {
        row += p[k][l];
        if (!is_bad[k][l]) good += p[k][l];
      }
      R b = R(1) - good / row;
      bool in = b * b * b * b <= eps_pp;
      CHECK(in == (std::find(res.good_k.begin(), res.good_k.end(), k) != res.good_k.end()));
      if (in) good_k_mass += row;
    }
    CHECK(res.pr_good_k == good_k_mass);
    double e = static_cast<double>(eps_pp);
    CHECK(static_cast<double>(res.pr_good_k) >= 1 - 2 * std::pow(e, 0.25) - 1e-12);
  }
}

TEST_CASE("expurgation in floating point") {
  std::vector<std::vector<double>> p(4, std::vector<double>(4, 1.0 / 16));
  auto res = expurgate_pairs<double>(p, [](auto k, auto l) { return !(k == 0 && l == 0); }, 0.01);
  CHECK(res.good_k.size() == 4);
  CHECK(res.pr_good_pairs == doctest::Approx(15.0 / 16));
}
