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

#include "purity/entropies.hpp"
#include "purity/parallel.hpp"

namespace purity {

namespace {

BigInt factorial(std::size_t n) {
  BigInt f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

BigInt power(const BigInt& base, std::size_t e) {
  BigInt r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}

struct Term {
  double value;
  BigInt multiplicity;
};

void compositions(const std::vector<SpectralMultiset::Atom>& atoms, std::size_t n, std::size_t pos,
                  std::vector<std::size_t>& k, std::vector<Term>& out, const BigInt& nfact) {
  if (pos + 1 == atoms.size()) {
    k[pos] = n;
    double v = 1.0;
    BigInt mult = nfact;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (k[i] > 0) v *= std::pow(atoms[i].value, static_cast<double>(k[i]));
      mult /= factorial(k[i]);
    }
    for (std::size_t i = 0; i < atoms.size(); ++i) mult *= power(atoms[i].multiplicity, k[i]);
    out.push_back({v, mult});
    return;
  }
  for (std::size_t j = 0; j <= n; ++j) {
    k[pos] = j;
    compositions(atoms, n - j, pos + 1, k, out, nfact);
  }
}

}  // namespace

SpectralMultiset iid_power(const SpectralMultiset& single, std::size_t n) {
  if (n == 0) throw DomainError("tensor power needs n >= 1");
  const auto& atoms = single.atoms();
  if (atoms.empty()) return single;
  std::vector<Term> terms;
  std::vector<std::size_t> k(atoms.size(), 0);
  compositions(atoms, n, 0, k, terms, factorial(n));
  std::stable_sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.value > b.value; });
  std::vector<SpectralMultiset::Atom> merged;
  for (const auto& t : terms) {
    if (t.multiplicity == 0) continue;
    if (!merged.empty()) {
      double prev = merged.back().value;
      if (prev - t.value <= 1e-12 * prev || (prev == 0.0 && t.value == 0.0)) {
        merged.back().multiplicity += t.multiplicity;
        continue;
      }
    }
    merged.push_back({t.value, t.multiplicity});
  }
  return SpectralMultiset(std::move(merged));
}

SpectralTruncation truncate_tail(const SpectralMultiset& ms, double eps) {
  if (!(eps >= 0.0) || eps > 1.0) throw DomainError("eps must lie in [0, 1]");
  const auto& atoms = ms.atoms();
  SpectralTruncation out;
  std::vector<BigInt> kept(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) kept[i] = atoms[i].multiplicity;
  double removed = 0.0;
  const double budget = eps + 1e-12;
  for (std::size_t i = atoms.size(); i-- > 0;) {
    const auto& a = atoms[i];
    if (a.value <= 0.0) {
      kept[i] = 0;
      continue;
    }
    double block = a.value * a.multiplicity.convert_to<double>();
    if (removed + block <= budget) {
      removed += block;
      kept[i] = 0;
      continue;
    }
    double fit = std::floor((budget - removed) / a.value);
    BigInt take = fit > 0.0 ? BigInt(static_cast<unsigned long long>(std::min(fit, 1.8e19))) : BigInt(0);
    if (take > a.multiplicity) take = a.multiplicity;
    kept[i] = a.multiplicity - take;
    removed += a.value * take.convert_to<double>();
    break;
  }
  out.removed_mass = removed;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (kept[i] == 0) continue;
    out.kept += kept[i];
    out.min_kept = atoms[i].value;
    out.sqrt_sum += std::sqrt(atoms[i].value) * kept[i].convert_to<double>();
  }
  return out;
}

std::vector<AepPoint> aep_sweep(const SpectralMultiset& single, double eps, std::size_t n_max,
                                std::size_t threads) {
  if (!(eps >= 0.0) || !(eps < 1.0)) throw DomainError("eps must lie in [0, 1)");
  if (n_max == 0) throw DomainError("n_max must be positive");
  if (std::abs(single.mass() - 1.0) > 1e-9) throw DomainError("sweep requires a normalized spectrum");
  std::vector<AepPoint> out(n_max);
  parallel_for(n_max, threads, [&](std::size_t i) {
    std::size_t n = i + 1;
    auto t = truncate_tail(iid_power(single, n), eps);
    double dn = static_cast<double>(n);
    out[i].n = n;
    out[i].h_tilde = std::log2(t.kept.convert_to<double>()) / dn;
    out[i].h_prime = -std::log2(t.min_kept) / dn;
    out[i].h_smooth_ub = 2.0 * std::log2(t.sqrt_sum) / dn;
  });
  return out;
}

std::vector<AepPoint> aep_sweep(const DensityOperator& rho, double eps, std::size_t n_max, std::size_t threads) {
  if (!rho.normalized()) throw DomainError("sweep requires a normalized state");
  RealVector values = eigh(rho.op()).values.cwiseMax(0.0);
  return aep_sweep(SpectralMultiset::from_values(values), eps, n_max, threads);
}

}  // namespace purity
