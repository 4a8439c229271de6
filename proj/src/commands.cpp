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
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "purity/concentration.hpp"
#include "purity/distillation.hpp"
#include "purity/harness.hpp"

namespace purity {

using ojson = nlohmann::ordered_json;

ojson number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PURITY_THREADS")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
    throw UsageError("PURITY_THREADS must be a positive integer");
  }
  return 1;
}

namespace {

DensityOperator load_density(const std::string& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string("missing ") + flag);
  auto f = ingest(path);
  if (auto* rho = std::get_if<DensityOperator>(&f.value)) return *rho;
  throw StateFileError(path + ": /kind: expected a density state, found '" + f.kind + "'");
}

ojson entry(const std::string& name, double value, BoundKind kind, const std::string& note = {}) {
  ojson e;
  e["name"] = name;
  e["value"] = number(value);
  e["kind"] = to_string(kind);
  if (!note.empty()) e["note"] = note;
  return e;
}

ojson config_json(const RunConfig& c) {
  ojson j;
  j["command"] = c.command;
  if (!c.state.empty()) j["state"] = c.state;
  j["eps"] = number(c.eps);
  j["seed"] = c.seed;
  j["format"] = c.format;
  if (c.command == "np-test") j["sigma"] = c.sigma;
  if (c.command == "distill" || c.command == "entropy") {
    if (!c.povm.empty()) j["povm"] = c.povm;
    j["split"] = c.split;
  }
  if (c.command == "aep-sweep") j["n_max"] = c.n_max;
  if (c.command == "collision") {
    j["domain"] = c.domain;
    j["blocks"] = c.blocks;
    j["exact"] = c.exact;
    if (!c.exact) j["trials"] = c.trials;
  }
  return j;
}

ojson entropy_command(const RunConfig& c) {
  if (c.state.empty()) throw UsageError("missing --state");
  auto f = ingest(c.state);
  ojson entries = ojson::array();
  if (auto* rho = std::get_if<DensityOperator>(&f.value)) {
    entries.push_back(entry("von_neumann", von_neumann(*rho), BoundKind::exact));
    entries.push_back(entry("h_max", h_max(*rho), BoundKind::exact, "2 log2 Tr sqrt(rho)"));
    entries.push_back(entry("h_max_tilde", h_max_tilde(*rho, c.eps), BoundKind::exact, "log2 rank after the eps tail"));
    entries.push_back(entry("h_max_prime", h_max_prime(*rho, c.eps), BoundKind::exact, "-log2 smallest kept eigenvalue"));
    entries.push_back(entry("h_max_smooth", h_max_smooth_ub(*rho, c.eps), BoundKind::upper, "truncation witness"));
    if (rho->dims().size() > 1) {
      entries.push_back(entry("i_max", i_max(*rho, c.split), BoundKind::exact, "D_max(rho_AB || rho_A x rho_B)"));
      entries.push_back(entry("i_h", i_h(*rho, c.eps, c.split), BoundKind::exact));
      if (!c.povm.empty()) {
        auto pf = ingest(c.povm);
        auto* povm = std::get_if<RankOnePovm>(&pf.value);
        if (!povm) throw StateFileError(c.povm + ": /kind: expected a povm");
        auto terms = distillation_rate_terms(*rho, *povm, c.eps, c.split);
        for (const auto& e : terms.entries) entries.push_back(entry("rate/" + e.name, e.value, e.kind, e.note));
      }
    }
  } else if (auto* cq = std::get_if<CqState>(&f.value)) {
    entries.push_back(entry("h_min_cond", h_min_cond_cq(*cq), BoundKind::exact, "H_min(X|B)"));
    auto mod = i_max_mod_cq(*cq);
    entries.push_back(entry("i_max_mod", mod.value, BoundKind::upper, "barrier solver, primal"));
    entries.push_back(entry("i_max_mod_dual", mod.lower_bound, BoundKind::lower, "dual certificate"));
    entries.push_back(entry("i_h", i_h_cq(*cq, c.eps).summary.value, BoundKind::exact));
  } else if (auto* ms = std::get_if<SpectralMultiset>(&f.value)) {
    auto t = truncate_tail(*ms, c.eps);
    double h = 0.0;
    for (const auto& a : ms->atoms()) {
      if (a.value > 0.0) h -= a.multiplicity.convert_to<double>() * a.value * std::log2(a.value);
    }
    entries.push_back(entry("von_neumann", h, BoundKind::exact));
    entries.push_back(entry("h_max_tilde", std::log2(t.kept.convert_to<double>()), BoundKind::exact));
    entries.push_back(entry("h_max_prime", -std::log2(t.min_kept), BoundKind::exact));
    entries.push_back(entry("h_max_smooth", 2.0 * std::log2(t.sqrt_sum), BoundKind::upper, "truncation witness"));
  } else {
    throw StateFileError(c.state + ": /kind: entropies need a density, cq or spectral state");
  }
  ojson r;
  r["kind"] = f.kind;
  r["entries"] = entries;
  return r;
}

ojson np_command(const RunConfig& c) {
  auto rho = load_density(c.state, "--state");
  auto sigma = load_density(c.sigma, "--sigma");
  auto t = neyman_pearson(rho, sigma, c.eps);
  ojson r;
  r["d_h"] = number(t.summary.value);
  r["alpha"] = number(t.summary.alpha);
  r["beta"] = number(t.summary.beta);
  r["dual_value"] = number(t.summary.dual_value);
  r["multiplier"] = number(t.summary.multiplier);
  r["threshold"] = number(t.summary.threshold);
  r["boundary_weight"] = number(t.summary.boundary_weight);
  return r;
}

ojson concentrate_command(const RunConfig& c) {
  auto rho = load_density(c.state, "--state");
  ojson r;
  double h = h_max_tilde(rho, c.eps);
  double d = std::log2(static_cast<double>(rho.dim()));
  if (rho.op().is_diagonal()) {
    RealVector p = rho.matrix().diagonal().real();
    auto cc = concentrate_classical(p, c.eps);
    r["path"] = "classical";
    r["rate_bits"] = number(d - std::log2(static_cast<double>(cc.rank)));
    r["ancilla_bits"] = number(std::log2(static_cast<double>(cc.rank)));
    r["gross_bits"] = number(d);
    r["h_max_tilde"] = number(h);
    r["achieved_distance"] = number(cc.distance);
    r["pure_distance"] = number(cc.pure_distance);
    r["removed_mass"] = number(cc.removed_mass);
  } else {
    auto rep = run_concentration(rho, c.eps);
    r["path"] = "dense";
    r["rate_bits"] = number(rep.rate_bits);
    r["ancilla_bits"] = number(rep.ancilla_bits);
    r["gross_bits"] = number(rep.gross_bits);
    r["h_max_tilde"] = number(h);
    r["achieved_distance"] = number(rep.achieved_distance);
    r["pure_distance"] = number(rep.pure_distance);
    r["removed_mass"] = number(rep.removed_mass);
  }
  r["bound"] = number(3.0 * std::sqrt(c.eps));
  return r;
}

ojson distill_command(const RunConfig& c, ojson& table) {
  auto rho = load_density(c.state, "--state");
  DistillationReport rep;
  std::string path;
  if (c.povm.empty() && rho.op().is_diagonal()) {
    rep = run_distillation(ClassicalJoint::from(rho, c.split), c.eps, c.seed);
    path = "classical";
  } else {
    auto [a_labels, b_labels] = bipartition(rho.dims(), c.split);
    std::size_t da = 1;
    for (const auto& l : a_labels) da *= rho.dims().dim_of(l);
    RankOnePovm povm = RankOnePovm::computational_basis(da);
    if (!c.povm.empty()) {
      auto pf = ingest(c.povm);
      auto* p = std::get_if<RankOnePovm>(&pf.value);
      if (!p) throw StateFileError(c.povm + ": /kind: expected a povm");
      povm = *p;
    }
    rep = run_distillation(rho, povm, c.eps, c.seed, c.split);
    path = "dense";
  }
  const auto& l = rep.ledger;
  ojson ledger;
  ledger["alice_register"] = number(l.alice_register);
  ledger["x_register"] = number(l.x_register);
  ledger["intra_bin"] = number(l.intra_bin);
  ledger["bob_register"] = number(l.bob_register);
  ledger["borrowed_x"] = number(l.borrowed_x);
  ledger["borrowed_alice"] = number(l.borrowed_alice);
  ledger["borrowed_padding"] = number(l.borrowed_padding);
  ledger["borrowed_bob"] = number(l.borrowed_bob);
  ledger["gross"] = number(l.gross);
  ledger["borrowed"] = number(l.borrowed);
  ledger["net"] = number(l.net);
  ledger["alice_net"] = number(l.alice_net);
  ledger["bob_net"] = number(l.bob_net);
  ledger["communication"] = number(l.communication);
  ledger["log_good_set"] = number(l.good_set);
  ledger["log_alphabet"] = number(l.alphabet);
  ojson r;
  r["path"] = path;
  r["alphabet"] = rep.alphabet;
  r["good_set"] = rep.good_set;
  r["good_mass"] = number(rep.good_mass);
  r["blocks"] = rep.m;
  r["block_size"] = rep.n;
  r["padding"] = rep.padding;
  r["bob_rank"] = rep.bob_rank;
  r["i_h"] = number(rep.i_h);
  r["seed_used"] = rep.seed_used;
  r["attempts"] = rep.attempts;
  r["decoding_error"] = number(rep.decoding_error);
  r["final_distance"] = number(rep.final_distance);
  r["accumulated_bound"] = number(rep.accumulated_bound);
  r["all_stages_hold"] = rep.all_hold();
  r["ledger"] = ledger;
  for (const auto& s : rep.stages) {
    ojson row;
    row["stage"] = s.name;
    row["measured"] = number(s.measured);
    row["bound"] = number(s.bound);
    row["holds"] = s.holds();
    table.push_back(row);
  }
  return r;
}

ojson aep_command(const RunConfig& c, ojson& table) {
  if (c.state.empty()) throw UsageError("missing --state");
  if (c.n_max == 0) throw UsageError("--n-max must be positive");
  auto f = ingest(c.state);
  std::vector<AepPoint> pts;
  std::size_t threads = resolve_threads(c.threads);
  if (auto* ms = std::get_if<SpectralMultiset>(&f.value)) {
    pts = aep_sweep(*ms, c.eps, c.n_max, threads);
  } else if (auto* rho = std::get_if<DensityOperator>(&f.value)) {
    pts = aep_sweep(*rho, c.eps, c.n_max, threads);
  } else {
    throw StateFileError(c.state + ": /kind: the sweep needs a spectral or density state");
  }
  for (const auto& p : pts) {
    ojson row;
    row["n"] = p.n;
    row["h_max_tilde"] = number(p.h_tilde);
    row["h_max_prime"] = number(p.h_prime);
    row["h_max_smooth"] = number(p.h_smooth_ub);
    table.push_back(row);
  }
  ojson r;
  r["points"] = pts.size();
  r["last_h_max_tilde"] = number(pts.back().h_tilde);
  return r;
}

ojson collision_command(const RunConfig& c) {
  if (c.domain == 0 || c.blocks == 0) throw UsageError("collision needs --domain and --blocks");
  ojson r;
  double law = static_cast<double>(c.blocks - 1) / static_cast<double>(c.domain - 1);
  if (c.exact) {
    auto q = collision_probability_exact(c.domain, c.blocks);
    std::ostringstream s;
    s << q;
    r["mode"] = "exact";
    r["probability"] = s.str();
    r["value"] = number(q.convert_to<double>());
  } else {
    r["mode"] = "sampled";
    r["value"] = number(collision_probability_sampled(c.domain, c.blocks, c.seed, c.trials));
  }
  r["law"] = number(law);
  return r;
}

std::string csv_cell(const ojson& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

void flatten(const ojson& v, const std::string& prefix, std::ostringstream& out) {
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], prefix + "." + std::to_string(i), out);
  } else {
    out << csv_cell(prefix) << "," << csv_cell(v) << "\n";
  }
}

}  // namespace

ojson run_subcommand(const RunConfig& c) {
  if (!(c.eps >= 0.0) || !(c.eps < 1.0)) throw UsageError("--eps must lie in [0, 1)");
  if (c.format != "json" && c.format != "csv") throw UsageError("--format must be json or csv");
  ojson report;
  report["tool"] = "purity";
  report["version"] = kVersion;
  report["config"] = config_json(c);
  ojson table = ojson::array();
  ojson results;
  if (c.command == "entropy") {
    results = entropy_command(c);
  } else if (c.command == "np-test") {
    results = np_command(c);
  } else if (c.command == "concentrate") {
    results = concentrate_command(c);
  } else if (c.command == "distill") {
    results = distill_command(c, table);
  } else if (c.command == "aep-sweep") {
    results = aep_command(c, table);
  } else if (c.command == "collision") {
    results = collision_command(c);
  } else {
    throw UsageError("unknown command '" + c.command + "'");
  }
  report["results"] = results;
  if (!table.empty()) report["table"] = table;
  return report;
}

std::string render(const ojson& report, const std::string& format) {
  if (format == "json") return report.dump(2) + "\n";
  if (format != "csv") throw UsageError("--format must be json or csv");
  std::ostringstream out;
  auto it = report.find("table");
  if (it != report.end() && !it->empty()) {
    bool first = true;
    for (auto k = it->front().begin(); k != it->front().end(); ++k) {
      out << (first ? "" : ",") << csv_cell(k.key());
      first = false;
    }
    out << "\n";
    for (const auto& row : *it) {
      first = true;
      for (auto k = row.begin(); k != row.end(); ++k) {
        out << (first ? "" : ",") << csv_cell(k.value());
        first = false;
      }
      out << "\n";
    }
    return out.str();
  }
  out << "key,value\n";
  flatten(report.at("results"), "", out);
  return out.str();
}

}  // namespace purity
