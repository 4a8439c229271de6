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
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "purity/harness.hpp"

namespace {

void common_options(CLI::App* sub, purity::RunConfig& c) {
  sub->add_option("--state", c.state, "State file (JSON schema 1)");
  sub->add_option("--eps", c.eps, "Smoothing parameter in [0, 1)");
  sub->add_option("--seed", c.seed, "64-bit seed");
  sub->add_option("--out", c.out, "Write the report here instead of stdout");
  sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--threads", c.threads, "Worker threads (0 reads PURITY_THREADS)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Purity concentration and one-way distillation toolkit"};
  app.set_version_flag("--version", std::string(purity::kVersion));
  app.require_subcommand(1);
  purity::RunConfig c;

  auto* entropy = app.add_subcommand("entropy", "Entropy table of a state");
  common_options(entropy, c);
  entropy->add_option("--povm", c.povm, "Rank-one POVM file for the rate terms");
  entropy->add_option("--split", c.split, "Number of leading subsystems held by A");

  auto* np = app.add_subcommand("np-test", "Optimal hypothesis test of --state against --sigma");
  common_options(np, c);
  np->add_option("--sigma", c.sigma, "Alternative hypothesis state")->required();

  auto* conc = app.add_subcommand("concentrate", "Single-party purity concentration");
  common_options(conc, c);

  auto* distill = app.add_subcommand("distill", "One-way purity distillation");
  common_options(distill, c);
  distill->add_option("--povm", c.povm, "Alice's rank-one POVM (default: computational basis)");
  distill->add_option("--split", c.split, "Number of leading subsystems held by Alice");

  auto* aep = app.add_subcommand("aep-sweep", "Per-copy smoothed max-entropies of tensor powers");
  common_options(aep, c);
  aep->add_option("--n-max", c.n_max, "Largest number of copies");

  auto* coll = app.add_subcommand("collision", "Collision rate of random binnings");
  common_options(coll, c);
  coll->add_option("--domain", c.domain, "Number of labels")->required();
  coll->add_option("--blocks", c.blocks, "Labels per block (N)")->required();
  auto* exact = coll->add_flag("--exact", c.exact, "Enumerate every permutation");
  coll->add_option("--trials", c.trials, "Sampled permutations")->excludes(exact);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  c.command = app.get_subcommands().front()->get_name();

  try {
    auto report = purity::run_subcommand(c);
    std::string text = purity::render(report, c.format);
    if (c.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(c.out, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot write " << c.out << "\n";
        return 1;
      }
      out << text;
    }
  } catch (const purity::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
