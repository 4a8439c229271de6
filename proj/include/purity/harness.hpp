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
#include <string>
#include <variant>

#include <json.hpp>

#include "purity/entropies.hpp"
#include "purity/operator_core.hpp"

namespace purity {

#ifndef PURITY_VERSION
#define PURITY_VERSION "unknown"
#endif

inline constexpr const char* kVersion = PURITY_VERSION;
inline constexpr int kSchemaVersion = 1;

/// Malformed or invalid state file. The message names the source and either
/// a line:column position or the offending field path.
class StateFileError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Bad command-line usage; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using StateValue = std::variant<DensityOperator, CqState, SpectralMultiset, RankOnePovm>;

struct StateFile {
  int schema = kSchemaVersion;
  std::string kind;  // density, cq, spectral or povm
  StateValue value;
};

StateFile parse_state(const std::string& text, const std::string& source = "<string>");
StateFile ingest(const std::string& path);

/// Writers for the same schema, used to produce golden files.
nlohmann::ordered_json to_json(const DensityOperator& rho);
nlohmann::ordered_json to_json(const CqState& cq);
nlohmann::ordered_json to_json(const SpectralMultiset& ms);
nlohmann::ordered_json to_json(const RankOnePovm& povm);

struct RunConfig {
  std::string command;
  std::string state;
  double eps = 0.1;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0 reads PURITY_THREADS, default 1
  std::string format = "json";
  std::string out;
  std::string sigma;
  std::string povm;
  std::size_t split = 1;
  std::size_t n_max = 30;
  std::size_t domain = 0;
  std::size_t blocks = 0;
  bool exact = false;
  std::size_t trials = 10000;
};

std::size_t resolve_threads(std::size_t requested);

/// Runs one subcommand and returns its report: version, config, results and
/// an optional "table" of rows.
nlohmann::ordered_json run_subcommand(const RunConfig& config);

/// Serializes a report as JSON or CSV. Reals carry 12 significant digits.
std::string render(const nlohmann::ordered_json& report, const std::string& format);

/// A real rounded to 12 significant digits, or "inf"/"-inf"/"nan".
nlohmann::ordered_json number(double x);

}  // namespace purity
