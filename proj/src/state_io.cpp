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
#include <sstream>

#include "purity/harness.hpp"

namespace purity {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

struct Reader {
  std::string source;

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw StateFileError(source + ": " + (path.empty() ? "/" : path) + ": " + msg);
  }

  const json& field(const json& obj, const std::string& key, const std::string& path) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, "missing field '" + key + "'");
    return *it;
  }

  const json& array(const json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected an array");
    return j;
  }

  double real(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }

  std::size_t count(const json& j, const std::string& path) const {
    if (!j.is_number_unsigned() || j.get<std::uint64_t>() == 0) fail(path, "expected a positive integer");
    return static_cast<std::size_t>(j.get<std::uint64_t>());
  }

  cplx entry(const json& j, const std::string& path) const {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
      return {j[0].get<double>(), j[1].get<double>()};
    }
    fail(path, "expected a number or a [re, im] pair");
  }

  Matrix matrix(const json& j, std::size_t n, const std::string& path) const {
    array(j, path);
    if (j.size() != n) fail(path, "expected " + std::to_string(n) + " rows, found " + std::to_string(j.size()));
    const auto dn = static_cast<Eigen::Index>(n);
    Matrix m(dn, dn);
    for (std::size_t r = 0; r < n; ++r) {
      std::string rp = path + "/" + std::to_string(r);
      array(j[r], rp);
      if (j[r].size() != n) fail(rp, "expected " + std::to_string(n) + " entries, found " + std::to_string(j[r].size()));
      for (std::size_t c = 0; c < n; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = entry(j[r][c], rp + "/" + std::to_string(c));
      }
    }
    return m;
  }

  Vector vector(const json& j, std::size_t n, const std::string& path) const {
    array(j, path);
    if (j.size() != n) fail(path, "expected " + std::to_string(n) + " entries, found " + std::to_string(j.size()));
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = entry(j[i], path + "/" + std::to_string(i));
    return v;
  }

  HilbertDims dims(const json& j, const std::string& path) const {
    array(j, path);
    if (j.empty()) fail(path, "expected at least one subsystem");
    std::vector<Subsystem> parts;
    for (std::size_t i = 0; i < j.size(); ++i) {
      std::string p = path + "/" + std::to_string(i);
      if (!j[i].is_array() || j[i].size() != 2 || !j[i][0].is_string()) fail(p, "expected a [label, dim] pair");
      parts.push_back({j[i][0].get<std::string>(), count(j[i][1], p + "/1")});
    }
    try {
      return HilbertDims(parts);
    } catch (const DomainError& e) {
      fail(path, e.what());
    }
  }

  std::vector<double> reals(const json& j, const std::string& path) const {
    array(j, path);
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(real(j[i], path + "/" + std::to_string(i)));
    return out;
  }

  template <class F>
  auto checked(const std::string& path, F&& f) const -> decltype(f()) {
    try {
      return f();
    } catch (const StateFileError&) {
      throw;
    } catch (const DomainError& e) {
      fail(path, e.what());
    }
  }

  DensityOperator density(const json& doc) const {
    auto d = dims(field(doc, "dims", ""), "/dims");
    auto m = matrix(field(doc, "matrix", ""), d.total(), "/matrix");
    bool normalized = true;
    if (auto it = doc.find("normalized"); it != doc.end()) {
      if (!it->is_boolean()) fail("/normalized", "expected a boolean");
      normalized = it->get<bool>();
    }
    return checked("/matrix", [&] { return DensityOperator(d, m, normalized); });
  }

  CqState cq(const json& doc) const {
    auto d = dims(field(doc, "dims", ""), "/dims");
    auto probs = reals(field(doc, "probs", ""), "/probs");
    const auto& conds = array(field(doc, "conditionals", ""), "/conditionals");
    if (conds.size() != probs.size()) fail("/conditionals", "expected one conditional per probability");
    std::vector<DensityOperator> states;
    for (std::size_t x = 0; x < conds.size(); ++x) {
      std::string p = "/conditionals/" + std::to_string(x);
      auto m = matrix(conds[x], d.total(), p);
      states.push_back(checked(p, [&] { return DensityOperator(d, m, true); }));
    }
    std::vector<std::string> labels;
    if (auto it = doc.find("labels"); it != doc.end()) {
      array(*it, "/labels");
      for (std::size_t i = 0; i < it->size(); ++i) {
        if (!(*it)[i].is_string()) fail("/labels/" + std::to_string(i), "expected a string");
        labels.push_back((*it)[i].get<std::string>());
      }
    }
    return checked("/probs", [&] { return CqState(probs, states, labels); });
  }

  SpectralMultiset spectral(const json& doc) const {
    auto values = reals(field(doc, "eigenvalues", ""), "/eigenvalues");
    std::vector<BigInt> mult(values.size(), BigInt(1));
    if (auto it = doc.find("multiplicities"); it != doc.end()) {
      array(*it, "/multiplicities");
      if (it->size() != values.size()) fail("/multiplicities", "expected one multiplicity per eigenvalue");
      for (std::size_t i = 0; i < it->size(); ++i) {
        std::string p = "/multiplicities/" + std::to_string(i);
        const auto& e = (*it)[i];
        if (e.is_number_unsigned()) {
          mult[i] = BigInt(e.get<std::uint64_t>());
        } else if (e.is_string()) {
          try {
            mult[i] = BigInt(e.get<std::string>());
          } catch (const std::exception&) {
            fail(p, "expected a decimal integer");
          }
        } else {
          fail(p, "expected a non-negative integer or a decimal string");
        }
      }
    }
    std::vector<SpectralMultiset::Atom> atoms;
    for (std::size_t i = 0; i < values.size(); ++i) atoms.push_back({values[i], mult[i]});
    return checked("/eigenvalues", [&] { return SpectralMultiset(atoms); });
  }

  RankOnePovm povm(const json& doc) const {
    std::size_t dim = count(field(doc, "dim", ""), "/dim");
    auto weights = reals(field(doc, "weights", ""), "/weights");
    const auto& vecs = array(field(doc, "vectors", ""), "/vectors");
    if (vecs.size() != weights.size()) fail("/vectors", "expected one vector per weight");
    std::vector<Vector> vs;
    for (std::size_t x = 0; x < vecs.size(); ++x) vs.push_back(vector(vecs[x], dim, "/vectors/" + std::to_string(x)));
    return checked("/weights", [&] { return RankOnePovm(dim, weights, vs); });
  }
};

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

ojson entry_json(cplx z) { return ojson::array({number(z.real()), number(z.imag())}); }

ojson matrix_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(entry_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

ojson dims_json(const HilbertDims& d) {
  ojson out = ojson::array();
  for (const auto& p : d.parts()) out.push_back(ojson::array({p.label, p.dim}));
  return out;
}

}  // namespace

StateFile parse_state(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    std::ostringstream msg;
    msg << source << ":" << line << ":" << col << ": invalid JSON";
    throw StateFileError(msg.str());
  }
  Reader rd{source};
  if (!doc.is_object()) rd.fail("", "expected a JSON object");
  const auto& schema = rd.field(doc, "schema", "");
  if (!schema.is_number_integer() || schema.get<int>() != kSchemaVersion) {
    rd.fail("/schema", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  const auto& kind = rd.field(doc, "kind", "");
  if (!kind.is_string()) rd.fail("/kind", "expected a string");
  StateFile out;
  out.kind = kind.get<std::string>();
  if (out.kind == "density") {
    out.value = rd.density(doc);
  } else if (out.kind == "cq") {
    out.value = rd.cq(doc);
  } else if (out.kind == "spectral") {
    out.value = rd.spectral(doc);
  } else if (out.kind == "povm") {
    out.value = rd.povm(doc);
  } else {
    rd.fail("/kind", "unknown kind '" + out.kind + "' (expected density, cq, spectral or povm)");
  }
  return out;
}

StateFile ingest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StateFileError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_state(buf.str(), path);
}

ojson to_json(const DensityOperator& rho) {
  ojson j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "density";
  j["dims"] = dims_json(rho.dims());
  if (!rho.normalized()) j["normalized"] = false;
  j["matrix"] = matrix_json(rho.matrix());
  return j;
}

ojson to_json(const CqState& cq) {
  ojson j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "cq";
  j["dims"] = dims_json(cq.b_dims());
  ojson probs = ojson::array();
  for (double p : cq.probs()) probs.push_back(number(p));
  j["probs"] = probs;
  ojson conds = ojson::array();
  for (const auto& c : cq.conditionals()) conds.push_back(matrix_json(c.matrix()));
  j["conditionals"] = conds;
  return j;
}

ojson to_json(const SpectralMultiset& ms) {
  ojson j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "spectral";
  ojson values = ojson::array(), mult = ojson::array();
  for (const auto& a : ms.atoms()) {
    values.push_back(number(a.value));
    mult.push_back(a.multiplicity.str());
  }
  j["eigenvalues"] = values;
  j["multiplicities"] = mult;
  return j;
}

ojson to_json(const RankOnePovm& povm) {
  ojson j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "povm";
  j["dim"] = povm.dim();
  ojson w = ojson::array(), v = ojson::array();
  for (std::size_t x = 0; x < povm.size(); ++x) {
    w.push_back(number(povm.weight(x)));
    ojson vec = ojson::array();
    for (Eigen::Index i = 0; i < povm.vector(x).size(); ++i) vec.push_back(entry_json(povm.vector(x)[i]));
    v.push_back(vec);
  }
  j["weights"] = w;
  j["vectors"] = v;
  return j;
}

}  // namespace purity
