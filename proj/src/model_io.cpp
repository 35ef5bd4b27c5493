#include "fgs/model_io.hpp"

#include "fgs/errors.hpp"

#include <fstream>
#include <set>

namespace fgs {

namespace {

using nlohmann::json;

void reject_unknown(const json& doc, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

const json& require(const json& doc, const std::string& key,
                    const std::string& where) {
  if (!doc.contains(key)) {
    throw ConfigError("missing key '" + key + "' in " + where);
  }
  return doc.at(key);
}

EmbeddingTable table_from_json(const json& doc) {
  if (!doc.contains("embeddings")) return EmbeddingTable::binary_spins();
  auto vectors = doc.at("embeddings").get<std::vector<std::vector<double>>>();
  std::vector<std::string> labels;
  if (doc.contains("labels")) {
    labels = doc.at("labels").get<std::vector<std::string>>();
  }
  try {
    return EmbeddingTable(vectors, std::move(labels));
  } catch (const ContractError& e) {
    throw ConfigError(std::string("embeddings: ") + e.what());
  }
}

std::shared_ptr<const EnergyModel> log_quadratic_from_json(const json& doc) {
  reject_unknown(doc, {"type", "beta", "J", "b", "embeddings", "labels"},
                 "log_quadratic model");
  const double beta = require(doc, "beta", "log_quadratic model").get<double>();
  if (!(beta >= 0.0)) throw ConfigError("beta must be non-negative");
  EmbeddingTable table = table_from_json(doc);
  const int h = table.dim();
  const json& jdoc = require(doc, "J", "log_quadratic model");

  if (jdoc.is_object()) {
    reject_unknown(jdoc, {"cycle"}, "J");
    const int n = require(jdoc, "cycle", "J").get<int>();
    if (n < 2) throw ConfigError("J.cycle must be >= 2");
    auto ring = LogQuadraticEnergy::cycle(std::move(table), n, beta);
    if (!doc.contains("b")) {
      return std::make_shared<LogQuadraticEnergy>(std::move(ring));
    }
    auto b = doc.at("b").get<std::vector<double>>();
    if (static_cast<int>(b.size()) != n * h) {
      throw ConfigError("b must have length N*h = " + std::to_string(n * h));
    }
    return std::make_shared<LogQuadraticEnergy>(
        ring.table(), n, ring.coupling(),
        Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size())),
        beta);
  }

  auto rows = jdoc.get<std::vector<std::vector<double>>>();
  const auto d = static_cast<int>(rows.size());
  if (d == 0 || d % h != 0) {
    throw ConfigError("J must be square with side a multiple of h = " +
                      std::to_string(h));
  }
  Matrix j(d, d);
  for (int r = 0; r < d; ++r) {
    if (static_cast<int>(rows[r].size()) != d) {
      throw ConfigError("J row " + std::to_string(r) + " has wrong length");
    }
    for (int c = 0; c < d; ++c) j(r, c) = rows[r][c];
  }
  Vector b = Vector::Zero(d);
  if (doc.contains("b")) {
    auto bv = doc.at("b").get<std::vector<double>>();
    if (static_cast<int>(bv.size()) != d) {
      throw ConfigError("b must have length " + std::to_string(d));
    }
    for (int i = 0; i < d; ++i) b[i] = bv[i];
  }
  return std::make_shared<LogQuadraticEnergy>(std::move(table), d / h,
                                              std::move(j), std::move(b), beta);
}

std::shared_ptr<const EnergyModel> composite_from_json(const json& doc) {
  reject_unknown(doc, {"type", "terms"}, "composite model");
  const json& terms_doc = require(doc, "terms", "composite model");
  if (!terms_doc.is_array() || terms_doc.empty()) {
    throw ConfigError("composite terms must be a non-empty array");
  }
  std::vector<CompositeEnergy::Term> terms;
  for (const auto& t : terms_doc) {
    reject_unknown(t, {"weight", "model"}, "composite term");
    terms.push_back({model_from_json(require(t, "model", "composite term")),
                     t.value("weight", 1.0)});
  }
  try {
    return std::make_shared<CompositeEnergy>(std::move(terms));
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

std::shared_ptr<const EnergyModel> model_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("model must be a JSON object");
  try {
    const auto type = require(doc, "type", "model").get<std::string>();
    if (type == "log_quadratic") return log_quadratic_from_json(doc);
    if (type == "composite") return composite_from_json(doc);
    throw ConfigError("unknown model type '" + type + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model: ") + e.what());
  }
}

std::shared_ptr<const EnergyModel> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace fgs
