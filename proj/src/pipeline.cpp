// Copyright 2026 The Sangria Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sangria/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sangria/error.hpp"
#include "sangria/io.hpp"

namespace sangria {
namespace pipeline {

namespace {

constexpr char kModelMagic[5] = "SGMD";
constexpr std::uint32_t kModelVersion = 1;

void save_metadata(BinaryWriter& w, const ModelMetadata& m) {
  w.u64(m.sae_cfg.hidden_dim);
  w.u64(m.sae_cfg.code_dim);
  w.f64(m.sae_cfg.learning_rate);
  w.u64(m.sae_cfg.epochs);
  w.u64(m.sae_cfg.batch_size);
  w.u64(m.sae_cfg.seed);
  w.u64(m.gbt_cfg.iterations);
  w.u64(m.gbt_cfg.depth);
  w.f64(m.gbt_cfg.learning_rate);
  w.f64(m.gbt_cfg.l2_leaf_reg);
  w.u64(m.gbt_cfg.n_bins);
  w.f64(m.gbt_cfg.feature_fraction);
  w.u64(m.gbt_cfg.seed);
  w.u8(m.augmented ? 1 : 0);
  w.u64(m.source_db_hash);
  w.u64(m.source_record_count);
  w.u64(m.ensemble_train_count);
}

ModelMetadata load_metadata(BinaryReader& r) {
  ModelMetadata m;
  m.sae_cfg.hidden_dim = static_cast<std::size_t>(r.u64());
  m.sae_cfg.code_dim = static_cast<std::size_t>(r.u64());
  m.sae_cfg.learning_rate = r.f64();
  m.sae_cfg.epochs = static_cast<std::size_t>(r.u64());
  m.sae_cfg.batch_size = static_cast<std::size_t>(r.u64());
  m.sae_cfg.seed = r.u64();
  m.gbt_cfg.iterations = static_cast<std::size_t>(r.u64());
  m.gbt_cfg.depth = static_cast<std::size_t>(r.u64());
  m.gbt_cfg.learning_rate = r.f64();
  m.gbt_cfg.l2_leaf_reg = r.f64();
  m.gbt_cfg.n_bins = static_cast<std::size_t>(r.u64());
  m.gbt_cfg.feature_fraction = r.f64();
  m.gbt_cfg.seed = r.u64();
  m.augmented = r.u8() != 0;
  m.source_db_hash = r.u64();
  m.source_record_count = r.u64();
  m.ensemble_train_count = r.u64();
  return m;
}

bool looks_like_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) {
    ++end;
  }
  return end != nullptr && *end == '\0';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

std::vector<Scan> load_scans_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError("bad JSON in '" + path + "': " + e.what());
  }
  auto to_scan = [](const nlohmann::json& obj) {
    if (!obj.is_object()) throw IngestError("scan entries must be objects");
    Scan scan;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!it.value().is_number()) {
        throw IngestError("dBm value for '" + it.key() + "' is not numeric");
      }
      scan.emplace_back(it.key(), it.value().get<double>());
    }
    return scan;
  };
  std::vector<Scan> scans;
  if (doc.is_array()) {
    for (const auto& entry : doc) scans.push_back(to_scan(entry));
  } else {
    scans.push_back(to_scan(doc));
  }
  if (scans.empty()) throw IngestError("no scans in '" + path + "'");
  return scans;
}

std::vector<Scan> load_scans_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(split_csv_line(line));
  }
  if (lines.empty()) throw IngestError("empty scan file '" + path + "'");

  // Two-column `ap,dbm` rows describe one scan; otherwise the first line is
  // an AP header and each later row is a scan.
  const bool pair_form = lines[0].size() == 2 && looks_like_number(lines[0][1]);
  std::vector<Scan> scans;
  if (pair_form) {
    Scan scan;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].size() != 2 || !looks_like_number(lines[i][1])) {
        throw IngestError("expected `ap,dbm` at line " + std::to_string(i + 1));
      }
      scan.emplace_back(lines[i][0], std::stod(lines[i][1]));
    }
    scans.push_back(std::move(scan));
  } else {
    const std::vector<std::string>& header = lines[0];
    if (lines.size() < 2) throw IngestError("scan file has no data rows");
    for (std::size_t r = 1; r < lines.size(); ++r) {
      if (lines[r].size() != header.size()) {
        throw IngestError("ragged scan row " + std::to_string(r + 1));
      }
      Scan scan;
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (!looks_like_number(lines[r][c])) {
          throw IngestError("non-numeric dBm at row " + std::to_string(r + 1) +
                            ", column " + header[c]);
        }
        scan.emplace_back(header[c], std::stod(lines[r][c]));
      }
      scans.push_back(std::move(scan));
    }
  }
  return scans;
}

}  // namespace

SangriaModel train_sangria(const data::FingerprintDatabase& train,
                           const sae::SaeConfig& sae_cfg,
                           const gbt::GbtConfig& gbt_cfg, bool augment) {
  if (train.records.empty()) throw TrainingError("empty training set");

  SangriaModel model;
  model.registry = train.registry;
  model.rp_coordinates = train.rp_coordinates;
  model.metadata.sae_cfg = sae_cfg;
  model.metadata.gbt_cfg = gbt_cfg;
  model.metadata.augmented = augment;
  model.metadata.source_db_hash = data::hash_database(train);
  model.metadata.source_record_count = train.records.size();

  if (augment) {
    std::vector<data::RssiVector> vectors;
    vectors.reserve(train.records.size());
    for (const auto& rec : train.records) vectors.push_back(rec.rssi);
    sae::StackedAutoencoder net = sae::greedy_pretrain(vectors, sae_cfg);
    sae::fine_tune(net, vectors, sae_cfg);
    const data::FingerprintDatabase augmented = sae::augment(net, train);
    model.metadata.ensemble_train_count = augmented.records.size();
    model.ensemble = gbt::fit_ensemble(augmented, gbt_cfg);
    model.sae_model = std::move(net);
  } else {
    model.metadata.ensemble_train_count = train.records.size();
    model.ensemble = gbt::fit_ensemble(train, gbt_cfg);
  }
  return model;
}

Prediction predict_from_vector(const SangriaModel& model,
                               const data::RssiVector& x) {
  if (model.registry.size() == 0) throw Error("model has an empty AP registry");
  if (x.size() != model.registry.size()) {
    throw ShapeError("vector has " + std::to_string(x.size()) +
                     " values, registry has " +
                     std::to_string(model.registry.size()));
  }
  Prediction out;
  out.rp_label = gbt::predict_label(model.ensemble, x);
  const auto it = model.rp_coordinates.find(out.rp_label);
  if (it == model.rp_coordinates.end()) {
    throw Error("predicted label '" + out.rp_label + "' has no coordinates");
  }
  out.location = it->second;
  return out;
}

Prediction predict_location(const SangriaModel& model, const Scan& scan) {
  if (model.registry.size() == 0) throw Error("model has an empty AP registry");
  data::RssiVector x(model.registry.size(), 0.0);  // -100 dBm everywhere
  std::size_t known = 0;
  for (const auto& [ap, dbm] : scan) {
    const std::ptrdiff_t idx = model.registry.index_of(ap);
    if (idx < 0) continue;  // AP the model never saw
    x[static_cast<std::size_t>(idx)] = data::normalize_rssi(dbm);
    ++known;
  }
  Prediction out = predict_from_vector(model, x);
  out.low_confidence = known == 0;
  return out;
}

double euclidean_error(const data::Location& a, const data::Location& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double dz = b.z - a.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

data::Location knn_predict(const data::FingerprintDatabase& train,
                           const data::RssiVector& x, std::size_t k) {
  const std::size_t n = train.records.size();
  if (n == 0) throw Error("knn: empty training database");
  if (k < 1 || k > n) {
    throw Error("knn: k must be in [1, " + std::to_string(n) + "]");
  }
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const data::RssiVector& r = train.records[i].rssi;
    if (r.size() != x.size()) throw ShapeError("knn: dimension mismatch");
    double d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = r[j] - x[j];
      d2 += d * d;
    }
    dist.emplace_back(d2, i);
  }
  std::sort(dist.begin(), dist.end());
  data::Location centroid;
  for (std::size_t i = 0; i < k; ++i) {
    const data::Location& loc = train.records[dist[i].second].location;
    centroid.x += loc.x;
    centroid.y += loc.y;
    centroid.z += loc.z;
  }
  centroid.x /= static_cast<double>(k);
  centroid.y /= static_cast<double>(k);
  centroid.z /= static_cast<double>(k);
  return centroid;
}

std::vector<Scan> load_scans(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "json") return load_scans_json(path);
  return load_scans_csv(path);
}

void save_model(const SangriaModel& model, std::ostream& out) {
  BinaryWriter w(out);
  w.magic(kModelMagic);
  w.u32(kModelVersion);
  w.u64(model.registry.size());
  for (const auto& id : model.registry.ids()) w.str(id);
  w.u64(model.rp_coordinates.size());
  for (const auto& [label, loc] : model.rp_coordinates) {
    w.str(label);
    w.f64(loc.x);
    w.f64(loc.y);
    w.f64(loc.z);
  }
  save_metadata(w, model.metadata);
  w.u8(model.sae_model.has_value() ? 1 : 0);
  if (model.sae_model) sae::save_sae(*model.sae_model, out);
  gbt::save_ensemble(model.ensemble, out);
}

SangriaModel load_model(std::istream& in) {
  BinaryReader r(in);
  r.expect_magic(kModelMagic);
  r.expect_version(kModelVersion, "model artifact");
  SangriaModel model;
  const std::uint64_t n_aps = r.u64();
  std::vector<std::string> ids;
  for (std::uint64_t i = 0; i < n_aps; ++i) ids.push_back(r.str());
  model.registry = data::ApRegistry(std::move(ids));
  const std::uint64_t n_rps = r.u64();
  for (std::uint64_t i = 0; i < n_rps; ++i) {
    std::string label = r.str();
    data::Location loc{r.f64(), r.f64(), r.f64()};
    model.rp_coordinates.emplace(std::move(label), loc);
  }
  model.metadata = load_metadata(r);
  if (r.u8() != 0) model.sae_model = sae::load_sae(in);
  model.ensemble = gbt::load_ensemble(in);
  for (const auto& label : model.ensemble.class_labels) {
    if (!model.rp_coordinates.count(label)) {
      throw SerializationError("class label '" + label +
                               "' missing from rp coordinates");
    }
  }
  return model;
}

void save_model_file(const SangriaModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SerializationError("cannot write '" + path + "'");
  save_model(model, out);
}

SangriaModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SerializationError("cannot open '" + path + "'");
  return load_model(in);
}

std::uint64_t hash_model(const SangriaModel& model) {
  std::ostringstream buf;
  save_model(model, buf);
  Fnv1a h;
  const std::string s = buf.str();
  h.add(s.data(), s.size());
  return h.value();
}

}  // namespace pipeline
}  // namespace sangria
