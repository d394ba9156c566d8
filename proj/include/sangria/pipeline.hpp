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

#ifndef SANGRIA_PIPELINE_HPP_
#define SANGRIA_PIPELINE_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sangria/fingerprint.hpp"
#include "sangria/gbt.hpp"
#include "sangria/sae.hpp"

namespace sangria {
namespace pipeline {

struct ModelMetadata {
  sae::SaeConfig sae_cfg;
  gbt::GbtConfig gbt_cfg;
  bool augmented = true;
  std::uint64_t source_db_hash = 0;       // input training database
  std::uint64_t source_record_count = 0;
  std::uint64_t ensemble_train_count = 0; // records the ensemble saw

  friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

// The deployable artifact: normalization is implicit in the unit-interval
// convention, the registry fixes the feature order, the ensemble predicts a
// reference point, and rp_coordinates resolves it to meters.
struct SangriaModel {
  data::ApRegistry registry;
  std::optional<sae::StackedAutoencoder> sae_model;  // absent without augmentation
  gbt::GbtEnsemble ensemble;
  std::map<std::string, data::Location> rp_coordinates;
  ModelMetadata metadata;
};

// Full offline phase: greedy pretrain + fine-tune the stacked autoencoder on
// the training fingerprints, append one synthetic reconstruction per record,
// and boost on the concatenated set. With augment = false the ensemble is
// fit on the original records alone (the ablation arm) and no autoencoder
// is trained.
SangriaModel train_sangria(const data::FingerprintDatabase& train,
                           const sae::SaeConfig& sae_cfg,
                           const gbt::GbtConfig& gbt_cfg, bool augment = true);

// A raw scan: (AP identifier, dBm) pairs. Unknown APs are ignored; known
// APs missing from the scan count as -100 dBm.
using Scan = std::vector<std::pair<std::string, double>>;

struct Prediction {
  data::Location location;
  std::string rp_label;
  bool low_confidence = false;  // scan contained no AP known to the model
};

Prediction predict_location(const SangriaModel& model, const Scan& scan);
Prediction predict_from_vector(const SangriaModel& model,
                               const data::RssiVector& x);

// sqrt((x2-x1)^2 + (y2-y1)^2 + (z2-z1)^2)
double euclidean_error(const data::Location& a, const data::Location& b);

// Centroid of the k nearest training records in normalized RSS space;
// distance ties resolve to the lower record index.
data::Location knn_predict(const data::FingerprintDatabase& train,
                           const data::RssiVector& x, std::size_t k);

// Scan files: either a CSV whose header lists AP identifiers with one scan
// per data row, a two-column `ap,dbm` CSV describing a single scan, or a
// JSON object (or array of objects) keyed by AP identifier.
std::vector<Scan> load_scans(const std::string& path);

// Versioned container embedding the autoencoder and ensemble artifacts.
void save_model(const SangriaModel& model, std::ostream& out);
SangriaModel load_model(std::istream& in);
void save_model_file(const SangriaModel& model, const std::string& path);
SangriaModel load_model_file(const std::string& path);
std::uint64_t hash_model(const SangriaModel& model);

}  // namespace pipeline
}  // namespace sangria

#endif  // SANGRIA_PIPELINE_HPP_
