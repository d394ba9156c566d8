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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sangria/error.hpp"
#include "sangria/pipeline.hpp"
#include "sangria/rng.hpp"
#include "support.hpp"

using namespace sangria;
using namespace sangria::pipeline;

namespace {

sae::SaeConfig quick_sae() {
  sae::SaeConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.seed = 71;
  return cfg;
}

gbt::GbtConfig quick_gbt() {
  gbt::GbtConfig cfg;
  cfg.iterations = 8;
  cfg.depth = 3;
  cfg.seed = 72;
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("euclidean_error examples and metric properties") {
  CHECK(euclidean_error({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(euclidean_error({0, 0, 0}, {3, 4, 0}) == 5.0);
  CHECK(euclidean_error({1, 2, 2}, {1, 2, 0}) == 2.0);

  Rng rng(100);
  auto random_loc = [&] {
    return data::Location{rng.uniform(-50, 50), rng.uniform(-50, 50),
                          rng.uniform(-50, 50)};
  };
  for (int i = 0; i < 300; ++i) {
    const data::Location a = random_loc(), b = random_loc(), c = random_loc();
    const double ab = euclidean_error(a, b);
    const double ba = euclidean_error(b, a);
    const double ac = euclidean_error(a, c);
    const double cb = euclidean_error(c, b);
    CHECK(ab == ba);                    // symmetry
    CHECK(ab >= 0.0);                   // non-negativity
    CHECK(ab <= ac + cb + 1e-9);        // triangle inequality
    CHECK(euclidean_error(a, a) == 0.0);
  }
}

TEST_CASE("knn_predict contracts") {
  const data::FingerprintDatabase db = test::make_grid_database(5, 3, 6, 51, 0.05);

  SUBCASE("k = 1 on a training fingerprint returns its location") {
    for (const auto& rec : db.records) {
      const data::Location loc = knn_predict(db, rec.rssi, 1);
      CHECK(euclidean_error(loc, rec.location) == 0.0);
    }
  }

  SUBCASE("k = n averages every location") {
    const data::Location loc =
        knn_predict(db, db.records[0].rssi, db.records.size());
    data::Location expect;
    for (const auto& rec : db.records) {
      expect.x += rec.location.x;
      expect.y += rec.location.y;
      expect.z += rec.location.z;
    }
    expect.x /= db.records.size();
    expect.y /= db.records.size();
    expect.z /= db.records.size();
    CHECK(loc.x == doctest::Approx(expect.x));
    CHECK(loc.y == doctest::Approx(expect.y));
    CHECK(loc.z == doctest::Approx(expect.z));
  }

  SUBCASE("three collinear points: k = 2 lands on the midpoint") {
    data::FingerprintDatabase line;
    line.registry = data::ApRegistry({"a"});
    for (int i = 0; i < 3; ++i) {
      data::FingerprintRecord rec;
      rec.rssi = {0.1 + 0.2 * i};  // 0.1, 0.3, 0.5
      rec.rp_label = "p" + std::to_string(i);
      rec.device = "d";
      rec.location = {static_cast<double>(i), 0.0, 0.0};
      line.records.push_back(rec);
      line.rp_coordinates[rec.rp_label] = rec.location;
    }
    // Query at 0.15: nearest two are records 0 and 1. Cross-check with an
    // exhaustive distance sort.
    const data::RssiVector query{0.15};
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t i = 0; i < 3; ++i) {
      dist.emplace_back(std::abs(line.records[i].rssi[0] - query[0]), i);
    }
    std::sort(dist.begin(), dist.end());
    const data::Location expect{
        (line.records[dist[0].second].location.x +
         line.records[dist[1].second].location.x) /
            2.0,
        0.0, 0.0};
    const data::Location got = knn_predict(line, query, 2);
    CHECK(got.x == doctest::Approx(expect.x));
    CHECK(got.x == doctest::Approx(0.5));
  }

  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(knn_predict(db, db.records[0].rssi, 0), Error);
    CHECK_THROWS_AS(knn_predict(db, db.records[0].rssi, db.records.size() + 1),
                    Error);
    data::FingerprintDatabase empty;
    empty.registry = db.registry;
    CHECK_THROWS_AS(knn_predict(empty, db.records[0].rssi, 1), Error);
  }
}

TEST_CASE("train_sangria pipeline composition") {
  const data::FingerprintDatabase db = test::make_grid_database(6, 5, 10, 53);

  SUBCASE("augmented arm doubles the ensemble training set") {
    const SangriaModel model = train_sangria(db, quick_sae(), quick_gbt());
    CHECK(model.metadata.ensemble_train_count == 2 * db.records.size());
    CHECK(model.metadata.source_record_count == db.records.size());
    CHECK(model.sae_model.has_value());
    // Every ensemble class resolves to coordinates.
    for (const auto& label : model.ensemble.class_labels) {
      CHECK(model.rp_coordinates.count(label) == 1);
    }
  }

  SUBCASE("augmentation disabled equals plain gbt on the same data") {
    const SangriaModel model =
        train_sangria(db, quick_sae(), quick_gbt(), /*augment=*/false);
    CHECK_FALSE(model.sae_model.has_value());
    CHECK(model.metadata.ensemble_train_count == db.records.size());
    const gbt::GbtEnsemble direct = gbt::fit_ensemble(db, quick_gbt());
    CHECK(gbt::hash_ensemble(model.ensemble) == gbt::hash_ensemble(direct));
  }

  SUBCASE("training is deterministic down to the serialized artifact") {
    const SangriaModel a = train_sangria(db, quick_sae(), quick_gbt());
    const SangriaModel b = train_sangria(db, quick_sae(), quick_gbt());
    CHECK(hash_model(a) == hash_model(b));
  }

  SUBCASE("empty training set fails") {
    data::FingerprintDatabase empty;
    empty.registry = db.registry;
    CHECK_THROWS_AS(train_sangria(empty, quick_sae(), quick_gbt()),
                    TrainingError);
  }
}

TEST_CASE("predict_location scan semantics") {
  const data::FingerprintDatabase db = test::make_grid_database(4, 6, 5, 57, 0.03);
  const SangriaModel model = train_sangria(db, quick_sae(), quick_gbt());

  SUBCASE("all -100 dBm equals the all-zeros vector") {
    Scan scan;
    for (const auto& id : model.registry.ids()) scan.emplace_back(id, -100.0);
    const Prediction from_scan = predict_location(model, scan);
    const Prediction from_vec =
        predict_from_vector(model, data::RssiVector(5, 0.0));
    CHECK(from_scan.rp_label == from_vec.rp_label);
    CHECK(from_scan.location == from_vec.location);
    CHECK_FALSE(from_scan.low_confidence);
  }

  SUBCASE("unknown APs are ignored") {
    Scan scan{{"AP0", -40.0}, {"AP2", -55.0}};
    Scan with_stranger = scan;
    with_stranger.emplace_back("NOT_AN_AP", -20.0);
    const Prediction a = predict_location(model, scan);
    const Prediction b = predict_location(model, with_stranger);
    CHECK(a.rp_label == b.rp_label);
    CHECK(a.location == b.location);
  }

  SUBCASE("scan key order never matters") {
    Rng rng(5);
    Scan scan;
    for (const auto& id : model.registry.ids()) {
      scan.emplace_back(id, rng.uniform(-90.0, -30.0));
    }
    const Prediction base = predict_location(model, scan);
    for (int trial = 0; trial < 5; ++trial) {
      rng.shuffle(scan);
      const Prediction p = predict_location(model, scan);
      CHECK(p.rp_label == base.rp_label);
      CHECK(p.location == base.location);
    }
  }

  SUBCASE("zero known APs still predicts, flagged low confidence") {
    const Prediction p = predict_location(model, {{"GHOST", -50.0}});
    CHECK(p.low_confidence);
    CHECK(model.rp_coordinates.count(p.rp_label) == 1);
  }

  SUBCASE("predictions stay in the coordinate map (closed world)") {
    Rng rng(6);
    for (int i = 0; i < 30; ++i) {
      data::RssiVector x(5);
      for (double& v : x) v = rng.uniform();
      const Prediction p = predict_from_vector(model, x);
      bool member = false;
      for (const auto& [label, loc] : model.rp_coordinates) {
        if (loc == p.location) member = true;
      }
      CHECK(member);
    }
  }

  SUBCASE("a training fingerprint of a single-class model maps to its RP") {
    const data::FingerprintDatabase one = test::make_grid_database(1, 6, 5, 3);
    const SangriaModel single = train_sangria(one, quick_sae(), quick_gbt());
    const Prediction p = predict_from_vector(single, one.records[0].rssi);
    CHECK(p.rp_label == "rp0");
    CHECK(p.location == one.rp_coordinates.at("rp0"));
  }
}

TEST_CASE("model artifacts round-trip through files") {
  test::TempDir tmp("model");
  const data::FingerprintDatabase db = test::make_grid_database(4, 5, 6, 61);
  const SangriaModel model = train_sangria(db, quick_sae(), quick_gbt());

  const std::string path = tmp.file("model.bin");
  save_model_file(model, path);
  const SangriaModel loaded = load_model_file(path);
  CHECK(hash_model(loaded) == hash_model(model));
  CHECK(loaded.registry == model.registry);
  CHECK(loaded.rp_coordinates == model.rp_coordinates);
  CHECK(loaded.metadata == model.metadata);

  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    data::RssiVector x(6);
    for (double& v : x) v = rng.uniform();
    const Prediction a = predict_from_vector(model, x);
    const Prediction b = predict_from_vector(loaded, x);
    CHECK(a.rp_label == b.rp_label);
  }

  // Version gate on the container.
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  bytes[4] = 3;
  std::stringstream bad(bytes);
  CHECK_THROWS_AS(load_model(bad), SerializationError);
}

TEST_CASE("scan files parse in all three accepted forms") {
  test::TempDir tmp("scans");

  const std::string pair_csv = tmp.file("pair.csv");
  {
    std::ofstream out(pair_csv);
    out << "AP0,-60\nAP1,-70.5\n";
  }
  const auto pair_scans = load_scans(pair_csv);
  REQUIRE(pair_scans.size() == 1);
  REQUIRE(pair_scans[0].size() == 2);
  CHECK(pair_scans[0][0].first == "AP0");
  CHECK(pair_scans[0][1].second == -70.5);

  const std::string table_csv = tmp.file("table.csv");
  {
    std::ofstream out(table_csv);
    out << "AP0,AP1,AP2\n-50,-60,-70\n-40,-100,-80\n";
  }
  const auto table_scans = load_scans(table_csv);
  REQUIRE(table_scans.size() == 2);
  CHECK(table_scans[1][0].second == -40.0);

  const std::string json_path = tmp.file("scan.json");
  {
    std::ofstream out(json_path);
    out << R"([{"AP0": -61, "AP1": -72}, {"AP2": -50}])";
  }
  const auto json_scans = load_scans(json_path);
  REQUIRE(json_scans.size() == 2);
  CHECK(json_scans[1][0].first == "AP2");

  const std::string bad = tmp.file("bad.csv");
  {
    std::ofstream out(bad);
    out << "AP0,AP1\n-50\n";
  }
  CHECK_THROWS_AS(load_scans(bad), IngestError);
}
