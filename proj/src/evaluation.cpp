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

#include "sangria/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>

#include <json.hpp>

#include "sangria/error.hpp"
#include "sangria/io.hpp"
#include "sangria/rng.hpp"

namespace sangria {
namespace eval {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> model_errors(const pipeline::SangriaModel& model,
                                 const data::FingerprintDatabase& test) {
  std::vector<double> errors;
  errors.reserve(test.records.size());
  for (const auto& rec : test.records) {
    const pipeline::Prediction p = pipeline::predict_from_vector(model, rec.rssi);
    errors.push_back(pipeline::euclidean_error(rec.location, p.location));
  }
  return errors;
}

ordered_json provenance_json(const sae::SaeConfig& sae_cfg,
                             const gbt::GbtConfig& gbt_cfg,
                             const std::string& dataset) {
  ordered_json p;
  p["dataset"] = dataset;
  p["sae"] = {{"hidden_dim", sae_cfg.hidden_dim},
              {"code_dim", sae_cfg.code_dim},
              {"learning_rate", sae_cfg.learning_rate},
              {"epochs", sae_cfg.epochs},
              {"batch_size", sae_cfg.batch_size},
              {"seed", sae_cfg.seed}};
  p["gbt"] = {{"iterations", gbt_cfg.iterations},
              {"depth", gbt_cfg.depth},
              {"learning_rate", gbt_cfg.learning_rate},
              {"l2_leaf_reg", gbt_cfg.l2_leaf_reg},
              {"n_bins", gbt_cfg.n_bins},
              {"feature_fraction", gbt_cfg.feature_fraction},
              {"seed", gbt_cfg.seed}};
  return p;
}

ordered_json stats_json(const ErrorStats& s) {
  return {{"min", s.min}, {"mean", s.mean}, {"max", s.max}, {"n", s.n}};
}

ErrorStats stats_from_json(const ordered_json& j) {
  ErrorStats s;
  s.min = j.at("min").get<double>();
  s.mean = j.at("mean").get<double>();
  s.max = j.at("max").get<double>();
  s.n = j.at("n").get<std::uint64_t>();
  return s;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path + "'");
}

ordered_json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad JSON in '" + path + "': " + e.what());
  }
  return j;
}

}  // namespace

ErrorStats error_stats(const std::vector<double>& errors) {
  if (errors.empty()) throw Error("error_stats on an empty list");
  ErrorStats s;
  s.min = errors[0];
  s.max = errors[0];
  double sum = 0.0;
  for (double e : errors) {
    s.min = std::min(s.min, e);
    s.max = std::max(s.max, e);
    sum += e;
  }
  s.mean = sum / static_cast<double>(errors.size());
  s.n = errors.size();
  return s;
}

ErrorMatrix cross_device_matrix(const data::FingerprintDatabase& db,
                                const std::vector<std::string>& devices,
                                const sae::SaeConfig& sae_cfg,
                                const gbt::GbtConfig& gbt_cfg,
                                const CrossDeviceOptions& options,
                                std::vector<double>* all_errors) {
  if (devices.empty()) throw Error("no devices given");
  const std::set<std::string> known = db.devices();
  for (const auto& d : devices) {
    if (!known.count(d)) throw Error("device '" + d + "' has no records");
  }

  ErrorMatrix matrix;
  matrix.devices = devices;
  matrix.cells.assign(devices.size() * devices.size(), MatrixCell{});

  for (std::size_t i = 0; i < devices.size(); ++i) {
    const auto [device_db, _] =
        data::split_by_device(db, {devices[i]}, {devices[i]});
    for (std::size_t j = 0; j < devices.size(); ++j) {
      MatrixCell& cell = matrix.cell(i, j);
      data::FingerprintDatabase train, test;
      if (i == j) {
        Fnv1a dev_hash;
        dev_hash.add_str(devices[i]);
        try {
          std::tie(train, test) = data::split_per_rp(
              device_db, options.diagonal_train_per_rp,
              options.diagonal_test_per_rp,
              mix_seed(options.split_seed, dev_hash.value()));
        } catch (const IngestError& e) {
          cell.absent_reason = e.what();
          continue;
        }
      } else {
        train = device_db;
        test = data::split_by_device(db, {devices[j]}, {devices[j]}).first;
      }
      const pipeline::SangriaModel model =
          pipeline::train_sangria(train, sae_cfg, gbt_cfg, options.augment);
      const std::vector<double> errors = model_errors(model, test);
      const ErrorStats stats = error_stats(errors);
      cell.present = true;
      cell.mean_error = stats.mean;
      cell.count = stats.n;
      if (all_errors) {
        all_errors->insert(all_errors->end(), errors.begin(), errors.end());
      }
    }
  }
  return matrix;
}

AblationResult ablation_sae(const data::FingerprintDatabase& train,
                            const data::FingerprintDatabase& test,
                            const sae::SaeConfig& sae_cfg,
                            const gbt::GbtConfig& gbt_cfg) {
  if (train.records.empty() || test.records.empty()) {
    throw Error("ablation needs non-empty train and test sets");
  }
  AblationResult result;

  const pipeline::SangriaModel with_model =
      pipeline::train_sangria(train, sae_cfg, gbt_cfg, /*augment=*/true);
  const pipeline::SangriaModel without_model =
      pipeline::train_sangria(train, sae_cfg, gbt_cfg, /*augment=*/false);

  result.with_sae = error_stats(model_errors(with_model, test));
  result.without_sae = error_stats(model_errors(without_model, test));
  result.relative_mean_delta =
      (result.without_sae.mean - result.with_sae.mean) / result.without_sae.mean;

  // Provenance: the without-arm trains on the original records, the
  // with-arm on the original records plus their synthetic reconstructions.
  result.without_train_hash = data::hash_records(train.records);
  result.without_train_size = train.records.size();
  const data::FingerprintDatabase augmented =
      sae::augment(*with_model.sae_model, train);
  result.with_train_hash = data::hash_records(augmented.records);
  result.with_train_size = augmented.records.size();
  return result;
}

LatencyReport latency_benchmark(const pipeline::SangriaModel& model,
                                const std::vector<pipeline::Scan>& queries,
                                std::size_t repetitions) {
  if (queries.empty()) throw Error("latency benchmark needs queries");
  if (repetitions < 1) throw Error("repetitions must be >= 1");

  for (std::size_t w = 0; w < 10; ++w) {
    (void)pipeline::predict_location(model, queries[w % queries.size()]);
  }

  LatencyReport report;
  report.per_query_ms.reserve(repetitions * queries.size());
  using clock = std::chrono::steady_clock;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    for (const pipeline::Scan& q : queries) {
      const auto t0 = clock::now();
      (void)pipeline::predict_location(model, q);
      const auto t1 = clock::now();
      const double ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
      report.per_query_ms.push_back(std::round(ms * 10.0) / 10.0);
    }
  }
  double sum = 0.0;
  for (double t : report.per_query_ms) sum += t;
  report.average_ms = sum / static_cast<double>(report.per_query_ms.size());
  return report;
}

void emit_report(const EvaluationReport& report, const std::string& directory,
                 ReportFormat matrix_format) {
  std::filesystem::create_directories(directory);
  const ordered_json provenance =
      provenance_json(report.sae_cfg, report.gbt_cfg, report.dataset);
  const std::filesystem::path dir(directory);

  if (report.matrix) {
    const ErrorMatrix& m = *report.matrix;
    if (matrix_format == ReportFormat::kCsv) {
      std::string csv = "train\\test";
      for (const auto& d : m.devices) csv += "," + d;
      csv += "\n";
      char buf[64];
      for (std::size_t i = 0; i < m.devices.size(); ++i) {
        csv += m.devices[i];
        for (std::size_t j = 0; j < m.devices.size(); ++j) {
          const MatrixCell& cell = m.cell(i, j);
          if (cell.present) {
            std::snprintf(buf, sizeof(buf), ",%.17g", cell.mean_error);
            csv += buf;
          } else {
            csv += ",";
          }
        }
        csv += "\n";
      }
      write_text_file((dir / "matrix.csv").string(), csv);
    } else {
      ordered_json j;
      j["provenance"] = provenance;
      j["devices"] = m.devices;
      ordered_json rows = ordered_json::array();
      for (std::size_t i = 0; i < m.devices.size(); ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t j2 = 0; j2 < m.devices.size(); ++j2) {
          const MatrixCell& cell = m.cell(i, j2);
          if (cell.present) {
            row.push_back({{"mean_error", cell.mean_error}, {"count", cell.count}});
          } else {
            row.push_back({{"absent", cell.absent_reason}});
          }
        }
        rows.push_back(row);
      }
      j["cells"] = rows;
      write_text_file((dir / "matrix.json").string(), j.dump(2) + "\n");
    }
  }

  if (report.stats) {
    ordered_json j;
    j["provenance"] = provenance;
    j["stats"] = stats_json(*report.stats);
    write_text_file((dir / "stats.json").string(), j.dump(2) + "\n");
  }

  if (report.ablation) {
    const AblationResult& a = *report.ablation;
    ordered_json j;
    j["provenance"] = provenance;
    j["with_sae"] = stats_json(a.with_sae);
    j["without_sae"] = stats_json(a.without_sae);
    j["relative_mean_delta"] = a.relative_mean_delta;
    j["with_train_hash"] = a.with_train_hash;
    j["without_train_hash"] = a.without_train_hash;
    j["with_train_size"] = a.with_train_size;
    j["without_train_size"] = a.without_train_size;
    write_text_file((dir / "ablation.json").string(), j.dump(2) + "\n");
  }

  if (report.latency) {
    ordered_json j;
    j["provenance"] = provenance;
    j["per_query_ms"] = report.latency->per_query_ms;
    j["average_ms"] = report.latency->average_ms;
    write_text_file((dir / "latency.json").string(), j.dump(2) + "\n");
  }
}

ErrorMatrix read_matrix_json(const std::string& path) {
  const ordered_json j = parse_json_file(path);
  ErrorMatrix m;
  m.devices = j.at("devices").get<std::vector<std::string>>();
  m.cells.assign(m.devices.size() * m.devices.size(), MatrixCell{});
  const auto& rows = j.at("cells");
  for (std::size_t i = 0; i < m.devices.size(); ++i) {
    for (std::size_t c = 0; c < m.devices.size(); ++c) {
      const auto& cell_json = rows.at(i).at(c);
      MatrixCell& cell = m.cell(i, c);
      if (cell_json.contains("absent")) {
        cell.absent_reason = cell_json.at("absent").get<std::string>();
      } else {
        cell.present = true;
        cell.mean_error = cell_json.at("mean_error").get<double>();
        cell.count = cell_json.at("count").get<std::uint64_t>();
      }
    }
  }
  return m;
}

ErrorStats read_stats_json(const std::string& path) {
  return stats_from_json(parse_json_file(path).at("stats"));
}

AblationResult read_ablation_json(const std::string& path) {
  const ordered_json j = parse_json_file(path);
  AblationResult a;
  a.with_sae = stats_from_json(j.at("with_sae"));
  a.without_sae = stats_from_json(j.at("without_sae"));
  a.relative_mean_delta = j.at("relative_mean_delta").get<double>();
  a.with_train_hash = j.at("with_train_hash").get<std::uint64_t>();
  a.without_train_hash = j.at("without_train_hash").get<std::uint64_t>();
  a.with_train_size = j.at("with_train_size").get<std::uint64_t>();
  a.without_train_size = j.at("without_train_size").get<std::uint64_t>();
  return a;
}

LatencyReport read_latency_json(const std::string& path) {
  const ordered_json j = parse_json_file(path);
  LatencyReport r;
  r.per_query_ms = j.at("per_query_ms").get<std::vector<double>>();
  r.average_ms = j.at("average_ms").get<double>();
  return r;
}

}  // namespace eval
}  // namespace sangria
