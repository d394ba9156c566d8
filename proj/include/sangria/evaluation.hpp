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

#ifndef SANGRIA_EVALUATION_HPP_
#define SANGRIA_EVALUATION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sangria/fingerprint.hpp"
#include "sangria/gbt.hpp"
#include "sangria/pipeline.hpp"
#include "sangria/sae.hpp"

namespace sangria {
namespace eval {

struct ErrorStats {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  std::uint64_t n = 0;

  friend bool operator==(const ErrorStats&, const ErrorStats&) = default;
};

ErrorStats error_stats(const std::vector<double>& errors);

struct MatrixCell {
  bool present = false;
  double mean_error = 0.0;
  std::uint64_t count = 0;
  std::string absent_reason;

  friend bool operator==(const MatrixCell&, const MatrixCell&) = default;
};

// Row = training device, column = testing device.
struct ErrorMatrix {
  std::vector<std::string> devices;
  std::vector<MatrixCell> cells;  // row-major

  MatrixCell& cell(std::size_t i, std::size_t j) {
    return cells[i * devices.size() + j];
  }
  const MatrixCell& cell(std::size_t i, std::size_t j) const {
    return cells[i * devices.size() + j];
  }

  friend bool operator==(const ErrorMatrix&, const ErrorMatrix&) = default;
};

struct CrossDeviceOptions {
  // Diagonal cells train and test on the same device, so they use a seeded
  // per-reference-point split instead of the full record sets.
  std::size_t diagonal_train_per_rp = 5;
  std::size_t diagonal_test_per_rp = 1;
  std::uint64_t split_seed = 1;
  bool augment = true;
};

// One full training run per (train device, test device) pair. A diagonal
// cell that cannot satisfy the per-RP split is marked absent with the
// reason. Each cell depends only on its own devices' records, so adding
// records of unrelated devices to db never changes existing cells.
ErrorMatrix cross_device_matrix(const data::FingerprintDatabase& db,
                                const std::vector<std::string>& devices,
                                const sae::SaeConfig& sae_cfg,
                                const gbt::GbtConfig& gbt_cfg,
                                const CrossDeviceOptions& options = {},
                                std::vector<double>* all_errors = nullptr);

struct AblationResult {
  ErrorStats with_sae;
  ErrorStats without_sae;
  double relative_mean_delta = 0.0;  // (without - with) / without
  std::uint64_t with_train_hash = 0;
  std::uint64_t without_train_hash = 0;
  std::uint64_t with_train_size = 0;
  std::uint64_t without_train_size = 0;

  friend bool operator==(const AblationResult&, const AblationResult&) = default;
};

// Two models with identical seeds, differing only in whether the training
// set is augmented; paired error stats on the same test set.
AblationResult ablation_sae(const data::FingerprintDatabase& train,
                            const data::FingerprintDatabase& test,
                            const sae::SaeConfig& sae_cfg,
                            const gbt::GbtConfig& gbt_cfg);

struct LatencyReport {
  std::vector<double> per_query_ms;  // 0.1 ms resolution
  double average_ms = 0.0;

  friend bool operator==(const LatencyReport&, const LatencyReport&) = default;
};

// Wall-clock per single prediction, monotonic clock, 10 warm-up queries
// excluded from the timings.
LatencyReport latency_benchmark(const pipeline::SangriaModel& model,
                                const std::vector<pipeline::Scan>& queries,
                                std::size_t repetitions);

struct EvaluationReport {
  std::optional<ErrorMatrix> matrix;
  std::optional<ErrorStats> stats;
  std::optional<AblationResult> ablation;
  std::optional<LatencyReport> latency;
  // provenance carried into every emitted file
  sae::SaeConfig sae_cfg;
  gbt::GbtConfig gbt_cfg;
  std::string dataset;
};

enum class ReportFormat { kCsv, kJson };

// Writes matrix.csv or matrix.json plus stats.json / ablation.json /
// latency.json for whichever sections are present, into `directory`.
// Serialization is deterministic: identical results give identical bytes.
void emit_report(const EvaluationReport& report, const std::string& directory,
                 ReportFormat matrix_format);

// Parsers for the emitted JSON, used to close the round trip.
ErrorMatrix read_matrix_json(const std::string& path);
ErrorStats read_stats_json(const std::string& path);
AblationResult read_ablation_json(const std::string& path);
LatencyReport read_latency_json(const std::string& path);

}  // namespace eval
}  // namespace sangria

#endif  // SANGRIA_EVALUATION_HPP_
