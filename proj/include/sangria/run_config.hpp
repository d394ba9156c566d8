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

#ifndef SANGRIA_RUN_CONFIG_HPP_
#define SANGRIA_RUN_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sangria/gbt.hpp"
#include "sangria/sae.hpp"

namespace sangria {
namespace cli {

// Everything a run needs, file-captured for reproducibility. The config
// file is a flat `key = value` document (# comments allowed); command-line
// flags override file values. Unset fields keep the documented defaults.
struct RunConfig {
  std::string data;
  std::string format = "canonical";  // uji | canonical
  std::string out;
  std::string model;
  std::string scan;
  double floor_height = 4.0;
  bool augment = true;
  sae::SaeConfig sae_cfg;
  gbt::GbtConfig gbt_cfg;
  std::size_t train_per_rp = 5;
  std::size_t test_per_rp = 1;
  std::vector<std::string> devices;
  std::vector<std::string> train_devices;
  std::vector<std::string> test_devices;
  std::size_t knn_k = 3;
  std::size_t bench_repetitions = 5;
  std::string report_format = "csv";  // matrix file format: csv | json

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// One `key = value` assignment; unknown keys or unparsable values throw.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

// Parse a flat key-value file into cfg (later lines win).
void load_run_config_file(RunConfig& cfg, const std::string& path);

// The effective configuration as a flat key-value document; parsing it
// back reproduces the config.
std::string dump_run_config(const RunConfig& cfg);

std::vector<std::string> split_device_list(const std::string& csv);

}  // namespace cli
}  // namespace sangria

#endif  // SANGRIA_RUN_CONFIG_HPP_
