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

#include "sangria/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sangria/error.hpp"

namespace sangria {
namespace cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("config: " + key + " expects an unsigned integer, got '" +
                value + "'");
  }
}

double parse_f64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("config: " + key + " expects a number, got '" + value + "'");
  }
}

// Shortest round-trip representation keeps the config echo exact.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error("config: " + key + " expects true/false, got '" + value + "'");
}

}  // namespace

std::vector<std::string> split_device_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "data") cfg.data = value;
  else if (key == "format") cfg.format = value;
  else if (key == "out") cfg.out = value;
  else if (key == "model") cfg.model = value;
  else if (key == "scan") cfg.scan = value;
  else if (key == "floor_height") cfg.floor_height = parse_f64(key, value);
  else if (key == "augment") cfg.augment = parse_bool(key, value);
  else if (key == "seed") {
    cfg.sae_cfg.seed = parse_u64(key, value);
    cfg.gbt_cfg.seed = parse_u64(key, value);
  } else if (key == "sae.hidden_dim") cfg.sae_cfg.hidden_dim = parse_u64(key, value);
  else if (key == "sae.code_dim") cfg.sae_cfg.code_dim = parse_u64(key, value);
  else if (key == "sae.learning_rate") cfg.sae_cfg.learning_rate = parse_f64(key, value);
  else if (key == "sae.epochs") cfg.sae_cfg.epochs = parse_u64(key, value);
  else if (key == "sae.batch_size") cfg.sae_cfg.batch_size = parse_u64(key, value);
  else if (key == "sae.seed") cfg.sae_cfg.seed = parse_u64(key, value);
  else if (key == "gbt.iterations") cfg.gbt_cfg.iterations = parse_u64(key, value);
  else if (key == "gbt.depth") cfg.gbt_cfg.depth = parse_u64(key, value);
  else if (key == "gbt.learning_rate") cfg.gbt_cfg.learning_rate = parse_f64(key, value);
  else if (key == "gbt.l2_leaf_reg") cfg.gbt_cfg.l2_leaf_reg = parse_f64(key, value);
  else if (key == "gbt.n_bins") cfg.gbt_cfg.n_bins = parse_u64(key, value);
  else if (key == "gbt.feature_fraction") cfg.gbt_cfg.feature_fraction = parse_f64(key, value);
  else if (key == "gbt.seed") cfg.gbt_cfg.seed = parse_u64(key, value);
  else if (key == "gbt.threads") cfg.gbt_cfg.threads = parse_u64(key, value);
  else if (key == "train_per_rp") cfg.train_per_rp = parse_u64(key, value);
  else if (key == "test_per_rp") cfg.test_per_rp = parse_u64(key, value);
  else if (key == "devices") cfg.devices = split_device_list(value);
  else if (key == "train_devices") cfg.train_devices = split_device_list(value);
  else if (key == "test_devices") cfg.test_devices = split_device_list(value);
  else if (key == "knn_k") cfg.knn_k = parse_u64(key, value);
  else if (key == "bench_repetitions") cfg.bench_repetitions = parse_u64(key, value);
  else if (key == "report_format") cfg.report_format = value;
  else throw Error("config: unknown key '" + key + "'");
}

void load_run_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error("config: line " + std::to_string(line_number) +
                  " is not a key = value assignment");
    }
    apply_config_entry(cfg, trim(stripped.substr(0, eq)),
                       trim(stripped.substr(eq + 1)));
  }
}

std::string dump_run_config(const RunConfig& cfg) {
  std::ostringstream out;
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += s.empty() ? x : "," + x;
    return s;
  };
  out << "data = " << cfg.data << '\n'
      << "format = " << cfg.format << '\n'
      << "out = " << cfg.out << '\n'
      << "model = " << cfg.model << '\n'
      << "scan = " << cfg.scan << '\n'
      << "floor_height = " << shortest(cfg.floor_height) << '\n'
      << "augment = " << (cfg.augment ? "true" : "false") << '\n'
      << "sae.hidden_dim = " << cfg.sae_cfg.hidden_dim << '\n'
      << "sae.code_dim = " << cfg.sae_cfg.code_dim << '\n'
      << "sae.learning_rate = " << shortest(cfg.sae_cfg.learning_rate) << '\n'
      << "sae.epochs = " << cfg.sae_cfg.epochs << '\n'
      << "sae.batch_size = " << cfg.sae_cfg.batch_size << '\n'
      << "sae.seed = " << cfg.sae_cfg.seed << '\n'
      << "gbt.iterations = " << cfg.gbt_cfg.iterations << '\n'
      << "gbt.depth = " << cfg.gbt_cfg.depth << '\n'
      << "gbt.learning_rate = " << shortest(cfg.gbt_cfg.learning_rate) << '\n'
      << "gbt.l2_leaf_reg = " << shortest(cfg.gbt_cfg.l2_leaf_reg) << '\n'
      << "gbt.n_bins = " << cfg.gbt_cfg.n_bins << '\n'
      << "gbt.feature_fraction = " << shortest(cfg.gbt_cfg.feature_fraction) << '\n'
      << "gbt.seed = " << cfg.gbt_cfg.seed << '\n'
      << "gbt.threads = " << cfg.gbt_cfg.threads << '\n'
      << "train_per_rp = " << cfg.train_per_rp << '\n'
      << "test_per_rp = " << cfg.test_per_rp << '\n'
      << "devices = " << join(cfg.devices) << '\n'
      << "train_devices = " << join(cfg.train_devices) << '\n'
      << "test_devices = " << join(cfg.test_devices) << '\n'
      << "knn_k = " << cfg.knn_k << '\n'
      << "bench_repetitions = " << cfg.bench_repetitions << '\n'
      << "report_format = " << cfg.report_format << '\n';
  return out.str();
}

}  // namespace cli
}  // namespace sangria
