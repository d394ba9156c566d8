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

#ifndef SANGRIA_TESTS_SUPPORT_HPP_
#define SANGRIA_TESTS_SUPPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sangria/fingerprint.hpp"

namespace sangria {
namespace test {

// Scoped temp directory under the system temp path.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

// Small in-memory fingerprint database: `rps` reference points on a 1 m
// line, `samples_per_rp` noisy samples each, one device. Distinct RPs get
// well-separated RSS patterns.
data::FingerprintDatabase make_grid_database(std::size_t rps,
                                             std::size_t samples_per_rp,
                                             std::size_t n_aps,
                                             std::uint64_t seed,
                                             double noise = 0.02,
                                             const std::string& device = "dev0");

// Synthetic UJI-format campaign over one building. Access points are
// placed in a two-floor volume, a log-distance path-loss model produces
// dBm readings, and each phone distorts them with its own gain/offset plus
// noise. Out-of-range APs get the dataset's 100 "not detected" sentinel.
struct UjiSimParams {
  std::size_t spaces_per_floor = 30;
  std::size_t floors = 2;
  std::size_t relative_positions = 2;
  std::size_t samples_per_rp = 6;
  std::vector<int> phone_ids = {13, 14};
  // per-phone distortion: dbm' = gain * dbm + offset + ap_offset + noise,
  // where ap_offset is a fixed per-(phone, AP) bias with the given sigma
  // (chipset frequency response differs channel by channel)
  std::vector<double> phone_gain = {1.0, 1.08};
  std::vector<double> phone_offset_db = {0.0, 6.0};
  std::vector<double> phone_ap_sigma_db = {0.0, 5.0};
  double noise_db = 2.0;
  // reliability varies per AP: extra per-sample noise and a chance of the
  // AP missing from a scan entirely (beacon timing, interference)
  double ap_noise_min_db = 1.0;
  double ap_noise_max_db = 8.0;
  double ap_miss_min = 0.05;
  double ap_miss_max = 0.5;
  std::size_t audible_aps = 120;  // of the 520 columns, how many ever fire
  double dropout_dbm = -88.0;     // weaker readings are "not detected"
  // propagation: per-AP transmit power and path-loss exponent, plus a
  // static per-(AP, reference-point) shadow-fading bias
  double tx_power_min = -50.0;
  double tx_power_max = -35.0;
  double path_loss_exp_min = 2.8;
  double path_loss_exp_max = 4.0;
  double shadow_sigma_db = 4.0;
  std::uint64_t seed = 2024;
};

void write_uji_sim_csv(const std::string& path, const UjiSimParams& params);

}  // namespace test
}  // namespace sangria

#endif  // SANGRIA_TESTS_SUPPORT_HPP_
