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

#include "support.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "sangria/rng.hpp"

namespace sangria {
namespace test {

TempDir::TempDir(const std::string& tag) {
  path_ = std::filesystem::temp_directory_path() /
          ("sangria_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

data::FingerprintDatabase make_grid_database(std::size_t rps,
                                             std::size_t samples_per_rp,
                                             std::size_t n_aps,
                                             std::uint64_t seed, double noise,
                                             const std::string& device) {
  Rng rng(seed);
  std::vector<std::string> ids;
  for (std::size_t a = 0; a < n_aps; ++a) ids.push_back("AP" + std::to_string(a));

  // Stable per-RP base pattern, then per-sample jitter.
  std::vector<data::RssiVector> base(rps, data::RssiVector(n_aps, 0.0));
  for (std::size_t r = 0; r < rps; ++r) {
    for (std::size_t a = 0; a < n_aps; ++a) base[r][a] = rng.uniform(0.05, 0.95);
  }

  data::FingerprintDatabase db;
  db.registry = data::ApRegistry(ids);
  for (std::size_t r = 0; r < rps; ++r) {
    const std::string label = "rp" + std::to_string(r);
    const data::Location loc{static_cast<double>(r), 0.0, 0.0};
    db.rp_coordinates[label] = loc;
    for (std::size_t s = 0; s < samples_per_rp; ++s) {
      data::FingerprintRecord rec;
      rec.rp_label = label;
      rec.device = device;
      rec.location = loc;
      rec.rssi.resize(n_aps);
      for (std::size_t a = 0; a < n_aps; ++a) {
        rec.rssi[a] = std::clamp(base[r][a] + rng.uniform(-noise, noise), 0.0, 1.0);
      }
      db.records.push_back(std::move(rec));
    }
  }
  return db;
}

void write_uji_sim_csv(const std::string& path, const UjiSimParams& p) {
  if (p.phone_ids.size() != p.phone_gain.size() ||
      p.phone_ids.size() != p.phone_offset_db.size() ||
      p.phone_ids.size() != p.phone_ap_sigma_db.size()) {
    throw std::runtime_error("phone parameter lists must align");
  }
  constexpr std::size_t kWapColumns = 520;
  const std::size_t audible = std::min(p.audible_aps, kWapColumns);

  Rng rng(p.seed);
  struct Ap {
    double x, y, z, tx_power, path_loss_exp, noise, miss_rate;
  };
  const double floor_height = 4.0;
  const double width = static_cast<double>(p.spaces_per_floor);  // 1 m grid
  std::vector<Ap> aps(audible);
  for (Ap& ap : aps) {
    ap.x = rng.uniform(0.0, width);
    ap.y = rng.uniform(0.0, 6.0);
    ap.z = rng.uniform(0.0, p.floors * floor_height);
    ap.tx_power = rng.uniform(p.tx_power_min, p.tx_power_max);
    ap.path_loss_exp = rng.uniform(p.path_loss_exp_min, p.path_loss_exp_max);
    ap.noise = rng.uniform(p.ap_noise_min_db, p.ap_noise_max_db);
    ap.miss_rate = rng.uniform(p.ap_miss_min, p.ap_miss_max);
  }

  // Static multipath bias per (AP, reference point), shared by all devices
  // and samples at that spot.
  const std::size_t n_rps =
      p.floors * p.spaces_per_floor * p.relative_positions;
  std::vector<double> shadow(audible * n_rps);
  for (double& s : shadow) s = rng.gaussian(0.0, p.shadow_sigma_db);

  // Fixed per-(phone, AP) response bias.
  std::vector<double> ap_bias(p.phone_ids.size() * audible);
  for (std::size_t dev = 0; dev < p.phone_ids.size(); ++dev) {
    for (std::size_t w = 0; w < audible; ++w) {
      ap_bias[dev * audible + w] = rng.gaussian(0.0, p.phone_ap_sigma_db[dev]);
    }
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t w = 1; w <= kWapColumns; ++w) {
    char name[8];
    std::snprintf(name, sizeof(name), "WAP%03zu", w);
    out << name << ',';
  }
  out << "LONGITUDE,LATITUDE,FLOOR,BUILDINGID,SPACEID,RELATIVEPOSITION,"
         "USERID,PHONEID,TIMESTAMP\n";

  long timestamp = 1371713800;
  std::size_t rp_index = 0;
  for (std::size_t floor = 0; floor < p.floors; ++floor) {
    for (std::size_t space = 1; space <= p.spaces_per_floor; ++space) {
      for (std::size_t rel = 1; rel <= p.relative_positions; ++rel, ++rp_index) {
        const double rx = static_cast<double>(space - 1);
        const double ry = rel == 1 ? 1.5 : 4.5;
        const double rz = floor * floor_height;
        for (std::size_t dev = 0; dev < p.phone_ids.size(); ++dev) {
          for (std::size_t s = 0; s < p.samples_per_rp; ++s) {
            for (std::size_t w = 0; w < kWapColumns; ++w) {
              double cell = 100.0;  // not detected
              if (w < audible && rng.uniform() >= aps[w].miss_rate) {
                const Ap& ap = aps[w];
                const double dx = rx - ap.x, dy = ry - ap.y, dz = rz - ap.z;
                const double dist =
                    std::max(1.0, std::sqrt(dx * dx + dy * dy + dz * dz));
                double dbm = ap.tx_power -
                             10.0 * ap.path_loss_exp * std::log10(dist) +
                             shadow[w * n_rps + rp_index];
                dbm = p.phone_gain[dev] * dbm + p.phone_offset_db[dev] +
                      ap_bias[dev * audible + w] +
                      rng.gaussian(0.0, p.noise_db + ap.noise);
                if (dbm >= p.dropout_dbm) {
                  cell = std::clamp(dbm, -100.0, 0.0);
                }
              }
              if (cell == 100.0) {
                out << "100,";
              } else {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.4f,", cell);
                out << buf;
              }
            }
            out << (-7690.0 + rx) << ',' << (4864800.0 + ry) << ',' << floor
                << ",1," << space << ',' << rel << ",101,"
                << p.phone_ids[dev] << ',' << timestamp++ << '\n';
          }
        }
      }
    }
  }
}

}  // namespace test
}  // namespace sangria
