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

#ifndef SANGRIA_FINGERPRINT_HPP_
#define SANGRIA_FINGERPRINT_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace sangria {
namespace data {

// RSS values live on the unit interval everywhere past ingestion:
// 0.0 is no signal (-100 dBm), 1.0 the strongest signal (0 dBm).
using RssiVector = std::vector<double>;

struct Location {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Location&, const Location&) = default;
};

// Ordered access-point identifiers; the position of an identifier is its
// feature index. Frozen once a database is built.
class ApRegistry {
 public:
  ApRegistry() = default;
  explicit ApRegistry(std::vector<std::string> ids);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t index) const { return ids_[index]; }

  // -1 when the identifier is unknown.
  std::ptrdiff_t index_of(const std::string& id) const;

  friend bool operator==(const ApRegistry& a, const ApRegistry& b) {
    return a.ids_ == b.ids_;
  }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct FingerprintRecord {
  RssiVector rssi;
  Location location;
  std::string rp_label;
  std::string device;
  bool synthetic = false;

  friend bool operator==(const FingerprintRecord&,
                         const FingerprintRecord&) = default;
};

struct FingerprintDatabase {
  ApRegistry registry;
  std::vector<FingerprintRecord> records;
  std::map<std::string, Location> rp_coordinates;
  // Data-quality counter: how many dBm cells fell outside [-100, 0] and
  // were clamped during ingestion.
  std::uint64_t clamp_warnings = 0;

  std::size_t size() const { return records.size(); }
  std::set<std::string> devices() const;
  std::set<std::string> rp_labels() const;

  friend bool operator==(const FingerprintDatabase&,
                         const FingerprintDatabase&) = default;
};

// (dbm + 100) / 100, clamped to [0, 1].
double normalize_rssi(double dbm);
// Same, counting clamped out-of-range inputs.
double normalize_rssi(double dbm, std::uint64_t& clamp_count);
double denormalize_rssi(double unit);

struct UjiLoadOptions {
  double floor_height = 4.0;  // meters per FLOOR index
};

// UJIIndoorLoc column layout: WAP columns, then LONGITUDE, LATITUDE, FLOOR,
// BUILDINGID, SPACEID, RELATIVEPOSITION, USERID, PHONEID, TIMESTAMP.
// The sentinel RSS value 100 ("not detected") becomes -100 dBm before
// normalization. rp_label is the (building, floor, space, relative-position)
// tuple; coordinates are shifted by the dataset minimum.
FingerprintDatabase load_uji_csv(const std::string& path,
                                 const UjiLoadOptions& options = {});

// Header `device,rp_label,x,y,z,<ap ids...>`, RSS cells in dBm.
FingerprintDatabase load_canonical_csv(const std::string& path);

// Inverse of load_canonical_csv up to dBm printing at 10 significant digits.
void write_canonical_csv(const FingerprintDatabase& db,
                         const std::string& path);

// Seeded per-reference-point split: exactly train_per_rp / test_per_rp
// records per label, disjoint. Every label must have enough records.
std::pair<FingerprintDatabase, FingerprintDatabase> split_per_rp(
    const FingerprintDatabase& db, std::size_t train_per_rp,
    std::size_t test_per_rp, std::uint64_t seed);

// Filter by device identifier. Overlapping sets are allowed (used for the
// diagonal cells of the cross-device matrix).
std::pair<FingerprintDatabase, FingerprintDatabase> split_by_device(
    const FingerprintDatabase& db, const std::set<std::string>& train_devices,
    const std::set<std::string>& test_devices);

// Content hash over the first `count` records (all when count is npos);
// prefix hashes make the augmentation provenance checkable.
std::uint64_t hash_records(const std::vector<FingerprintRecord>& records,
                           std::size_t count = static_cast<std::size_t>(-1));
std::uint64_t hash_database(const FingerprintDatabase& db);

}  // namespace data
}  // namespace sangria

#endif  // SANGRIA_FINGERPRINT_HPP_
