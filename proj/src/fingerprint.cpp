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

#include "sangria/fingerprint.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "sangria/error.hpp"
#include "sangria/io.hpp"
#include "sangria/rng.hpp"

namespace sangria {
namespace data {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_cell(const std::string& cell, std::size_t row,
                  const std::string& column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw IngestError("non-numeric cell '" + cell + "' at row " +
                      std::to_string(row) + ", column " + column);
  }
}

}  // namespace

ApRegistry::ApRegistry(std::vector<std::string> ids) : ids_(std::move(ids)) {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw IngestError("duplicate AP identifier '" + ids_[i] + "'");
    }
  }
}

std::ptrdiff_t ApRegistry::index_of(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::set<std::string> FingerprintDatabase::devices() const {
  std::set<std::string> out;
  for (const auto& r : records) out.insert(r.device);
  return out;
}

std::set<std::string> FingerprintDatabase::rp_labels() const {
  std::set<std::string> out;
  for (const auto& r : records) out.insert(r.rp_label);
  return out;
}

double normalize_rssi(double dbm) {
  std::uint64_t ignored = 0;
  return normalize_rssi(dbm, ignored);
}

double normalize_rssi(double dbm, std::uint64_t& clamp_count) {
  if (dbm < -100.0) {
    ++clamp_count;
    dbm = -100.0;
  } else if (dbm > 0.0) {
    ++clamp_count;
    dbm = 0.0;
  }
  return (dbm + 100.0) / 100.0;
}

double denormalize_rssi(double unit) { return unit * 100.0 - 100.0; }

FingerprintDatabase load_uji_csv(const std::string& path,
                                 const UjiLoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty file '" + path + "'");
  const std::vector<std::string> header = split_line(strip_cr(line));

  std::vector<std::string> ap_ids;
  std::vector<std::size_t> ap_cols;
  std::map<std::string, std::size_t> meta_cols;
  static const char* kMeta[] = {"LONGITUDE", "LATITUDE",         "FLOOR",
                                "BUILDINGID", "SPACEID",          "RELATIVEPOSITION",
                                "USERID",     "PHONEID",          "TIMESTAMP"};
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].rfind("WAP", 0) == 0) {
      ap_ids.push_back(header[c]);
      ap_cols.push_back(c);
    } else {
      meta_cols[header[c]] = c;
    }
  }
  if (ap_ids.empty()) throw IngestError("no WAP columns in '" + path + "'");
  for (const char* name : kMeta) {
    if (!meta_cols.count(name)) {
      throw IngestError(std::string("missing column ") + name + " in '" +
                        path + "'");
    }
  }

  struct RawRow {
    std::vector<double> dbm;
    double lon, lat;
    int floor;
    std::string rp_label;
    std::string device;
  };
  std::vector<RawRow> rows;
  double min_lon = std::numeric_limits<double>::infinity();
  double min_lat = std::numeric_limits<double>::infinity();

  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) {
      throw IngestError("row " + std::to_string(row_number) + " has " +
                        std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(header.size()));
    }
    RawRow row;
    row.dbm.resize(ap_cols.size());
    for (std::size_t i = 0; i < ap_cols.size(); ++i) {
      double v = parse_cell(fields[ap_cols[i]], row_number, ap_ids[i]);
      if (v == 100.0) v = -100.0;  // "not detected" sentinel
      row.dbm[i] = v;
    }
    auto meta = [&](const char* name) -> const std::string& {
      return fields[meta_cols.at(name)];
    };
    row.lon = parse_cell(meta("LONGITUDE"), row_number, "LONGITUDE");
    row.lat = parse_cell(meta("LATITUDE"), row_number, "LATITUDE");
    row.floor = static_cast<int>(parse_cell(meta("FLOOR"), row_number, "FLOOR"));
    const int building = static_cast<int>(
        parse_cell(meta("BUILDINGID"), row_number, "BUILDINGID"));
    const int space =
        static_cast<int>(parse_cell(meta("SPACEID"), row_number, "SPACEID"));
    const int relpos = static_cast<int>(parse_cell(
        meta("RELATIVEPOSITION"), row_number, "RELATIVEPOSITION"));
    row.rp_label = "b" + std::to_string(building) + "_f" +
                   std::to_string(row.floor) + "_s" + std::to_string(space) +
                   "_r" + std::to_string(relpos);
    row.device = meta("PHONEID");
    min_lon = std::min(min_lon, row.lon);
    min_lat = std::min(min_lat, row.lat);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IngestError("no data rows in '" + path + "'");

  FingerprintDatabase db;
  db.registry = ApRegistry(ap_ids);
  db.records.reserve(rows.size());
  struct Accum {
    double x = 0, y = 0, z = 0;
    std::size_t n = 0;
  };
  std::map<std::string, Accum> accum;
  for (const RawRow& row : rows) {
    FingerprintRecord rec;
    rec.rssi.resize(row.dbm.size());
    for (std::size_t i = 0; i < row.dbm.size(); ++i) {
      rec.rssi[i] = normalize_rssi(row.dbm[i], db.clamp_warnings);
    }
    rec.location = {row.lon - min_lon, row.lat - min_lat,
                    row.floor * options.floor_height};
    rec.rp_label = row.rp_label;
    rec.device = row.device;
    Accum& a = accum[rec.rp_label];
    a.x += rec.location.x;
    a.y += rec.location.y;
    a.z += rec.location.z;
    ++a.n;
    db.records.push_back(std::move(rec));
  }
  // One coordinate per reference point: the centroid of its rows. Individual
  // records keep their own measured coordinates as evaluation ground truth.
  for (const auto& [label, a] : accum) {
    db.rp_coordinates[label] = {a.x / a.n, a.y / a.n, a.z / a.n};
  }
  return db;
}

FingerprintDatabase load_canonical_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty file '" + path + "'");
  const std::vector<std::string> header = split_line(strip_cr(line));
  static const char* kFixed[] = {"device", "rp_label", "x", "y", "z"};
  if (header.size() < 6) {
    throw IngestError("canonical header needs device,rp_label,x,y,z and at "
                      "least one AP column");
  }
  for (std::size_t i = 0; i < 5; ++i) {
    if (header[i] != kFixed[i]) {
      throw IngestError(std::string("expected column '") + kFixed[i] +
                        "' at position " + std::to_string(i + 1) + ", got '" +
                        header[i] + "'");
    }
  }
  const std::vector<std::string> ap_ids(header.begin() + 5, header.end());

  FingerprintDatabase db;
  db.registry = ApRegistry(ap_ids);  // throws on duplicates

  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) {
      throw IngestError("ragged row " + std::to_string(row_number) + ": " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    }
    FingerprintRecord rec;
    rec.device = fields[0];
    rec.rp_label = fields[1];
    rec.location = {parse_cell(fields[2], row_number, "x"),
                    parse_cell(fields[3], row_number, "y"),
                    parse_cell(fields[4], row_number, "z")};
    rec.rssi.resize(ap_ids.size());
    for (std::size_t i = 0; i < ap_ids.size(); ++i) {
      rec.rssi[i] = normalize_rssi(
          parse_cell(fields[5 + i], row_number, ap_ids[i]), db.clamp_warnings);
    }
    auto [it, inserted] = db.rp_coordinates.emplace(rec.rp_label, rec.location);
    if (!inserted && !(it->second == rec.location)) {
      throw IngestError("rp_label '" + rec.rp_label +
                        "' has conflicting coordinates at row " +
                        std::to_string(row_number));
    }
    db.records.push_back(std::move(rec));
  }
  if (db.records.empty()) throw IngestError("no data rows in '" + path + "'");
  return db;
}

void write_canonical_csv(const FingerprintDatabase& db,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write '" + path + "'");
  out << "device,rp_label,x,y,z";
  for (const auto& id : db.registry.ids()) out << ',' << id;
  out << '\n';
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    out << buf;
  };
  for (const auto& rec : db.records) {
    out << rec.device << ',' << rec.rp_label << ',';
    put(rec.location.x);
    out << ',';
    put(rec.location.y);
    out << ',';
    put(rec.location.z);
    for (double u : rec.rssi) {
      out << ',';
      put(denormalize_rssi(u));
    }
    out << '\n';
  }
  if (!out) throw IngestError("write failed for '" + path + "'");
}

std::pair<FingerprintDatabase, FingerprintDatabase> split_per_rp(
    const FingerprintDatabase& db, std::size_t train_per_rp,
    std::size_t test_per_rp, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < db.records.size(); ++i) {
    by_label[db.records[i].rp_label].push_back(i);
  }

  std::string deficient;
  for (const auto& [label, idx] : by_label) {
    if (idx.size() < train_per_rp + test_per_rp) {
      deficient += deficient.empty() ? label : ", " + label;
    }
  }
  if (!deficient.empty()) {
    throw IngestError("too few samples for a " + std::to_string(train_per_rp) +
                      "/" + std::to_string(test_per_rp) +
                      " split at: " + deficient);
  }

  FingerprintDatabase train, test;
  train.registry = db.registry;
  test.registry = db.registry;
  train.rp_coordinates = db.rp_coordinates;
  test.rp_coordinates = db.rp_coordinates;

  std::vector<std::size_t> train_idx, test_idx;
  for (const auto& [label, idx] : by_label) {
    // Per-label stream derived from the label content, so a label's draw
    // does not depend on which other labels are present.
    Fnv1a h;
    h.add_str(label);
    Rng rng(mix_seed(seed, h.value()));
    std::vector<std::size_t> order = idx;
    rng.shuffle(order);
    for (std::size_t k = 0; k < train_per_rp; ++k) train_idx.push_back(order[k]);
    for (std::size_t k = 0; k < test_per_rp; ++k) {
      test_idx.push_back(order[train_per_rp + k]);
    }
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  for (std::size_t i : train_idx) train.records.push_back(db.records[i]);
  for (std::size_t i : test_idx) test.records.push_back(db.records[i]);
  return {std::move(train), std::move(test)};
}

std::pair<FingerprintDatabase, FingerprintDatabase> split_by_device(
    const FingerprintDatabase& db, const std::set<std::string>& train_devices,
    const std::set<std::string>& test_devices) {
  if (train_devices.empty() || test_devices.empty()) {
    throw IngestError("device sets must be non-empty");
  }
  const std::set<std::string> known = db.devices();
  for (const auto& set : {train_devices, test_devices}) {
    for (const auto& d : set) {
      if (!known.count(d)) throw IngestError("unknown device '" + d + "'");
    }
  }
  FingerprintDatabase train, test;
  train.registry = db.registry;
  test.registry = db.registry;
  train.rp_coordinates = db.rp_coordinates;
  test.rp_coordinates = db.rp_coordinates;
  for (const auto& rec : db.records) {
    if (train_devices.count(rec.device)) train.records.push_back(rec);
    if (test_devices.count(rec.device)) test.records.push_back(rec);
  }
  return {std::move(train), std::move(test)};
}

std::uint64_t hash_records(const std::vector<FingerprintRecord>& records,
                           std::size_t count) {
  Fnv1a h;
  const std::size_t n = std::min(count, records.size());
  for (std::size_t i = 0; i < n; ++i) {
    const FingerprintRecord& r = records[i];
    h.add_u64(r.rssi.size());
    for (double v : r.rssi) h.add_f64(v);
    h.add_f64(r.location.x);
    h.add_f64(r.location.y);
    h.add_f64(r.location.z);
    h.add_str(r.rp_label);
    h.add_str(r.device);
    h.add_u64(r.synthetic ? 1 : 0);
  }
  return h.value();
}

std::uint64_t hash_database(const FingerprintDatabase& db) {
  Fnv1a h;
  for (const auto& id : db.registry.ids()) h.add_str(id);
  for (const auto& [label, loc] : db.rp_coordinates) {
    h.add_str(label);
    h.add_f64(loc.x);
    h.add_f64(loc.y);
    h.add_f64(loc.z);
  }
  h.add_u64(hash_records(db.records));
  return h.value();
}

}  // namespace data
}  // namespace sangria
