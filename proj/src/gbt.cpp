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

#include "sangria/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "sangria/error.hpp"
#include "sangria/io.hpp"
#include "sangria/rng.hpp"

namespace sangria {
namespace gbt {

namespace {

constexpr char kGbtMagic[5] = "SGGB";
constexpr std::uint32_t kGbtVersion = 1;

// Content ordering for training records. Fitting in this canonical order
// makes every histogram sum independent of the caller's record order.
bool record_less(const data::FingerprintRecord& a,
                 const data::FingerprintRecord& b) {
  if (a.rssi != b.rssi) {
    return std::lexicographical_compare(a.rssi.begin(), a.rssi.end(),
                                        b.rssi.begin(), b.rssi.end());
  }
  if (a.rp_label != b.rp_label) return a.rp_label < b.rp_label;
  if (a.device != b.device) return a.device < b.device;
  return a.synthetic < b.synthetic;
}

struct LevelTotals {
  std::vector<double> sums;          // [leaf * 2C]: g row then h row
  std::vector<std::uint32_t> counts; // per leaf
};

// Scratch reused across features; cells are zeroed lazily via the version
// array so sparse levels never pay for the full histogram.
struct SplitScratch {
  std::vector<double> hist;
  std::vector<std::uint32_t> version;
  std::vector<double> prefix;
  std::vector<double> gain;
  std::uint32_t epoch = 0;

  void ensure(std::size_t cells, std::size_t width, std::size_t max_bins) {
    if (hist.size() < cells * width) hist.resize(cells * width);
    if (version.size() < cells) version.assign(cells, 0), epoch = 0;
    if (prefix.size() < width) prefix.resize(width);
    if (gain.size() < max_bins) gain.resize(max_bins);
  }
};

struct FeatureBest {
  double gain = -std::numeric_limits<double>::infinity();
  std::uint32_t threshold = 0;
  bool valid = false;
};

// Best threshold for one feature at one level. Deterministic: samples are
// scanned in index order and thresholds ascending.
FeatureBest scan_feature(const BinnedMatrix& binned, const std::vector<double>& g,
                         const std::vector<double>& h, std::size_t n_classes,
                         double l2, const std::vector<std::uint32_t>& leaf_of,
                         std::size_t n_leaves, const LevelTotals& totals,
                         std::size_t feature, SplitScratch& scratch) {
  const std::size_t nb = binned.bins_per_feature[feature];
  FeatureBest best;
  if (nb < 2) return best;

  const std::size_t width = 2 * n_classes;
  scratch.ensure(n_leaves * nb, width, nb);
  const std::uint32_t epoch = ++scratch.epoch;
  const std::uint8_t* bins = binned.values.data() + feature * binned.n_samples;

  for (std::size_t s = 0; s < binned.n_samples; ++s) {
    const std::size_t cell = leaf_of[s] * nb + bins[s];
    double* dst = scratch.hist.data() + cell * width;
    if (scratch.version[cell] != epoch) {
      scratch.version[cell] = epoch;
      std::fill(dst, dst + width, 0.0);
    }
    const double* gs = g.data() + s * n_classes;
    const double* hs = h.data() + s * n_classes;
    for (std::size_t c = 0; c < n_classes; ++c) dst[c] += gs[c];
    for (std::size_t c = 0; c < n_classes; ++c) dst[n_classes + c] += hs[c];
  }

  std::fill(scratch.gain.begin(), scratch.gain.begin() + (nb - 1), 0.0);
  for (std::size_t leaf = 0; leaf < n_leaves; ++leaf) {
    if (totals.counts[leaf] == 0) continue;
    const double* total = totals.sums.data() + leaf * width;
    double* left = scratch.prefix.data();
    std::fill(left, left + width, 0.0);
    for (std::size_t t = 0; t + 1 < nb; ++t) {
      const std::size_t cell = leaf * nb + t;
      if (scratch.version[cell] == epoch) {
        const double* src = scratch.hist.data() + cell * width;
        for (std::size_t c = 0; c < width; ++c) left[c] += src[c];
      }
      double contribution = 0.0;
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double lg = left[c];
        const double lh = left[n_classes + c];
        const double rg = total[c] - lg;
        const double rh = total[n_classes + c] - lh;
        contribution += lg * lg / (lh + l2) + rg * rg / (rh + l2);
      }
      scratch.gain[t] += contribution;
    }
  }

  for (std::size_t t = 0; t + 1 < nb; ++t) {
    if (scratch.gain[t] > best.gain) {
      best.gain = scratch.gain[t];
      best.threshold = static_cast<std::uint32_t>(t);
      best.valid = true;
    }
  }
  return best;
}

double stable_log_loss_row(const double* scores, std::size_t n_classes,
                           std::size_t true_class) {
  double m = scores[0];
  for (std::size_t c = 1; c < n_classes; ++c) m = std::max(m, scores[c]);
  double sum = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) sum += std::exp(scores[c] - m);
  return std::log(sum) - (scores[true_class] - m);
}

void save_tree(BinaryWriter& w, const ObliviousTree& tree) {
  w.u64(tree.splits.size());
  for (const TreeSplit& s : tree.splits) {
    w.u32(s.feature);
    w.u32(s.threshold);
  }
  w.u64(tree.n_classes);
  w.f64_vec(tree.leaf_values);
}

ObliviousTree load_tree(BinaryReader& r) {
  ObliviousTree tree;
  const std::uint64_t depth = r.u64();
  if (depth > 31) throw SerializationError("implausible tree depth");
  for (std::uint64_t i = 0; i < depth; ++i) {
    TreeSplit s;
    s.feature = r.u32();
    s.threshold = r.u32();
    tree.splits.push_back(s);
  }
  tree.n_classes = static_cast<std::size_t>(r.u64());
  tree.leaf_values = r.f64_vec();
  if (tree.leaf_values.size() != tree.leaf_count() * tree.n_classes) {
    throw SerializationError("leaf table size mismatch");
  }
  return tree;
}

}  // namespace

std::size_t BinningScheme::bin_index(std::size_t feature, double value) const {
  const std::vector<double>& e = edges[feature];
  return static_cast<std::size_t>(
      std::lower_bound(e.begin(), e.end(), value) - e.begin());
}

BinningScheme build_bins(const std::vector<data::RssiVector>& rows,
                         std::size_t n_bins) {
  if (rows.empty()) throw TrainingError("build_bins needs at least one sample");
  if (n_bins < 1 || n_bins > 256) {
    throw TrainingError("n_bins must be in [1, 256]");
  }
  const std::size_t n_features = rows[0].size();
  BinningScheme scheme;
  scheme.edges.resize(n_features);

  std::vector<double> column(rows.size());
  for (std::size_t f = 0; f < n_features; ++f) {
    for (std::size_t s = 0; s < rows.size(); ++s) {
      if (rows[s].size() != n_features) throw ShapeError("ragged feature rows");
      column[s] = rows[s][f];
    }
    std::sort(column.begin(), column.end());
    column.erase(std::unique(column.begin(), column.end()), column.end());
    const std::size_t m = column.size();
    std::vector<double>& edges = scheme.edges[f];
    if (m <= 1) {
      // constant feature: nothing to split on
    } else if (m <= n_bins) {
      for (std::size_t i = 0; i + 1 < m; ++i) {
        edges.push_back(0.5 * (column[i] + column[i + 1]));
      }
    } else {
      for (std::size_t k = 1; k < n_bins; ++k) {
        const std::size_t pos = k * m / n_bins;
        edges.push_back(0.5 * (column[pos - 1] + column[pos]));
      }
    }
    column.resize(rows.size());
  }
  return scheme;
}

BinnedMatrix bin_features(const BinningScheme& scheme,
                          const std::vector<data::RssiVector>& rows) {
  BinnedMatrix out;
  out.n_samples = rows.size();
  out.bins_per_feature.resize(scheme.n_features());
  for (std::size_t f = 0; f < scheme.n_features(); ++f) {
    const std::size_t nb = scheme.n_bins(f);
    if (nb > 256) throw ShapeError("bin count exceeds uint8 range");
    out.bins_per_feature[f] = static_cast<std::uint16_t>(nb);
  }
  out.values.resize(scheme.n_features() * rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (rows[s].size() != scheme.n_features()) {
      throw ShapeError("row width does not match binning scheme");
    }
    for (std::size_t f = 0; f < scheme.n_features(); ++f) {
      out.values[f * out.n_samples + s] =
          static_cast<std::uint8_t>(scheme.bin_index(f, rows[s][f]));
    }
  }
  return out;
}

std::vector<double> softmax(const std::vector<double>& scores) {
  if (scores.empty()) throw ShapeError("softmax of empty vector");
  double m = scores[0];
  for (double s : scores) m = std::max(m, s);
  std::vector<double> p(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::pair<std::vector<double>, std::vector<double>> softmax_grad_hess(
    const std::vector<double>& scores, std::size_t true_class) {
  if (true_class >= scores.size()) throw ShapeError("true_class out of range");
  std::vector<double> g = softmax(scores);
  std::vector<double> h(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    h[k] = g[k] * (1.0 - g[k]);
    if (k == true_class) g[k] -= 1.0;
  }
  return {std::move(g), std::move(h)};
}

std::size_t route_binned(const ObliviousTree& tree, const BinnedMatrix& binned,
                         std::size_t sample) {
  std::size_t leaf = 0;
  for (const TreeSplit& s : tree.splits) {
    const bool right = binned.at(sample, s.feature) > s.threshold;
    leaf = (leaf << 1) | static_cast<std::size_t>(right);
  }
  return leaf;
}

ObliviousTree fit_oblivious_tree(const BinnedMatrix& binned,
                                 const std::vector<double>& g,
                                 const std::vector<double>& h,
                                 std::size_t n_classes, std::size_t depth,
                                 double l2_leaf_reg,
                                 const std::vector<std::size_t>& feature_subset,
                                 std::uint64_t seed, std::size_t threads) {
  (void)seed;
  const std::size_t n = binned.n_samples;
  if (depth < 1 || depth > 31) throw TrainingError("depth must be in [1, 31]");
  if (feature_subset.empty()) throw TrainingError("empty feature subset");
  if (n == 0) throw TrainingError("no samples");
  if (g.size() != n * n_classes || h.size() != n * n_classes) {
    throw ShapeError("gradient matrix size mismatch");
  }
  for (std::size_t f : feature_subset) {
    if (f >= binned.n_features()) throw ShapeError("feature index out of range");
  }

  std::vector<std::size_t> features = feature_subset;
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());

  if (threads == 0) threads = std::thread::hardware_concurrency();
  threads = std::max<std::size_t>(1, std::min(threads, features.size()));

  const std::size_t width = 2 * n_classes;
  std::vector<std::uint32_t> leaf_of(n, 0);
  ObliviousTree tree;
  tree.n_classes = n_classes;

  std::vector<SplitScratch> scratch(threads);
  LevelTotals totals;

  for (std::size_t level = 0; level < depth; ++level) {
    const std::size_t n_leaves = std::size_t{1} << level;
    totals.sums.assign(n_leaves * width, 0.0);
    totals.counts.assign(n_leaves, 0);
    for (std::size_t s = 0; s < n; ++s) {
      double* dst = totals.sums.data() + leaf_of[s] * width;
      const double* gs = g.data() + s * n_classes;
      const double* hs = h.data() + s * n_classes;
      for (std::size_t c = 0; c < n_classes; ++c) dst[c] += gs[c];
      for (std::size_t c = 0; c < n_classes; ++c) dst[n_classes + c] += hs[c];
      ++totals.counts[leaf_of[s]];
    }

    std::vector<FeatureBest> results(features.size());
    auto worker = [&](std::size_t tid) {
      for (std::size_t i = tid; i < features.size(); i += threads) {
        results[i] = scan_feature(binned, g, h, n_classes, l2_leaf_reg, leaf_of,
                                  n_leaves, totals, features[i], scratch[tid]);
      }
    };
    if (threads == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(threads);
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
      for (auto& th : pool) th.join();
    }

    TreeSplit chosen{0, 0};
    double best_gain = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (results[i].valid && results[i].gain > best_gain) {
        best_gain = results[i].gain;
        chosen.feature = static_cast<std::uint32_t>(features[i]);
        chosen.threshold = results[i].threshold;
        found = true;
      }
    }
    if (!found) chosen = TreeSplit{0, 0};  // degenerate level, see header

    tree.splits.push_back(chosen);
    const std::uint8_t* bins =
        binned.values.data() + chosen.feature * binned.n_samples;
    for (std::size_t s = 0; s < n; ++s) {
      leaf_of[s] = (leaf_of[s] << 1) |
                   static_cast<std::uint32_t>(bins[s] > chosen.threshold);
    }
  }

  const std::size_t n_leaves = tree.leaf_count();
  std::vector<double> sums(n_leaves * width, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    double* dst = sums.data() + leaf_of[s] * width;
    const double* gs = g.data() + s * n_classes;
    const double* hs = h.data() + s * n_classes;
    for (std::size_t c = 0; c < n_classes; ++c) dst[c] += gs[c];
    for (std::size_t c = 0; c < n_classes; ++c) dst[n_classes + c] += hs[c];
  }
  tree.leaf_values.assign(n_leaves * n_classes, 0.0);
  for (std::size_t leaf = 0; leaf < n_leaves; ++leaf) {
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double sg = sums[leaf * width + c];
      const double sh = sums[leaf * width + n_classes + c];
      tree.leaf_values[leaf * n_classes + c] =
          sg == 0.0 ? 0.0 : -sg / (sh + l2_leaf_reg);
    }
  }
  return tree;
}

GbtEnsemble fit_ensemble(const data::FingerprintDatabase& train,
                         const GbtConfig& cfg, FitDiagnostics* diag) {
  if (train.records.empty()) throw TrainingError("empty training set");
  if (cfg.depth < 1) throw TrainingError("depth must be >= 1");
  if (cfg.learning_rate <= 0.0) throw TrainingError("learning rate must be > 0");
  if (cfg.l2_leaf_reg < 0.0) throw TrainingError("l2_leaf_reg must be >= 0");
  if (cfg.feature_fraction <= 0.0 || cfg.feature_fraction > 1.0) {
    throw TrainingError("feature_fraction must be in (0, 1]");
  }

  const std::vector<data::FingerprintRecord>& recs = train.records;
  const std::size_t n = recs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return record_less(recs[a], recs[b]);
  });

  GbtEnsemble ens;
  ens.config = cfg;
  ens.learning_rate = cfg.learning_rate;
  ens.link = Link::kSoftmax;
  {
    const std::set<std::string> labels = train.rp_labels();
    ens.class_labels.assign(labels.begin(), labels.end());
  }
  const std::size_t n_classes = ens.class_labels.size();
  std::map<std::string, std::size_t> label_index;
  for (std::size_t c = 0; c < n_classes; ++c) {
    label_index[ens.class_labels[c]] = c;
  }

  std::vector<data::RssiVector> rows;
  rows.reserve(n);
  std::vector<std::size_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(recs[order[i]].rssi);
    y[i] = label_index.at(recs[order[i]].rp_label);
  }

  ens.binning = build_bins(rows, cfg.n_bins);
  const BinnedMatrix binned = bin_features(ens.binning, rows);
  const std::size_t n_features = ens.binning.n_features();

  ens.base_score.assign(n_classes, 0.0);
  {
    std::vector<std::size_t> counts(n_classes, 0);
    for (std::size_t s : y) ++counts[s];
    for (std::size_t c = 0; c < n_classes; ++c) {
      ens.base_score[c] =
          std::log(static_cast<double>(counts[c]) / static_cast<double>(n));
    }
  }

  std::vector<double> scores(n * n_classes);
  for (std::size_t s = 0; s < n; ++s) {
    std::copy(ens.base_score.begin(), ens.base_score.end(),
              scores.begin() + s * n_classes);
  }
  if (diag) {
    diag->base_log_loss = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      diag->base_log_loss +=
          stable_log_loss_row(scores.data() + s * n_classes, n_classes, y[s]);
    }
    diag->base_log_loss /= static_cast<double>(n);
    diag->train_log_loss.clear();
  }

  const std::size_t subset_size = std::min<std::size_t>(
      n_features,
      std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(
                 cfg.feature_fraction * static_cast<double>(n_features) -
                 1e-9))));

  std::vector<double> g(n * n_classes), h(n * n_classes);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t s = 0; s < n; ++s) {
      const double* sc = scores.data() + s * n_classes;
      double m = sc[0];
      for (std::size_t c = 1; c < n_classes; ++c) m = std::max(m, sc[c]);
      double sum = 0.0;
      double* gs = g.data() + s * n_classes;
      for (std::size_t c = 0; c < n_classes; ++c) {
        gs[c] = std::exp(sc[c] - m);
        sum += gs[c];
      }
      double* hs = h.data() + s * n_classes;
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double p = gs[c] / sum;
        gs[c] = p - (c == y[s] ? 1.0 : 0.0);
        hs[c] = p * (1.0 - p);
      }
    }

    Rng subset_rng(mix_seed(cfg.seed, 0xF000 + it));
    const std::vector<std::size_t> subset =
        subset_rng.sample_indices(n_features, subset_size);

    ObliviousTree tree =
        fit_oblivious_tree(binned, g, h, n_classes, cfg.depth, cfg.l2_leaf_reg,
                           subset, mix_seed(cfg.seed, 0xA000 + it), cfg.threads);

    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t leaf = route_binned(tree, binned, s);
      const double* leaf_row = tree.leaf_row(leaf);
      double* sc = scores.data() + s * n_classes;
      for (std::size_t c = 0; c < n_classes; ++c) {
        sc[c] += cfg.learning_rate * leaf_row[c];
      }
    }
    ens.trees.push_back(std::move(tree));

    if (diag) {
      double loss = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        loss +=
            stable_log_loss_row(scores.data() + s * n_classes, n_classes, y[s]);
      }
      diag->train_log_loss.push_back(loss / static_cast<double>(n));
    }
  }
  return ens;
}

std::vector<double> predict_raw(const GbtEnsemble& ensemble,
                                const data::RssiVector& x) {
  if (x.size() != ensemble.binning.n_features()) {
    throw ShapeError("query has " + std::to_string(x.size()) +
                     " features, model expects " +
                     std::to_string(ensemble.binning.n_features()));
  }
  const std::size_t n_classes = ensemble.n_classes();
  std::vector<double> scores = ensemble.base_score;
  for (const ObliviousTree& tree : ensemble.trees) {
    std::size_t leaf = 0;
    for (const TreeSplit& s : tree.splits) {
      const std::size_t bin = ensemble.binning.bin_index(s.feature, x[s.feature]);
      leaf = (leaf << 1) | static_cast<std::size_t>(bin > s.threshold);
    }
    const double* row = tree.leaf_row(leaf);
    for (std::size_t c = 0; c < n_classes; ++c) {
      scores[c] += ensemble.learning_rate * row[c];
    }
  }
  return scores;
}

std::vector<double> predict_scores(const GbtEnsemble& ensemble,
                                   const data::RssiVector& x) {
  std::vector<double> raw = predict_raw(ensemble, x);
  return ensemble.link == Link::kSoftmax ? softmax(raw) : raw;
}

const std::string& predict_label(const GbtEnsemble& ensemble,
                                 const data::RssiVector& x) {
  if (ensemble.class_labels.empty()) throw Error("ensemble has no classes");
  const std::vector<double> scores = predict_scores(ensemble, x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return ensemble.class_labels[best];
}

double evaluate_log_loss(const GbtEnsemble& ensemble,
                         const data::FingerprintDatabase& db) {
  if (db.records.empty()) throw Error("empty database");
  std::map<std::string, std::size_t> label_index;
  for (std::size_t c = 0; c < ensemble.class_labels.size(); ++c) {
    label_index[ensemble.class_labels[c]] = c;
  }
  double loss = 0.0;
  for (const auto& rec : db.records) {
    auto it = label_index.find(rec.rp_label);
    if (it == label_index.end()) {
      throw Error("label '" + rec.rp_label + "' unknown to the ensemble");
    }
    const std::vector<double> raw = predict_raw(ensemble, rec.rssi);
    loss += stable_log_loss_row(raw.data(), raw.size(), it->second);
  }
  return loss / static_cast<double>(db.records.size());
}

void save_ensemble(const GbtEnsemble& ensemble, std::ostream& out) {
  BinaryWriter w(out);
  w.magic(kGbtMagic);
  w.u32(kGbtVersion);
  w.u64(ensemble.config.iterations);
  w.u64(ensemble.config.depth);
  w.f64(ensemble.config.learning_rate);
  w.f64(ensemble.config.l2_leaf_reg);
  w.u64(ensemble.config.n_bins);
  w.f64(ensemble.config.feature_fraction);
  w.u64(ensemble.config.seed);
  w.f64(ensemble.learning_rate);
  w.u8(static_cast<std::uint8_t>(ensemble.link));
  w.u64(ensemble.class_labels.size());
  for (const auto& label : ensemble.class_labels) w.str(label);
  w.u64(ensemble.binning.n_features());
  for (const auto& edges : ensemble.binning.edges) w.f64_vec(edges);
  w.f64_vec(ensemble.base_score);
  w.u64(ensemble.trees.size());
  for (const ObliviousTree& tree : ensemble.trees) save_tree(w, tree);
}

GbtEnsemble load_ensemble(std::istream& in) {
  BinaryReader r(in);
  r.expect_magic(kGbtMagic);
  r.expect_version(kGbtVersion, "ensemble artifact");
  GbtEnsemble ens;
  ens.config.iterations = static_cast<std::size_t>(r.u64());
  ens.config.depth = static_cast<std::size_t>(r.u64());
  ens.config.learning_rate = r.f64();
  ens.config.l2_leaf_reg = r.f64();
  ens.config.n_bins = static_cast<std::size_t>(r.u64());
  ens.config.feature_fraction = r.f64();
  ens.config.seed = r.u64();
  ens.learning_rate = r.f64();
  const std::uint8_t link = r.u8();
  if (link > 1) throw SerializationError("unknown link code");
  ens.link = static_cast<Link>(link);
  const std::uint64_t n_labels = r.u64();
  for (std::uint64_t i = 0; i < n_labels; ++i) {
    ens.class_labels.push_back(r.str());
  }
  const std::uint64_t n_features = r.u64();
  ens.binning.edges.resize(static_cast<std::size_t>(n_features));
  for (auto& edges : ens.binning.edges) edges = r.f64_vec();
  ens.base_score = r.f64_vec();
  if (ens.base_score.size() != ens.class_labels.size()) {
    throw SerializationError("base score size mismatch");
  }
  const std::uint64_t n_trees = r.u64();
  for (std::uint64_t i = 0; i < n_trees; ++i) {
    ObliviousTree tree = load_tree(r);
    if (tree.n_classes != ens.class_labels.size()) {
      throw SerializationError("tree class count mismatch");
    }
    for (const TreeSplit& s : tree.splits) {
      if (s.feature >= ens.binning.n_features()) {
        throw SerializationError("split feature out of range");
      }
    }
    ens.trees.push_back(std::move(tree));
  }
  return ens;
}

std::uint64_t hash_ensemble(const GbtEnsemble& ensemble) {
  std::ostringstream buf;
  save_ensemble(ensemble, buf);
  Fnv1a h;
  const std::string s = buf.str();
  h.add(s.data(), s.size());
  return h.value();
}

}  // namespace gbt
}  // namespace sangria
