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

#ifndef SANGRIA_GBT_HPP_
#define SANGRIA_GBT_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sangria/fingerprint.hpp"

namespace sangria {
namespace gbt {

// Per-feature bin upper edges, strictly increasing. A value's bin index is
// the number of edges strictly below it.
struct BinningScheme {
  std::vector<std::vector<double>> edges;

  std::size_t n_features() const { return edges.size(); }
  std::size_t n_bins(std::size_t feature) const {
    return edges[feature].size() + 1;
  }
  std::size_t bin_index(std::size_t feature, double value) const;

  friend bool operator==(const BinningScheme&, const BinningScheme&) = default;
};

// Quantile edges over each feature's distinct values; features with at most
// n_bins distinct values get midpoints between consecutive distinct values.
BinningScheme build_bins(const std::vector<data::RssiVector>& rows,
                         std::size_t n_bins);

// Feature-major bin indices for one dataset.
struct BinnedMatrix {
  std::vector<std::uint8_t> values;  // [feature * n_samples + sample]
  std::vector<std::uint16_t> bins_per_feature;
  std::size_t n_samples = 0;

  std::size_t n_features() const { return bins_per_feature.size(); }
  std::uint8_t at(std::size_t sample, std::size_t feature) const {
    return values[feature * n_samples + sample];
  }
};

BinnedMatrix bin_features(const BinningScheme& scheme,
                          const std::vector<data::RssiVector>& rows);

// p = softmax(scores); g_k = p_k - [k == true_class]; h_k = p_k (1 - p_k).
std::pair<std::vector<double>, std::vector<double>> softmax_grad_hess(
    const std::vector<double>& scores, std::size_t true_class);

std::vector<double> softmax(const std::vector<double>& scores);

// One split per level; a sample's leaf is the bitstring of split outcomes,
// level 0 as the most significant bit, bit = [bin > threshold].
struct TreeSplit {
  std::uint32_t feature = 0;
  std::uint32_t threshold = 0;

  friend bool operator==(const TreeSplit&, const TreeSplit&) = default;
};

struct ObliviousTree {
  std::vector<TreeSplit> splits;
  std::size_t n_classes = 0;
  std::vector<double> leaf_values;  // (2^depth) x n_classes, leaf-major

  std::size_t depth() const { return splits.size(); }
  std::size_t leaf_count() const { return std::size_t{1} << splits.size(); }
  const double* leaf_row(std::size_t leaf) const {
    return leaf_values.data() + leaf * n_classes;
  }
};

std::size_t route_binned(const ObliviousTree& tree, const BinnedMatrix& binned,
                         std::size_t sample);

// Greedy level-by-level fit. At each level the (feature, threshold) pair
// maximizing sum over refined leaves and classes of (sum g)^2 / (sum h + l2)
// wins; ties go to the lowest feature index, then the lowest threshold.
// Leaf values are the Newton step -sum(g) / (sum(h) + l2); empty leaves get
// zero. When no candidate split exists (every subset feature is constant)
// the level records the degenerate split (0, 0), which routes everything
// left whenever feature 0 is itself constant.
// g and h are sample-major [sample * n_classes + class]. `seed` is reserved;
// the search is fully deterministic. Gains and structure are independent of
// thread count.
ObliviousTree fit_oblivious_tree(const BinnedMatrix& binned,
                                 const std::vector<double>& g,
                                 const std::vector<double>& h,
                                 std::size_t n_classes, std::size_t depth,
                                 double l2_leaf_reg,
                                 const std::vector<std::size_t>& feature_subset,
                                 std::uint64_t seed, std::size_t threads = 1);

enum class Link : std::uint8_t { kIdentity = 0, kSoftmax = 1 };

struct GbtConfig {
  std::size_t iterations = 50;
  std::size_t depth = 7;
  double learning_rate = 0.1;
  double l2_leaf_reg = 5.0;
  std::size_t n_bins = 32;
  double feature_fraction = 0.8;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0 = hardware concurrency

  // threads is an execution detail, not model identity: it never changes
  // the fitted trees and is not serialized.
  friend bool operator==(const GbtConfig& a, const GbtConfig& b) {
    return a.iterations == b.iterations && a.depth == b.depth &&
           a.learning_rate == b.learning_rate &&
           a.l2_leaf_reg == b.l2_leaf_reg && a.n_bins == b.n_bins &&
           a.feature_fraction == b.feature_fraction && a.seed == b.seed;
  }
};

struct GbtEnsemble {
  std::vector<ObliviousTree> trees;
  double learning_rate = 0.1;
  Link link = Link::kSoftmax;
  std::vector<std::string> class_labels;  // sorted
  BinningScheme binning;
  std::vector<double> base_score;
  GbtConfig config;

  std::size_t n_classes() const { return class_labels.size(); }
};

struct FitDiagnostics {
  double base_log_loss = 0.0;
  std::vector<double> train_log_loss;  // after each boosting iteration
};

// Multiclass boosting over the database's rp_labels: base score from log
// class frequencies, then cfg.iterations trees fit to softmax gradients,
// each weighted by the constant learning rate. Samples are processed in a
// content-canonical order, so record order never changes the model.
GbtEnsemble fit_ensemble(const data::FingerprintDatabase& train,
                         const GbtConfig& cfg, FitDiagnostics* diag = nullptr);

// base + learning_rate * sum of leaf rows, before the link.
std::vector<double> predict_raw(const GbtEnsemble& ensemble,
                                const data::RssiVector& x);
// Link applied; a probability vector under softmax.
std::vector<double> predict_scores(const GbtEnsemble& ensemble,
                                   const data::RssiVector& x);
// argmax of predict_scores, ties to the lowest class index.
const std::string& predict_label(const GbtEnsemble& ensemble,
                                 const data::RssiVector& x);

// Mean multiclass log-loss of the ensemble on a database.
double evaluate_log_loss(const GbtEnsemble& ensemble,
                         const data::FingerprintDatabase& db);

// Versioned binary artifact; round-trips bit-exactly.
void save_ensemble(const GbtEnsemble& ensemble, std::ostream& out);
GbtEnsemble load_ensemble(std::istream& in);
std::uint64_t hash_ensemble(const GbtEnsemble& ensemble);

}  // namespace gbt
}  // namespace sangria

#endif  // SANGRIA_GBT_HPP_
