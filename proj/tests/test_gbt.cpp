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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sangria/error.hpp"
#include "sangria/gbt.hpp"
#include "sangria/rng.hpp"
#include "support.hpp"

using namespace sangria;
using namespace sangria::gbt;

namespace {

// Exhaustive split-gain oracle: walks every (feature, threshold) sequence
// that respects level sharing and recomputes gains from raw partitions.
struct BruteForce {
  const BinnedMatrix& binned;
  const std::vector<double>& g;
  const std::vector<double>& h;
  std::size_t n_classes;
  double l2;

  double partition_score(const std::vector<std::size_t>& leaf_of,
                         std::size_t n_leaves) const {
    double score = 0.0;
    for (std::size_t leaf = 0; leaf < n_leaves; ++leaf) {
      for (std::size_t c = 0; c < n_classes; ++c) {
        double sg = 0.0, sh = 0.0;
        for (std::size_t s = 0; s < binned.n_samples; ++s) {
          if (leaf_of[s] == leaf) {
            sg += g[s * n_classes + c];
            sh += h[s * n_classes + c];
          }
        }
        score += sg * sg / (sh + l2);
      }
    }
    return score;
  }

  // Best achievable refined-partition score at one level, given the current
  // leaf assignment, maximizing over all candidate (feature, threshold).
  double best_level_gain(const std::vector<std::size_t>& leaf_of,
                         std::size_t n_leaves) const {
    double best = -1.0;
    for (std::size_t f = 0; f < binned.n_features(); ++f) {
      const std::size_t nb = binned.bins_per_feature[f];
      for (std::size_t t = 0; t + 1 < nb; ++t) {
        std::vector<std::size_t> refined(binned.n_samples);
        for (std::size_t s = 0; s < binned.n_samples; ++s) {
          refined[s] = (leaf_of[s] << 1) |
                       static_cast<std::size_t>(binned.at(s, f) > t);
        }
        best = std::max(best, partition_score(refined, n_leaves * 2));
      }
    }
    return best;
  }
};

std::vector<std::size_t> all_features(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Naive per-node evaluator for an oblivious tree: expand it into explicit
// node-by-node descent and return the reached leaf.
std::size_t naive_route(const ObliviousTree& tree, const BinnedMatrix& binned,
                        std::size_t sample) {
  std::size_t node = 0;  // node id within a full binary tree, level by level
  for (std::size_t level = 0; level < tree.depth(); ++level) {
    const TreeSplit& s = tree.splits[level];
    const bool right = binned.at(sample, s.feature) > s.threshold;
    node = node * 2 + (right ? 2 : 1);  // heap-style child step
  }
  // Convert the heap index back to the leaf offset at the last level.
  return node + 1 - tree.leaf_count();
}

data::FingerprintDatabase one_dim_db(const std::vector<double>& values,
                                     const std::vector<std::string>& labels) {
  data::FingerprintDatabase db;
  db.registry = data::ApRegistry({"ap0"});
  for (std::size_t i = 0; i < values.size(); ++i) {
    data::FingerprintRecord rec;
    rec.rssi = {values[i]};
    rec.rp_label = labels[i];
    rec.device = "d";
    rec.location = {static_cast<double>(i), 0.0, 0.0};
    db.records.push_back(rec);
    db.rp_coordinates[labels[i]] = {static_cast<double>(i), 0.0, 0.0};
  }
  return db;
}

}  // namespace

TEST_CASE("build_bins follows the midpoint and quantile rules") {
  SUBCASE("constant feature has no edges") {
    const BinningScheme s = build_bins({{0.5}, {0.5}, {0.5}}, 8);
    CHECK(s.edges[0].empty());
    CHECK(s.bin_index(0, 0.5) == 0);
    CHECK(s.bin_index(0, 0.9) == 0);
  }
  SUBCASE("two distinct values split at the midpoint") {
    const BinningScheme s = build_bins({{0.0}, {1.0}, {0.0}}, 2);
    REQUIRE(s.edges[0].size() == 1);
    CHECK(s.edges[0][0] == 0.5);
    CHECK(s.bin_index(0, 0.0) == 0);
    CHECK(s.bin_index(0, 1.0) == 1);
    CHECK(s.bin_index(0, 0.5) == 0);  // only edges strictly below the value count
  }
  SUBCASE("quantile edges cap the bin count") {
    std::vector<data::RssiVector> rows;
    for (int i = 0; i < 100; ++i) rows.push_back({i / 99.0});
    const BinningScheme s = build_bins(rows, 8);
    CHECK(s.edges[0].size() == 7);
    for (std::size_t i = 1; i < s.edges[0].size(); ++i) {
      CHECK(s.edges[0][i] > s.edges[0][i - 1]);
    }
    for (const auto& r : rows) CHECK(s.bin_index(0, r[0]) <= 7);
  }
  SUBCASE("permuting samples leaves the scheme unchanged") {
    Rng rng(5);
    std::vector<data::RssiVector> rows;
    for (int i = 0; i < 200; ++i) {
      rows.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    }
    auto shuffled = rows;
    rng.shuffle(shuffled);
    CHECK(build_bins(rows, 16) == build_bins(shuffled, 16));
  }
}

TEST_CASE("softmax_grad_hess identities") {
  SUBCASE("uniform scores, three classes") {
    const auto [g, h] = softmax_grad_hess({1.0, 1.0, 1.0}, 0);
    CHECK(g[0] == doctest::Approx(-2.0 / 3.0));
    CHECK(g[1] == doctest::Approx(1.0 / 3.0));
    CHECK(g[2] == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("gradients sum to zero, hessians stay in (0, 0.25]") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 2 + rng.index(6);
      std::vector<double> scores(n);
      for (double& s : scores) s = rng.uniform(-8.0, 8.0);
      const auto [g, h] = softmax_grad_hess(scores, rng.index(n));
      double sum = 0.0;
      for (double v : g) sum += v;
      CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
      for (double v : h) {
        CHECK(v > 0.0);
        CHECK(v <= 0.25);
      }
    }
  }
}

TEST_CASE("oblivious leaf routing matches a naive per-node evaluator") {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 10 + rng.index(40);
    const std::size_t features = 1 + rng.index(4);
    std::vector<data::RssiVector> rows(n, data::RssiVector(features));
    for (auto& r : rows) {
      for (double& v : r) v = rng.uniform();
    }
    const BinningScheme scheme = build_bins(rows, 8);
    const BinnedMatrix binned = bin_features(scheme, rows);

    ObliviousTree tree;
    const std::size_t depth = 1 + rng.index(4);
    tree.n_classes = 1;
    for (std::size_t k = 0; k < depth; ++k) {
      const std::size_t f = rng.index(features);
      const std::size_t nb = binned.bins_per_feature[f];
      tree.splits.push_back(
          {static_cast<std::uint32_t>(f),
           static_cast<std::uint32_t>(nb > 1 ? rng.index(nb - 1) : 0)});
    }
    tree.leaf_values.assign(tree.leaf_count(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      CHECK(route_binned(tree, binned, s) == naive_route(tree, binned, s));
    }
    // A depth-d tree stores exactly d splits and 2^d leaf rows.
    CHECK(tree.splits.size() == depth);
    CHECK(tree.leaf_values.size() == (std::size_t{1} << depth) * tree.n_classes);
  }
}

TEST_CASE("fit_oblivious_tree leaf values and degenerate levels") {
  SUBCASE("newton step example") {
    // One leaf with sum g = -2, sum h = 3, l2 = 5 -> leaf value 0.25.
    BinnedMatrix binned;
    binned.n_samples = 2;
    binned.bins_per_feature = {1};
    binned.values = {0, 0};
    const std::vector<double> g{-1.5, -0.5};
    const std::vector<double> h{2.0, 1.0};
    const ObliviousTree tree =
        fit_oblivious_tree(binned, g, h, 1, 1, 5.0, {0}, 0);
    // No split possible: degenerate (0,0), everything lands in leaf 0.
    CHECK(tree.splits[0] == TreeSplit{0, 0});
    CHECK(tree.leaf_values[0] == doctest::Approx(0.25));
    CHECK(tree.leaf_values[1] == 0.0);  // empty leaf
  }
  SUBCASE("all-zero gradients give all-zero leaves") {
    BinnedMatrix binned;
    binned.n_samples = 4;
    binned.bins_per_feature = {3};
    binned.values = {0, 1, 2, 1};
    const std::vector<double> g(4, 0.0);
    const std::vector<double> h{0.1, 0.2, 0.1, 0.2};
    const ObliviousTree tree =
        fit_oblivious_tree(binned, g, h, 1, 2, 5.0, {0}, 0);
    for (double v : tree.leaf_values) CHECK(v == 0.0);
  }
}

TEST_CASE("depth-1 split matches the exhaustive oracle") {
  // Gradients favor separating bins {0,1} from {2,3}.
  std::vector<data::RssiVector> rows{{0.1}, {0.3}, {0.7}, {0.9}};
  const BinningScheme scheme = build_bins(rows, 4);
  const BinnedMatrix binned = bin_features(scheme, rows);
  const std::vector<double> g{-1.0, -0.8, 0.9, 1.1};
  const std::vector<double> h{0.2, 0.2, 0.2, 0.2};

  const ObliviousTree tree = fit_oblivious_tree(binned, g, h, 1, 1, 5.0, {0}, 0);
  const BruteForce oracle{binned, g, h, 1, 5.0};
  const std::vector<std::size_t> root(4, 0);
  std::vector<std::size_t> refined(4);
  for (std::size_t s = 0; s < 4; ++s) {
    refined[s] = binned.at(s, 0) > tree.splits[0].threshold ? 1 : 0;
  }
  const double fitted = oracle.partition_score(refined, 2);
  CHECK(fitted == doctest::Approx(oracle.best_level_gain(root, 1)).epsilon(1e-12));
  CHECK(tree.splits[0].threshold == 1);  // between bins 1 and 2
}

TEST_CASE("fitted gains equal exhaustive enumeration maxima") {
  Rng rng(127);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 5 + rng.index(26);
    const std::size_t features = 1 + rng.index(3);
    const std::size_t classes = 1 + rng.index(3);
    const std::size_t depth = 1 + rng.index(2);
    std::vector<data::RssiVector> rows(n, data::RssiVector(features));
    for (auto& r : rows) {
      for (double& v : r) v = rng.uniform();
    }
    const BinningScheme scheme = build_bins(rows, 4);
    const BinnedMatrix binned = bin_features(scheme, rows);
    std::vector<double> g(n * classes), h(n * classes);
    for (double& v : g) v = rng.uniform(-1.0, 1.0);
    for (double& v : h) v = rng.uniform(0.01, 0.25);

    const ObliviousTree tree = fit_oblivious_tree(
        binned, g, h, classes, depth, 5.0, all_features(features), 0);
    const BruteForce oracle{binned, g, h, classes, 5.0};

    // Level by level: the fitted refined-partition score equals the oracle
    // maximum over every candidate at that level.
    std::vector<std::size_t> leaf_of(n, 0);
    for (std::size_t level = 0; level < depth; ++level) {
      const double oracle_best =
          oracle.best_level_gain(leaf_of, std::size_t{1} << level);
      for (std::size_t s = 0; s < n; ++s) {
        leaf_of[s] =
            (leaf_of[s] << 1) |
            static_cast<std::size_t>(binned.at(s, tree.splits[level].feature) >
                                     tree.splits[level].threshold);
      }
      const double fitted =
          oracle.partition_score(leaf_of, std::size_t{1} << (level + 1));
      if (oracle_best < 0.0) continue;  // no candidates anywhere
      CHECK(fitted ==
            doctest::Approx(oracle_best).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("fit_ensemble defaults produce 50 trees of depth 7") {
  const data::FingerprintDatabase db = test::make_grid_database(4, 3, 6, 13);
  GbtConfig cfg;  // spec defaults
  cfg.seed = 5;
  cfg.threads = 1;
  const GbtEnsemble ens = fit_ensemble(db, cfg);
  CHECK(ens.trees.size() == 50);
  for (const auto& tree : ens.trees) CHECK(tree.depth() == 7);
  CHECK(ens.learning_rate == 0.1);
  CHECK(ens.class_labels.size() == 4);
}

TEST_CASE("single-class training always predicts that class") {
  const data::FingerprintDatabase db = test::make_grid_database(1, 8, 5, 3);
  GbtConfig cfg;
  cfg.iterations = 10;
  cfg.depth = 2;
  cfg.threads = 1;
  const GbtEnsemble ens = fit_ensemble(db, cfg);
  CHECK(ens.class_labels.size() == 1);
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    data::RssiVector x(5);
    for (double& v : x) v = rng.uniform();
    CHECK(predict_label(ens, x) == "rp0");
  }
}

TEST_CASE("well-separated 1-D classes reach the nearest-neighbor oracle") {
  std::vector<double> values;
  std::vector<std::string> labels;
  Rng rng(41);
  for (int i = 0; i < 10; ++i) {
    values.push_back(rng.uniform(0.0, 0.2));
    labels.push_back("low");
    values.push_back(rng.uniform(0.8, 1.0));
    labels.push_back("high");
  }
  const data::FingerprintDatabase db = one_dim_db(values, labels);
  GbtConfig cfg;  // 50 iterations, depth 7
  cfg.threads = 1;
  const GbtEnsemble ens = fit_ensemble(db, cfg);

  // Exhaustive 1-NN oracle on the same data (self-match allowed).
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t nearest = 0;
    double best = 2.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double d = std::abs(values[i] - values[j]);
      if (d < best) {
        best = d;
        nearest = j;
      }
    }
    CHECK(predict_label(ens, {values[i]}) == labels[nearest]);
  }
}

TEST_CASE("empty training set is an error") {
  data::FingerprintDatabase db;
  db.registry = data::ApRegistry({"a"});
  CHECK_THROWS_AS(fit_ensemble(db, GbtConfig{}), TrainingError);
}

TEST_CASE("predict_scores contracts") {
  const data::FingerprintDatabase db = test::make_grid_database(3, 4, 6, 19);
  GbtConfig cfg;
  cfg.iterations = 8;
  cfg.depth = 3;
  cfg.threads = 1;
  const GbtEnsemble ens = fit_ensemble(db, cfg);

  SUBCASE("zero-tree ensemble with uniform base is uniform") {
    GbtEnsemble empty = ens;
    empty.trees.clear();
    empty.base_score.assign(empty.n_classes(), 0.7);
    const data::RssiVector x(6, 0.5);
    const std::vector<double> p = predict_scores(empty, x);
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0));
  }

  SUBCASE("scores are additive in the trees, pre-link") {
    Rng rng(3);
    data::RssiVector x(6);
    for (double& v : x) v = rng.uniform();
    for (std::size_t k = 1; k <= ens.trees.size(); ++k) {
      GbtEnsemble prefix = ens;
      prefix.trees.assign(ens.trees.begin(), ens.trees.begin() + k);
      GbtEnsemble shorter = ens;
      shorter.trees.assign(ens.trees.begin(), ens.trees.begin() + k - 1);
      const std::vector<double> with_k = predict_raw(prefix, x);
      std::vector<double> manual = predict_raw(shorter, x);
      std::size_t leaf = 0;
      for (const TreeSplit& s : ens.trees[k - 1].splits) {
        leaf = (leaf << 1) | static_cast<std::size_t>(
                                 ens.binning.bin_index(s.feature, x[s.feature]) >
                                 s.threshold);
      }
      for (std::size_t c = 0; c < manual.size(); ++c) {
        manual[c] += ens.learning_rate * ens.trees[k - 1].leaf_row(leaf)[c];
      }
      CHECK(with_k == manual);
    }
  }

  SUBCASE("softmax output sums to one") {
    Rng rng(31);
    for (int i = 0; i < 20; ++i) {
      data::RssiVector x(6);
      for (double& v : x) v = rng.uniform();
      const std::vector<double> p = predict_scores(ens, x);
      double sum = 0.0;
      for (double v : p) sum += v;
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }

  SUBCASE("dimension mismatch is a shape error") {
    CHECK_THROWS_AS(predict_scores(ens, data::RssiVector(5, 0.0)), ShapeError);
  }

  SUBCASE("argmax is invariant under the softmax link") {
    GbtEnsemble identity = ens;
    identity.link = Link::kIdentity;
    Rng rng(77);
    for (int i = 0; i < 50; ++i) {
      data::RssiVector x(6);
      for (double& v : x) v = rng.uniform();
      CHECK(predict_label(ens, x) == predict_label(identity, x));
    }
  }
}

TEST_CASE("training loss never increases under the default step") {
  const data::FingerprintDatabase db = test::make_grid_database(6, 8, 10, 23, 0.08);
  GbtConfig cfg;
  cfg.iterations = 25;
  cfg.threads = 1;
  cfg.seed = 2;
  FitDiagnostics diag;
  (void)fit_ensemble(db, cfg, &diag);
  REQUIRE(diag.train_log_loss.size() == 25);
  double prev = diag.base_log_loss;
  for (double loss : diag.train_log_loss) {
    CHECK(loss <= prev + 1e-9);
    prev = loss;
  }
}

TEST_CASE("record order never changes the fitted ensemble") {
  data::FingerprintDatabase db = test::make_grid_database(5, 6, 8, 29, 0.05);
  GbtConfig cfg;
  cfg.iterations = 6;
  cfg.depth = 4;
  cfg.seed = 12;
  cfg.threads = 1;
  const GbtEnsemble base = fit_ensemble(db, cfg);

  Rng rng(55);
  for (int trial = 0; trial < 3; ++trial) {
    rng.shuffle(db.records);
    const GbtEnsemble permuted = fit_ensemble(db, cfg);
    CHECK(hash_ensemble(permuted) == hash_ensemble(base));
  }

  // Thread count does not change the model either.
  GbtConfig threaded = cfg;
  threaded.threads = 2;
  CHECK(hash_ensemble(fit_ensemble(db, threaded)) == hash_ensemble(base));
}

TEST_CASE("ensemble artifacts round-trip bit-exactly and gate versions") {
  const data::FingerprintDatabase db = test::make_grid_database(4, 4, 7, 31);
  GbtConfig cfg;
  cfg.iterations = 5;
  cfg.depth = 3;
  cfg.threads = 1;
  const GbtEnsemble ens = fit_ensemble(db, cfg);

  std::stringstream buf;
  save_ensemble(ens, buf);
  const GbtEnsemble loaded = load_ensemble(buf);
  CHECK(hash_ensemble(loaded) == hash_ensemble(ens));

  Rng rng(8);
  for (int i = 0; i < 10; ++i) {
    data::RssiVector x(7);
    for (double& v : x) v = rng.uniform();
    CHECK(predict_raw(loaded, x) == predict_raw(ens, x));
  }

  std::string bytes = buf.str();
  bytes[4] = 2;
  std::stringstream bad(bytes);
  CHECK_THROWS_AS(load_ensemble(bad), SerializationError);
}
