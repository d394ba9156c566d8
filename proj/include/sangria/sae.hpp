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

#ifndef SANGRIA_SAE_HPP_
#define SANGRIA_SAE_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sangria/fingerprint.hpp"

namespace sangria {
namespace sae {

enum class Activation : std::uint8_t {
  kRectifier = 0,
  kSigmoid = 1,
  kIdentity = 2,
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out_dim x in_dim
  Eigen::VectorXd biases;   // out_dim
  Activation activation = Activation::kRectifier;

  std::size_t in_dim() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weights.rows()); }
};

// out_dim * (in_dim + 1): weights plus biases.
std::size_t layer_param_count(std::size_t in_dim, std::size_t out_dim);

struct Autoencoder {
  std::vector<DenseLayer> layers;
  std::size_t bottleneck_index = 0;  // layer whose output is the narrowest

  std::size_t input_dim() const { return layers.front().in_dim(); }
  std::size_t output_dim() const { return layers.back().out_dim(); }
};

std::size_t parameter_count(const Autoencoder& ae);

// Chain consistency, reconstruction dimension, and the funnel shape
// (non-increasing widths up to the bottleneck, non-decreasing after).
void validate_autoencoder(const Autoencoder& ae);

// The three-stage stack. AE1 autoencodes the input space; AE3 autoencodes
// AE1's second-layer codes; AE2 is assembled from their trained layers
// around a fresh bottleneck and fine-tuned end to end:
//
//   AE1:  d -> d -> h -> d            (h = hidden width)
//   AE3:  h -> h -> q -> h            (q = code width)
//   AE2:  [AE1-L2: d->h] [AE3-L2: h->q] [fresh: q->q]
//         [AE3-L3: q->h] [AE1-L3: h->d]
//
// The synthetic fingerprint for x is AE2 applied to AE1's first-layer
// representation of x.
struct StackedAutoencoder {
  Autoencoder ae1;
  Autoencoder ae3;
  Autoencoder ae2;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t code_dim = 0;
};

struct SaeConfig {
  // 0 means derive from the input dimension: ceil(d/2) hidden, ceil(d/4) code.
  std::size_t hidden_dim = 0;
  std::size_t code_dim = 0;
  double learning_rate = 0.001;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;

  friend bool operator==(const SaeConfig&, const SaeConfig&) = default;
};

// Seeded uniform init in [-1/sqrt(in_dim), +1/sqrt(in_dim)].
DenseLayer make_layer(std::size_t in_dim, std::size_t out_dim,
                      Activation activation, std::uint64_t seed);

// Forward pass through every layer.
data::RssiVector reconstruct(const Autoencoder& ae, const data::RssiVector& x);

// Forward through the first `layer_count` layers (the code path).
data::RssiVector forward_upto(const Autoencoder& ae, const data::RssiVector& x,
                              std::size_t layer_count);

struct LayerGradients {
  Eigen::MatrixXd weights;
  Eigen::VectorXd biases;
};

// Batch mean of the per-sample sum of squared reconstruction errors, and
// its gradient with respect to every weight and bias. Exposed so the
// backprop path can be checked against finite differences.
double loss_and_gradients(const Autoencoder& ae, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets,
                          std::vector<LayerGradients>& grads);

// Mini-batch SGD on reconstruction MSE; targets are the inputs themselves.
// Returns one mean loss per epoch. Deterministic given cfg.seed.
std::vector<double> train_autoencoder(Autoencoder& ae,
                                      const std::vector<data::RssiVector>& inputs,
                                      const std::vector<data::RssiVector>& targets,
                                      const SaeConfig& cfg);
std::vector<double> train_autoencoder(Autoencoder& ae,
                                      const std::vector<data::RssiVector>& data,
                                      const SaeConfig& cfg);

// Greedy layer-wise pretraining: train AE1 on the data, train AE3 on AE1's
// second-layer codes, then assemble AE2 with its four donor layers copied
// verbatim and a freshly initialized bottleneck.
StackedAutoencoder greedy_pretrain(const std::vector<data::RssiVector>& data,
                                   const SaeConfig& cfg);

// End-to-end pass over AE2: inputs are AE1's first-layer representations,
// targets the original data vectors. AE1 and AE3 stay frozen; only AE2's
// (copied) layers move.
std::vector<double> fine_tune(StackedAutoencoder& sae,
                              const std::vector<data::RssiVector>& data,
                              const SaeConfig& cfg);

// AE1-L1 representation pushed through AE2; lands in [0,1]^d.
data::RssiVector reconstruct_full(const StackedAutoencoder& sae,
                                  const data::RssiVector& x);

// Original records followed by one synthetic reconstruction of each,
// with rp_label, location, and device preserved: exactly 2x the input.
data::FingerprintDatabase augment(const StackedAutoencoder& sae,
                                  const data::FingerprintDatabase& db);

// Versioned binary artifact; round-trips bit-exactly.
void save_sae(const StackedAutoencoder& sae, std::ostream& out);
StackedAutoencoder load_sae(std::istream& in);
std::uint64_t hash_sae(const StackedAutoencoder& sae);

}  // namespace sae
}  // namespace sangria

#endif  // SANGRIA_SAE_HPP_
