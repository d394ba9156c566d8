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

#include "sangria/sae.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "sangria/error.hpp"
#include "sangria/io.hpp"
#include "sangria/rng.hpp"

namespace sangria {
namespace sae {

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::kRectifier:
      return z.array().max(0.0);
    case Activation::kSigmoid:
      return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    case Activation::kIdentity:
      return z;
  }
  throw Error("unknown activation");
}

// Derivative with respect to pre-activation, expressed from whichever of
// (z, a) is cheapest for the activation.
Eigen::ArrayXXd activation_prime(const Eigen::MatrixXd& z,
                                 const Eigen::MatrixXd& a, Activation act) {
  switch (act) {
    case Activation::kRectifier:
      return (z.array() > 0.0).cast<double>();
    case Activation::kSigmoid:
      return a.array() * (1.0 - a.array());
    case Activation::kIdentity:
      return Eigen::ArrayXXd::Ones(z.rows(), z.cols());
  }
  throw Error("unknown activation");
}

Eigen::MatrixXd pack_rows(const std::vector<data::RssiVector>& rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw ShapeError("ragged input vectors");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Autoencoder make_three_layer(std::size_t outer, std::size_t inner,
                             std::uint64_t seed) {
  Autoencoder ae;
  ae.layers.push_back(make_layer(outer, outer, Activation::kRectifier,
                                 mix_seed(seed, 1)));
  ae.layers.push_back(make_layer(outer, inner, Activation::kRectifier,
                                 mix_seed(seed, 2)));
  ae.layers.push_back(make_layer(inner, outer, Activation::kSigmoid,
                                 mix_seed(seed, 3)));
  ae.bottleneck_index = 1;
  return ae;
}

void save_autoencoder(BinaryWriter& w, const Autoencoder& ae) {
  w.u64(ae.layers.size());
  w.u64(ae.bottleneck_index);
  for (const DenseLayer& l : ae.layers) {
    w.u8(static_cast<std::uint8_t>(l.activation));
    w.u64(l.out_dim());
    w.u64(l.in_dim());
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) {
        w.f64(l.weights(r, c));
      }
    }
    for (Eigen::Index r = 0; r < l.biases.size(); ++r) w.f64(l.biases(r));
  }
}

Autoencoder load_autoencoder(BinaryReader& r) {
  Autoencoder ae;
  const std::uint64_t n_layers = r.u64();
  ae.bottleneck_index = static_cast<std::size_t>(r.u64());
  for (std::uint64_t i = 0; i < n_layers; ++i) {
    DenseLayer l;
    const std::uint8_t act = r.u8();
    if (act > 2) throw SerializationError("unknown activation code");
    l.activation = static_cast<Activation>(act);
    const auto out = static_cast<Eigen::Index>(r.u64());
    const auto in = static_cast<Eigen::Index>(r.u64());
    l.weights.resize(out, in);
    for (Eigen::Index rr = 0; rr < out; ++rr) {
      for (Eigen::Index cc = 0; cc < in; ++cc) l.weights(rr, cc) = r.f64();
    }
    l.biases.resize(out);
    for (Eigen::Index rr = 0; rr < out; ++rr) l.biases(rr) = r.f64();
    ae.layers.push_back(std::move(l));
  }
  validate_autoencoder(ae);
  return ae;
}

constexpr char kSaeMagic[5] = "SGSA";
constexpr std::uint32_t kSaeVersion = 1;

}  // namespace

std::size_t layer_param_count(std::size_t in_dim, std::size_t out_dim) {
  return out_dim * (in_dim + 1);
}

std::size_t parameter_count(const Autoencoder& ae) {
  std::size_t total = 0;
  for (const DenseLayer& l : ae.layers) {
    total += layer_param_count(l.in_dim(), l.out_dim());
  }
  return total;
}

void validate_autoencoder(const Autoencoder& ae) {
  if (ae.layers.empty()) throw ShapeError("autoencoder has no layers");
  for (std::size_t i = 1; i < ae.layers.size(); ++i) {
    if (ae.layers[i].in_dim() != ae.layers[i - 1].out_dim()) {
      throw ShapeError("layer " + std::to_string(i) + " expects " +
                       std::to_string(ae.layers[i].in_dim()) + " inputs, got " +
                       std::to_string(ae.layers[i - 1].out_dim()));
    }
  }
  if (ae.output_dim() != ae.input_dim()) {
    throw ShapeError("autoencoder output dimension " +
                     std::to_string(ae.output_dim()) +
                     " does not reconstruct input dimension " +
                     std::to_string(ae.input_dim()));
  }
  if (ae.bottleneck_index >= ae.layers.size()) {
    throw ShapeError("bottleneck index out of range");
  }
  for (std::size_t i = 1; i < ae.layers.size(); ++i) {
    const bool before = i <= ae.bottleneck_index;
    const std::size_t prev = ae.layers[i - 1].out_dim();
    const std::size_t cur = ae.layers[i].out_dim();
    if (before ? cur > prev : cur < prev) {
      throw ShapeError("widths do not funnel through the bottleneck");
    }
  }
}

DenseLayer make_layer(std::size_t in_dim, std::size_t out_dim,
                      Activation activation, std::uint64_t seed) {
  if (in_dim == 0 || out_dim == 0) throw ShapeError("zero layer dimension");
  DenseLayer l;
  l.activation = activation;
  l.weights.resize(static_cast<Eigen::Index>(out_dim),
                   static_cast<Eigen::Index>(in_dim));
  l.biases.resize(static_cast<Eigen::Index>(out_dim));
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  Rng rng(seed);
  for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < l.weights.cols(); ++c) {
      l.weights(r, c) = rng.uniform(-bound, bound);
    }
  }
  for (Eigen::Index r = 0; r < l.biases.size(); ++r) {
    l.biases(r) = rng.uniform(-bound, bound);
  }
  return l;
}

data::RssiVector forward_upto(const Autoencoder& ae, const data::RssiVector& x,
                              std::size_t layer_count) {
  validate_autoencoder(ae);
  if (layer_count > ae.layers.size()) throw ShapeError("layer count too large");
  if (x.size() != ae.input_dim()) {
    throw ShapeError("input has " + std::to_string(x.size()) +
                     " values, autoencoder expects " +
                     std::to_string(ae.input_dim()));
  }
  Eigen::MatrixXd a(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) {
    a(0, static_cast<Eigen::Index>(j)) = x[j];
  }
  for (std::size_t i = 0; i < layer_count; ++i) {
    const DenseLayer& l = ae.layers[i];
    Eigen::MatrixXd z = a * l.weights.transpose();
    z.rowwise() += l.biases.transpose();
    a = activate(z, l.activation);
  }
  data::RssiVector out(static_cast<std::size_t>(a.cols()));
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = a(0, static_cast<Eigen::Index>(j));
  }
  return out;
}

data::RssiVector reconstruct(const Autoencoder& ae, const data::RssiVector& x) {
  return forward_upto(ae, x, ae.layers.size());
}

double loss_and_gradients(const Autoencoder& ae, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets,
                          std::vector<LayerGradients>& grads) {
  const std::size_t n_layers = ae.layers.size();
  if (inputs.rows() == 0) throw ShapeError("empty batch");
  if (inputs.cols() != static_cast<Eigen::Index>(ae.input_dim())) {
    throw ShapeError("batch width does not match autoencoder input");
  }
  if (targets.rows() != inputs.rows() ||
      targets.cols() != static_cast<Eigen::Index>(ae.output_dim())) {
    throw ShapeError("target shape mismatch");
  }

  std::vector<Eigen::MatrixXd> zs(n_layers), as(n_layers);
  const Eigen::MatrixXd* prev = &inputs;
  for (std::size_t i = 0; i < n_layers; ++i) {
    const DenseLayer& l = ae.layers[i];
    zs[i] = *prev * l.weights.transpose();
    zs[i].rowwise() += l.biases.transpose();
    as[i] = activate(zs[i], l.activation);
    prev = &as[i];
  }

  // Batch mean of the per-sample sum of squared errors; keeps gradient
  // magnitudes independent of the output width so learning rates carry
  // across layer sizes.
  const double denom = static_cast<double>(inputs.rows());
  const Eigen::MatrixXd diff = as.back() - targets;
  const double loss = diff.squaredNorm() / denom;

  grads.resize(n_layers);
  Eigen::MatrixXd delta =
      ((2.0 / denom) * diff.array() *
       activation_prime(zs.back(), as.back(), ae.layers.back().activation))
          .matrix();
  for (std::size_t i = n_layers; i-- > 0;) {
    const Eigen::MatrixXd& below = (i == 0) ? inputs : as[i - 1];
    grads[i].weights = delta.transpose() * below;
    grads[i].biases = delta.colwise().sum().transpose();
    if (i > 0) {
      delta = ((delta * ae.layers[i].weights).array() *
               activation_prime(zs[i - 1], as[i - 1],
                                ae.layers[i - 1].activation))
                  .matrix();
    }
  }
  return loss;
}

std::vector<double> train_autoencoder(Autoencoder& ae,
                                      const std::vector<data::RssiVector>& inputs,
                                      const std::vector<data::RssiVector>& targets,
                                      const SaeConfig& cfg) {
  if (inputs.empty()) throw TrainingError("no training data");
  if (inputs.size() != targets.size()) throw ShapeError("input/target count");
  if (cfg.batch_size == 0) throw TrainingError("batch_size must be >= 1");
  if (cfg.learning_rate <= 0.0) throw TrainingError("learning rate must be > 0");
  validate_autoencoder(ae);

  const Eigen::MatrixXd all_x = pack_rows(inputs);
  const Eigen::MatrixXd all_y = pack_rows(targets);
  if (all_x.cols() != static_cast<Eigen::Index>(ae.input_dim())) {
    throw ShapeError("data width " + std::to_string(all_x.cols()) +
                     " does not match autoencoder input " +
                     std::to_string(ae.input_dim()));
  }

  const std::size_t n = inputs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng shuffle_rng(mix_seed(cfg.seed, 0xB1));

  std::vector<double> history;
  history.reserve(cfg.epochs);
  std::vector<LayerGradients> grads;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      Eigen::MatrixXd bx(static_cast<Eigen::Index>(count), all_x.cols());
      Eigen::MatrixXd by(static_cast<Eigen::Index>(count), all_y.cols());
      for (std::size_t i = 0; i < count; ++i) {
        bx.row(static_cast<Eigen::Index>(i)) =
            all_x.row(static_cast<Eigen::Index>(order[start + i]));
        by.row(static_cast<Eigen::Index>(i)) =
            all_y.row(static_cast<Eigen::Index>(order[start + i]));
      }
      const double loss = loss_and_gradients(ae, bx, by, grads);
      epoch_loss += loss * static_cast<double>(count);
      for (std::size_t i = 0; i < ae.layers.size(); ++i) {
        ae.layers[i].weights -= cfg.learning_rate * grads[i].weights;
        ae.layers[i].biases -= cfg.learning_rate * grads[i].biases;
      }
    }
    // Reported as the per-dimension mean squared reconstruction error.
    epoch_loss /= static_cast<double>(n) * static_cast<double>(all_y.cols());
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("loss diverged at epoch " + std::to_string(epoch));
    }
    history.push_back(epoch_loss);
  }
  return history;
}

std::vector<double> train_autoencoder(Autoencoder& ae,
                                      const std::vector<data::RssiVector>& data,
                                      const SaeConfig& cfg) {
  return train_autoencoder(ae, data, data, cfg);
}

StackedAutoencoder greedy_pretrain(const std::vector<data::RssiVector>& data,
                                   const SaeConfig& cfg) {
  if (data.empty()) throw TrainingError("no training data");
  const std::size_t d = data[0].size();
  if (d == 0) throw ShapeError("zero-dimensional fingerprints");

  StackedAutoencoder sae;
  sae.input_dim = d;
  sae.hidden_dim = cfg.hidden_dim != 0 ? cfg.hidden_dim : (d + 1) / 2;
  sae.code_dim = cfg.code_dim != 0 ? cfg.code_dim : (d + 3) / 4;
  if (sae.hidden_dim > d || sae.code_dim > sae.hidden_dim) {
    throw ShapeError("widths must satisfy code <= hidden <= input");
  }

  sae.ae1 = make_three_layer(d, sae.hidden_dim, mix_seed(cfg.seed, 0x0A1));
  SaeConfig stage = cfg;
  stage.seed = mix_seed(cfg.seed, 0x7A1);
  train_autoencoder(sae.ae1, data, stage);

  std::vector<data::RssiVector> codes;
  codes.reserve(data.size());
  for (const auto& x : data) codes.push_back(forward_upto(sae.ae1, x, 2));

  sae.ae3 = make_three_layer(sae.hidden_dim, sae.code_dim,
                             mix_seed(cfg.seed, 0x0A3));
  stage.seed = mix_seed(cfg.seed, 0x7A3);
  train_autoencoder(sae.ae3, codes, stage);

  sae.ae2.layers = {
      sae.ae1.layers[1],  // d -> h
      sae.ae3.layers[1],  // h -> q
      make_layer(sae.code_dim, sae.code_dim, Activation::kRectifier,
                 mix_seed(cfg.seed, 0x0A2)),
      sae.ae3.layers[2],  // q -> h
      sae.ae1.layers[2],  // h -> d
  };
  sae.ae2.bottleneck_index = 2;
  validate_autoencoder(sae.ae2);
  return sae;
}

std::vector<double> fine_tune(StackedAutoencoder& sae,
                              const std::vector<data::RssiVector>& data,
                              const SaeConfig& cfg) {
  if (data.empty()) throw TrainingError("no training data");
  // AE2 maps each datum's first-layer representation back to the datum
  // itself, so the full chain AE1-L1 -> AE2 reconstructs the original.
  std::vector<data::RssiVector> reps;
  reps.reserve(data.size());
  for (const auto& x : data) reps.push_back(forward_upto(sae.ae1, x, 1));
  SaeConfig stage = cfg;
  stage.seed = mix_seed(cfg.seed, 0x7A2);
  return train_autoencoder(sae.ae2, reps, data, stage);
}

data::RssiVector reconstruct_full(const StackedAutoencoder& sae,
                                  const data::RssiVector& x) {
  return reconstruct(sae.ae2, forward_upto(sae.ae1, x, 1));
}

data::FingerprintDatabase augment(const StackedAutoencoder& sae,
                                  const data::FingerprintDatabase& db) {
  if (db.registry.size() != sae.input_dim) {
    throw ShapeError("database has " + std::to_string(db.registry.size()) +
                     " APs, autoencoder expects " +
                     std::to_string(sae.input_dim));
  }
  data::FingerprintDatabase out = db;
  out.records.reserve(db.records.size() * 2);
  for (const auto& rec : db.records) {
    data::FingerprintRecord synth = rec;
    synth.rssi = reconstruct_full(sae, rec.rssi);
    synth.synthetic = true;
    out.records.push_back(std::move(synth));
  }
  return out;
}

void save_sae(const StackedAutoencoder& sae, std::ostream& out) {
  BinaryWriter w(out);
  w.magic(kSaeMagic);
  w.u32(kSaeVersion);
  w.u64(sae.input_dim);
  w.u64(sae.hidden_dim);
  w.u64(sae.code_dim);
  save_autoencoder(w, sae.ae1);
  save_autoencoder(w, sae.ae3);
  save_autoencoder(w, sae.ae2);
}

StackedAutoencoder load_sae(std::istream& in) {
  BinaryReader r(in);
  r.expect_magic(kSaeMagic);
  r.expect_version(kSaeVersion, "autoencoder artifact");
  StackedAutoencoder sae;
  sae.input_dim = static_cast<std::size_t>(r.u64());
  sae.hidden_dim = static_cast<std::size_t>(r.u64());
  sae.code_dim = static_cast<std::size_t>(r.u64());
  sae.ae1 = load_autoencoder(r);
  sae.ae3 = load_autoencoder(r);
  sae.ae2 = load_autoencoder(r);
  return sae;
}

std::uint64_t hash_sae(const StackedAutoencoder& sae) {
  std::ostringstream buf;
  save_sae(sae, buf);
  Fnv1a h;
  const std::string s = buf.str();
  h.add(s.data(), s.size());
  return h.value();
}

}  // namespace sae
}  // namespace sangria
