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

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "sangria/error.hpp"
#include "sangria/evaluation.hpp"
#include "sangria/fingerprint.hpp"
#include "sangria/io.hpp"
#include "sangria/pipeline.hpp"
#include "sangria/run_config.hpp"

namespace {

using namespace sangria;

cli::RunConfig preload_config(int argc, char** argv) {
  cli::RunConfig cfg;
  for (int i = 1; i + 1 < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" || arg == "-c") {
      cli::load_run_config_file(cfg, argv[i + 1]);
    }
  }
  if (const char* env = std::getenv("SANGRIA_OUT_DIR"); env && cfg.out.empty()) {
    cfg.out = env;
  }
  return cfg;
}

data::FingerprintDatabase load_dataset(const cli::RunConfig& cfg) {
  if (cfg.data.empty()) throw Error("no dataset given (--data or config)");
  if (cfg.format == "uji") {
    return data::load_uji_csv(cfg.data, {cfg.floor_height});
  }
  if (cfg.format == "canonical") {
    return data::load_canonical_csv(cfg.data);
  }
  throw Error("unknown format '" + cfg.format + "' (expected uji or canonical)");
}

// Run directory: timestamp for uniqueness, config hash for provenance.
std::string make_run_dir(const cli::RunConfig& cfg) {
  const std::string base = cfg.out.empty() ? "." : cfg.out;
  Fnv1a h;
  h.add_str(cli::dump_run_config(cfg));
  char stamp[32];
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &tm_utc);
  char tag[64];
  std::snprintf(tag, sizeof(tag), "%s-%08llx", stamp,
                static_cast<unsigned long long>(h.value() & 0xffffffffULL));
  const std::filesystem::path dir = std::filesystem::path(base) / tag;
  std::filesystem::create_directories(dir);
  return dir.string();
}

void write_config_echo(const cli::RunConfig& cfg, const std::string& dir) {
  std::ofstream out(std::filesystem::path(dir) / "config.txt");
  out << cli::dump_run_config(cfg);
}

int cmd_ingest(const cli::RunConfig& cfg) {
  const data::FingerprintDatabase db = load_dataset(cfg);
  std::cout << "records: " << db.records.size() << "\n"
            << "aps: " << db.registry.size() << "\n"
            << "reference_points: " << db.rp_coordinates.size() << "\n"
            << "devices: " << db.devices().size() << "\n"
            << "clamp_warnings: " << db.clamp_warnings << "\n";
  if (!cfg.out.empty()) {
    data::write_canonical_csv(db, cfg.out);
    std::cout << "wrote " << cfg.out << "\n";
  }
  return 0;
}

int cmd_train(const cli::RunConfig& cfg) {
  if (cfg.out.empty()) throw Error("train needs --out for the model artifact");
  const data::FingerprintDatabase db = load_dataset(cfg);
  const pipeline::SangriaModel model =
      pipeline::train_sangria(db, cfg.sae_cfg, cfg.gbt_cfg, cfg.augment);
  pipeline::save_model_file(model, cfg.out);
  std::cout << "model: " << cfg.out << "\n"
            << "classes: " << model.ensemble.class_labels.size() << "\n"
            << "trees: " << model.ensemble.trees.size() << "\n"
            << "trained_on: " << model.metadata.ensemble_train_count
            << " records" << (cfg.augment ? " (augmented)" : "") << "\n";
  return 0;
}

int cmd_predict(const cli::RunConfig& cfg) {
  if (cfg.model.empty()) throw Error("predict needs --model");
  if (cfg.scan.empty()) throw Error("predict needs --scan");
  const pipeline::SangriaModel model = pipeline::load_model_file(cfg.model);
  const std::vector<pipeline::Scan> scans = pipeline::load_scans(cfg.scan);
  for (const pipeline::Scan& scan : scans) {
    const pipeline::Prediction p = pipeline::predict_location(model, scan);
    if (p.low_confidence) {
      std::cerr << "warning: no known APs in scan, low-confidence prediction\n";
    }
    char line[160];
    std::snprintf(line, sizeof(line), "%.6g,%.6g,%.6g,%s", p.location.x,
                  p.location.y, p.location.z, p.rp_label.c_str());
    std::cout << line << "\n";
  }
  return 0;
}

int cmd_evaluate(const cli::RunConfig& cfg) {
  const data::FingerprintDatabase db = load_dataset(cfg);
  std::vector<std::string> devices = cfg.devices;
  if (devices.empty()) {
    const std::set<std::string> all = db.devices();
    devices.assign(all.begin(), all.end());
  }
  eval::CrossDeviceOptions options;
  options.diagonal_train_per_rp = cfg.train_per_rp;
  options.diagonal_test_per_rp = cfg.test_per_rp;
  options.split_seed = cfg.gbt_cfg.seed;
  options.augment = cfg.augment;

  std::vector<double> all_errors;
  eval::EvaluationReport report;
  report.sae_cfg = cfg.sae_cfg;
  report.gbt_cfg = cfg.gbt_cfg;
  report.dataset = cfg.data;
  report.matrix = eval::cross_device_matrix(db, devices, cfg.sae_cfg,
                                            cfg.gbt_cfg, options, &all_errors);
  if (!all_errors.empty()) report.stats = eval::error_stats(all_errors);

  const std::string dir = make_run_dir(cfg);
  write_config_echo(cfg, dir);
  eval::emit_report(report, dir,
                    cfg.report_format == "json" ? eval::ReportFormat::kJson
                                                : eval::ReportFormat::kCsv);
  std::cout << "run_dir: " << dir << "\n";
  if (report.stats) {
    std::cout << "errors: min " << report.stats->min << " m, mean "
              << report.stats->mean << " m, max " << report.stats->max
              << " m over " << report.stats->n << " predictions\n";
  }
  return 0;
}

int cmd_ablate(const cli::RunConfig& cfg) {
  const data::FingerprintDatabase db = load_dataset(cfg);
  data::FingerprintDatabase train, test;
  if (!cfg.train_devices.empty() || !cfg.test_devices.empty()) {
    if (cfg.train_devices.empty() || cfg.test_devices.empty()) {
      throw Error("ablate needs both --train-devices and --test-devices");
    }
    std::tie(train, test) = data::split_by_device(
        db, {cfg.train_devices.begin(), cfg.train_devices.end()},
        {cfg.test_devices.begin(), cfg.test_devices.end()});
  } else {
    std::tie(train, test) =
        data::split_per_rp(db, cfg.train_per_rp, cfg.test_per_rp,
                           cfg.gbt_cfg.seed);
  }

  eval::EvaluationReport report;
  report.sae_cfg = cfg.sae_cfg;
  report.gbt_cfg = cfg.gbt_cfg;
  report.dataset = cfg.data;
  report.ablation = eval::ablation_sae(train, test, cfg.sae_cfg, cfg.gbt_cfg);

  const std::string dir = make_run_dir(cfg);
  write_config_echo(cfg, dir);
  eval::emit_report(report, dir, eval::ReportFormat::kJson);
  std::cout << "run_dir: " << dir << "\n"
            << "mean error with SAE: " << report.ablation->with_sae.mean
            << " m\n"
            << "mean error without SAE: " << report.ablation->without_sae.mean
            << " m\n"
            << "relative mean delta: "
            << report.ablation->relative_mean_delta * 100.0 << "%\n";
  return 0;
}

int cmd_bench(const cli::RunConfig& cfg) {
  if (cfg.model.empty()) throw Error("bench needs --model");
  if (cfg.scan.empty()) throw Error("bench needs --scan");
  const pipeline::SangriaModel model = pipeline::load_model_file(cfg.model);
  const std::vector<pipeline::Scan> scans = pipeline::load_scans(cfg.scan);

  eval::EvaluationReport report;
  report.sae_cfg = cfg.sae_cfg;
  report.gbt_cfg = cfg.gbt_cfg;
  report.dataset = cfg.scan;
  report.latency =
      eval::latency_benchmark(model, scans, cfg.bench_repetitions);

  const std::string dir = make_run_dir(cfg);
  write_config_echo(cfg, dir);
  eval::emit_report(report, dir, eval::ReportFormat::kJson);
  std::cout << "run_dir: " << dir << "\n"
            << "queries: " << report.latency->per_query_ms.size() << "\n"
            << "average_ms: " << report.latency->average_ms << "\n";
  return 0;
}

void add_common_options(CLI::App* sub, cli::RunConfig& cfg) {
  sub->add_option("-c,--config")
      ->description("flat key = value config file; flags override")
      ->check(CLI::ExistingFile);
  sub->add_option("--seed",
                  [&cfg](const CLI::results_t& res) {
                    cli::apply_config_entry(cfg, "seed", res[0]);
                    return true;
                  },
                  "master seed for both training stages")
      ->type_name("UINT");
}

void add_data_options(CLI::App* sub, cli::RunConfig& cfg) {
  sub->add_option("--data", cfg.data, "dataset CSV path")
      ->capture_default_str();
  sub->add_option("--format", cfg.format, "dataset format: uji | canonical")
      ->check(CLI::IsMember({"uji", "canonical"}))
      ->capture_default_str();
  sub->add_option("--floor-height", cfg.floor_height,
                  "meters per floor index (uji format)")
      ->capture_default_str();
}

void add_training_options(CLI::App* sub, cli::RunConfig& cfg) {
  sub->add_flag("--augment,!--no-augment", cfg.augment,
                "train the autoencoder and double the training set")
      ->capture_default_str();
  sub->add_option("--sae-hidden-dim", cfg.sae_cfg.hidden_dim,
                  "autoencoder hidden width (0 = half the input)")
      ->capture_default_str();
  sub->add_option("--sae-code-dim", cfg.sae_cfg.code_dim,
                  "autoencoder code width (0 = quarter of the input)")
      ->capture_default_str();
  sub->add_option("--sae-learning-rate", cfg.sae_cfg.learning_rate,
                  "autoencoder SGD step")
      ->capture_default_str();
  sub->add_option("--sae-epochs", cfg.sae_cfg.epochs, "autoencoder epochs")
      ->capture_default_str();
  sub->add_option("--sae-batch-size", cfg.sae_cfg.batch_size,
                  "autoencoder mini-batch size")
      ->capture_default_str();
  sub->add_option("--sae-seed", cfg.sae_cfg.seed, "autoencoder seed")
      ->capture_default_str();
  sub->add_option("--gbt-iterations", cfg.gbt_cfg.iterations,
                  "boosting iterations")
      ->capture_default_str();
  sub->add_option("--gbt-depth", cfg.gbt_cfg.depth, "oblivious tree depth")
      ->capture_default_str();
  sub->add_option("--gbt-learning-rate", cfg.gbt_cfg.learning_rate,
                  "per-tree shrinkage")
      ->capture_default_str();
  sub->add_option("--gbt-l2-leaf-reg", cfg.gbt_cfg.l2_leaf_reg,
                  "L2 leaf regularization")
      ->capture_default_str();
  sub->add_option("--gbt-n-bins", cfg.gbt_cfg.n_bins,
                  "histogram bins per feature")
      ->capture_default_str();
  sub->add_option("--gbt-feature-fraction", cfg.gbt_cfg.feature_fraction,
                  "features drawn per iteration")
      ->capture_default_str();
  sub->add_option("--gbt-seed", cfg.gbt_cfg.seed, "boosting seed")
      ->capture_default_str();
  sub->add_option("--gbt-threads", cfg.gbt_cfg.threads,
                  "split-search workers (0 = hardware)")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  cli::RunConfig cfg;
  try {
    cfg = preload_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"Wi-Fi RSS fingerprint indoor localization: stacked-autoencoder "
               "augmentation with gradient-boosted oblivious trees"};
  app.require_subcommand(1);

  CLI::App* ingest = app.add_subcommand(
      "ingest", "load a dataset, report a summary, optionally convert to "
                "canonical CSV");
  add_common_options(ingest, cfg);
  add_data_options(ingest, cfg);
  ingest->add_option("--out", cfg.out, "write the canonical CSV here")
      ->capture_default_str();

  CLI::App* train = app.add_subcommand("train", "train a localization model");
  add_common_options(train, cfg);
  add_data_options(train, cfg);
  add_training_options(train, cfg);
  train->add_option("--out", cfg.out, "model artifact path")
      ->capture_default_str();

  CLI::App* predict =
      app.add_subcommand("predict", "predict locations for scans");
  add_common_options(predict, cfg);
  predict->add_option("--model", cfg.model, "model artifact path")
      ->capture_default_str();
  predict->add_option("--scan", cfg.scan, "scan file (csv or json)")
      ->capture_default_str();

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "cross-device error matrix and pooled statistics");
  add_common_options(evaluate, cfg);
  add_data_options(evaluate, cfg);
  add_training_options(evaluate, cfg);
  evaluate
      ->add_option("--devices",
                   [&cfg](const CLI::results_t& res) {
                     cfg.devices = cli::split_device_list(res[0]);
                     return true;
                   },
                   "comma-separated device list (default: all)")
      ->type_name("LIST");
  evaluate->add_option("--train-per-rp", cfg.train_per_rp,
                       "diagonal-cell training samples per RP")
      ->capture_default_str();
  evaluate->add_option("--test-per-rp", cfg.test_per_rp,
                       "diagonal-cell testing samples per RP")
      ->capture_default_str();
  evaluate->add_option("--out", cfg.out, "directory for run outputs")
      ->capture_default_str();
  evaluate
      ->add_option("--report-format", cfg.report_format,
                   "matrix file format: csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  CLI::App* ablate = app.add_subcommand(
      "ablate", "paired runs with and without autoencoder augmentation");
  add_common_options(ablate, cfg);
  add_data_options(ablate, cfg);
  add_training_options(ablate, cfg);
  ablate
      ->add_option("--train-devices",
                   [&cfg](const CLI::results_t& res) {
                     cfg.train_devices = cli::split_device_list(res[0]);
                     return true;
                   },
                   "devices supplying training records")
      ->type_name("LIST");
  ablate
      ->add_option("--test-devices",
                   [&cfg](const CLI::results_t& res) {
                     cfg.test_devices = cli::split_device_list(res[0]);
                     return true;
                   },
                   "devices supplying testing records")
      ->type_name("LIST");
  ablate->add_option("--train-per-rp", cfg.train_per_rp,
                     "per-RP training samples when no device split is given")
      ->capture_default_str();
  ablate->add_option("--test-per-rp", cfg.test_per_rp,
                     "per-RP testing samples when no device split is given")
      ->capture_default_str();
  ablate->add_option("--out", cfg.out, "directory for run outputs")
      ->capture_default_str();

  CLI::App* bench =
      app.add_subcommand("bench", "inference latency of a trained model");
  add_common_options(bench, cfg);
  bench->add_option("--model", cfg.model, "model artifact path")
      ->capture_default_str();
  bench->add_option("--scan", cfg.scan, "scan file with benchmark queries")
      ->capture_default_str();
  bench->add_option("--repetitions", cfg.bench_repetitions,
                    "passes over the query list")
      ->capture_default_str();
  bench->add_option("--out", cfg.out, "directory for run outputs")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage diagnostic
    return 2;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (predict->parsed()) return cmd_predict(cfg);
    if (evaluate->parsed()) return cmd_evaluate(cfg);
    if (ablate->parsed()) return cmd_ablate(cfg);
    if (bench->parsed()) return cmd_bench(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
