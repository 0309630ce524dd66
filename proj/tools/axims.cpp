// Copyright 2026 The AXIMS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: gen, preprocess, train, quantize, eval, monitor,
// bench. Exit status is 0 on success, 2 for bad input or configuration and
// 1 for any other failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "axims/capture/csv.hpp"
#include "axims/capture/raw.hpp"
#include "axims/capture/vcd.hpp"
#include "axims/monitor/monitor.hpp"
#include "axims/nn/metrics.hpp"
#include "axims/workflow.hpp"

namespace fs = std::filesystem;
using namespace axims;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void print_eval(const EvalReport& r, const std::string& model_name) {
  std::printf("%-12s %9s %9s %9s %9s %9s\n", "Model", "Acc(%)", "Prec(%)", "Rec(%)", "F1(%)", "AUC-ROC");
  std::printf("%-12s %9.2f %9.2f %9.2f %9.2f %9.4f\n", model_name.c_str(), 100 * r.accuracy, 100 * r.precision,
              100 * r.recall, 100 * r.f1, r.auc_roc);
  const auto& c = r.confusion;
  std::printf("confusion: TP=%llu FP=%llu TN=%llu FN=%llu  FPR=%.4f%%\n\n", static_cast<unsigned long long>(c.tp),
              static_cast<unsigned long long>(c.fp), static_cast<unsigned long long>(c.tn),
              static_cast<unsigned long long>(c.fn), 100 * r.false_positive_rate);
  std::printf("%-18s %8s %6s %6s %8s %8s\n", "Attack Vector", "Samples", "T.P.", "F.N.", "D.R.(%)", "Pr(%)");
  auto row = [](const std::string& name, const KindRow& k) {
    std::printf("%-18s %8llu %6llu %6llu %8.1f %8.1f\n", name.c_str(), static_cast<unsigned long long>(k.samples),
                static_cast<unsigned long long>(k.true_positives), static_cast<unsigned long long>(k.false_negatives),
                100 * k.detection_rate, 100 * k.precision);
  };
  for (const auto& k : r.per_kind) row(std::string(to_string(k.kind)), k);
  row("Overall", r.overall);
}

nlohmann::json eval_json(const EvalReport& r) {
  nlohmann::json kinds = nlohmann::json::array();
  for (const auto& k : r.per_kind) {
    kinds.push_back({{"kind", std::string(to_string(k.kind))},
                     {"samples", k.samples},
                     {"true_positives", k.true_positives},
                     {"false_negatives", k.false_negatives},
                     {"detection_rate", k.detection_rate},
                     {"precision", k.precision}});
  }
  return {{"accuracy", r.accuracy},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"auc_roc", r.auc_roc},
          {"false_positive_rate", r.false_positive_rate},
          {"confusion",
           {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}}},
          {"per_kind", kinds}};
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw ConfigError("bad integer list '" + s + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AXI4 bus traffic simulator and DoS detector"};
  app.set_config("--config", "", "INI/TOML file with option values (command line wins)");
  app.require_subcommand(1);
  app.fallthrough();  // --seed and --config may follow the subcommand

  RunConfig rc;
  std::uint64_t seed = kDefaultSeed;
  app.add_option("--seed", seed, "Seed for every random choice")->capture_default_str();

  // gen
  auto* gen = app.add_subcommand("gen", "Simulate traffic and write dataset.csv, trace.vcd, trace.raw");
  std::uint64_t normal = *rc.sim.normal_quota;
  std::string mix_spec = "default", gen_out = "out";
  gen->add_option("--normal", normal, "Normal transactions to generate")->capture_default_str();
  gen->add_option("--attack-mix", mix_spec, "none, default, or a file of Kind = count lines")->capture_default_str();
  gen->add_option("--cycles", rc.sim.cycles, "Simulation horizon in cycles")->capture_default_str();
  gen->add_option("--load", rc.sim.load_percent, "Target bus utilization in percent")->capture_default_str();
  gen->add_option("--masters", rc.sim.num_masters, "Number of bus masters")->capture_default_str();
  gen->add_option("-o,--out", gen_out, "Output directory")->capture_default_str();

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Fit decode + correlation prune + PCA on the training split");
  std::string pre_in = "out/dataset.csv", pre_out = "out";
  pre->add_option("-i,--input", pre_in, "Dataset CSV")->capture_default_str();
  pre->add_option("--variance", rc.variance_target, "Cumulative variance target for PCA")->capture_default_str();
  pre->add_option("--corr", rc.corr_threshold, "Correlation threshold")->capture_default_str();
  pre->add_option("--train-frac", rc.train_fraction, "Training share of the stratified split")->capture_default_str();
  pre->add_option("-o,--out", pre_out, "Output directory, or transform.json,features.csv paths")->capture_default_str();

  // train
  auto* trn = app.add_subcommand("train", "Train the full-precision MLP on SMOTE-balanced training rows");
  std::string features_in = "out/features.csv", train_out = "out/model_float.json";
  auto add_training = [&](CLI::App* sc) {
    sc->add_option("-i,--input", features_in, "Feature CSV from preprocess")->capture_default_str();
    sc->add_option("--epochs", rc.training.epochs, "Training epochs")->capture_default_str();
    sc->add_option("--lr", rc.training.learning_rate, "Adam learning rate")->capture_default_str();
    sc->add_option("--batch", rc.training.batch_size, "Mini-batch size")->capture_default_str();
    sc->add_option("--lambda", rc.training.lambda, "L2 coefficient")->capture_default_str();
    sc->add_option("--smote-k", rc.smote_k, "SMOTE neighbours")->capture_default_str();
  };
  add_training(trn);
  trn->add_option("-o,--out", train_out, "Model file")->capture_default_str();

  // quantize
  auto* qnt = app.add_subcommand("quantize", "Quantization-aware training with magnitude pruning");
  std::string fmt_spec = "8,5", quant_out = "out/model.json";
  add_training(qnt);
  qnt->add_option("--fmt", fmt_spec, "Weight format W,I")->capture_default_str();
  qnt->add_option("--sparsity", rc.sparsity_target, "Final pruning sparsity")->capture_default_str();
  qnt->add_option("-o,--out", quant_out, "Model file")->capture_default_str();

  // eval
  auto* evl = app.add_subcommand("eval", "Score the test split and print the metric tables");
  std::string model_in = "out/model.json", eval_json_out;
  evl->add_option("--model", model_in, "Float or quantized model file")->capture_default_str();
  evl->add_option("-i,--input", features_in, "Feature CSV from preprocess")->capture_default_str();
  evl->add_option("--threshold", rc.threshold, "Decision threshold")->capture_default_str();
  evl->add_option("--json", eval_json_out, "Also write the report as JSON");

  // monitor
  auto* mon = app.add_subcommand("monitor", "Run live traffic through the detector and log verdicts");
  std::string transform_in = "out/transform.json", mon_out = "out/verdicts.jsonl", mon_mix = "none";
  std::uint64_t mon_cycles = 100'000;
  int mon_load = 50;
  mon->add_option("--transform", transform_in, "Transform from preprocess")->capture_default_str();
  mon->add_option("--model", model_in, "Quantized model")->capture_default_str();
  mon->add_option("--load", mon_load, "Bus load in percent")->capture_default_str();
  mon->add_option("--cycles", mon_cycles, "Simulated cycles")->capture_default_str();
  mon->add_option("--attack-mix", mon_mix, "none, default, or a mix file")->capture_default_str();
  mon->add_option("--threshold", rc.threshold, "Decision threshold")->capture_default_str();
  mon->add_option("-o,--out", mon_out, "Verdict log (JSON lines)")->capture_default_str();

  // bench
  auto* bch = app.add_subcommand("bench", "Measure inference latency and throughput across bus loads");
  std::string loads_spec = "10,25,50,75,100", bench_out = "out/bench.csv";
  BenchOptions bo;
  bch->add_option("--transform", transform_in, "Transform from preprocess")->capture_default_str();
  bch->add_option("--model", model_in, "Quantized model")->capture_default_str();
  bch->add_option("--loads", loads_spec, "Comma-separated load percentages")->capture_default_str();
  bch->add_option("--duration", bo.duration_cycles, "Simulated cycles per load")->capture_default_str();
  bch->add_option("--reps", bo.repetitions, "Interleaved repetitions")->capture_default_str();
  bch->add_option("-o,--out", bench_out, "Report CSV")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc_parse = app.exit(e);
    return rc_parse == 0 ? 0 : 2;
  }
  rc.seed = seed;

  try {
    if (*gen) {
      rc.sim.normal_quota = normal;
      if (normal == 0) throw ConfigError("--normal must be positive");
      rc.mix = load_attack_mix(mix_spec);
      ensure_dir(gen_out);
      const SimConfig cfg = seeded_sim(rc);
      const SimTrace trace = generate_trace(rc);
      const Dataset ds = capture(trace, cfg);
      const auto csv = join(gen_out, "dataset.csv"), vcd = join(gen_out, "trace.vcd"), raw = join(gen_out, "trace.raw");
      export_csv(ds, csv);
      export_vcd(trace, cfg.bus_width_bytes, vcd);
      export_raw(ds, raw);
      std::printf("samples: %zu (normal %zu, malicious %zu), utilization %.3f\n", ds.rows.size(), ds.count(0),
                  ds.count(1), trace.utilization());
      std::printf("%s\n%s\n%s\n", csv.c_str(), vcd.c_str(), raw.c_str());
    } else if (*pre) {
      std::string transform_path = join(pre_out, "transform.json"), features_path = join(pre_out, "features.csv");
      if (const auto comma = pre_out.find(','); comma != std::string::npos) {
        transform_path = pre_out.substr(0, comma);
        features_path = pre_out.substr(comma + 1);
      } else {
        ensure_dir(pre_out);
      }
      const Dataset ds = import_csv(pre_in);
      const Preprocessed p = preprocess(ds, rc);
      const auto& r = p.fit.report;
      std::printf("%-40s %zu\n", "Raw captured features", r.raw_columns);
      std::printf("%-40s %zu\n", "Original features (debug removed)", r.decoded_columns);
      std::printf("%-40s %zu\n", "Post-correlation analysis (features)", r.kept_columns);
      char label[64];
      std::snprintf(label, sizeof label, "Post-PCA (%.0f%% variance) (components)", 100 * rc.variance_target);
      std::printf("%-40s %zu  (cumulative %.4f, correlation rounds %d)\n", label, r.components,
                  r.cumulative_variance, r.rounds);
      std::printf("split: %zu train / %zu test\n", p.features.train.size(), p.features.test.size());
      save_transform(p.fit.transform, transform_path);
      save_features(p.features, features_path);
      std::printf("%s\n%s\n", transform_path.c_str(), features_path.c_str());
    } else if (*trn) {
      const FeatureSplit fsplit = load_features(features_in);
      const TrainResult tr = train_float(fsplit, rc);
      std::printf("epochs %d, loss %.6f -> %.6f\n", rc.training.epochs, tr.loss_curve.front(), tr.loss_curve.back());
      write_json_file(to_json(tr.model), train_out);
      std::printf("%s\n", train_out.c_str());
    } else if (*qnt) {
      rc.weight_format = parse_fixed_format(fmt_spec);
      const FeatureSplit fsplit = load_features(features_in);
      const QuantizedTrainResult qr = train_detector(fsplit, rc);
      std::printf("format %s, sparsity %.4f, loss %.6f -> %.6f\n", rc.weight_format.to_string().c_str(),
                  qr.model.sparsity(), qr.loss_curve.front(), qr.loss_curve.back());
      write_json_file(to_json(qr.model), quant_out);
      std::printf("%s\n", quant_out.c_str());
    } else if (*evl) {
      const FeatureSplit fsplit = load_features(features_in);
      const nlohmann::json mj = read_json_file(model_in);
      std::vector<double> scores;
      std::string name;
      if (mj.value("kind", "") == "quantized") {
        const auto m = quantized_from_json(mj);
        scores = score_all(m, fsplit.test);
        name = m.weight_format.to_string();
      } else {
        scores = score_all(mlp_from_json(mj), fsplit.test);
        name = "float";
      }
      const EvalReport r = evaluate(scores, fsplit.test.y, fsplit.test.kind, rc.threshold);
      print_eval(r, name);
      if (!eval_json_out.empty()) {
        write_json_file(eval_json(r), eval_json_out);
        std::printf("%s\n", eval_json_out.c_str());
      }
    } else if (*mon) {
      const FeatureTransform ft = load_transform(transform_in);
      const QuantizedMlpModel model = quantized_from_json(read_json_file(model_in));
      SimConfig cfg = seeded_sim(rc);
      cfg.normal_quota.reset();
      cfg.cycles = mon_cycles;
      cfg.load_percent = mon_load;
      const auto plans = corpus_plans(cfg, load_attack_mix(mon_mix), rc.seed);
      std::ofstream os(mon_out);
      if (!os) throw IoError("cannot open " + mon_out + " for writing");
      std::uint64_t flagged = 0, tp = 0, fp = 0, attacks = 0;
      const MonitorResult res = monitor(cfg, plans, ft, model, {rc.threshold, kDefaultQueueCapacity},
                                        [&](const DetectionVerdict& d) {
                                          write_verdict_line(d, os);
                                          flagged += d.malicious;
                                          attacks += d.ground_truth.value_or(false);
                                          tp += d.malicious && d.ground_truth.value_or(false);
                                          fp += d.malicious && !d.ground_truth.value_or(false);
                                        });
      if (!os) throw IoError("write failed: " + mon_out);
      std::printf("verdicts %zu, flagged %llu (true %llu, false %llu), tagged attacks %llu, peak backlog %zu\n",
                  res.verdicts.size(), static_cast<unsigned long long>(flagged), static_cast<unsigned long long>(tp),
                  static_cast<unsigned long long>(fp), static_cast<unsigned long long>(attacks), res.max_backlog);
      std::printf("%s\n", mon_out.c_str());
    } else if (*bch) {
      const FeatureTransform ft = load_transform(transform_in);
      const QuantizedMlpModel model = quantized_from_json(read_json_file(model_in));
      bo.loads = parse_int_list(loads_spec);
      BenchReport br = bench(seeded_sim(rc), ft, model, bo);
      std::printf("%-10s %9s %14s %14s %18s\n", "Load(%)", "Samples", "Mean lat(ns)", "P99 lat(ns)", "Throughput(inf/s)");
      for (const auto& r : br.rows) {
        std::printf("%-10d %9zu %14.1f %14.1f %18.0f\n", r.load_percent, r.samples, r.mean_latency_ns,
                    r.p99_latency_ns, r.throughput);
      }
      std::ofstream os(bench_out);
      if (!os) throw IoError("cannot open " + bench_out + " for writing");
      write_bench_csv(br, os);
      if (!os) throw IoError("write failed: " + bench_out);
      std::printf("%s\n", bench_out.c_str());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.is_input_error() ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
