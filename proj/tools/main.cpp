#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "scenecat/checkpoint.hpp"
#include "scenecat/completeness.hpp"
#include "scenecat/csv.hpp"
#include "scenecat/data.hpp"
#include "scenecat/dataset_io.hpp"
#include "scenecat/manifest.hpp"
#include "scenecat/metrics.hpp"
#include "scenecat/model.hpp"
#include "scenecat/trainer.hpp"

namespace fs = std::filesystem;
using scenecat::kClassCount;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// manifest.json accumulates checksums across commands sharing an out-dir
void update_manifest(const fs::path& out_dir, const std::vector<std::string>& new_files,
                     const nlohmann::json& notes = nlohmann::json::object()) {
  const fs::path manifest_path = out_dir / "manifest.json";
  nlohmann::json manifest;
  manifest["files"] = nlohmann::json::object();
  manifest["notes"] = nlohmann::json::object();
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    try {
      nlohmann::json old = nlohmann::json::parse(in);
      if (old.contains("files")) manifest["files"] = old["files"];
      if (old.contains("notes")) manifest["notes"] = old["notes"];
    } catch (const nlohmann::json::exception&) {
      // stale or foreign file: rebuild from scratch
    }
  }
  for (const std::string& rel : new_files)
    manifest["files"][rel] = scenecat::sha256_file((out_dir / rel).string());
  for (const auto& [key, value] : notes.items()) manifest["notes"][key] = value;

  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw scenecat::IoError("cannot write '" + manifest_path.string() + "'");
  out << manifest.dump(2) << "\n";
}

struct DataOutOptions {
  std::string out_dir = ".";
  std::string name = "dataset";
  double split_fraction = 0;  // 0 = no split
  bool balance = false;
};

// shared tail of synth/ingest: optional balance, optional split, save, manifest
void finish_dataset(scenecat::Dataset dataset, const DataOutOptions& out_opts,
                    std::uint64_t seed) {
  fs::create_directories(out_opts.out_dir);
  const fs::path dir(out_opts.out_dir);

  if (out_opts.balance) dataset = scenecat::balance_dataset(dataset, seed);

  std::vector<std::string> written;
  if (out_opts.split_fraction > 0) {
    auto [train, test] = scenecat::split_dataset(dataset, out_opts.split_fraction, seed);
    const std::string train_name = out_opts.name + "_train.scn";
    const std::string test_name = out_opts.name + "_test.scn";
    scenecat::save_dataset(train, (dir / train_name).string());
    scenecat::save_dataset(test, (dir / test_name).string());
    written = {train_name, test_name};
    std::cout << "wrote " << train.size() << " train / " << test.size() << " test scenarios\n";
  } else {
    const std::string name = out_opts.name + ".scn";
    scenecat::save_dataset(dataset, (dir / name).string());
    written = {name};
    std::cout << "wrote " << dataset.size() << " scenarios\n";
  }
  update_manifest(dir, written);
}

std::vector<double> load_distribution_file(const std::string& path) {
  if (!fs::exists(path)) throw scenecat::IoError("distribution file '" + path + "' not found");
  std::vector<double> probs;
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    std::ifstream in(path);
    nlohmann::json js = nlohmann::json::parse(in);
    const nlohmann::json& arr = js.is_array() ? js : js.at("probabilities");
    for (const auto& v : arr) probs.push_back(v.get<double>());
  } else {
    scenecat::CsvReader reader(path);
    int col = reader.column("probability");
    std::vector<std::string_view> row;
    while (reader.next_row(row)) probs.push_back(reader.parse_double(row, col, "probability"));
  }
  if (probs.empty()) throw scenecat::ConfigError("'" + path + "' holds no probabilities");
  return probs;
}

// ---- subcommand payloads --------------------------------------------------

struct SynthArgs {
  int per_class = 10;
  int clusters = 0;
  int lanes = 3;
  double lane_width = 3.7;
  double speed_min = 23.0, speed_max = 37.0;
  double noise = 1.0;
  std::uint64_t seed = 0;
  DataOutOptions out;
};

void run_synth(const SynthArgs& args) {
  scenecat::SynthConfig config;
  config.per_class = {args.per_class, args.per_class, args.per_class};
  config.clusters = args.clusters;
  config.lane_count = args.lanes;
  config.lane_width = args.lane_width;
  config.speed_min = args.speed_min;
  config.speed_max = args.speed_max;
  config.noise = args.noise;
  finish_dataset(scenecat::synth_generate(config, args.seed), args.out, args.seed);
}

struct IngestArgs {
  std::string tracks_path, meta_path;
  int stride = scenecat::kTimeSteps;
  int horizon = scenecat::kLabelHorizonFrames;
  std::uint64_t seed = 0;
  DataOutOptions out;
};

void run_ingest(const IngestArgs& args) {
  scenecat::IngestOptions options;
  options.window_stride = args.stride;
  options.horizon = args.horizon;
  scenecat::IngestStats stats;
  scenecat::Dataset dataset =
      scenecat::ingest_tracks(args.tracks_path, args.meta_path, options, &stats);
  std::cout << "windows considered: " << stats.windows_considered
            << ", short-horizon skips: " << stats.skipped_short_horizon
            << ", short-track skips: " << stats.skipped_no_target << "\n";
  finish_dataset(std::move(dataset), args.out, args.seed);
}

struct TrainArgs {
  std::string data_path;
  std::vector<int> q_values = {64};
  scenecat::TrainConfig base;
  bool no_reinit = false;
  std::string classifier_input = "z_hat";
  std::string out_dir = ".";
  std::string prefix;
};

// guards the "invalid q=0 → config error before any work" contract
const std::vector<int>& q_values_check(const std::vector<int>& qs) {
  if (qs.empty()) throw scenecat::ConfigError("at least one --q value required");
  return qs;
}

void run_train(const TrainArgs& args) {
  scenecat::TrainConfig base = args.base;
  base.reinit_enabled = !args.no_reinit;
  base.classifier_input = args.classifier_input == "z_q"
                              ? scenecat::ClassifierInput::kQuantized
                              : scenecat::ClassifierInput::kEncoderOutput;

  scenecat::Dataset dataset = scenecat::load_dataset(args.data_path);
  // validate every requested Q before any training starts
  for (int q : q_values_check(args.q_values)) {
    scenecat::TrainConfig config = base;
    config.codebook_entries = q;
    config.validate(dataset.size());
  }

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  std::vector<std::string> written;

  for (int q : args.q_values) {
    scenecat::TrainConfig config = base;
    config.codebook_entries = q;
    scenecat::TrainResult result = scenecat::train(dataset, config);

    const std::string ckpt_name = args.prefix + "model_q" + std::to_string(q) + ".ckpt";
    scenecat::save_checkpoint((dir / ckpt_name).string(), result.params, result.codebook,
                              result.stats, config);
    written.push_back(ckpt_name);

    const std::string log_name = args.prefix + "train_log_q" + std::to_string(q) + ".csv";
    {
      std::ofstream log(dir / log_name, std::ios::trunc);
      if (!log) throw scenecat::IoError("cannot write train log");
      log << "epoch,l_rec,l_vq,l_commit,l_cl,l_total\n";
      for (const scenecat::EpochLog& e : result.report.epochs)
        log << e.epoch << ',' << g17(e.l_rec) << ',' << g17(e.l_vq) << ',' << g17(e.l_commit)
            << ',' << g17(e.l_cl) << ',' << g17(e.l_total) << '\n';
    }
    written.push_back(log_name);

    const std::string report_name = args.prefix + "train_report_q" + std::to_string(q) + ".json";
    {
      nlohmann::json js;
      js["epochs_run"] = result.report.epochs_run;
      js["early_stopped"] = result.report.early_stopped;
      js["final_used_entries"] = result.report.final_used_entries;
      js["codebook_entries"] = q;
      js["probability_clamps"] = result.report.probability_clamps;
      js["final"] = {{"l_rec", result.report.epochs.back().l_rec},
                     {"l_vq", result.report.epochs.back().l_vq},
                     {"l_cl", result.report.epochs.back().l_cl},
                     {"l_total", result.report.epochs.back().l_total}};
      std::ofstream out(dir / report_name, std::ios::trunc);
      out << js.dump(2) << "\n";
    }
    written.push_back(report_name);

    std::cout << "q=" << q << ": " << result.report.epochs_run << " epochs, final L_rec "
              << result.report.epochs.back().l_rec << ", usage "
              << result.report.final_used_entries << "/" << q << " ("
              << result.report.wall_seconds << " s)\n";
  }
  update_manifest(dir, written);
}

struct EvaluateArgs {
  std::string checkpoint_path, data_path;
  std::string purity_mode = "empirical";
  std::string out_dir = ".";
  std::string prefix;
};

void run_evaluate(const EvaluateArgs& args) {
  if (args.purity_mode != "empirical" && args.purity_mode != "predicted")
    throw scenecat::ConfigError("purity mode must be 'empirical' or 'predicted'");

  scenecat::CheckpointData ckpt = scenecat::load_checkpoint(args.checkpoint_path);
  scenecat::Dataset dataset = scenecat::load_dataset(args.data_path);
  if (dataset.scenarios.empty()) throw scenecat::ConfigError("dataset is empty");

  // the checkpoint's stored (train-set) statistics define the input space
  Eigen::MatrixXd x = scenecat::dataset_matrix(dataset, ckpt.stats);
  std::vector<int> labels = scenecat::dataset_labels(dataset);
  scenecat::ForwardCache cache = scenecat::forward(ckpt.params, ckpt.codebook, x);

  const int q_count = ckpt.codebook.entry_count();
  scenecat::CategoryDistribution dist =
      scenecat::occurrence_probabilities(cache.assignments, q_count);
  scenecat::UsageStats usage = scenecat::usage_stats(q_count, cache.assignments, labels);
  scenecat::PurityReport purity =
      args.purity_mode == "predicted"
          ? scenecat::entropy_per_entry(cache.assignments, q_count, cache.probabilities)
          : scenecat::entropy_per_entry(cache.assignments, q_count, labels);

  std::vector<int> predicted;
  predicted.reserve(labels.size());
  for (Eigen::Index i = 0; i < cache.probabilities.rows(); ++i) {
    Eigen::Index best = 0;
    cache.probabilities.row(i).maxCoeff(&best);
    predicted.push_back(static_cast<int>(best));
  }
  scenecat::ConfusionMatrix confusion = scenecat::confusion_matrix(labels, predicted);

  double l_rec = (x - cache.reconstruction).squaredNorm() / static_cast<double>(x.rows());
  long correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == predicted[i]) ++correct;

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  const std::string p = args.prefix;

  {
    std::ofstream out(dir / (p + "occurrence.csv"), std::ios::trunc);
    if (!out) throw scenecat::IoError("cannot write occurrence.csv");
    out << "entry,count,probability\n";
    for (std::size_t q = 0; q < dist.counts.size(); ++q)
      out << q << ',' << dist.counts[q] << ',' << g17(dist.probabilities[q]) << '\n';
  }
  scenecat::write_usage_histogram_csv((dir / (p + "usage_histogram.csv")).string(), usage);
  scenecat::write_purity_csv((dir / (p + "purity.csv")).string(), purity);
  scenecat::write_confusion_csv((dir / (p + "confusion.csv")).string(), confusion);
  scenecat::RepresentativeExport reps = scenecat::export_representatives(
      (dir / (p + "representatives.csv")).string(), ckpt.params, ckpt.codebook, ckpt.stats,
      cache.assignments);

  nlohmann::json metrics;
  metrics["dataset_size"] = dataset.size();
  metrics["split_tag"] = dataset.split_tag;
  metrics["codebook_entries"] = q_count;
  metrics["used_entries"] = usage.used_entries;
  metrics["h_avg"] = purity.h_avg;
  metrics["purity_mode"] = args.purity_mode;
  metrics["reconstruction_loss"] = l_rec;
  metrics["accuracy"] = static_cast<double>(correct) / static_cast<double>(labels.size());
  metrics["confusion_diagonal"] = {confusion.rows(0, 0), confusion.rows(1, 1),
                                   confusion.rows(2, 2)};
  metrics["representatives_omitted"] = reps.omitted_entries;
  metrics["config_sha256"] = ckpt.config_sha256;
  {
    std::ofstream out(dir / (p + "metrics.json"), std::ios::trunc);
    if (!out) throw scenecat::IoError("cannot write metrics.json");
    out << metrics.dump(2) << "\n";
  }

  nlohmann::json notes;
  if (!reps.omitted_entries.empty()) {
    nlohmann::json omitted = reps.omitted_entries;
    notes[p + "representatives.csv"] =
        "unused entries omitted: " + omitted.dump();
  }
  update_manifest(dir,
                  {p + "occurrence.csv", p + "usage_histogram.csv", p + "purity.csv",
                   p + "confusion.csv", p + "representatives.csv", p + "metrics.json"},
                  notes);

  std::cout << "h_avg=" << purity.h_avg << " usage=" << usage.used_entries << "/" << q_count
            << " l_rec=" << l_rec << " accuracy=" << metrics["accuracy"].get<double>() << "\n";
}

struct CompletenessArgs {
  std::string dist_path;
  scenecat::CompletenessConfig config;
  std::string out_dir = ".";
  std::string prefix;
};

void run_completeness(const CompletenessArgs& args) {
  std::vector<double> probs = load_distribution_file(args.dist_path);
  scenecat::CategoryDistribution dist;
  dist.probabilities = probs;
  dist.counts.assign(probs.size(), 0);

  scenecat::CompletenessReport report = scenecat::completeness_report(dist, args.config);

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  const std::string p = args.prefix;
  scenecat::write_completeness_json((dir / (p + "completeness.json")).string(), report);
  scenecat::write_si_histogram_csv((dir / (p + "s_i_histogram.csv")).string(), report);
  {
    std::ofstream out(dir / (p + "s_min_table.csv"), std::ios::trunc);
    if (!out) throw scenecat::IoError("cannot write s_min_table.csv");
    out << "p_new,pilot_mean,pilot_stddev,required_sims,executed_sims,cap_applied,s_min\n";
    for (const scenecat::CompletenessEntry& e : report.entries)
      out << g17(e.p_new) << ',' << g17(e.pilot_mean) << ',' << g17(e.pilot_stddev) << ','
          << e.required << ',' << e.executed << ',' << (e.cap_applied ? 1 : 0) << ','
          << e.s_min << '\n';
  }
  update_manifest(dir, {p + "completeness.json", p + "s_i_histogram.csv", p + "s_min_table.csv"});

  for (const scenecat::CompletenessEntry& e : report.entries)
    std::cout << "p_new=" << e.p_new << " s_min=" << e.s_min
              << (e.cap_applied ? " (cap applied)" : "") << "\n";
  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
}

struct ReportArgs {
  std::string completeness_path;
  std::string data_path;
  std::string out_dir = ".";
  std::string prefix;
};

void run_report(const ReportArgs& args) {
  std::ifstream in(args.completeness_path);
  if (!in) throw scenecat::IoError("cannot open '" + args.completeness_path + "'");
  nlohmann::json completeness = nlohmann::json::parse(in);

  scenecat::Dataset dataset = scenecat::load_dataset(args.data_path);
  const auto size = static_cast<long>(dataset.size());

  nlohmann::json js;
  js["dataset_size"] = size;
  js["tau"] = completeness.at("tau");
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& entry : completeness.at("per_p_new")) {
    long s_min_value = entry.at("s_min").get<long>();
    rows.push_back({{"p_new", entry.at("p_new")},
                    {"s_min", s_min_value},
                    {"complete", size >= s_min_value}});
  }
  js["per_p_new"] = rows;

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  const std::string name = args.prefix + "report.json";
  {
    std::ofstream out(dir / name, std::ios::trunc);
    if (!out) throw scenecat::IoError("cannot write report.json");
    out << js.dump(2) << "\n";
  }
  update_manifest(dir, {name});

  for (const auto& row : rows)
    std::cout << "p_new=" << row["p_new"].get<double>() << " s_min=" << row["s_min"].get<long>()
              << " complete=" << (row["complete"].get<bool>() ? "yes" : "no") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"traffic scenario categorization and dataset completeness toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file");

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic scenario dataset");
  synth_cmd->add_option("--per-class", synth.per_class, "scenarios per behavior class");
  synth_cmd->add_option("--clusters", synth.clusters,
                        "motif cluster count (0 = continuous sampling)");
  synth_cmd->add_option("--lanes", synth.lanes, "lane count");
  synth_cmd->add_option("--lane-width", synth.lane_width, "lane width in meters");
  synth_cmd->add_option("--speed-min", synth.speed_min, "minimum base speed m/s");
  synth_cmd->add_option("--speed-max", synth.speed_max, "maximum base speed m/s");
  synth_cmd->add_option("--noise", synth.noise, "within-cluster jitter scale");
  synth_cmd->add_option("--seed", synth.seed, "master seed");
  synth_cmd->add_option("--out-dir", synth.out.out_dir, "output directory")
      ->envname("SCENECAT_OUT_DIR");
  synth_cmd->add_option("--name", synth.out.name, "output file stem");
  synth_cmd->add_option("--split", synth.out.split_fraction,
                        "train fraction; emits <name>_train/_test");
  synth_cmd->add_flag("--balance", synth.out.balance, "undersample to equal class counts");
  synth_cmd->callback([&] { run_synth(synth); });

  IngestArgs ingest;
  CLI::App* ingest_cmd = app.add_subcommand("ingest", "ingest highD-format track CSVs");
  ingest_cmd->add_option("--tracks", ingest.tracks_path, "tracks CSV path")->required();
  ingest_cmd->add_option("--meta", ingest.meta_path, "recording meta CSV path")->required();
  ingest_cmd->add_option("--stride", ingest.stride, "window stride in frames");
  ingest_cmd->add_option("--horizon", ingest.horizon, "label horizon in frames");
  ingest_cmd->add_option("--seed", ingest.seed, "master seed (balance/split)");
  ingest_cmd->add_option("--out-dir", ingest.out.out_dir, "output directory")
      ->envname("SCENECAT_OUT_DIR");
  ingest_cmd->add_option("--name", ingest.out.name, "output file stem");
  ingest_cmd->add_option("--split", ingest.out.split_fraction,
                         "train fraction; emits <name>_train/_test");
  ingest_cmd->add_flag("--balance", ingest.out.balance, "undersample to equal class counts");
  ingest_cmd->callback([&] { run_ingest(ingest); });

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train clustering models");
  train_cmd->add_option("--data", train.data_path, "training dataset file")->required();
  train_cmd->add_option("--q", train.q_values, "codebook sizes (repeatable)");
  train_cmd->add_option("--epochs", train.base.epochs, "training epochs");
  train_cmd->add_option("--batch-size", train.base.batch_size, "batch size");
  train_cmd->add_option("--lr", train.base.learning_rate, "learning rate");
  train_cmd->add_option("--lambda", train.base.lambda, "classification loss weight");
  train_cmd->add_option("--beta", train.base.beta, "commitment loss weight");
  train_cmd->add_option("--latent-dim", train.base.latent_dim, "latent dimension");
  train_cmd->add_option("--hidden", train.base.hidden, "hidden layer widths");
  train_cmd->add_option("--gamma", train.base.gamma, "usage EMA decay");
  train_cmd->add_option("--epsilon", train.base.epsilon, "decay exponent offset");
  train_cmd->add_option("--seed", train.base.seed, "master seed");
  train_cmd->add_flag("--no-reinit", train.no_reinit, "disable codebook reinitialization");
  train_cmd->add_option("--classifier-input", train.classifier_input,
                        "classifier input: z_hat or z_q");
  train_cmd->add_flag("--early-stop", train.base.early_stop, "stop on stalled L_rec");
  train_cmd->add_option("--out-dir", train.out_dir, "output directory")
      ->envname("SCENECAT_OUT_DIR");
  train_cmd->add_option("--prefix", train.prefix, "output file prefix");
  train_cmd->callback([&] { run_train(train); });

  EvaluateArgs evaluate;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "compute the metric bundle");
  eval_cmd->add_option("--checkpoint", evaluate.checkpoint_path, "checkpoint file")->required();
  eval_cmd->add_option("--data", evaluate.data_path, "dataset file")->required();
  eval_cmd->add_option("--purity-mode", evaluate.purity_mode, "empirical or predicted");
  eval_cmd->add_option("--out-dir", evaluate.out_dir, "output directory")
      ->envname("SCENECAT_OUT_DIR");
  eval_cmd->add_option("--prefix", evaluate.prefix, "output file prefix");
  eval_cmd->callback([&] { run_evaluate(evaluate); });

  CompletenessArgs completeness;
  CLI::App* comp_cmd = app.add_subcommand("completeness", "coupon-collector S_min analysis");
  comp_cmd->add_option("--dist", completeness.dist_path,
                       "occurrence CSV or probability JSON file")
      ->required();
  comp_cmd->add_option("--p-new", completeness.config.p_new_values,
                       "new-category probabilities (repeatable)");
  comp_cmd->add_option("--tau", completeness.config.tau, "completeness confidence");
  comp_cmd->add_option("--c", completeness.config.confidence_c, "confidence constant");
  comp_cmd->add_option("--e", completeness.config.standard_error, "target standard error");
  comp_cmd->add_option("--pilot", completeness.config.pilot_count, "pilot run count");
  comp_cmd->add_option("--max-sims", completeness.config.max_sims, "simulation cap");
  comp_cmd->add_option("--seed", completeness.config.seed, "master seed");
  comp_cmd->add_option("--out-dir", completeness.out_dir, "output directory")
      ->envname("SCENECAT_OUT_DIR");
  comp_cmd->add_option("--prefix", completeness.prefix, "output file prefix");
  comp_cmd->callback([&] { run_completeness(completeness); });

  ReportArgs report;
  CLI::App* report_cmd = app.add_subcommand("report", "pipeline summary with completeness verdict");
  report_cmd->add_option("--completeness", report.completeness_path, "completeness.json path")
      ->required();
  report_cmd->add_option("--data", report.data_path, "dataset file the verdict applies to")
      ->required();
  report_cmd->add_option("--out-dir", report.out_dir, "output directory")
      ->envname("SCENECAT_OUT_DIR");
  report_cmd->add_option("--prefix", report.prefix, "output file prefix");
  report_cmd->callback([&] { run_report(report); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
