#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "scenecat/checkpoint.hpp"
#include "scenecat/completeness.hpp"
#include "scenecat/data.hpp"
#include "scenecat/dataset_io.hpp"
#include "scenecat/metrics.hpp"
#include "scenecat/model.hpp"
#include "scenecat/trainer.hpp"

namespace py = pybind11;
using namespace scenecat;

namespace {

// trained model bundle: parameters + codebook + normalization statistics
struct TrainedModel {
  ModelParams params;
  Codebook codebook;
  FeatureStats stats;
  TrainConfig config;

  std::vector<int> assignments(const Dataset& dataset) const {
    Eigen::MatrixXd x = dataset_matrix(dataset, stats);
    return codebook.quantize(encode(params, x)).indices;
  }

  std::vector<int> predictions(const Dataset& dataset) const {
    Eigen::MatrixXd x = dataset_matrix(dataset, stats);
    ForwardCache cache = forward(params, codebook, x);
    std::vector<int> out;
    out.reserve(dataset.size());
    for (Eigen::Index i = 0; i < cache.probabilities.rows(); ++i) {
      Eigen::Index best = 0;
      cache.probabilities.row(i).maxCoeff(&best);
      out.push_back(static_cast<int>(best));
    }
    return out;
  }

  double h_avg(const Dataset& dataset) const {
    return entropy_per_entry(assignments(dataset), codebook.entry_count(),
                             dataset_labels(dataset))
        .h_avg;
  }

  double recon_loss(const Dataset& dataset) const {
    return reconstruction_loss(dataset, params, codebook, stats);
  }

  int used_entries(const Dataset& dataset) const {
    return usage_stats(codebook.entry_count(), assignments(dataset), {}).used_entries;
  }

  std::vector<std::vector<double>> confusion(const Dataset& dataset) const {
    ConfusionMatrix cm = confusion_matrix(dataset_labels(dataset), predictions(dataset));
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < kClassCount; ++r) {
      std::vector<double> row;
      for (int c = 0; c < kClassCount; ++c) row.push_back(cm.rows(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  }

  void save(const std::string& path) const {
    save_checkpoint(path, params, codebook, stats, config);
  }
};

TrainedModel train_py(const Dataset& dataset, int q, int epochs, int batch_size,
                      double learning_rate, double lambda, double beta, double gamma,
                      double epsilon, int latent_dim, std::vector<int> hidden,
                      std::uint64_t seed, bool reinit, const std::string& classifier_input) {
  TrainConfig config;
  config.codebook_entries = q;
  config.epochs = epochs;
  config.batch_size = batch_size;
  config.learning_rate = learning_rate;
  config.lambda = lambda;
  config.beta = beta;
  config.gamma = gamma;
  config.epsilon = epsilon;
  config.latent_dim = latent_dim;
  config.hidden = std::move(hidden);
  config.seed = seed;
  config.reinit_enabled = reinit;
  if (classifier_input == "z_q")
    config.classifier_input = ClassifierInput::kQuantized;
  else if (classifier_input == "z_hat")
    config.classifier_input = ClassifierInput::kEncoderOutput;
  else
    throw ConfigError("classifier_input must be 'z_hat' or 'z_q'");

  TrainResult result = train(dataset, config);
  return TrainedModel{std::move(result.params), std::move(result.codebook), result.stats,
                      config};
}

TrainedModel load_model_py(const std::string& path) {
  CheckpointData ckpt = load_checkpoint(path);
  return TrainedModel{std::move(ckpt.params), std::move(ckpt.codebook), ckpt.stats,
                      ckpt.train_config};
}

Dataset synth_py(int per_class, int clusters, std::uint64_t seed, int lanes, double noise) {
  SynthConfig config;
  config.per_class = {per_class, per_class, per_class};
  config.clusters = clusters;
  config.lane_count = lanes;
  config.noise = noise;
  return synth_generate(config, seed);
}

py::dict completeness_py(const std::vector<double>& probabilities,
                         const std::vector<double>& p_new_values, double tau, long pilot_count,
                         std::uint64_t max_sims, std::uint64_t seed) {
  CategoryDistribution dist;
  dist.probabilities = probabilities;
  dist.counts.assign(probabilities.size(), 0);
  CompletenessConfig config;
  if (!p_new_values.empty()) config.p_new_values = p_new_values;
  config.tau = tau;
  config.pilot_count = pilot_count;
  config.max_sims = max_sims;
  config.seed = seed;

  CompletenessReport report = completeness_report(dist, config);
  py::dict out;
  out["tau"] = report.tau;
  out["category_count"] = report.category_count;
  out["warnings"] = report.warnings;
  py::list entries;
  for (const CompletenessEntry& e : report.entries) {
    py::dict ej;
    ej["p_new"] = e.p_new;
    ej["pilot_mean"] = e.pilot_mean;
    ej["pilot_stddev"] = e.pilot_stddev;
    ej["required_sims"] = e.required;
    ej["executed_sims"] = e.executed;
    ej["cap_applied"] = e.cap_applied;
    ej["s_min"] = e.s_min;
    entries.append(std::move(ej));
  }
  out["per_p_new"] = entries;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "traffic scenario categorization and completeness analysis core";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<ParseError>(m, "ParseError");
  py::register_exception<IoError>(m, "IoError");
  py::register_exception<NumericError>(m, "NumericError");

  py::class_<Dataset>(m, "Dataset")
      .def("__len__", [](const Dataset& d) { return d.size(); })
      .def_property_readonly("split_tag", [](const Dataset& d) { return d.split_tag; })
      .def("class_counts",
           [](const Dataset& d) {
             auto counts = d.class_counts();
             return std::vector<long>(counts.begin(), counts.end());
           })
      .def("labels", [](const Dataset& d) { return dataset_labels(d); });

  m.def("synth_generate", &synth_py, py::arg("per_class"), py::arg("clusters") = 0,
        py::arg("seed") = 0, py::arg("lanes") = 3, py::arg("noise") = 1.0,
        "generate a synthetic scenario dataset");
  m.def("ingest_tracks",
        [](const std::string& tracks, const std::string& meta) {
          return ingest_tracks(tracks, meta);
        },
        py::arg("tracks_path"), py::arg("meta_path"),
        "ingest a highD-format tracks CSV with its recording meta CSV");
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));
  m.def("load_dataset",
        [](const std::string& path) { return load_dataset(path, nullptr); }, py::arg("path"));
  m.def("balance_dataset", &balance_dataset, py::arg("dataset"), py::arg("seed") = 0);
  m.def("split_dataset", &split_dataset, py::arg("dataset"), py::arg("train_fraction"),
        py::arg("seed") = 0);

  py::class_<TrainedModel>(m, "TrainedModel")
      .def("assignments", &TrainedModel::assignments, py::arg("dataset"))
      .def("predictions", &TrainedModel::predictions, py::arg("dataset"))
      .def("h_avg", &TrainedModel::h_avg, py::arg("dataset"))
      .def("reconstruction_loss", &TrainedModel::recon_loss, py::arg("dataset"))
      .def("used_entries", &TrainedModel::used_entries, py::arg("dataset"))
      .def("confusion_matrix", &TrainedModel::confusion, py::arg("dataset"))
      .def("save", &TrainedModel::save, py::arg("path"))
      .def_property_readonly("codebook_entries",
                             [](const TrainedModel& t) { return t.codebook.entry_count(); });

  m.def("train", &train_py, py::arg("dataset"), py::arg("q") = 64, py::arg("epochs") = 50,
        py::arg("batch_size") = 64, py::arg("learning_rate") = 1e-3, py::arg("lambda_") = 0.2,
        py::arg("beta") = 0.25, py::arg("gamma") = 0.99, py::arg("epsilon") = 1e-3,
        py::arg("latent_dim") = 64, py::arg("hidden") = std::vector<int>{512, 128},
        py::arg("seed") = 0, py::arg("reinit") = true, py::arg("classifier_input") = "z_hat",
        "train a clustering model on a dataset");
  m.def("load_checkpoint", &load_model_py, py::arg("path"));

  m.def("inject_new_category", &inject_new_category, py::arg("probabilities"),
        py::arg("p_new"));
  m.def("s_min", &s_min, py::arg("samples"), py::arg("tau"));
  m.def("pilot",
        [](const std::vector<double>& probs, long count, std::uint64_t seed) {
          PilotResult r = pilot(probs, count, seed);
          return py::make_tuple(r.mean, r.stddev);
        },
        py::arg("probabilities"), py::arg("count"), py::arg("seed") = 0);
  m.def("required_sims", &required_sims, py::arg("stddev"), py::arg("c") = 1.96,
        py::arg("e") = 0.01);
  m.def("completeness_report", &completeness_py, py::arg("probabilities"),
        py::arg("p_new") = std::vector<double>{}, py::arg("tau") = 0.95,
        py::arg("pilot_count") = 1000, py::arg("max_sims") = 100000, py::arg("seed") = 0,
        "full coupon-collector completeness analysis");

  m.attr("VEHICLE_SLOTS") = kVehicleSlots;
  m.attr("FEATURES") = kFeatureCount;
  m.attr("TIME_STEPS") = kTimeSteps;
  m.attr("CLASSES") = kClassCount;
}
