#include "scenecat/checkpoint.hpp"

#include <cstdint>
#include <vector>

#include "scenecat/container.hpp"
#include "scenecat/manifest.hpp"

namespace scenecat {

namespace {

// matrices stored row-major in the container regardless of Eigen's layout
void add_matrix(ContainerWriter& writer, const std::string& name, const Eigen::MatrixXd& m) {
  std::vector<double> buf(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      buf[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
  writer.add_f64(name, buf.data(),
                 {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())});
}

void add_vector(ContainerWriter& writer, const std::string& name, const Eigen::VectorXd& v) {
  writer.add_f64(name, v.data(), {static_cast<std::uint64_t>(v.size())});
}

Eigen::MatrixXd read_matrix(const ContainerReader& reader, const std::string& name) {
  const Section& s = reader.section(name);
  if (s.shape.size() != 2) throw IoError("section '" + name + "' is not a matrix");
  std::vector<double> buf = reader.f64(name);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(s.shape[0]), static_cast<Eigen::Index>(s.shape[1]));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = buf[static_cast<std::size_t>(r * m.cols() + c)];
  return m;
}

Eigen::VectorXd read_vector(const ContainerReader& reader, const std::string& name) {
  std::vector<double> buf = reader.f64(name);
  return Eigen::Map<const Eigen::VectorXd>(buf.data(), static_cast<Eigen::Index>(buf.size()));
}

const char* classifier_input_name(ClassifierInput ci) {
  return ci == ClassifierInput::kQuantized ? "z_q" : "z_hat";
}

ClassifierInput classifier_input_from_name(const std::string& name) {
  if (name == "z_q") return ClassifierInput::kQuantized;
  if (name == "z_hat") return ClassifierInput::kEncoderOutput;
  throw ConfigError("unknown classifier input '" + name + "' (expected z_hat or z_q)");
}

}  // namespace

nlohmann::json train_config_json(const TrainConfig& c) {
  return nlohmann::json{{"batch_size", c.batch_size},
                        {"epochs", c.epochs},
                        {"learning_rate", c.learning_rate},
                        {"lambda", c.lambda},
                        {"beta", c.beta},
                        {"codebook_entries", c.codebook_entries},
                        {"latent_dim", c.latent_dim},
                        {"hidden", c.hidden},
                        {"gamma", c.gamma},
                        {"epsilon", c.epsilon},
                        {"seed", c.seed},
                        {"reinit_enabled", c.reinit_enabled},
                        {"h", c.h},
                        {"w", c.w},
                        {"classifier_input", classifier_input_name(c.classifier_input)},
                        {"early_stop", c.early_stop},
                        {"early_stop_tolerance", c.early_stop_tolerance},
                        {"early_stop_patience", c.early_stop_patience}};
}

TrainConfig train_config_from_json(const nlohmann::json& js) {
  TrainConfig c;
  c.batch_size = js.value("batch_size", c.batch_size);
  c.epochs = js.value("epochs", c.epochs);
  c.learning_rate = js.value("learning_rate", c.learning_rate);
  c.lambda = js.value("lambda", c.lambda);
  c.beta = js.value("beta", c.beta);
  c.codebook_entries = js.value("codebook_entries", c.codebook_entries);
  c.latent_dim = js.value("latent_dim", c.latent_dim);
  c.hidden = js.value("hidden", c.hidden);
  c.gamma = js.value("gamma", c.gamma);
  c.epsilon = js.value("epsilon", c.epsilon);
  c.seed = js.value("seed", c.seed);
  c.reinit_enabled = js.value("reinit_enabled", c.reinit_enabled);
  c.h = js.value("h", c.h);
  c.w = js.value("w", c.w);
  c.classifier_input =
      classifier_input_from_name(js.value("classifier_input", std::string("z_hat")));
  c.early_stop = js.value("early_stop", c.early_stop);
  c.early_stop_tolerance = js.value("early_stop_tolerance", c.early_stop_tolerance);
  c.early_stop_patience = js.value("early_stop_patience", c.early_stop_patience);
  return c;
}

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const Codebook& codebook, const FeatureStats& stats,
                     const TrainConfig& config) {
  ContainerWriter writer("scenecat.checkpoint");

  nlohmann::json train_js = train_config_json(config);
  nlohmann::json meta;
  meta["train"] = train_js;
  meta["config_sha256"] = sha256_hex(train_js.dump());
  meta["encoder_layers"] = params.encoder.size();
  meta["decoder_layers"] = params.decoder.size();
  writer.set_meta(meta);

  for (std::size_t l = 0; l < params.encoder.size(); ++l) {
    add_matrix(writer, "enc" + std::to_string(l) + ".w", params.encoder[l].w);
    add_vector(writer, "enc" + std::to_string(l) + ".b", params.encoder[l].b);
  }
  for (std::size_t l = 0; l < params.decoder.size(); ++l) {
    add_matrix(writer, "dec" + std::to_string(l) + ".w", params.decoder[l].w);
    add_vector(writer, "dec" + std::to_string(l) + ".b", params.decoder[l].b);
  }
  add_matrix(writer, "cls.w", params.classifier.w);
  add_vector(writer, "cls.b", params.classifier.b);
  add_matrix(writer, "codebook", codebook.entries());
  add_vector(writer, "codebook_usage", codebook.ema_usage());
  writer.add_f64("feat_mean", stats.mean.data(), {static_cast<std::uint64_t>(kFeatureCount)});
  writer.add_f64("feat_stddev", stats.stddev.data(),
                 {static_cast<std::uint64_t>(kFeatureCount)});

  writer.write(path);
}

CheckpointData load_checkpoint(const std::string& path) {
  ContainerReader reader(path);
  if (reader.kind() != "scenecat.checkpoint")
    throw IoError("'" + path + "' is a '" + reader.kind() + "' container, expected a checkpoint");

  TrainConfig config = train_config_from_json(reader.meta().at("train"));

  ModelParams params;
  params.config = config.model_config();
  const auto enc_layers = reader.meta().at("encoder_layers").get<std::size_t>();
  const auto dec_layers = reader.meta().at("decoder_layers").get<std::size_t>();
  for (std::size_t l = 0; l < enc_layers; ++l)
    params.encoder.push_back({read_matrix(reader, "enc" + std::to_string(l) + ".w"),
                              read_vector(reader, "enc" + std::to_string(l) + ".b")});
  for (std::size_t l = 0; l < dec_layers; ++l)
    params.decoder.push_back({read_matrix(reader, "dec" + std::to_string(l) + ".w"),
                              read_vector(reader, "dec" + std::to_string(l) + ".b")});
  params.classifier = {read_matrix(reader, "cls.w"), read_vector(reader, "cls.b")};

  Codebook codebook(config.codebook_entries, config.latent_dim, config.gamma, config.epsilon,
                    config.reinit_enabled, config.seed);
  codebook.restore(read_matrix(reader, "codebook"), read_vector(reader, "codebook_usage"));

  FeatureStats stats;
  std::vector<double> mean = reader.f64("feat_mean");
  std::vector<double> sd = reader.f64("feat_stddev");
  for (int f = 0; f < kFeatureCount; ++f) {
    stats.mean[static_cast<std::size_t>(f)] = mean[static_cast<std::size_t>(f)];
    stats.stddev[static_cast<std::size_t>(f)] = sd[static_cast<std::size_t>(f)];
  }

  return CheckpointData{std::move(params), std::move(codebook), stats, config,
                        reader.meta().at("config_sha256").get<std::string>()};
}

}  // namespace scenecat
