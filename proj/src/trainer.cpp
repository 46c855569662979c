#include "scenecat/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "scenecat/rng.hpp"

namespace scenecat {

ModelConfig TrainConfig::model_config() const {
  ModelConfig mc;
  mc.input_dim = kScenarioDim;
  mc.hidden = hidden;
  mc.latent_dim = latent_dim;
  mc.class_count = kClassCount;
  mc.classifier_input = classifier_input;
  return mc;
}

void TrainConfig::validate(std::size_t dataset_size) const {
  if (batch_size <= 0) throw ConfigError("batch size must be positive");
  if (static_cast<std::size_t>(batch_size) > dataset_size)
    throw ConfigError("batch size " + std::to_string(batch_size) + " exceeds dataset size " +
                      std::to_string(dataset_size));
  if (epochs <= 0) throw ConfigError("epoch count must be positive");
  if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (lambda < 0) throw ConfigError("lambda must be >= 0");
  if (beta < 0) throw ConfigError("beta must be >= 0");
  if (codebook_entries <= 0) throw ConfigError("codebook entry count must be positive");
  if (latent_dim <= 0) throw ConfigError("latent dimension must be positive");
  if (!(gamma > 0 && gamma < 1)) throw ConfigError("gamma must lie in (0,1)");
  if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
  if (h <= 0 || w <= 0) throw ConfigError("h and w must be positive");
  if (early_stop && early_stop_patience <= 0)
    throw ConfigError("early-stop patience must be positive");
  model_config().validate();
}

CvqLoss loss_cvq(const Eigen::MatrixXd& batch, const Eigen::MatrixXd& reconstructions,
                 const Eigen::MatrixXd& z_hat, const Eigen::MatrixXd& z_q, double beta) {
  if (batch.rows() == 0) throw std::invalid_argument("loss_cvq: empty batch");
  if (batch.rows() != reconstructions.rows() || z_hat.rows() != batch.rows() ||
      z_q.rows() != batch.rows())
    throw std::invalid_argument("loss_cvq: row counts disagree");
  const double n = static_cast<double>(batch.rows());
  CvqLoss loss;
  loss.reconstruction = (batch - reconstructions).squaredNorm() / n;
  loss.codebook = (z_hat - z_q).squaredNorm() / n;
  loss.commitment = loss.codebook;  // identical value; gradients differ by routing
  loss.total = loss.reconstruction + loss.codebook + beta * loss.commitment;
  if (!std::isfinite(loss.total)) throw NumericError("VQ loss is non-finite");
  return loss;
}

double loss_cl(const Eigen::MatrixXd& probabilities, const std::vector<int>& labels,
               long* clamp_count) {
  if (probabilities.rows() != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("loss_cl: label count != batch size");
  double ce = 0.0;
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= probabilities.cols())
      throw std::invalid_argument("loss_cl: label out of range");
    double p = probabilities(i, label);
    if (p < 1e-12) {
      p = 1e-12;
      if (clamp_count) ++*clamp_count;
    }
    ce -= std::log(p);
  }
  ce /= static_cast<double>(probabilities.rows());
  if (!std::isfinite(ce)) throw NumericError("classification loss is non-finite");
  return ce;
}

double loss_total(double l_cvq, double l_cl, double lambda) { return l_cvq + lambda * l_cl; }

std::size_t AdamOptimizer::register_tensor(Eigen::Index rows, Eigen::Index cols) {
  moments_.push_back({Eigen::MatrixXd::Zero(rows, cols), Eigen::MatrixXd::Zero(rows, cols)});
  return moments_.size() - 1;
}

void AdamOptimizer::apply(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad,
                          std::size_t slot) {
  Moments& mom = moments_.at(slot);
  mom.m = beta1_ * mom.m + (1.0 - beta1_) * grad;
  mom.v = beta2_ * mom.v + (1.0 - beta2_) * grad.array().square().matrix();
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  param.array() -=
      lr_ * (mom.m.array() / bias1) / ((mom.v.array() / bias2).sqrt() + eps_);
}

void AdamOptimizer::apply(Eigen::VectorXd& param, const Eigen::VectorXd& grad,
                          std::size_t slot) {
  Eigen::MatrixXd p = param, g = grad;
  apply(p, g, slot);
  param = p;
}

Eigen::MatrixXd dataset_matrix(const Dataset& dataset, const FeatureStats& stats) {
  Eigen::MatrixXd x(dataset.scenarios.size(), kScenarioDim);
  std::vector<double> row(kScenarioDim);
  for (std::size_t i = 0; i < dataset.scenarios.size(); ++i) {
    normalize_scenario(dataset.scenarios[i], stats, row.data());
    for (int j = 0; j < kScenarioDim; ++j) x(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
  }
  return x;
}

std::vector<int> dataset_labels(const Dataset& dataset) {
  std::vector<int> labels;
  labels.reserve(dataset.scenarios.size());
  for (const Scenario& s : dataset.scenarios) labels.push_back(static_cast<int>(s.label));
  return labels;
}

namespace {

struct ParamSlots {
  std::vector<std::pair<std::size_t, std::size_t>> encoder;  // (w slot, b slot)
  std::vector<std::pair<std::size_t, std::size_t>> decoder;
  std::pair<std::size_t, std::size_t> classifier;
  std::size_t codebook = 0;
};

ParamSlots register_all(AdamOptimizer& opt, const ModelParams& params, const Codebook& cb) {
  ParamSlots slots;
  auto reg_layer = [&opt](const DenseLayer& layer) {
    std::size_t w = opt.register_tensor(layer.w.rows(), layer.w.cols());
    std::size_t b = opt.register_tensor(layer.b.size(), 1);
    return std::make_pair(w, b);
  };
  for (const DenseLayer& l : params.encoder) slots.encoder.push_back(reg_layer(l));
  for (const DenseLayer& l : params.decoder) slots.decoder.push_back(reg_layer(l));
  slots.classifier = reg_layer(params.classifier);
  slots.codebook = opt.register_tensor(cb.entries().rows(), cb.entries().cols());
  return slots;
}

void apply_gradients(AdamOptimizer& opt, const ParamSlots& slots, ModelParams& params,
                     Codebook& cb, const Gradients& grads) {
  opt.begin_step();
  for (std::size_t l = 0; l < params.encoder.size(); ++l) {
    opt.apply(params.encoder[l].w, grads.encoder[l].w, slots.encoder[l].first);
    opt.apply(params.encoder[l].b, grads.encoder[l].b, slots.encoder[l].second);
  }
  for (std::size_t l = 0; l < params.decoder.size(); ++l) {
    opt.apply(params.decoder[l].w, grads.decoder[l].w, slots.decoder[l].first);
    opt.apply(params.decoder[l].b, grads.decoder[l].b, slots.decoder[l].second);
  }
  opt.apply(params.classifier.w, grads.classifier.w, slots.classifier.first);
  opt.apply(params.classifier.b, grads.classifier.b, slots.classifier.second);
  opt.apply(cb.mutable_entries(), grads.codebook, slots.codebook);
}

}  // namespace

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
  config.validate(dataset.size());
  const auto start_time = std::chrono::steady_clock::now();

  TrainResult result{ModelParams::init(config.model_config(), config.seed),
                     Codebook(config.codebook_entries, config.latent_dim, config.gamma,
                              config.epsilon, config.reinit_enabled, config.seed),
                     compute_feature_stats(dataset),
                     {}};

  const Eigen::MatrixXd x = dataset_matrix(dataset, result.stats);
  const std::vector<int> labels = dataset_labels(dataset);
  const std::size_t m = dataset.size();

  AdamOptimizer opt(config.learning_rate);
  ParamSlots slots = register_all(opt, result.params, result.codebook);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best_l_rec = std::numeric_limits<double>::infinity();
  int stall_epochs = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    auto epoch_rng = seeded_engine(config.seed, {0x65706fu, static_cast<std::uint64_t>(epoch)});
    deterministic_shuffle(order, epoch_rng);

    EpochLog log;
    log.epoch = epoch;
    double weight_sum = 0;

    for (std::size_t begin = 0, batch_id = 0; begin < m;
         begin += static_cast<std::size_t>(config.batch_size), ++batch_id) {
      const std::size_t count =
          std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), m - begin);

      Eigen::MatrixXd batch(count, kScenarioDim);
      std::vector<int> batch_labels(count);
      for (std::size_t i = 0; i < count; ++i) {
        batch.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(order[begin + i]));
        batch_labels[i] = labels[order[begin + i]];
      }

      ForwardCache cache = forward(result.params, result.codebook, batch);
      CvqLoss cvq = loss_cvq(batch, cache.reconstruction, cache.z_hat, cache.z_q, config.beta);
      double cl = loss_cl(cache.probabilities, batch_labels, &result.report.probability_clamps);
      double total = loss_total(cvq.total, cl, config.lambda);
      if (!std::isfinite(total))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_id));

      const double wgt = static_cast<double>(count);
      log.l_rec += cvq.reconstruction * wgt;
      log.l_vq += cvq.codebook * wgt;
      log.l_commit += cvq.commitment * wgt;
      log.l_cl += cl * wgt;
      log.l_total += total * wgt;
      weight_sum += wgt;

      Gradients grads = backward(result.params, result.codebook, cache, batch_labels,
                                 config.beta, config.lambda);
      apply_gradients(opt, slots, result.params, result.codebook, grads);

      std::vector<long> counts(static_cast<std::size_t>(config.codebook_entries), 0);
      for (int a : cache.assignments) counts[static_cast<std::size_t>(a)]++;
      result.codebook.maintenance_step(cache.z_hat, counts, static_cast<long>(count));
    }

    log.l_rec /= weight_sum;
    log.l_vq /= weight_sum;
    log.l_commit /= weight_sum;
    log.l_cl /= weight_sum;
    log.l_total /= weight_sum;
    result.report.epochs.push_back(log);
    result.report.epochs_run = epoch;

    if (config.early_stop) {
      if (log.l_rec < best_l_rec * (1.0 - config.early_stop_tolerance)) {
        best_l_rec = log.l_rec;
        stall_epochs = 0;
      } else if (++stall_epochs >= config.early_stop_patience) {
        result.report.early_stopped = true;
        break;
      }
    }
  }

  // final usage over the full training set
  QuantizeResult assignments = result.codebook.quantize(encode(result.params, x));
  UsageStats usage = usage_stats(config.codebook_entries, assignments.indices, labels);
  result.report.final_used_entries = usage.used_entries;

  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return result;
}

}  // namespace scenecat
