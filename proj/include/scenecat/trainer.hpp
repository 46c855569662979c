#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "scenecat/data.hpp"
#include "scenecat/model.hpp"

namespace scenecat {

struct TrainConfig {
  int batch_size = 64;
  int epochs = 1500;
  double learning_rate = 0.001;
  double lambda = 0.2;      // classification weight
  double beta = 0.25;       // commitment weight
  int codebook_entries = 64;  // Q
  int latent_dim = 64;        // R_q
  std::vector<int> hidden = {512, 128};
  double gamma = 0.99;
  double epsilon = 1e-3;
  std::uint64_t seed = 0;
  bool reinit_enabled = true;
  int h = 1, w = 1;  // latent feature-map extent (1×1 for vector latents)
  ClassifierInput classifier_input = ClassifierInput::kEncoderOutput;
  bool early_stop = false;
  double early_stop_tolerance = 1e-6;  // relative L_rec improvement
  int early_stop_patience = 20;

  ModelConfig model_config() const;
  void validate(std::size_t dataset_size) const;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double l_rec = 0, l_vq = 0, l_commit = 0, l_cl = 0, l_total = 0;
};

struct TrainReport {
  std::vector<EpochLog> epochs;
  int final_used_entries = 0;  // usage over the training set at the end
  long probability_clamps = 0;  // log-argument clamps in the CE loss
  bool early_stopped = false;
  int epochs_run = 0;
  double wall_seconds = 0;  // informational only, never serialized
};

struct TrainResult {
  ModelParams params;
  Codebook codebook;
  FeatureStats stats;  // computed from the training data
  TrainReport report;
};

struct CvqLoss {
  double reconstruction = 0, codebook = 0, commitment = 0;
  double total = 0;  // reconstruction + codebook + β·commitment
};

// Batch-mean VQ loss; throws NumericError when any term is non-finite.
CvqLoss loss_cvq(const Eigen::MatrixXd& batch, const Eigen::MatrixXd& reconstructions,
                 const Eigen::MatrixXd& z_hat, const Eigen::MatrixXd& z_q, double beta);

// Batch-mean cross entropy, natural log, probabilities clamped at 1e-12
// (clamps counted into *clamp_count when given).
double loss_cl(const Eigen::MatrixXd& probabilities, const std::vector<int>& labels,
               long* clamp_count = nullptr);

double loss_total(double l_cvq, double l_cl, double lambda);

// Adam over a flat list of tensors, moments kept per tensor.
class AdamOptimizer {
 public:
  AdamOptimizer(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // one update across all registered tensors; call begin_step() once per
  // batch before apply()ing each tensor
  void begin_step() { ++step_; }
  void apply(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, std::size_t slot);
  void apply(Eigen::VectorXd& param, const Eigen::VectorXd& grad, std::size_t slot);
  std::size_t register_tensor(Eigen::Index rows, Eigen::Index cols);

 private:
  struct Moments {
    Eigen::MatrixXd m, v;
  };
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<Moments> moments_;
};

// Full training loop: per batch forward → losses → backward → Adam step →
// codebook usage/decay/anchor/reinit. Deterministic per seed. Throws
// NumericError naming epoch and batch if a loss goes non-finite.
TrainResult train(const Dataset& dataset, const TrainConfig& config);

// Normalized input matrix (rows = scenarios) plus labels, shared by trainer
// and evaluation.
Eigen::MatrixXd dataset_matrix(const Dataset& dataset, const FeatureStats& stats);
std::vector<int> dataset_labels(const Dataset& dataset);

}  // namespace scenecat
