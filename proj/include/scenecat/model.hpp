#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scenecat/codebook.hpp"
#include "scenecat/common.hpp"

namespace scenecat {

// Which latent the classifier head consumes: the raw encoder output, or the
// quantized vector (gradients then reach the encoder straight-through).
enum class ClassifierInput { kEncoderOutput, kQuantized };

struct ModelConfig {
  int input_dim = kScenarioDim;
  std::vector<int> hidden = {512, 128};  // encoder widths; decoder mirrors
  int latent_dim = 64;
  int class_count = kClassCount;
  ClassifierInput classifier_input = ClassifierInput::kEncoderOutput;

  void validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd w;  // in × out
  Eigen::VectorXd b;  // out
};

// Dense autoencoder with a linear classification head. Hidden layers use
// tanh; output layers are linear. All math in 64-bit floats.
struct ModelParams {
  ModelConfig config;
  std::vector<DenseLayer> encoder;  // input → hidden... → latent
  std::vector<DenseLayer> decoder;  // latent → reversed hidden... → input
  DenseLayer classifier;            // latent → classes

  // Glorot-normal weights, zero biases, deterministic per seed.
  static ModelParams init(const ModelConfig& config, std::uint64_t seed);
};

struct ForwardCache {
  Eigen::MatrixXd input;                // B × input_dim (normalized)
  std::vector<Eigen::MatrixXd> enc_act; // post-activation per encoder layer
  Eigen::MatrixXd z_hat;                // B × latent (= enc_act.back())
  std::vector<int> assignments;         // codebook entry per row
  Eigen::MatrixXd z_q;                  // B × latent
  std::vector<Eigen::MatrixXd> dec_act; // post-activation per decoder layer
  Eigen::MatrixXd reconstruction;       // B × input_dim
  Eigen::MatrixXd logits;               // B × classes
  Eigen::MatrixXd probabilities;        // B × classes, rows sum to 1
};

struct Gradients {
  std::vector<DenseLayer> encoder;
  std::vector<DenseLayer> decoder;
  DenseLayer classifier;
  Eigen::MatrixXd codebook;  // Q × latent
};

// Rows are samples. Throws NumericError naming the layer if an activation
// goes non-finite, std::invalid_argument on shape mismatch.
Eigen::MatrixXd encode(const ModelParams& params, const Eigen::MatrixXd& input);
Eigen::MatrixXd decode(const ModelParams& params, const Eigen::MatrixXd& z);
Eigen::MatrixXd classify(const ModelParams& params, const Eigen::MatrixXd& z);

// Full pass: encode → quantize → decode(z_q) → classify(ẑ or z_q).
ForwardCache forward(const ModelParams& params, const Codebook& codebook,
                     const Eigen::MatrixXd& input);

// Per-sample losses averaged over the batch (reconstruction + codebook +
// β·commitment, and the λ-weighted cross entropy).
struct LossBreakdown {
  double reconstruction = 0;
  double codebook = 0;
  double commitment = 0;
  double classification = 0;

  double cvq(double beta) const { return reconstruction + codebook + beta * commitment; }
  double total(double beta, double lambda) const {
    return cvq(beta) + lambda * classification;
  }
};

LossBreakdown compute_losses(const ForwardCache& cache, const std::vector<int>& labels);

// Exact analytic gradients of L_total. The reconstruction gradient crosses
// the quantization as-is (straight-through); stop-gradient terms contribute
// nothing to their frozen argument. With the quantized-classifier switch,
// the classifier gradient also passes straight through to the encoder.
Gradients backward(const ModelParams& params, const Codebook& codebook,
                   const ForwardCache& cache, const std::vector<int>& labels, double beta,
                   double lambda);

}  // namespace scenecat
