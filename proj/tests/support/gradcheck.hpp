#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "scenecat/model.hpp"

namespace scenecat::testing {

// Differentiable surrogate whose exact gradient is what backward() computes:
// quantization is replaced by ẑ + c with c frozen at the evaluation point,
// and the stop-gradient snapshots (ž for the codebook term, q̌ for the
// commitment term) are held constant. At the evaluation point the surrogate
// equals the real total loss.
inline double surrogate_loss(const ModelParams& params, const Eigen::MatrixXd& entries,
                             const Eigen::MatrixXd& input, const std::vector<int>& labels,
                             const std::vector<int>& assignments, const Eigen::MatrixXd& c,
                             const Eigen::MatrixXd& z_hat0, const Eigen::MatrixXd& z_q0,
                             double beta, double lambda) {
  const double batch = static_cast<double>(input.rows());
  Eigen::MatrixXd z_hat = encode(params, input);
  Eigen::MatrixXd recon = decode(params, z_hat + c);
  double l_rec = (input - recon).squaredNorm() / batch;

  double l_cb = 0;
  for (Eigen::Index i = 0; i < input.rows(); ++i)
    l_cb += (z_hat0.row(i) - entries.row(assignments[static_cast<std::size_t>(i)]))
                .squaredNorm();
  l_cb /= batch;

  double l_com = (z_q0 - z_hat).squaredNorm() / batch;

  Eigen::MatrixXd cls_in = params.config.classifier_input == ClassifierInput::kQuantized
                               ? Eigen::MatrixXd(z_hat + c)
                               : z_hat;
  Eigen::MatrixXd logits = cls_in * params.classifier.w;
  logits.rowwise() += params.classifier.b.transpose();
  double l_ce = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double row_max = logits.row(i).maxCoeff();
    const double denom = (logits.row(i).array() - row_max).exp().sum();
    const double p =
        std::exp(logits(i, labels[static_cast<std::size_t>(i)]) - row_max) / denom;
    l_ce -= std::log(std::max(p, 1e-12));
  }
  l_ce /= batch;

  return l_rec + l_cb + beta * l_com + lambda * l_ce;
}

struct GradCheckResult {
  double max_rel_err = 0;
  std::size_t checked = 0;
};

// Central finite differences over every scalar parameter (encoder, decoder,
// classifier, codebook entries) against the analytic gradients.
inline GradCheckResult run_gradcheck(ModelParams params, const Codebook& codebook,
                                     const Eigen::MatrixXd& input,
                                     const std::vector<int>& labels, double beta,
                                     double lambda, double step = 1e-6) {
  ForwardCache cache = forward(params, codebook, input);
  Gradients grads = backward(params, codebook, cache, labels, beta, lambda);

  Eigen::MatrixXd entries = codebook.entries();
  const Eigen::MatrixXd c = cache.z_q - cache.z_hat;
  const Eigen::MatrixXd z_hat0 = cache.z_hat;
  const Eigen::MatrixXd z_q0 = cache.z_q;
  const std::vector<int> assignments = cache.assignments;

  GradCheckResult result;
  auto eval = [&] {
    return surrogate_loss(params, entries, input, labels, assignments, c, z_hat0, z_q0, beta,
                          lambda);
  };
  auto check_scalar = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + step;
    const double up = eval();
    param = saved - step;
    const double down = eval();
    param = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({1e-6, std::abs(analytic), std::abs(numeric)});
    result.max_rel_err = std::max(result.max_rel_err, std::abs(analytic - numeric) / denom);
    result.checked++;
  };
  auto check_layer = [&](DenseLayer& layer, const DenseLayer& grad) {
    for (Eigen::Index i = 0; i < layer.w.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.w.cols(); ++j)
        check_scalar(layer.w(i, j), grad.w(i, j));
    for (Eigen::Index j = 0; j < layer.b.size(); ++j) check_scalar(layer.b(j), grad.b(j));
  };

  for (std::size_t l = 0; l < params.encoder.size(); ++l)
    check_layer(params.encoder[l], grads.encoder[l]);
  for (std::size_t l = 0; l < params.decoder.size(); ++l)
    check_layer(params.decoder[l], grads.decoder[l]);
  check_layer(params.classifier, grads.classifier);
  for (Eigen::Index q = 0; q < entries.rows(); ++q)
    for (Eigen::Index j = 0; j < entries.cols(); ++j)
      check_scalar(entries(q, j), grads.codebook(q, j));
  return result;
}

}  // namespace scenecat::testing
