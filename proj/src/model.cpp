#include "scenecat/model.hpp"

#include <cmath>
#include <stdexcept>

#include "scenecat/rng.hpp"

namespace scenecat {

namespace {

void check_finite(const Eigen::MatrixXd& m, const std::string& layer_name) {
  if (!m.allFinite())
    throw NumericError(layer_name + " produced a non-finite activation");
}

DenseLayer glorot_layer(int in, int out, std::mt19937_64& rng) {
  DenseLayer layer;
  layer.w.resize(in, out);
  const double scale = std::sqrt(2.0 / static_cast<double>(in + out));
  for (int i = 0; i < in; ++i)
    for (int j = 0; j < out; ++j) layer.w(i, j) = gaussian(rng) * scale;
  layer.b = Eigen::VectorXd::Zero(out);
  return layer;
}

Eigen::MatrixXd affine(const Eigen::MatrixXd& x, const DenseLayer& layer,
                       const std::string& name) {
  if (x.cols() != layer.w.rows())
    throw std::invalid_argument(name + ": input width " + std::to_string(x.cols()) +
                                " != layer input " + std::to_string(layer.w.rows()));
  Eigen::MatrixXd y = x * layer.w;
  y.rowwise() += layer.b.transpose();
  return y;
}

// runs a dense stack: tanh on all but the last layer, linear output;
// returns post-activation outputs per layer
std::vector<Eigen::MatrixXd> run_stack(const std::vector<DenseLayer>& layers,
                                       const Eigen::MatrixXd& input,
                                       const std::string& stack_name) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(layers.size());
  const Eigen::MatrixXd* x = &input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::string name = stack_name + " layer " + std::to_string(l);
    Eigen::MatrixXd y = affine(*x, layers[l], name);
    if (l + 1 < layers.size()) y = y.array().tanh().matrix();
    check_finite(y, name);
    acts.push_back(std::move(y));
    x = &acts.back();
  }
  return acts;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  Eigen::MatrixXd expd = (logits.colwise() - row_max).array().exp().matrix();
  Eigen::VectorXd sums = expd.rowwise().sum();
  return expd.array().colwise() / sums.array();
}

// backprop through a dense stack; d_out is dL/d(activation of last layer);
// returns dL/d(stack input) and fills grads
Eigen::MatrixXd backprop_stack(const std::vector<DenseLayer>& layers,
                               const Eigen::MatrixXd& input,
                               const std::vector<Eigen::MatrixXd>& acts,
                               Eigen::MatrixXd d_out, std::vector<DenseLayer>& grads) {
  grads.resize(layers.size());
  Eigen::MatrixXd delta = std::move(d_out);  // dL/d(post-activation)
  for (std::size_t l = layers.size(); l-- > 0;) {
    if (l + 1 < layers.size()) {
      // tanh' = 1 - tanh², and acts[l] stores tanh(pre)
      delta = (delta.array() * (1.0 - acts[l].array().square())).matrix();
    }
    const Eigen::MatrixXd& in = (l == 0) ? input : acts[l - 1];
    grads[l].w = in.transpose() * delta;
    grads[l].b = delta.colwise().sum().transpose();
    if (l > 0) delta = delta * layers[l].w.transpose();
  }
  if (layers.empty()) return delta;
  return delta * layers[0].w.transpose();
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim <= 0) throw ConfigError("model input dimension must be positive");
  if (latent_dim <= 0) throw ConfigError("latent dimension must be positive");
  if (class_count <= 0) throw ConfigError("class count must be positive");
  for (int h : hidden)
    if (h <= 0) throw ConfigError("hidden layer width must be positive");
}

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams params;
  params.config = config;

  std::vector<int> enc_dims;
  enc_dims.push_back(config.input_dim);
  for (int h : config.hidden) enc_dims.push_back(h);
  enc_dims.push_back(config.latent_dim);

  auto rng = seeded_engine(seed, {0x6d6f64u});
  for (std::size_t l = 0; l + 1 < enc_dims.size(); ++l)
    params.encoder.push_back(glorot_layer(enc_dims[l], enc_dims[l + 1], rng));
  for (std::size_t l = enc_dims.size() - 1; l > 0; --l)
    params.decoder.push_back(glorot_layer(enc_dims[l], enc_dims[l - 1], rng));
  params.classifier = glorot_layer(config.latent_dim, config.class_count, rng);
  return params;
}

Eigen::MatrixXd encode(const ModelParams& params, const Eigen::MatrixXd& input) {
  return run_stack(params.encoder, input, "encoder").back();
}

Eigen::MatrixXd decode(const ModelParams& params, const Eigen::MatrixXd& z) {
  return run_stack(params.decoder, z, "decoder").back();
}

Eigen::MatrixXd classify(const ModelParams& params, const Eigen::MatrixXd& z) {
  Eigen::MatrixXd logits = affine(z, params.classifier, "classifier");
  check_finite(logits, "classifier");
  return softmax_rows(logits);
}

ForwardCache forward(const ModelParams& params, const Codebook& codebook,
                     const Eigen::MatrixXd& input) {
  if (codebook.dim() != params.config.latent_dim)
    throw std::invalid_argument("codebook dimension != model latent dimension");

  ForwardCache cache;
  cache.input = input;
  cache.enc_act = run_stack(params.encoder, cache.input, "encoder");
  cache.z_hat = cache.enc_act.back();

  QuantizeResult quant = codebook.quantize(cache.z_hat);
  cache.assignments = std::move(quant.indices);
  cache.z_q = std::move(quant.quantized);

  cache.dec_act = run_stack(params.decoder, cache.z_q, "decoder");
  cache.reconstruction = cache.dec_act.back();

  const Eigen::MatrixXd& cls_in =
      params.config.classifier_input == ClassifierInput::kQuantized ? cache.z_q : cache.z_hat;
  cache.logits = affine(cls_in, params.classifier, "classifier");
  check_finite(cache.logits, "classifier");
  cache.probabilities = softmax_rows(cache.logits);
  return cache;
}

LossBreakdown compute_losses(const ForwardCache& cache, const std::vector<int>& labels) {
  const auto batch = static_cast<double>(cache.input.rows());
  if (labels.size() != static_cast<std::size_t>(cache.input.rows()))
    throw std::invalid_argument("label count != batch size");

  LossBreakdown losses;
  losses.reconstruction = (cache.input - cache.reconstruction).squaredNorm() / batch;
  losses.codebook = (cache.z_hat - cache.z_q).squaredNorm() / batch;
  losses.commitment = losses.codebook;  // same value, different gradient routing

  double ce = 0.0;
  for (Eigen::Index i = 0; i < cache.probabilities.rows(); ++i) {
    int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= cache.probabilities.cols())
      throw std::invalid_argument("label out of range");
    double p = cache.probabilities(i, label);
    ce -= std::log(std::max(p, 1e-12));
  }
  losses.classification = ce / batch;
  return losses;
}

Gradients backward(const ModelParams& params, const Codebook& codebook,
                   const ForwardCache& cache, const std::vector<int>& labels, double beta,
                   double lambda) {
  const Eigen::Index batch_n = cache.input.rows();
  if (labels.size() != static_cast<std::size_t>(batch_n))
    throw std::invalid_argument("label count != batch size");
  const double batch = static_cast<double>(batch_n);

  Gradients grads;

  // reconstruction: dL/dx̂ = 2(x̂ − x)/B, backprop through the decoder;
  // the gradient at the decoder input crosses quantization unchanged
  Eigen::MatrixXd d_recon = 2.0 / batch * (cache.reconstruction - cache.input);
  Eigen::MatrixXd d_zhat =
      backprop_stack(params.decoder, cache.z_q, cache.dec_act, std::move(d_recon),
                     grads.decoder);

  // codebook term ‖sg[ẑ] − z_q‖²: gradient only into the selected entries
  grads.codebook = Eigen::MatrixXd::Zero(codebook.entry_count(), codebook.dim());
  for (Eigen::Index i = 0; i < batch_n; ++i) {
    int q = cache.assignments[static_cast<std::size_t>(i)];
    grads.codebook.row(q) += 2.0 / batch * (cache.z_q.row(i) - cache.z_hat.row(i));
  }

  // commitment term β‖sg[z_q] − ẑ‖²: gradient into the encoder output
  d_zhat += 2.0 * beta / batch * (cache.z_hat - cache.z_q);

  // classification: dL/dlogits = λ(p − onehot)/B
  Eigen::MatrixXd d_logits = cache.probabilities;
  for (Eigen::Index i = 0; i < batch_n; ++i)
    d_logits(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  d_logits *= lambda / batch;

  const Eigen::MatrixXd& cls_in =
      params.config.classifier_input == ClassifierInput::kQuantized ? cache.z_q : cache.z_hat;
  grads.classifier.w = cls_in.transpose() * d_logits;
  grads.classifier.b = d_logits.colwise().sum().transpose();
  // with the quantized input the gradient still reaches the encoder
  // straight-through, and the codebook gets none (mirrors the recon path)
  d_zhat += d_logits * params.classifier.w.transpose();

  backprop_stack(params.encoder, cache.input, cache.enc_act, std::move(d_zhat), grads.encoder);
  return grads;
}

}  // namespace scenecat
