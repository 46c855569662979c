#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "scenecat/model.hpp"
#include "scenecat/rng.hpp"
#include "support/gradcheck.hpp"

using namespace scenecat;
using namespace scenecat::testing;

namespace {

ModelConfig toy_config(ClassifierInput mode = ClassifierInput::kEncoderOutput) {
  ModelConfig config;
  config.input_dim = 4;
  config.hidden = {3};
  config.latent_dim = 2;
  config.class_count = 3;
  config.classifier_input = mode;
  return config;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  auto rng = seeded_engine(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gaussian(rng);
  return m;
}

// scalar-loop re-implementation of a dense stack (tanh hidden, linear last)
Eigen::MatrixXd naive_stack(const std::vector<DenseLayer>& layers, Eigen::MatrixXd x) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    Eigen::MatrixXd y(x.rows(), layer.w.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.w.cols(); ++j) {
        double acc = layer.b(j);
        for (Eigen::Index k = 0; k < layer.w.rows(); ++k) acc += x(i, k) * layer.w(k, j);
        y(i, j) = (l + 1 < layers.size()) ? std::tanh(acc) : acc;
      }
    x = std::move(y);
  }
  return x;
}

Eigen::MatrixXd naive_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < logits.cols(); ++j) mx = std::max(mx, logits(i, j));
    double sum = 0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) sum += std::exp(logits(i, j) - mx);
    for (Eigen::Index j = 0; j < logits.cols(); ++j)
      p(i, j) = std::exp(logits(i, j) - mx) / sum;
  }
  return p;
}

}  // namespace

TEST_CASE("initialization is deterministic and mirrors the encoder") {
  ModelConfig config;
  config.input_dim = 10;
  config.hidden = {8, 6};
  config.latent_dim = 4;

  ModelParams a = ModelParams::init(config, 3);
  ModelParams b = ModelParams::init(config, 3);
  REQUIRE(a.encoder.size() == 3);
  REQUIRE(a.decoder.size() == 3);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(a.encoder[l].w == b.encoder[l].w);
    CHECK(a.encoder[l].b.isZero());
  }
  CHECK(a.classifier.w == b.classifier.w);

  // decoder dims reverse the encoder dims
  CHECK(a.decoder[0].w.rows() == 4);
  CHECK(a.decoder[0].w.cols() == 6);
  CHECK(a.decoder[2].w.cols() == 10);

  ModelParams c = ModelParams::init(config, 4);
  CHECK(a.encoder[0].w != c.encoder[0].w);
}

TEST_CASE("model config validation") {
  ModelConfig config;
  config.input_dim = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.latent_dim = -1;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.class_count = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.hidden = {16, 0};
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("forward pass matches a scalar-loop reimplementation") {
  ModelConfig config;
  config.input_dim = 6;
  config.hidden = {5};
  config.latent_dim = 3;
  ModelParams params = ModelParams::init(config, 11);
  Codebook codebook(2, 3, 0.99, 1e-3, true, 5);
  Eigen::MatrixXd input = random_matrix(4, 6, 21);

  ForwardCache cache = forward(params, codebook, input);

  Eigen::MatrixXd z_ref = naive_stack(params.encoder, input);
  REQUIRE(cache.z_hat.rows() == 4);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK(cache.z_hat(i, j) == doctest::Approx(z_ref(i, j)).epsilon(1e-12));

  // nearest-entry assignment, scalar loops
  for (Eigen::Index i = 0; i < 4; ++i) {
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int q = 0; q < 2; ++q) {
      double dist = 0;
      for (Eigen::Index j = 0; j < 3; ++j) {
        double d = z_ref(i, j) - codebook.entries()(q, j);
        dist += d * d;
      }
      if (dist < best_dist) {
        best = q;
        best_dist = dist;
      }
    }
    CHECK(cache.assignments[static_cast<std::size_t>(i)] == best);
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK(cache.z_q(i, j) == codebook.entries()(best, j));
  }

  Eigen::MatrixXd recon_ref = naive_stack(params.decoder, cache.z_q);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 6; ++j)
      CHECK(cache.reconstruction(i, j) == doctest::Approx(recon_ref(i, j)).epsilon(1e-12));

  Eigen::MatrixXd logits_ref = naive_stack({params.classifier}, cache.z_hat);
  Eigen::MatrixXd probs_ref = naive_softmax(logits_ref);
  for (Eigen::Index i = 0; i < 4; ++i) {
    double row_sum = 0;
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK(cache.logits(i, j) == doctest::Approx(logits_ref(i, j)).epsilon(1e-12));
      CHECK(cache.probabilities(i, j) == doctest::Approx(probs_ref(i, j)).epsilon(1e-12));
      row_sum += cache.probabilities(i, j);
    }
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("zero weights give zero latents and uniform class probabilities") {
  ModelConfig config = toy_config();
  ModelParams params = ModelParams::init(config, 0);
  for (DenseLayer& l : params.encoder) l.w.setZero();
  params.classifier.w.setZero();

  Codebook codebook(2, 2, 0.99, 1e-3, true, 0);
  Eigen::MatrixXd input = random_matrix(3, 4, 8);
  ForwardCache cache = forward(params, codebook, input);
  CHECK(cache.z_hat.isZero());
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK(cache.probabilities(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("softmax matches the closed form and survives extreme logits") {
  // identity encoder and classifier turn the input row into the logits
  ModelConfig config;
  config.input_dim = 3;
  config.hidden = {};
  config.latent_dim = 3;
  ModelParams params = ModelParams::init(config, 0);
  params.encoder[0].w.setIdentity();
  params.encoder[0].b.setZero();
  params.decoder[0].w.setZero();
  params.classifier.w.setIdentity();
  params.classifier.b.setZero();
  Codebook codebook(1, 3, 0.99, 1e-3, true, 0);

  Eigen::MatrixXd input(2, 3);
  input << 1, 2, 3, 1000, 0, 0;
  ForwardCache cache = forward(params, codebook, input);

  // softmax(1,2,3) = (e¹,e²,e³)/Σ
  CHECK(cache.probabilities(0, 0) == doctest::Approx(0.090030573170380462).epsilon(1e-12));
  CHECK(cache.probabilities(0, 1) == doctest::Approx(0.24472847105479764).epsilon(1e-12));
  CHECK(cache.probabilities(0, 2) == doctest::Approx(0.66524095577482189).epsilon(1e-12));

  // max-shift keeps huge logits finite
  CHECK(cache.probabilities.allFinite());
  CHECK(cache.probabilities(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cache.probabilities(1, 1) == 0.0);
}

TEST_CASE("loss terms match hand-computed values") {
  ForwardCache cache;
  cache.input = Eigen::MatrixXd(1, 2);
  cache.input << 1, 0;
  cache.reconstruction = Eigen::MatrixXd::Zero(1, 2);
  cache.z_hat = Eigen::MatrixXd(1, 2);
  cache.z_hat << 0.5, 0.5;
  cache.z_q = Eigen::MatrixXd::Zero(1, 2);
  cache.probabilities = Eigen::MatrixXd(1, 3);
  cache.probabilities << 0.5, 0.25, 0.25;

  LossBreakdown losses = compute_losses(cache, {0});
  CHECK(losses.reconstruction == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(losses.codebook == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(losses.commitment == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(losses.classification == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(losses.cvq(0.25) == doctest::Approx(1.625).epsilon(1e-14));
  CHECK(losses.total(0.25, 0.2) ==
        doctest::Approx(1.625 + 0.2 * std::log(2.0)).epsilon(1e-14));

  SUBCASE("batch means are duplication-invariant") {
    ForwardCache two;
    two.input = Eigen::MatrixXd(2, 2);
    two.input << 1, 0, 1, 0;
    two.reconstruction = Eigen::MatrixXd::Zero(2, 2);
    two.z_hat = Eigen::MatrixXd(2, 2);
    two.z_hat << 0.5, 0.5, 0.5, 0.5;
    two.z_q = Eigen::MatrixXd::Zero(2, 2);
    two.probabilities = Eigen::MatrixXd(2, 3);
    two.probabilities << 0.5, 0.25, 0.25, 0.5, 0.25, 0.25;
    LossBreakdown doubled = compute_losses(two, {0, 0});
    CHECK(doubled.reconstruction == doctest::Approx(losses.reconstruction).epsilon(1e-14));
    CHECK(doubled.classification == doctest::Approx(losses.classification).epsilon(1e-14));
  }
  SUBCASE("uniform probabilities give ln 3") {
    cache.probabilities << 1.0 / 3, 1.0 / 3, 1.0 / 3;
    CHECK(compute_losses(cache, {2}).classification ==
          doctest::Approx(std::log(3.0)).epsilon(1e-14));
  }
  SUBCASE("zero probability clamps at 1e-12") {
    cache.probabilities << 1, 0, 0;
    CHECK(compute_losses(cache, {1}).classification ==
          doctest::Approx(-std::log(1e-12)).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Eigen::MatrixXd input = random_matrix(3, 4, 31);
  std::vector<int> labels{0, 2, 1};

  SUBCASE("classifier on the encoder output") {
    ModelParams params = ModelParams::init(toy_config(), 17);
    Codebook codebook(2, 2, 0.99, 1e-3, true, 5);
    GradCheckResult r = run_gradcheck(params, codebook, input, labels, 0.25, 0.2);
    CHECK(r.checked > 50);
    CHECK(r.max_rel_err < 1e-4);
  }
  SUBCASE("classifier on the quantized latent") {
    ModelParams params = ModelParams::init(toy_config(ClassifierInput::kQuantized), 17);
    Codebook codebook(2, 2, 0.99, 1e-3, true, 5);
    GradCheckResult r = run_gradcheck(params, codebook, input, labels, 0.25, 0.2);
    CHECK(r.max_rel_err < 1e-4);
  }
  SUBCASE("pure reconstruction (lambda 0, beta 0)") {
    ModelParams params = ModelParams::init(toy_config(), 17);
    Codebook codebook(2, 2, 0.99, 1e-3, true, 5);
    GradCheckResult r = run_gradcheck(params, codebook, input, labels, 0.0, 0.0);
    CHECK(r.max_rel_err < 1e-4);
  }
}

TEST_CASE("decoder and classifier gradients also match the real pipeline") {
  // for parameters downstream of the quantization the surrogate and the
  // true loss coincide as functions, so plain finite differences apply
  ModelParams params = ModelParams::init(toy_config(), 13);
  Codebook codebook(2, 2, 0.99, 1e-3, true, 5);
  Eigen::MatrixXd input = random_matrix(3, 4, 41);
  std::vector<int> labels{1, 0, 2};
  const double beta = 0.25, lambda = 0.2, step = 1e-6;

  ForwardCache cache = forward(params, codebook, input);
  Gradients grads = backward(params, codebook, cache, labels, beta, lambda);

  auto total_loss = [&](const ModelParams& p) {
    ForwardCache c = forward(p, codebook, input);
    return compute_losses(c, labels).total(beta, lambda);
  };
  auto fd = [&](double& slot) {
    const double saved = slot;
    slot = saved + step;
    double up = total_loss(params);
    slot = saved - step;
    double down = total_loss(params);
    slot = saved;
    return (up - down) / (2 * step);
  };

  double n1 = fd(params.decoder[1].w(0, 0));
  CHECK(n1 == doctest::Approx(grads.decoder[1].w(0, 0)).epsilon(1e-4));
  double n2 = fd(params.decoder[0].b(1));
  CHECK(n2 == doctest::Approx(grads.decoder[0].b(1)).epsilon(1e-4));
  double n3 = fd(params.classifier.w(0, 1));
  CHECK(n3 == doctest::Approx(grads.classifier.w(0, 1)).epsilon(1e-4));
  double n4 = fd(params.classifier.b(2));
  CHECK(n4 == doctest::Approx(grads.classifier.b(2)).epsilon(1e-4));
}

TEST_CASE("exact quantization silences commitment and codebook gradients") {
  ModelParams params = ModelParams::init(toy_config(), 19);
  Eigen::MatrixXd input = random_matrix(1, 4, 51);
  Eigen::MatrixXd z = encode(params, input);

  Codebook codebook(1, 2, 0.99, 1e-3, true, 0);
  codebook.restore(z, Eigen::VectorXd::Zero(1));  // entry == encoder output

  ForwardCache cache = forward(params, codebook, input);
  CHECK(cache.z_q == cache.z_hat);
  LossBreakdown losses = compute_losses(cache, {0});
  CHECK(losses.codebook == 0.0);
  CHECK(losses.commitment == 0.0);

  Gradients with_beta = backward(params, codebook, cache, {0}, 0.25, 0.2);
  Gradients without_beta = backward(params, codebook, cache, {0}, 0.0, 0.2);
  CHECK(with_beta.codebook.isZero());
  for (std::size_t l = 0; l < with_beta.encoder.size(); ++l)
    CHECK(with_beta.encoder[l].w == without_beta.encoder[l].w);
}

TEST_CASE("classifier gradients do not depend on the decoder") {
  ModelParams a = ModelParams::init(toy_config(), 23);
  ModelParams b = a;
  for (DenseLayer& l : b.decoder) l.w = random_matrix(l.w.rows(), l.w.cols(), 87);

  Codebook codebook(2, 2, 0.99, 1e-3, true, 5);
  Eigen::MatrixXd input = random_matrix(3, 4, 61);
  std::vector<int> labels{2, 1, 0};

  Gradients ga = backward(a, codebook, forward(a, codebook, input), labels, 0.25, 0.2);
  Gradients gb = backward(b, codebook, forward(b, codebook, input), labels, 0.25, 0.2);
  CHECK(ga.classifier.w == gb.classifier.w);
  CHECK(ga.classifier.b == gb.classifier.b);
}

TEST_CASE("non-finite activations raise a numeric error naming the layer") {
  // the hidden tanh saturates an infinity, so poison the linear latent layer
  ModelParams params = ModelParams::init(toy_config(), 2);
  params.encoder[1].w(0, 0) = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd input = Eigen::MatrixXd::Ones(1, 4);
  CHECK_THROWS_WITH_AS(encode(params, input), doctest::Contains("encoder layer 1"),
                       NumericError);

  // a NaN reaching a tanh layer is still caught there
  ModelParams nan_params = ModelParams::init(toy_config(), 2);
  nan_params.encoder[0].w(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(encode(nan_params, input), doctest::Contains("encoder layer 0"),
                       NumericError);
}

TEST_CASE("shape mismatches are rejected up front") {
  ModelParams params = ModelParams::init(toy_config(), 2);
  CHECK_THROWS_AS(encode(params, Eigen::MatrixXd::Ones(1, 5)), std::invalid_argument);
  Codebook wrong_dim(2, 3, 0.99, 1e-3, true, 0);
  CHECK_THROWS_AS(forward(params, wrong_dim, Eigen::MatrixXd::Ones(1, 4)),
                  std::invalid_argument);
}
