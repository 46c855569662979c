#include "scenecat/codebook.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "scenecat/rng.hpp"

namespace scenecat {

Codebook::Codebook(int entry_count, int dim, double gamma, double epsilon, bool reinit_enabled,
                   std::uint64_t seed)
    : gamma_(gamma), epsilon_(epsilon), reinit_enabled_(reinit_enabled) {
  if (entry_count <= 0 || dim <= 0)
    throw std::invalid_argument("codebook needs positive entry count and dimension");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("codebook gamma must lie in (0,1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("codebook epsilon must be positive");

  auto rng = seeded_engine(seed, {0x636f6465u});
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  entries_.resize(entry_count, dim);
  for (int q = 0; q < entry_count; ++q)
    for (int d = 0; d < dim; ++d) entries_(q, d) = gaussian(rng) * scale;
  ema_usage_ = Eigen::VectorXd::Zero(entry_count);
}

void Codebook::restore(Eigen::MatrixXd entries, Eigen::VectorXd ema_usage) {
  if (entries.rows() != entries_.rows() || entries.cols() != entries_.cols() ||
      ema_usage.size() != ema_usage_.size())
    throw std::invalid_argument("codebook restore shape mismatch");
  entries_ = std::move(entries);
  ema_usage_ = std::move(ema_usage);
}

QuantizeResult Codebook::quantize(const Eigen::MatrixXd& z_hat) const {
  if (z_hat.rows() == 0) throw std::invalid_argument("quantize: empty batch");
  if (z_hat.cols() != entries_.cols())
    throw std::invalid_argument("quantize: latent dimension " + std::to_string(z_hat.cols()) +
                                " != codebook dimension " + std::to_string(entries_.cols()));

  const int batch = static_cast<int>(z_hat.rows());
  const int q_count = entry_count();
  QuantizeResult result;
  result.indices.resize(static_cast<std::size_t>(batch));
  result.counts.assign(static_cast<std::size_t>(q_count), 0);
  result.quantized.resize(batch, entries_.cols());

  // direct pairwise distances: keeps ties exact for the lowest-index rule
  for (int i = 0; i < batch; ++i) {
    int best = 0;
    double best_dist = (z_hat.row(i) - entries_.row(0)).squaredNorm();
    for (int q = 1; q < q_count; ++q) {
      double dist = (z_hat.row(i) - entries_.row(q)).squaredNorm();
      if (dist < best_dist) {
        best = q;
        best_dist = dist;
      }
    }
    result.indices[static_cast<std::size_t>(i)] = best;
    result.counts[static_cast<std::size_t>(best)]++;
    result.quantized.row(i) = entries_.row(best);
  }
  return result;
}

void Codebook::update_usage(const std::vector<long>& counts, long batch_size, long h, long w) {
  if (counts.size() != static_cast<std::size_t>(entry_count()))
    throw std::invalid_argument("update_usage: got " + std::to_string(counts.size()) +
                                " counts for " + std::to_string(entry_count()) + " entries");
  const long total = batch_size * h * w;
  const long assigned = std::accumulate(counts.begin(), counts.end(), 0L);
  if (assigned != total)
    throw std::invalid_argument("update_usage: counts sum to " + std::to_string(assigned) +
                                ", expected " + std::to_string(total));
  const double denom = static_cast<double>(total);
  for (int q = 0; q < entry_count(); ++q)
    ema_usage_(q) = ema_usage_(q) * gamma_ +
                    (static_cast<double>(counts[static_cast<std::size_t>(q)]) / denom) *
                        (1.0 - gamma_);
}

Eigen::VectorXd Codebook::decay_factors() const {
  const double scale = static_cast<double>(entry_count()) * 10.0 / (1.0 - gamma_);
  Eigen::VectorXd alpha(entry_count());
  for (int q = 0; q < entry_count(); ++q)
    alpha(q) = std::exp(-ema_usage_(q) * scale - epsilon_);
  return alpha;
}

std::vector<int> Codebook::select_anchors(const Eigen::MatrixXd& z_hat) const {
  if (z_hat.rows() == 0) throw std::invalid_argument("select_anchors: empty batch");
  if (z_hat.cols() != entries_.cols())
    throw std::invalid_argument("select_anchors: latent dimension mismatch");

  const int batch = static_cast<int>(z_hat.rows());
  std::vector<int> anchors(static_cast<std::size_t>(entry_count()));
  for (int q = 0; q < entry_count(); ++q) {
    int best = 0;
    double best_dist = (z_hat.row(0) - entries_.row(q)).squaredNorm();
    for (int i = 1; i < batch; ++i) {
      double dist = (z_hat.row(i) - entries_.row(q)).squaredNorm();
      if (dist < best_dist) {
        best = i;
        best_dist = dist;
      }
    }
    anchors[static_cast<std::size_t>(q)] = best;
  }
  return anchors;
}

void Codebook::reinit_entries(const Eigen::MatrixXd& z_hat, const std::vector<int>& anchors,
                              const Eigen::VectorXd& alpha) {
  if (!reinit_enabled_) return;
  if (anchors.size() != static_cast<std::size_t>(entry_count()) ||
      alpha.size() != entry_count())
    throw std::invalid_argument("reinit_entries: anchor/alpha count mismatch");
  for (int q = 0; q < entry_count(); ++q) {
    const double a = alpha(q);
    entries_.row(q) = entries_.row(q) * (1.0 - a) +
                      z_hat.row(anchors[static_cast<std::size_t>(q)]) * a;
  }
}

void Codebook::maintenance_step(const Eigen::MatrixXd& z_hat, const std::vector<long>& counts,
                                long batch_size) {
  update_usage(counts, batch_size);
  if (!reinit_enabled_) return;
  Eigen::VectorXd alpha = decay_factors();
  std::vector<int> anchors = select_anchors(z_hat);
  reinit_entries(z_hat, anchors, alpha);
}

UsageStats usage_stats(int entry_count, const std::vector<int>& assignments,
                       const std::vector<int>& labels) {
  if (!labels.empty() && labels.size() != assignments.size())
    throw std::invalid_argument("usage_stats: label count != assignment count");
  UsageStats stats;
  stats.counts.assign(static_cast<std::size_t>(entry_count), 0);
  stats.class_composition.assign(static_cast<std::size_t>(entry_count), {});
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    int q = assignments[i];
    if (q < 0 || q >= entry_count)
      throw std::invalid_argument("usage_stats: assignment " + std::to_string(q) +
                                  " out of range");
    stats.counts[static_cast<std::size_t>(q)]++;
    if (!labels.empty()) {
      int c = labels[i];
      if (c < 0 || c >= kClassCount)
        throw std::invalid_argument("usage_stats: label out of range");
      stats.class_composition[static_cast<std::size_t>(q)][static_cast<std::size_t>(c)]++;
    }
  }
  for (long c : stats.counts)
    if (c > 0) stats.used_entries++;
  return stats;
}

}  // namespace scenecat
