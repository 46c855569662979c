#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "scenecat/common.hpp"

namespace scenecat {

struct QuantizeResult {
  std::vector<int> indices;    // nearest entry per batch row
  Eigen::MatrixXd quantized;   // batch × dim, row i = entries.row(indices[i])
  std::vector<long> counts;    // assignments per entry, sums to batch size
};

// Vector-quantized codebook with EMA usage tracking and decay-based
// reinitialization of stale entries toward nearby encoded vectors.
class Codebook {
 public:
  // Entries start N(0,1)/sqrt(dim), usage at zero.
  Codebook(int entry_count, int dim, double gamma, double epsilon, bool reinit_enabled,
           std::uint64_t seed);

  int entry_count() const { return static_cast<int>(entries_.rows()); }
  int dim() const { return static_cast<int>(entries_.cols()); }
  double gamma() const { return gamma_; }
  double epsilon() const { return epsilon_; }
  bool reinit_enabled() const { return reinit_enabled_; }

  const Eigen::MatrixXd& entries() const { return entries_; }
  Eigen::MatrixXd& mutable_entries() { return entries_; }  // gradient step target
  const Eigen::VectorXd& ema_usage() const { return ema_usage_; }
  void restore(Eigen::MatrixXd entries, Eigen::VectorXd ema_usage);

  // Nearest entry per batch row (squared Euclidean), ties to the lowest
  // index. Throws std::invalid_argument on dimension mismatch or empty batch.
  QuantizeResult quantize(const Eigen::MatrixXd& z_hat) const;

  // N_q ← N_q·γ + (n_q / (B·h·w))·(1−γ). Throws std::invalid_argument when
  // the counts do not sum to B·h·w.
  void update_usage(const std::vector<long>& counts, long batch_size, long h = 1, long w = 1);

  // α_q = exp(−N_q·Q·10/(1−γ) − ε) ∈ (0, exp(−ε)]
  Eigen::VectorXd decay_factors() const;

  // Closest batch row per entry; ties to the lowest batch position.
  std::vector<int> select_anchors(const Eigen::MatrixXd& z_hat) const;

  // z_q ← z_q·(1−α) + anchor·α. No-op when reinit is disabled.
  void reinit_entries(const Eigen::MatrixXd& z_hat, const std::vector<int>& anchors,
                      const Eigen::VectorXd& alpha);

  // Per-batch maintenance after the optimizer step:
  // usage → decay → anchors → reinit.
  void maintenance_step(const Eigen::MatrixXd& z_hat, const std::vector<long>& counts,
                        long batch_size);

 private:
  Eigen::MatrixXd entries_;    // Q × dim
  Eigen::VectorXd ema_usage_;  // N_q
  double gamma_;
  double epsilon_;
  bool reinit_enabled_;
};

struct UsageStats {
  int used_entries = 0;
  std::vector<long> counts;  // per entry, sums to assignment count
  std::vector<std::array<long, kClassCount>> class_composition;
};

// Histogram of dataset-wide assignments; labels optional (pass empty to skip
// class composition).
UsageStats usage_stats(int entry_count, const std::vector<int>& assignments,
                       const std::vector<int>& labels);

}  // namespace scenecat
