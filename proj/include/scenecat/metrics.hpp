#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scenecat/codebook.hpp"
#include "scenecat/data.hpp"
#include "scenecat/model.hpp"

namespace scenecat {

struct CategoryDistribution {
  std::vector<double> probabilities;  // p_q = n_q / Σ n_q
  std::vector<long> counts;           // n_q
};

// Throws ConfigError on an empty assignment list.
CategoryDistribution occurrence_probabilities(const std::vector<int>& assignments,
                                              int entry_count);

struct PurityReport {
  std::vector<double> entry_entropy;  // H_q in bits; NaN for unused entries
  std::vector<bool> used;
  double h_avg = 0;  // mean over used entries
};

// Empirical mode: H_q from the ground-truth class frequencies of the
// scenarios assigned to entry q.
PurityReport entropy_per_entry(const std::vector<int>& assignments, int entry_count,
                               const std::vector<int>& labels);

// Predicted mode: H_q from the mean predicted class-probability vector of
// the scenarios assigned to entry q (rows of `predicted` are per-sample
// probability vectors).
PurityReport entropy_per_entry(const std::vector<int>& assignments, int entry_count,
                               const Eigen::MatrixXd& predicted);

struct ConfusionMatrix {
  Eigen::MatrixXd rows;  // class_count × class_count, row-normalized
  std::array<bool, kClassCount> defined{};  // false when the class is absent from truth
  std::array<long, kClassCount> truth_counts{};
};

ConfusionMatrix confusion_matrix(const std::vector<int>& truth,
                                 const std::vector<int>& predicted);

// Mean over the dataset of the squared reconstruction residual, in the
// normalized feature space the model trains in.
double reconstruction_loss(const Dataset& dataset, const ModelParams& params,
                           const Codebook& codebook, const FeatureStats& stats);

struct RepresentativeExport {
  std::vector<int> exported_entries;
  std::vector<int> omitted_entries;  // entries with zero assignments
  std::size_t rows_written = 0;
};

// Decodes each used entry and writes physical-unit trajectories as CSV
// (entry, slot, t, x, y, vx, vy) with round-trip-exact formatting.
RepresentativeExport export_representatives(const std::string& csv_path,
                                            const ModelParams& params, const Codebook& codebook,
                                            const FeatureStats& stats,
                                            const std::vector<int>& assignments);

// Plot-ready CSV emitters for the evaluation artifacts.
void write_usage_histogram_csv(const std::string& path, const UsageStats& usage);
void write_confusion_csv(const std::string& path, const ConfusionMatrix& matrix);
void write_purity_csv(const std::string& path, const PurityReport& purity);

}  // namespace scenecat
