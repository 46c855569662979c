#include "scenecat/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "scenecat/trainer.hpp"

namespace scenecat {

namespace {

double entropy_bits(const double* p, int n) {
  double h = 0.0;
  for (int i = 0; i < n; ++i)
    if (p[i] > 0.0) h -= p[i] * std::log2(p[i]);
  return h;
}

void check_assignments(const std::vector<int>& assignments, int entry_count) {
  for (int a : assignments)
    if (a < 0 || a >= entry_count)
      throw std::invalid_argument("assignment " + std::to_string(a) + " out of range [0, " +
                                  std::to_string(entry_count) + ")");
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

CategoryDistribution occurrence_probabilities(const std::vector<int>& assignments,
                                              int entry_count) {
  if (assignments.empty())
    throw ConfigError("occurrence probabilities need at least one assignment");
  check_assignments(assignments, entry_count);

  CategoryDistribution dist;
  dist.counts.assign(static_cast<std::size_t>(entry_count), 0);
  for (int a : assignments) dist.counts[static_cast<std::size_t>(a)]++;
  dist.probabilities.resize(dist.counts.size());
  const double total = static_cast<double>(assignments.size());
  for (std::size_t q = 0; q < dist.counts.size(); ++q)
    dist.probabilities[q] = static_cast<double>(dist.counts[q]) / total;
  return dist;
}

PurityReport entropy_per_entry(const std::vector<int>& assignments, int entry_count,
                               const std::vector<int>& labels) {
  if (assignments.size() != labels.size())
    throw std::invalid_argument("assignment and label counts differ");
  check_assignments(assignments, entry_count);

  std::vector<std::array<double, kClassCount>> class_mass(
      static_cast<std::size_t>(entry_count), std::array<double, kClassCount>{});
  std::vector<long> totals(static_cast<std::size_t>(entry_count), 0);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    int label = labels[i];
    if (label < 0 || label >= kClassCount)
      throw std::invalid_argument("label out of range");
    class_mass[static_cast<std::size_t>(assignments[i])][static_cast<std::size_t>(label)] += 1.0;
    totals[static_cast<std::size_t>(assignments[i])]++;
  }

  PurityReport report;
  report.entry_entropy.assign(static_cast<std::size_t>(entry_count),
                              std::numeric_limits<double>::quiet_NaN());
  report.used.assign(static_cast<std::size_t>(entry_count), false);
  double sum = 0;
  int used = 0;
  for (int q = 0; q < entry_count; ++q) {
    if (totals[static_cast<std::size_t>(q)] == 0) continue;
    auto& mass = class_mass[static_cast<std::size_t>(q)];
    for (double& m : mass) m /= static_cast<double>(totals[static_cast<std::size_t>(q)]);
    report.entry_entropy[static_cast<std::size_t>(q)] = entropy_bits(mass.data(), kClassCount);
    report.used[static_cast<std::size_t>(q)] = true;
    sum += report.entry_entropy[static_cast<std::size_t>(q)];
    ++used;
  }
  report.h_avg = used > 0 ? sum / used : 0.0;
  return report;
}

PurityReport entropy_per_entry(const std::vector<int>& assignments, int entry_count,
                               const Eigen::MatrixXd& predicted) {
  if (static_cast<Eigen::Index>(assignments.size()) != predicted.rows())
    throw std::invalid_argument("assignment count != prediction rows");
  check_assignments(assignments, entry_count);

  Eigen::MatrixXd mean_probs = Eigen::MatrixXd::Zero(entry_count, predicted.cols());
  std::vector<long> totals(static_cast<std::size_t>(entry_count), 0);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    mean_probs.row(assignments[i]) += predicted.row(static_cast<Eigen::Index>(i));
    totals[static_cast<std::size_t>(assignments[i])]++;
  }

  PurityReport report;
  report.entry_entropy.assign(static_cast<std::size_t>(entry_count),
                              std::numeric_limits<double>::quiet_NaN());
  report.used.assign(static_cast<std::size_t>(entry_count), false);
  double sum = 0;
  int used = 0;
  for (int q = 0; q < entry_count; ++q) {
    if (totals[static_cast<std::size_t>(q)] == 0) continue;
    Eigen::VectorXd p = mean_probs.row(q) / static_cast<double>(totals[static_cast<std::size_t>(q)]);
    report.entry_entropy[static_cast<std::size_t>(q)] =
        entropy_bits(p.data(), static_cast<int>(p.size()));
    report.used[static_cast<std::size_t>(q)] = true;
    sum += report.entry_entropy[static_cast<std::size_t>(q)];
    ++used;
  }
  report.h_avg = used > 0 ? sum / used : 0.0;
  return report;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& truth,
                                 const std::vector<int>& predicted) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("truth and prediction lengths differ");

  ConfusionMatrix cm;
  cm.rows = Eigen::MatrixXd::Zero(kClassCount, kClassCount);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    int t = truth[i], p = predicted[i];
    if (t < 0 || t >= kClassCount || p < 0 || p >= kClassCount)
      throw std::invalid_argument("class index out of range");
    cm.rows(t, p) += 1.0;
    cm.truth_counts[static_cast<std::size_t>(t)]++;
  }
  for (int r = 0; r < kClassCount; ++r) {
    if (cm.truth_counts[static_cast<std::size_t>(r)] > 0) {
      cm.defined[static_cast<std::size_t>(r)] = true;
      cm.rows.row(r) /= static_cast<double>(cm.truth_counts[static_cast<std::size_t>(r)]);
    }
  }
  return cm;
}

double reconstruction_loss(const Dataset& dataset, const ModelParams& params,
                           const Codebook& codebook, const FeatureStats& stats) {
  if (dataset.scenarios.empty()) throw ConfigError("reconstruction loss of an empty dataset");
  Eigen::MatrixXd x = dataset_matrix(dataset, stats);
  ForwardCache cache = forward(params, codebook, x);
  return (x - cache.reconstruction).squaredNorm() / static_cast<double>(x.rows());
}

RepresentativeExport export_representatives(const std::string& csv_path,
                                            const ModelParams& params, const Codebook& codebook,
                                            const FeatureStats& stats,
                                            const std::vector<int>& assignments) {
  check_assignments(assignments, codebook.entry_count());
  std::vector<bool> used(static_cast<std::size_t>(codebook.entry_count()), false);
  for (int a : assignments) used[static_cast<std::size_t>(a)] = true;

  RepresentativeExport result;
  for (int q = 0; q < codebook.entry_count(); ++q)
    (used[static_cast<std::size_t>(q)] ? result.exported_entries : result.omitted_entries)
        .push_back(q);

  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + csv_path + "'");
  out << "entry,slot,t,x,y,vx,vy\n";

  std::vector<double> physical(kScenarioDim);
  for (int q : result.exported_entries) {
    Eigen::MatrixXd decoded = decode(params, codebook.entries().row(q));
    Eigen::VectorXd flat = decoded.row(0).transpose();
    denormalize_values(flat.data(), stats, physical.data());
    // decoded rows are laid out like Scenario::values (slot-major)
    for (int slot = 0; slot < kVehicleSlots; ++slot)
      for (int t = 0; t < kTimeSteps; ++t) {
        out << q << ',' << slot << ',' << t << ','
            << format_g17(physical[static_cast<std::size_t>(Scenario::index(slot, kFeatX, t))])
            << ','
            << format_g17(physical[static_cast<std::size_t>(Scenario::index(slot, kFeatY, t))])
            << ','
            << format_g17(physical[static_cast<std::size_t>(Scenario::index(slot, kFeatVx, t))])
            << ','
            << format_g17(physical[static_cast<std::size_t>(Scenario::index(slot, kFeatVy, t))])
            << '\n';
        ++result.rows_written;
      }
  }
  if (!out) throw IoError("write failed for '" + csv_path + "'");
  return result;
}

void write_usage_histogram_csv(const std::string& path, const UsageStats& usage) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "entry,count,count_lcl,count_kl,count_lcr\n";
  for (std::size_t q = 0; q < usage.counts.size(); ++q) {
    const auto& comp = usage.class_composition[q];
    out << q << ',' << usage.counts[q] << ',' << comp[0] << ',' << comp[1] << ',' << comp[2]
        << '\n';
  }
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& matrix) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "truth,pred_lcl,pred_kl,pred_lcr,defined\n";
  const char* names[kClassCount] = {"lcl", "kl", "lcr"};
  for (int r = 0; r < kClassCount; ++r) {
    out << names[r];
    for (int c = 0; c < kClassCount; ++c) out << ',' << format_g17(matrix.rows(r, c));
    out << ',' << (matrix.defined[static_cast<std::size_t>(r)] ? 1 : 0) << '\n';
  }
}

void write_purity_csv(const std::string& path, const PurityReport& purity) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "entry,used,entropy_bits\n";
  for (std::size_t q = 0; q < purity.entry_entropy.size(); ++q) {
    out << q << ',' << (purity.used[q] ? 1 : 0) << ',';
    if (purity.used[q])
      out << format_g17(purity.entry_entropy[q]);
    out << '\n';
  }
}

}  // namespace scenecat
