#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "scenecat/csv.hpp"
#include "scenecat/metrics.hpp"
#include "scenecat/trainer.hpp"
#include "support/tempdir.hpp"

using namespace scenecat;
using namespace scenecat::testing;

namespace {

constexpr double kLog2Three = 1.584962500721156;

// small model over real scenario dimensions, no training required
struct ModelFixture {
  Dataset dataset;
  FeatureStats stats;
  ModelParams params;
  Codebook codebook;

  ModelFixture()
      : dataset(make_dataset()),
        stats(compute_feature_stats(dataset)),
        params(ModelParams::init(make_config(), 11)),
        codebook(4, 6, 0.99, 1e-3, true, 12) {}

  static Dataset make_dataset() {
    SynthConfig config;
    config.per_class = {4, 4, 4};
    return synth_generate(config, 33);
  }
  static ModelConfig make_config() {
    ModelConfig mc;
    mc.hidden = {16};
    mc.latent_dim = 6;
    return mc;
  }
};

}  // namespace

TEST_CASE("occurrence probabilities are assignment frequencies") {
  CategoryDistribution dist = occurrence_probabilities({0, 0, 1, 2}, 3);
  REQUIRE(dist.counts.size() == 3);
  CHECK(dist.counts == std::vector<long>{2, 1, 1});
  CHECK(dist.probabilities == std::vector<double>{0.5, 0.25, 0.25});

  SUBCASE("order of assignments is irrelevant") {
    CategoryDistribution shuffled = occurrence_probabilities({2, 0, 1, 0}, 3);
    CHECK(shuffled.probabilities == dist.probabilities);
  }
  SUBCASE("unused entries get zero probability") {
    CategoryDistribution wide = occurrence_probabilities({0, 0, 1, 2}, 5);
    CHECK(wide.probabilities[3] == 0.0);
    CHECK(wide.probabilities[4] == 0.0);
    double sum = 0;
    for (double p : wide.probabilities) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("degenerate inputs raise") {
    CHECK_THROWS_AS(occurrence_probabilities({}, 3), ConfigError);
    CHECK_THROWS_AS(occurrence_probabilities({3}, 3), std::invalid_argument);
    CHECK_THROWS_AS(occurrence_probabilities({-1}, 3), std::invalid_argument);
  }
}

TEST_CASE("empirical per-entry entropy matches hand-computed values") {
  // entry 0 ← labels {0,0}: pure, H=0
  // entry 1 ← labels {0,1,2}: uniform over three classes, H=log2(3)
  // entry 2 ← unused
  std::vector<int> assignments = {0, 0, 1, 1, 1};
  std::vector<int> labels = {0, 0, 0, 1, 2};
  PurityReport report = entropy_per_entry(assignments, 3, labels);

  REQUIRE(report.entry_entropy.size() == 3);
  CHECK(report.used == std::vector<bool>{true, true, false});
  CHECK(report.entry_entropy[0] == 0.0);
  CHECK(report.entry_entropy[1] == doctest::Approx(kLog2Three).epsilon(1e-15));
  CHECK(std::isnan(report.entry_entropy[2]));
  CHECK(report.h_avg == doctest::Approx(kLog2Three / 2).epsilon(1e-15));

  SUBCASE("a two-class even split gives exactly one bit") {
    PurityReport bit = entropy_per_entry({0, 0, 0, 0}, 1, std::vector<int>{0, 1, 0, 1});
    CHECK(bit.entry_entropy[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bit.h_avg == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("entropy is bounded by log2 of the class count") {
    PurityReport any =
        entropy_per_entry({0, 0, 0, 0, 0}, 1, std::vector<int>{0, 1, 2, 2, 1});
    CHECK(any.entry_entropy[0] > 0.0);
    CHECK(any.entry_entropy[0] <= kLog2Three + 1e-15);
  }
  SUBCASE("mismatched lengths and bad labels raise") {
    CHECK_THROWS_AS(entropy_per_entry({0, 1}, 2, std::vector<int>{0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(entropy_per_entry({0}, 1, std::vector<int>{3}), std::invalid_argument);
  }
}

TEST_CASE("predicted-probability entropy uses the mean vector per entry") {
  Eigen::MatrixXd predicted(2, 3);
  predicted << 1, 0, 0, 0, 1, 0;  // two confident, opposite predictions
  PurityReport report = entropy_per_entry({0, 0}, 2, predicted);
  // mean vector (0.5, 0.5, 0): one bit, though each row has zero entropy
  CHECK(report.entry_entropy[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(report.used == std::vector<bool>{true, false});
  CHECK(std::isnan(report.entry_entropy[1]));
  CHECK(report.h_avg == doctest::Approx(1.0).epsilon(1e-15));

  SUBCASE("single sample keeps its own entropy") {
    Eigen::MatrixXd one(1, 3);
    one << 0.5, 0.25, 0.25;
    PurityReport single = entropy_per_entry({0}, 1, one);
    CHECK(single.entry_entropy[0] == doctest::Approx(1.5).epsilon(1e-15));
  }
  SUBCASE("row count must match assignments") {
    CHECK_THROWS_AS(entropy_per_entry({0}, 1, predicted), std::invalid_argument);
  }
}

TEST_CASE("confusion matrix rows are truth-conditional frequencies") {
  std::vector<int> truth = {1, 1, 0};
  std::vector<int> predicted = {1, 0, 0};
  ConfusionMatrix cm = confusion_matrix(truth, predicted);

  CHECK(cm.truth_counts == std::array<long, 3>{1, 2, 0});
  CHECK(cm.defined == std::array<bool, 3>{true, true, false});
  CHECK(cm.rows(0, 0) == 1.0);
  CHECK(cm.rows(0, 1) == 0.0);
  CHECK(cm.rows(1, 0) == 0.5);
  CHECK(cm.rows(1, 1) == 0.5);
  CHECK(cm.rows(1, 2) == 0.0);
  CHECK(cm.rows.row(2).isZero());
  for (int r = 0; r < 2; ++r)
    CHECK(cm.rows.row(r).sum() == doctest::Approx(1.0).epsilon(1e-15));

  SUBCASE("perfect prediction is the identity") {
    ConfusionMatrix diag = confusion_matrix({0, 1, 2, 2}, {0, 1, 2, 2});
    CHECK(diag.rows == Eigen::MatrixXd::Identity(3, 3));
    CHECK(diag.defined == std::array<bool, 3>{true, true, true});
  }
  SUBCASE("invalid inputs raise") {
    CHECK_THROWS_AS(confusion_matrix({0}, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(confusion_matrix({3}, {0}), std::invalid_argument);
  }
}

TEST_CASE("reconstruction loss equals the mean quantized-decode residual") {
  ModelFixture fx;
  double loss = reconstruction_loss(fx.dataset, fx.params, fx.codebook, fx.stats);
  CHECK(std::isfinite(loss));
  CHECK(loss >= 0.0);

  // recompose from the primitive operations
  Eigen::MatrixXd x = dataset_matrix(fx.dataset, fx.stats);
  Eigen::MatrixXd z_hat = encode(fx.params, x);
  QuantizeResult qr = fx.codebook.quantize(z_hat);
  Eigen::MatrixXd z_q(x.rows(), fx.codebook.dim());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    z_q.row(i) = fx.codebook.entries().row(qr.indices[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd recon = decode(fx.params, z_q);
  double manual = (x - recon).squaredNorm() / static_cast<double>(x.rows());
  CHECK(loss == doctest::Approx(manual).epsilon(1e-15));

  SUBCASE("invariant under scenario reordering") {
    Dataset shuffled = fx.dataset;
    std::reverse(shuffled.scenarios.begin(), shuffled.scenarios.end());
    CHECK(reconstruction_loss(shuffled, fx.params, fx.codebook, fx.stats) ==
          doctest::Approx(loss).epsilon(1e-12));
  }
  SUBCASE("empty dataset raises") {
    Dataset empty;
    CHECK_THROWS_AS(reconstruction_loss(empty, fx.params, fx.codebook, fx.stats),
                    ConfigError);
  }
}

TEST_CASE("representative export writes one decoded trajectory set per used entry") {
  ModelFixture fx;
  ScratchDir dir;
  const std::string path = dir.file("representatives.csv");

  // entries 0 and 2 used, 1 and 3 omitted
  std::vector<int> assignments = {0, 2, 0, 2, 2};
  RepresentativeExport result =
      export_representatives(path, fx.params, fx.codebook, fx.stats, assignments);

  CHECK(result.exported_entries == std::vector<int>{0, 2});
  CHECK(result.omitted_entries == std::vector<int>{1, 3});
  CHECK(result.rows_written == static_cast<std::size_t>(2 * kVehicleSlots * kTimeSteps));

  // parse back and compare against a manual decode + denormalize, exactly
  Eigen::MatrixXd decoded = decode(fx.params, fx.codebook.entries().row(2));
  std::vector<double> physical(kScenarioDim);
  {
    Eigen::VectorXd flat = decoded.row(0).transpose();
    denormalize_values(flat.data(), fx.stats, physical.data());
  }

  CsvReader reader(path);
  const int c_entry = reader.column("entry"), c_slot = reader.column("slot"),
            c_t = reader.column("t"), c_x = reader.column("x"), c_y = reader.column("y"),
            c_vx = reader.column("vx"), c_vy = reader.column("vy");
  std::vector<std::string_view> fields;
  std::size_t rows = 0, matched = 0;
  while (reader.next_row(fields)) {
    ++rows;
    if (reader.parse_long(fields, c_entry, "entry") != 2) continue;
    int slot = static_cast<int>(reader.parse_long(fields, c_slot, "slot"));
    int t = static_cast<int>(reader.parse_long(fields, c_t, "t"));
    CHECK(reader.parse_double(fields, c_x, "x") ==
          physical[static_cast<std::size_t>(Scenario::index(slot, kFeatX, t))]);
    CHECK(reader.parse_double(fields, c_y, "y") ==
          physical[static_cast<std::size_t>(Scenario::index(slot, kFeatY, t))]);
    CHECK(reader.parse_double(fields, c_vx, "vx") ==
          physical[static_cast<std::size_t>(Scenario::index(slot, kFeatVx, t))]);
    CHECK(reader.parse_double(fields, c_vy, "vy") ==
          physical[static_cast<std::size_t>(Scenario::index(slot, kFeatVy, t))]);
    ++matched;
  }
  CHECK(rows == result.rows_written);
  CHECK(matched == static_cast<std::size_t>(kVehicleSlots * kTimeSteps));

  SUBCASE("unwritable path raises") {
    CHECK_THROWS_AS(export_representatives(dir.file("no/such/dir.csv"), fx.params,
                                           fx.codebook, fx.stats, assignments),
                    IoError);
  }
}

TEST_CASE("plot CSV emitters produce one row per entry or class") {
  ScratchDir dir;

  SUBCASE("usage histogram") {
    UsageStats usage = usage_stats(4, {0, 0, 1, 2, 2, 2}, {0, 1, 1, 2, 2, 2});
    const std::string path = dir.file("usage.csv");
    write_usage_histogram_csv(path, usage);

    CsvReader reader(path);
    const int c_count = reader.column("count");
    const int c_lcl = reader.column("count_lcl");
    std::vector<std::string_view> fields;
    long total = 0, rows = 0;
    while (reader.next_row(fields)) {
      total += reader.parse_long(fields, c_count, "count");
      ++rows;
    }
    CHECK(rows == 4);
    CHECK(total == 6);
    (void)c_lcl;
  }
  SUBCASE("confusion") {
    ConfusionMatrix cm = confusion_matrix({1, 1, 0}, {1, 0, 0});
    const std::string path = dir.file("confusion.csv");
    write_confusion_csv(path, cm);

    CsvReader reader(path);
    const int c_truth = reader.column("truth");
    const int c_kl = reader.column("pred_kl");
    const int c_defined = reader.column("defined");
    std::vector<std::string_view> fields;
    REQUIRE(reader.next_row(fields));  // lcl row
    CHECK(fields[static_cast<std::size_t>(c_truth)] == "lcl");
    REQUIRE(reader.next_row(fields));  // kl row
    CHECK(reader.parse_double(fields, c_kl, "pred_kl") == 0.5);
    CHECK(reader.parse_long(fields, c_defined, "defined") == 1);
    REQUIRE(reader.next_row(fields));  // lcr row: absent from truth
    CHECK(reader.parse_long(fields, c_defined, "defined") == 0);
    CHECK_FALSE(reader.next_row(fields));
  }
  SUBCASE("purity leaves the entropy blank for unused entries") {
    PurityReport report = entropy_per_entry({0, 0}, 2, std::vector<int>{0, 1});
    const std::string path = dir.file("purity.csv");
    write_purity_csv(path, report);

    CsvReader reader(path);
    const int c_used = reader.column("used");
    const int c_h = reader.column("entropy_bits");
    std::vector<std::string_view> fields;
    REQUIRE(reader.next_row(fields));
    CHECK(reader.parse_long(fields, c_used, "used") == 1);
    CHECK(reader.parse_double(fields, c_h, "entropy_bits") == 1.0);
    REQUIRE(reader.next_row(fields));
    CHECK(reader.parse_long(fields, c_used, "used") == 0);
    CHECK(trim(fields[static_cast<std::size_t>(c_h)]).empty());
  }
}
