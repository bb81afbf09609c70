#include <doctest.h>

#include <cmath>

#include "fairprobe/error.hpp"
#include "fairprobe/simulator.hpp"
#include "test_util.hpp"

using namespace fairprobe;
using fairprobe::testutil::hand_model;

namespace {

SimConfig hand_config(std::size_t identities, std::size_t replications,
                      std::uint64_t seed) {
  SimConfig config;
  config.model = hand_model();
  config.identities_per_run = identities;
  config.replications = replications;
  config.seed = seed;
  return config;
}

GroupModel identity_model() {
  ConfusionMatrix cm;
  cm.entries = Matrix::identity(2);
  return GroupModel::make({0.5, 0.5}, {0.9, 0.7}, cm);
}

}  // namespace

TEST_CASE("sample_run with identity confusion never mislabels") {
  const BinaryTrialTable run = sample_run(identity_model(), 2000, 7);
  for (const auto& row : run.rows) CHECK(*row.g_true == row.g_hat);
}

TEST_CASE("sample_run with p = 1 yields all successes") {
  ConfusionMatrix cm;
  cm.entries = Matrix::identity(2);
  const GroupModel model = GroupModel::make({0.5, 0.5}, {1.0, 1.0}, cm);
  const BinaryTrialTable run = sample_run(model, 500, 9);
  for (const auto& row : run.rows) CHECK(row.y);
}

TEST_CASE("sample_run is bit-identical under a fixed seed") {
  const GroupModel model = hand_model();
  const BinaryTrialTable a = sample_run(model, 1000, 42);
  const BinaryTrialTable b = sample_run(model, 1000, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.rows[i].y == b.rows[i].y);
    CHECK(a.rows[i].g_hat == b.rows[i].g_hat);
    CHECK(*a.rows[i].g_true == *b.rows[i].g_true);
  }
}

TEST_CASE("conditional-independence fidelity of the sampler") {
  const GroupModel model = hand_model();
  const std::size_t n = 400000;
  const BinaryTrialTable run = sample_run(model, n, 31);
  // joint frequencies of (G, G_hat, Y) should factor as pi_a c_ab (p_a or 1-p_a)
  double counts[2][2][2] = {};
  for (const auto& row : run.rows)
    counts[*row.g_true][row.g_hat][row.y ? 1 : 0] += 1.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int y = 0; y < 2; ++y) {
        const double expected = model.pi[a] * model.confusion.entries(a, b) *
                                (y ? model.p[a] : 1.0 - model.p[a]);
        const double observed = counts[a][b][y] / static_cast<double>(n);
        const double se = std::sqrt(expected * (1.0 - expected) /
                                    static_cast<double>(n));
        CHECK(std::abs(observed - expected) <= 4.0 * se + 1e-9);
      }
}

TEST_CASE("verify_prop1 on the hand model") {
  const SimReport report = verify_prop1(hand_config(20000, 30, 1234));
  CHECK(report.prop1_ok);
  CHECK(report.bound_ok);
  CHECK(report.population_m[0] == doctest::Approx(0.88).epsilon(1e-14));
  CHECK(report.population_m[1] == doctest::Approx(0.72).epsilon(1e-14));
  // empirical bias of group 0 is negative (m_0 < p_0)
  CHECK(report.empirical_bias[0] < 0.0);
  CHECK(report.dropped_replications == 0);
}

TEST_CASE("verify_prop1 with identity confusion concentrates on p") {
  SimConfig config;
  config.model = identity_model();
  config.identities_per_run = 50000;
  config.replications = 20;
  config.seed = 77;
  const SimReport report = verify_prop1(config);
  CHECK(report.prop1_ok);
  CHECK(std::abs(report.m_hat_mean[0] - 0.9) < 0.01);
  CHECK(std::abs(report.m_hat_mean[1] - 0.7) < 0.01);
}

TEST_CASE("verify_prop1 is deterministic and thread-count independent") {
  const SimConfig config = hand_config(5000, 16, 99);
  const SimReport a = verify_prop1(config, 1);
  const SimReport b = verify_prop1(config, 4);
  CHECK(a.m_hat_mean == b.m_hat_mean);
  CHECK(a.m_hat_variance == b.m_hat_variance);
  CHECK(a.m_hat_se == b.m_hat_se);
}

TEST_CASE("verify_prop2 on the hand model") {
  const SimReport report = verify_prop2(hand_config(50000, 60, 2024), 4);
  CHECK(report.has_corrected);
  CHECK(report.prop2_unbiased_ok);
  CHECK(report.prop2_variance_ok);
  CHECK(std::abs(report.corrected_mean[0] - 0.9) < 0.01);
  CHECK(std::abs(report.corrected_mean[1] - 0.7) < 0.01);
  CHECK(report.inflation_factor == doctest::Approx(1.5625).epsilon(1e-9));
}

TEST_CASE("verify_prop2 is deterministic across thread counts") {
  const SimConfig config = hand_config(4000, 12, 5150);
  const SimReport a = verify_prop2(config, 1);
  const SimReport b = verify_prop2(config, 3);
  CHECK(a.corrected_mean == b.corrected_mean);
  CHECK(a.cov_corrected_norm == b.cov_corrected_norm);
  CHECK(a.cov_n_norm == b.cov_n_norm);
}

TEST_CASE("dropped-replication policy fails past 10 percent") {
  // tiny runs with a rare group force empty groups in most replications
  ConfusionMatrix cm;
  cm.entries = Matrix::identity(2);
  SimConfig config;
  config.model = GroupModel::make({0.999, 0.001}, {0.9, 0.7}, cm);
  config.identities_per_run = 5;
  config.replications = 20;
  config.seed = 3;
  CHECK_THROWS_AS(verify_prop1(config), Error);
}

TEST_CASE("sweep keeps order, records failures, shrinks SE with I") {
  std::vector<SimConfig> configs;
  for (const std::size_t identities : {std::size_t{1000}, std::size_t{10000},
                                       std::size_t{100000}})
    configs.push_back(hand_config(identities, 12, 808));
  // one deliberately broken config in the middle of a second sweep
  const SweepResult result = sweep(configs);
  REQUIRE(result.entries.size() == 3);
  for (const auto& entry : result.entries) CHECK_FALSE(entry.failed);
  // SE shrinks roughly like 1/sqrt(I): a factor 100 in I gives ~10x, accept 2x slack
  const double se_small = result.entries[0].report.m_hat_se[0];
  const double se_large = result.entries[2].report.m_hat_se[0];
  CHECK(se_large < se_small);
  const double ratio = se_small / se_large;
  CHECK(ratio > 5.0);
  CHECK(ratio < 20.0);
  CHECK(result.table.size() == 6);
  CHECK(result.table[0].config_index == 0);
  CHECK(result.table[5].config_index == 2);

  SUBCASE("empty sweep") {
    const SweepResult empty = sweep({});
    CHECK(empty.entries.empty());
    CHECK(empty.table.empty());
  }
}

TEST_CASE("bias magnitude is monotone along identity-to-uniform path") {
  // interpolate C = (1-t) I + t * uniform for the hand model's pi/p
  double previous = -1.0;
  for (const double t : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    ConfusionMatrix cm;
    cm.entries = Matrix(2, 2);
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b)
        cm.entries(a, b) = (1.0 - t) * (a == b ? 1.0 : 0.0) + t * 0.5;
    const GroupModel model = GroupModel::make({0.5, 0.5}, {0.9, 0.7}, cm);
    const BiasReport report = bias_and_bound(model);
    const double magnitude = std::abs(report.bias[0]);
    CHECK(magnitude >= previous - 1e-15);
    previous = magnitude;
  }
}
