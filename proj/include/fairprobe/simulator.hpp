#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairprobe/core.hpp"
#include "fairprobe/estimator.hpp"

namespace fairprobe {

struct SimTolerances {
  double se_multiplier = 4.0;
  double cov_slack = 0.05;
};

struct SimConfig {
  GroupModel model;
  std::size_t identities_per_run = 1;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  SimTolerances tolerances;

  void validate() const;
};

struct SimReport {
  std::size_t k = 0;
  std::size_t identities_per_run = 0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  SimTolerances tolerances;

  // Prop-1 surface.
  std::vector<double> m_hat_mean;
  std::vector<double> m_hat_variance;
  std::vector<double> m_hat_se;          // standard error of the replication mean
  std::vector<double> population_m;
  std::vector<double> closed_form_bias;
  std::vector<double> bias_bound;
  std::vector<double> empirical_bias;    // mean m_hat - p

  // Prop-2 surface (filled by verify_prop2).
  bool has_corrected = false;
  std::vector<double> corrected_mean;
  std::vector<double> corrected_se;
  double cov_corrected_norm = 0.0;  // ||Cov((C^T)^-1 n_hat)||_op
  double cov_n_norm = 0.0;          // ||Cov(n_hat)||_op
  double inflation_factor = 0.0;
  std::size_t dropped_replications = 0;

  // Verdicts.
  bool prop1_ok = false;
  bool bound_ok = false;
  bool prop2_unbiased_ok = false;
  bool prop2_variance_ok = false;
};

// One synthetic run: G ~ Cat(pi), Y ~ Bern(p_G), G_hat ~ Cat(row G of C),
// with Y and G_hat independent given G.
BinaryTrialTable sample_run(const GroupModel& model, std::size_t identities,
                            std::uint64_t seed);

SimReport verify_prop1(const SimConfig& config, unsigned threads = 1);

SimReport verify_prop2(const SimConfig& config, unsigned threads = 1);

struct SweepEntry {
  SimReport report;
  bool failed = false;
  std::string error;
};

struct SweepRow {
  std::size_t config_index = 0;
  std::size_t group = 0;
  std::size_t identities_per_run = 0;
  double m_hat_mean = 0.0;
  double m_hat_se = 0.0;
  double population_m = 0.0;
  double closed_form_bias = 0.0;
  double bias_bound = 0.0;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::vector<SweepRow> table;
};

SweepResult sweep(const std::vector<SimConfig>& configs, unsigned threads = 1);

}  // namespace fairprobe
