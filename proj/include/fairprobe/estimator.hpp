#pragma once

#include <set>
#include <vector>

#include "fairprobe/core.hpp"

namespace fairprobe {

inline constexpr double kConditionLimit = 1e12;

struct PluginEstimate {
  std::vector<double> m_hat;    // NaN for undefined groups
  std::vector<double> tau_hat;
  std::vector<double> n_hat;    // tau_hat * m_hat elementwise
  std::set<std::size_t> undefined_groups;
};

struct BiasReport {
  std::vector<double> m;
  std::vector<double> bias;       // m - p
  std::vector<double> bound;
  std::vector<double> delta_max;
};

// Per-observed-group empirical success rates and group shares. Groups with
// zero count are flagged in undefined_groups (fatal only when strict).
PluginEstimate plugin_estimate(const BinaryTrialTable& trials, std::size_t k,
                               bool strict = false);

// Population limit of the plug-in estimator: m_g = sum_a pi_a c_ag p_a / tau_g.
std::vector<double> population_m(const GroupModel& model);

// Closed-form bias and its bound; requires pi_g c_gg > 0 per group.
BiasReport bias_and_bound(const GroupModel& model);

// Solve C^T x = tau_hat * m_hat, return x / pi elementwise.
std::vector<double> corrected_estimator(const ConfusionMatrix& confusion,
                                        const std::vector<double>& tau_hat,
                                        const std::vector<double>& m_hat,
                                        const std::vector<double>& pi);

// Squared operator norm of (C^T)^-1.
double variance_inflation_factor(const ConfusionMatrix& confusion);

// pi_hat = (C^T)^-1 tau_hat, from the identity tau = C^T pi. Extension for
// callers that only observe predicted groups.
std::vector<double> estimate_prior_from_tau(const ConfusionMatrix& confusion,
                                            const std::vector<double>& tau_hat);

}  // namespace fairprobe
