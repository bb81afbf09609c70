#include "fairprobe/estimator.hpp"

#include <cmath>
#include <limits>

#include "fairprobe/error.hpp"

namespace fairprobe {

namespace {

Matrix invert_checked(const Matrix& a, ErrorCode code) {
  Matrix inv;
  try {
    inv = invert(a);
  } catch (const Error& e) {
    throw Error(code, e.what());
  }
  const double cond = operator_norm(a) * operator_norm(inv);
  if (!(cond <= kConditionLimit))
    throw Error(code, "condition estimate " + std::to_string(cond) +
                          " exceeds 1e12");
  return inv;
}

}  // namespace

PluginEstimate plugin_estimate(const BinaryTrialTable& trials, std::size_t k,
                               bool strict) {
  if (trials.empty()) throw Error(ErrorCode::EmptyTable, "no trials");
  const GroupCounts gc = group_counts(trials, k);
  const double total = static_cast<double>(trials.size());

  PluginEstimate est;
  est.m_hat.assign(k, std::numeric_limits<double>::quiet_NaN());
  est.tau_hat.assign(k, 0.0);
  est.n_hat.assign(k, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t g = 0; g < k; ++g) {
    est.tau_hat[g] = static_cast<double>(gc.counts[g]) / total;
    if (gc.counts[g] == 0) {
      est.undefined_groups.insert(g);
      if (strict)
        throw Error(ErrorCode::StrictModeEmptyGroup,
                    "group " + std::to_string(g) + " has no trials");
      continue;
    }
    est.m_hat[g] = static_cast<double>(gc.successes[g]) /
                   static_cast<double>(gc.counts[g]);
    est.n_hat[g] = est.tau_hat[g] * est.m_hat[g];
  }
  return est;
}

std::vector<double> population_m(const GroupModel& model) {
  const std::size_t k = model.size();
  std::vector<double> m(k);
  std::string zero_groups;
  for (std::size_t g = 0; g < k; ++g) {
    double num = 0.0, den = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      const double w = model.pi[a] * model.confusion.entries(a, g);
      num += w * model.p[a];
      den += w;
    }
    if (den <= 0.0) {
      zero_groups += (zero_groups.empty() ? "" : ", ") + std::to_string(g);
      continue;
    }
    m[g] = num / den;
  }
  if (!zero_groups.empty())
    throw Error(ErrorCode::ZeroTau, "tau is zero for groups: " + zero_groups);
  return m;
}

BiasReport bias_and_bound(const GroupModel& model) {
  const std::size_t k = model.size();
  BiasReport report;
  report.m = population_m(model);
  report.bias.resize(k);
  report.bound.resize(k);
  report.delta_max.resize(k);
  for (std::size_t g = 0; g < k; ++g) {
    double num = 0.0, den = 0.0, off_diag = 0.0, delta = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      const double w = model.pi[a] * model.confusion.entries(a, g);
      den += w;
      if (a != g) {
        num += w * (model.p[a] - model.p[g]);
        off_diag += w;
        delta = std::max(delta, std::abs(model.p[a] - model.p[g]));
      }
    }
    const double diag = model.pi[g] * model.confusion.entries(g, g);
    if (diag <= 0.0)
      throw Error(ErrorCode::DegenerateDiagonal,
                  "pi_g c_gg = 0 for group " + std::to_string(g));
    report.bias[g] = num / den;
    report.delta_max[g] = delta;
    report.bound[g] = delta * off_diag / diag;
  }
  return report;
}

std::vector<double> corrected_estimator(const ConfusionMatrix& confusion,
                                        const std::vector<double>& tau_hat,
                                        const std::vector<double>& m_hat,
                                        const std::vector<double>& pi) {
  const std::size_t k = confusion.size();
  if (tau_hat.size() != k || m_hat.size() != k || pi.size() != k)
    throw Error(ErrorCode::DimensionMismatch, "corrected_estimator inputs");
  std::vector<double> n_hat(k);
  for (std::size_t g = 0; g < k; ++g) {
    if (std::isnan(m_hat[g]))
      throw Error(ErrorCode::UndefinedPlugin,
                  "m_hat undefined for group " + std::to_string(g));
    if (pi[g] <= 0.0)
      throw Error(ErrorCode::ZeroPrior,
                  "pi must be strictly positive (group " + std::to_string(g) + ")");
    n_hat[g] = tau_hat[g] * m_hat[g];
  }

  const Matrix ct = confusion.entries.transposed();
  SolveResult solved;
  try {
    solved = solve_dense(ct, n_hat);
  } catch (const Error& e) {
    throw Error(ErrorCode::SingularConfusion, e.what());
  }
  if (!(solved.condition_estimate <= kConditionLimit))
    throw Error(ErrorCode::SingularConfusion,
                "condition estimate exceeds 1e12");
  for (std::size_t g = 0; g < k; ++g) solved.x[g] /= pi[g];
  return solved.x;
}

double variance_inflation_factor(const ConfusionMatrix& confusion) {
  const Matrix ct_inv =
      invert_checked(confusion.entries.transposed(), ErrorCode::SingularConfusion);
  const double norm = operator_norm(ct_inv);
  return norm * norm;
}

std::vector<double> estimate_prior_from_tau(const ConfusionMatrix& confusion,
                                            const std::vector<double>& tau_hat) {
  const Matrix ct = confusion.entries.transposed();
  SolveResult solved;
  try {
    solved = solve_dense(ct, tau_hat);
  } catch (const Error& e) {
    throw Error(ErrorCode::SingularConfusion, e.what());
  }
  if (!(solved.condition_estimate <= kConditionLimit))
    throw Error(ErrorCode::SingularConfusion,
                "condition estimate exceeds 1e12");
  return solved.x;
}

}  // namespace fairprobe
