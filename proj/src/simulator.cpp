#include "fairprobe/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "fairprobe/error.hpp"
#include "fairprobe/rng.hpp"

namespace fairprobe {

namespace {

// Column g of the replication matrix, for pairwise reduction.
std::vector<double> column(const std::vector<std::vector<double>>& rows,
                           std::size_t g) {
  std::vector<double> col;
  col.reserve(rows.size());
  for (const auto& r : rows) col.push_back(r[g]);
  return col;
}

struct MomentStats {
  std::vector<double> mean;
  std::vector<double> variance;  // unbiased across replications
  std::vector<double> se;        // of the replication mean
};

MomentStats moments(const std::vector<std::vector<double>>& rows, std::size_t k) {
  const double n = static_cast<double>(rows.size());
  MomentStats stats;
  stats.mean.resize(k);
  stats.variance.assign(k, 0.0);
  stats.se.assign(k, 0.0);
  for (std::size_t g = 0; g < k; ++g) {
    std::vector<double> col = column(rows, g);
    stats.mean[g] = pairwise_sum(col) / n;
    if (rows.size() > 1) {
      for (double& v : col) {
        const double d = v - stats.mean[g];
        v = d * d;
      }
      stats.variance[g] = pairwise_sum(col) / (n - 1.0);
      stats.se[g] = std::sqrt(stats.variance[g] / n);
    }
  }
  return stats;
}

Matrix covariance(const std::vector<std::vector<double>>& rows,
                  const std::vector<double>& mean, std::size_t k) {
  Matrix cov(k, k);
  if (rows.size() < 2) return cov;
  const double n = static_cast<double>(rows.size());
  std::vector<double> products(rows.size());
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a; b < k; ++b) {
      for (std::size_t r = 0; r < rows.size(); ++r)
        products[r] = (rows[r][a] - mean[a]) * (rows[r][b] - mean[b]);
      const double c = pairwise_sum(products) / (n - 1.0);
      cov(a, b) = c;
      cov(b, a) = c;
    }
  return cov;
}

// Runs fn(r) for r in [0, count) across `threads` workers; each call owns
// slot r of its output, so the result is independent of the partitioning.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t r = 0; r < count; ++r) fn(r);
    return;
  }
  const unsigned workers = std::min<unsigned>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < count; r += workers) fn(r);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

void SimConfig::validate() const {
  if (identities_per_run < 1 || replications < 1)
    throw Error(ErrorCode::InvalidInput, "I and R must be >= 1");
  model.validate();
}

BinaryTrialTable sample_run(const GroupModel& model, std::size_t identities,
                            std::uint64_t seed) {
  const std::size_t k = model.size();
  Rng rng(seed);
  BinaryTrialTable table;
  table.rows.reserve(identities);
  std::vector<std::vector<double>> confusion_rows(k);
  for (std::size_t a = 0; a < k; ++a) {
    confusion_rows[a].resize(k);
    for (std::size_t b = 0; b < k; ++b)
      confusion_rows[a][b] = model.confusion.entries(a, b);
  }
  for (std::size_t i = 0; i < identities; ++i) {
    BinaryTrialRow row;
    row.identity_id = "sim-" + std::to_string(i);
    const std::size_t g = rng.categorical(model.pi);
    row.g_true = g;
    row.y = rng.bernoulli(model.p[g]);
    row.g_hat = rng.categorical(confusion_rows[g]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

SimReport verify_prop1(const SimConfig& config, unsigned threads) {
  config.validate();
  const std::size_t k = config.model.size();
  const std::size_t r_total = config.replications;

  SimReport report;
  report.k = k;
  report.identities_per_run = config.identities_per_run;
  report.replications = r_total;
  report.seed = config.seed;
  report.tolerances = config.tolerances;

  const BiasReport bias = bias_and_bound(config.model);
  report.population_m = bias.m;
  report.closed_form_bias = bias.bias;
  report.bias_bound = bias.bound;

  std::vector<std::vector<double>> m_hats(r_total);
  std::vector<char> dropped(r_total, 0);
  parallel_for(r_total, threads, [&](std::size_t r) {
    const BinaryTrialTable run = sample_run(
        config.model, config.identities_per_run, mix_seed(config.seed, r));
    const PluginEstimate est = plugin_estimate(run, k);
    if (!est.undefined_groups.empty()) {
      dropped[r] = 1;
      return;
    }
    m_hats[r] = est.m_hat;
  });

  std::vector<std::vector<double>> kept;
  kept.reserve(r_total);
  for (std::size_t r = 0; r < r_total; ++r) {
    if (dropped[r])
      ++report.dropped_replications;
    else
      kept.push_back(std::move(m_hats[r]));
  }
  if (kept.empty() ||
      report.dropped_replications * 10 > r_total)
    throw Error(ErrorCode::UndefinedPlugin,
                "more than 10% of replications left a group empty");

  const MomentStats stats = moments(kept, k);
  report.m_hat_mean = stats.mean;
  report.m_hat_variance = stats.variance;
  report.m_hat_se = stats.se;
  report.empirical_bias.resize(k);

  report.prop1_ok = true;
  report.bound_ok = true;
  for (std::size_t g = 0; g < k; ++g) {
    report.empirical_bias[g] = stats.mean[g] - config.model.p[g];
    const double dev = std::abs(stats.mean[g] - report.population_m[g]);
    if (dev > config.tolerances.se_multiplier * stats.se[g] + 1e-15)
      report.prop1_ok = false;
    if (std::abs(report.closed_form_bias[g]) > report.bias_bound[g] + 1e-12)
      report.bound_ok = false;
  }
  return report;
}

SimReport verify_prop2(const SimConfig& config, unsigned threads) {
  config.validate();
  const std::size_t k = config.model.size();
  const std::size_t r_total = config.replications;

  SimReport report = verify_prop1(config, threads);
  report.has_corrected = true;
  report.inflation_factor = variance_inflation_factor(config.model.confusion);
  for (double pg : config.model.pi)
    if (pg <= 0.0)
      throw Error(ErrorCode::ZeroPrior, "pi must be strictly positive");

  std::vector<std::vector<double>> corrected(r_total);
  std::vector<std::vector<double>> pre_division(r_total);  // (C^T)^-1 n_hat
  std::vector<std::vector<double>> n_hats(r_total);
  std::vector<char> dropped(r_total, 0);
  parallel_for(r_total, threads, [&](std::size_t r) {
    const BinaryTrialTable run = sample_run(
        config.model, config.identities_per_run, mix_seed(config.seed, r));
    const PluginEstimate est = plugin_estimate(run, k);
    if (!est.undefined_groups.empty()) {
      dropped[r] = 1;
      return;
    }
    std::vector<double> p_corr = corrected_estimator(
        config.model.confusion, est.tau_hat, est.m_hat, config.model.pi);
    std::vector<double> q(k);
    for (std::size_t g = 0; g < k; ++g) q[g] = p_corr[g] * config.model.pi[g];
    corrected[r] = std::move(p_corr);
    pre_division[r] = std::move(q);
    n_hats[r] = est.n_hat;
  });

  std::vector<std::vector<double>> kept_corr, kept_q, kept_n;
  std::size_t dropped_count = 0;
  for (std::size_t r = 0; r < r_total; ++r) {
    if (dropped[r]) {
      ++dropped_count;
      continue;
    }
    kept_corr.push_back(std::move(corrected[r]));
    kept_q.push_back(std::move(pre_division[r]));
    kept_n.push_back(std::move(n_hats[r]));
  }
  report.dropped_replications = dropped_count;
  if (kept_corr.empty() || dropped_count * 10 > r_total)
    throw Error(ErrorCode::UndefinedPlugin,
                "more than 10% of replications left a group empty");

  const MomentStats corr_stats = moments(kept_corr, k);
  report.corrected_mean = corr_stats.mean;
  report.corrected_se = corr_stats.se;

  report.prop2_unbiased_ok = true;
  for (std::size_t g = 0; g < k; ++g) {
    const double dev = std::abs(corr_stats.mean[g] - config.model.p[g]);
    if (dev > config.tolerances.se_multiplier * corr_stats.se[g] + 1e-15)
      report.prop2_unbiased_ok = false;
  }

  const MomentStats q_stats = moments(kept_q, k);
  const MomentStats n_stats = moments(kept_n, k);
  report.cov_corrected_norm =
      operator_norm(covariance(kept_q, q_stats.mean, k));
  report.cov_n_norm = operator_norm(covariance(kept_n, n_stats.mean, k));
  report.prop2_variance_ok =
      report.cov_corrected_norm <=
      (1.0 + config.tolerances.cov_slack) * report.inflation_factor *
              report.cov_n_norm +
          1e-15;
  return report;
}

SweepResult sweep(const std::vector<SimConfig>& configs, unsigned threads) {
  SweepResult result;
  result.entries.reserve(configs.size());
  for (std::size_t idx = 0; idx < configs.size(); ++idx) {
    SweepEntry entry;
    try {
      entry.report = verify_prop1(configs[idx], threads);
      for (std::size_t g = 0; g < entry.report.k; ++g) {
        SweepRow row;
        row.config_index = idx;
        row.group = g;
        row.identities_per_run = entry.report.identities_per_run;
        row.m_hat_mean = entry.report.m_hat_mean[g];
        row.m_hat_se = entry.report.m_hat_se[g];
        row.population_m = entry.report.population_m[g];
        row.closed_form_bias = entry.report.closed_form_bias[g];
        row.bias_bound = entry.report.bias_bound[g];
        result.table.push_back(row);
      }
    } catch (const Error& e) {
      entry.failed = true;
      entry.error = e.what();
    }
    result.entries.push_back(std::move(entry));
  }
  return result;
}

}  // namespace fairprobe
