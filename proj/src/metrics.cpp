#include "fairprobe/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fairprobe/error.hpp"

namespace fairprobe {

namespace {

// Per-identity predicted-label counts, insertion-ordered by identity via
// std::map for deterministic iteration.
std::map<std::string, std::vector<std::size_t>> identity_label_counts(
    const SampleTable& table, std::size_t k) {
  if (table.empty()) throw Error(ErrorCode::EmptyTable, "no rows");
  std::map<std::string, std::vector<std::size_t>> counts;
  for (const auto& row : table.rows) {
    if (!row.predicted_segment)
      throw Error(ErrorCode::MissingLabel,
                  "row " + row.image_id + " lacks a predicted segment");
    auto& vec = counts[row.identity_id];
    if (vec.empty()) vec.assign(k, 0);
    ++vec[*row.predicted_segment];
  }
  return counts;
}

}  // namespace

double micro_accuracy(const SampleTable& table) {
  if (table.empty()) throw Error(ErrorCode::EmptyTable, "no rows");
  std::size_t correct = 0;
  for (const auto& row : table.rows) {
    if (!row.true_segment || !row.predicted_segment)
      throw Error(ErrorCode::MissingLabel,
                  "row " + row.image_id + " lacks a label");
    if (*row.true_segment == *row.predicted_segment) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(table.size());
}

GroupRates per_group_accuracy(const SampleTable& table, const Taxonomy& taxonomy) {
  const std::size_t k = taxonomy.size();
  std::vector<std::size_t> total(k, 0), correct(k, 0);
  for (const auto& row : table.rows) {
    if (!row.true_segment || !row.predicted_segment)
      throw Error(ErrorCode::MissingLabel,
                  "row " + row.image_id + " lacks a label");
    ++total[*row.true_segment];
    if (*row.true_segment == *row.predicted_segment)
      ++correct[*row.true_segment];
  }
  std::string missing;
  for (std::size_t g = 0; g < k; ++g)
    if (total[g] == 0) missing += (missing.empty() ? "" : ", ") + taxonomy.segments[g];
  if (!missing.empty())
    throw Error(ErrorCode::EmptyGroup, "segments without samples: " + missing);

  GroupRates rates;
  rates.kind = RateKind::Accuracy;
  rates.rates.resize(k);
  for (std::size_t g = 0; g < k; ++g)
    rates.rates[g] = static_cast<double>(correct[g]) / static_cast<double>(total[g]);
  return rates;
}

double degree_of_bias(const GroupRates& rates) {
  const std::size_t k = rates.rates.size();
  double mean = 0.0;
  for (double r : rates.rates) mean += r;
  mean /= static_cast<double>(k);
  double var = 0.0;
  for (double r : rates.rates) var += (r - mean) * (r - mean);
  return std::sqrt(var / static_cast<double>(k));
}

double degree_of_bias_relative(const GroupRates& rates) {
  const std::size_t k = rates.rates.size();
  double mean = 0.0;
  for (double r : rates.rates) mean += r;
  mean /= static_cast<double>(k);
  if (mean <= 0.0) throw Error(ErrorCode::ZeroMean, "mean rate is zero");
  double acc = 0.0;
  for (double r : rates.rates) {
    const double d = 1.0 - r / mean;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(k));
}

ParityResult demographic_parity(const GroupRates& rates) {
  const auto [lo, hi] =
      std::minmax_element(rates.rates.begin(), rates.rates.end());
  ParityResult result;
  result.dpd = *hi - *lo;
  if (*hi > 0.0) {
    result.dpr = *lo / *hi;
  } else {
    result.dpr = 0.0;
    result.dpr_defined = false;
  }
  return result;
}

OddsResult equalized_odds(const GroupRates& tpr, const GroupRates& fpr) {
  if (tpr.rates.size() != fpr.rates.size())
    throw Error(ErrorCode::DimensionMismatch, "TPR/FPR length mismatch");
  const ParityResult a = demographic_parity(tpr);
  const ParityResult b = demographic_parity(fpr);
  OddsResult result;
  result.eod = std::max(a.dpd, b.dpd);
  if (a.dpr_defined && b.dpr_defined) {
    result.eor = std::min(a.dpr, b.dpr);
  } else if (a.dpr_defined) {
    result.eor = a.dpr;
    result.eor_defined = false;
  } else if (b.dpr_defined) {
    result.eor = b.dpr;
    result.eor_defined = false;
  } else {
    result.eor = 0.0;
    result.eor_defined = false;
  }
  return result;
}

std::map<std::string, std::vector<double>> label_distribution_per_identity(
    const SampleTable& table, const Taxonomy& taxonomy) {
  const std::size_t k = taxonomy.size();
  std::map<std::string, std::vector<double>> out;
  for (const auto& [id, counts] : identity_label_counts(table, k)) {
    std::size_t n = 0;
    for (std::size_t c : counts) n += c;
    std::vector<double> dist(k);
    for (std::size_t j = 0; j < k; ++j)
      dist[j] = static_cast<double>(counts[j]) / static_cast<double>(n);
    out.emplace(id, std::move(dist));
  }
  return out;
}

double homogeneity_entropy(const SampleTable& table, const Taxonomy& taxonomy,
                           std::size_t min_images) {
  return robustness_scores(table, taxonomy, min_images).home;
}

RobustnessScores majority_accuracies(const SampleTable& table,
                                     const Taxonomy& taxonomy,
                                     std::size_t min_images) {
  return robustness_scores(table, taxonomy, min_images);
}

RobustnessScores robustness_scores(const SampleTable& table,
                                   const Taxonomy& taxonomy,
                                   std::size_t min_images) {
  const std::size_t k = taxonomy.size();
  if (k < 2)
    throw Error(ErrorCode::InvalidInput, "K=1 leaves the entropy normalizer log K = 0");
  const double log_k = std::log(static_cast<double>(k));

  double entropy_sum = 0.0;
  double majority_fraction_sum = 0.0;
  std::size_t majority_total = 0;
  std::size_t image_total = 0;
  std::size_t identities = 0;
  for (const auto& [id, counts] : identity_label_counts(table, k)) {
    std::size_t n = 0, best = 0;
    for (std::size_t c : counts) {
      n += c;
      best = std::max(best, c);
    }
    if (n < min_images) continue;
    ++identities;
    image_total += n;
    majority_total += best;
    majority_fraction_sum += static_cast<double>(best) / static_cast<double>(n);
    double h = 0.0;
    for (std::size_t c : counts) {
      if (c == 0) continue;  // 0 log 0 := 0
      const double pk = static_cast<double>(c) / static_cast<double>(n);
      h -= pk * std::log(pk);
    }
    entropy_sum += h / log_k;
  }
  if (identities == 0)
    throw Error(ErrorCode::EmptyTable, "no identities after filtering");

  RobustnessScores scores;
  scores.identities_used = identities;
  scores.home = entropy_sum / static_cast<double>(identities);
  scores.mama_raw = static_cast<double>(majority_total) /
                    static_cast<double>(image_total);
  scores.mima_raw = majority_fraction_sum / static_cast<double>(identities);
  const double kk = static_cast<double>(k);
  const auto normalize = [kk](double raw) {
    return std::clamp((raw - 1.0 / kk) * kk / (kk - 1.0), 0.0, 1.0);
  };
  scores.mama_norm = normalize(scores.mama_raw);
  scores.mima_norm = normalize(scores.mima_raw);
  return scores;
}

std::map<std::string, MajorityVote> majority_vote_identity(
    const SampleTable& table, std::size_t k) {
  std::map<std::string, MajorityVote> out;
  for (const auto& [id, counts] : identity_label_counts(table, k)) {
    std::size_t n = 0, best = 0, best_label = 0;
    bool tied = false;
    for (std::size_t j = 0; j < k; ++j) {
      n += counts[j];
      if (counts[j] > best) {
        best = counts[j];
        best_label = j;
        tied = false;
      } else if (counts[j] == best && counts[j] > 0 && j != best_label) {
        tied = true;
      }
    }
    MajorityVote vote;
    vote.label = best_label;
    vote.fraction = static_cast<double>(best) / static_cast<double>(n);
    vote.tied = tied;
    out.emplace(id, vote);
  }
  return out;
}

}  // namespace fairprobe
