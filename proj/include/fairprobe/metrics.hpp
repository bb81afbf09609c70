#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fairprobe/core.hpp"

namespace fairprobe {

enum class RateKind { Accuracy, FMR, FNMR, TPR, FPR };

enum class RateScale { Fraction, Percent };

/// Per-group rates with the metric kind recorded so that difference/ratio
/// semantics stay unambiguous downstream.
struct GroupRates {
  std::vector<double> rates;
  RateKind kind = RateKind::Accuracy;
  RateScale scale = RateScale::Fraction;
};

struct RobustnessScores {
  double home = 0.0;
  double mama_raw = 0.0;
  double mima_raw = 0.0;
  double mama_norm = 0.0;
  double mima_norm = 0.0;
  std::size_t identities_used = 0;
};

struct ParityResult {
  double dpd = 0.0;
  double dpr = 1.0;
  bool dpr_defined = true;  // false when the max rate is zero
};

struct OddsResult {
  double eod = 0.0;
  double eor = 1.0;
  bool eor_defined = true;
};

double micro_accuracy(const SampleTable& table);

GroupRates per_group_accuracy(const SampleTable& table, const Taxonomy& taxonomy);

// Population standard deviation (divide by K) of the rates, same scale as
// the input.
double degree_of_bias(const GroupRates& rates);

// Mean-normalized variant: sqrt((1/K) sum (1 - r_g/mean)^2).
double degree_of_bias_relative(const GroupRates& rates);

ParityResult demographic_parity(const GroupRates& rates);

OddsResult equalized_odds(const GroupRates& tpr, const GroupRates& fpr);

// Per-identity relative frequency of each predicted label, keyed by
// identity id. Each vector lies on the K-simplex.
std::map<std::string, std::vector<double>> label_distribution_per_identity(
    const SampleTable& table, const Taxonomy& taxonomy);

// Mean over identities of the normalized entropy of the per-identity
// predicted-label distribution. Natural log, normalized by log K.
// min_images filters identities with fewer images (default keeps all).
double homogeneity_entropy(const SampleTable& table, const Taxonomy& taxonomy,
                           std::size_t min_images = 1);

RobustnessScores majority_accuracies(const SampleTable& table,
                                     const Taxonomy& taxonomy,
                                     std::size_t min_images = 1);

// Full robustness block: HomE plus MaMA/MiMA raw and normalized.
RobustnessScores robustness_scores(const SampleTable& table,
                                   const Taxonomy& taxonomy,
                                   std::size_t min_images = 1);

struct MajorityVote {
  std::size_t label = 0;
  double fraction = 0.0;
  bool tied = false;
};

std::map<std::string, MajorityVote> majority_vote_identity(
    const SampleTable& table, std::size_t k);

}  // namespace fairprobe
