#pragma once

#include <map>
#include <optional>
#include <string>

#include "fairprobe/estimator.hpp"
#include "fairprobe/io.hpp"
#include "fairprobe/metrics.hpp"

namespace fairprobe {

inline constexpr const char* kToolVersion = "0.1.0";

struct AuditOptions {
  std::size_t min_images_per_identity = 1;  // robustness filter
  bool include_robustness = true;
};

struct EstimatorBlock {
  PluginEstimate plugin;
  std::optional<BiasReport> bias;            // when a GroupModel is available
  std::optional<std::vector<double>> corrected;
  std::optional<double> inflation_factor;
};

struct AuditReport {
  Taxonomy taxonomy;
  double micro_accuracy_pct = 0.0;
  GroupRates per_group_accuracy_pct;
  double dob_pct = 0.0;
  double dob_relative = 0.0;
  ParityResult parity;  // over per-group accuracy fractions
  std::optional<RobustnessScores> robustness;
  std::optional<EstimatorBlock> estimator;
  std::map<std::string, std::string> input_digests;
  std::uint64_t seed = 0;
};

// Accuracy + fairness (+ robustness when identities carry predictions)
// over a table with both true and predicted segments. Accuracy and DoB are
// reported in percentage points; the parity block stays in fractions.
AuditReport build_audit_report(const SampleTable& table, const Taxonomy& taxonomy,
                               const AuditOptions& options = {});

json audit_report_to_json(const AuditReport& report);

}  // namespace fairprobe
