#include "fairprobe/report.hpp"

#include <cmath>

namespace fairprobe {

AuditReport build_audit_report(const SampleTable& table, const Taxonomy& taxonomy,
                               const AuditOptions& options) {
  AuditReport report;
  report.taxonomy = taxonomy;

  report.micro_accuracy_pct = 100.0 * micro_accuracy(table);
  GroupRates rates = per_group_accuracy(table, taxonomy);
  report.parity = demographic_parity(rates);
  report.dob_relative = degree_of_bias_relative(rates);

  GroupRates pct = rates;
  pct.scale = RateScale::Percent;
  for (double& r : pct.rates) r *= 100.0;
  report.per_group_accuracy_pct = pct;
  report.dob_pct = degree_of_bias(pct);

  if (options.include_robustness)
    report.robustness =
        robustness_scores(table, taxonomy, options.min_images_per_identity);
  return report;
}

json audit_report_to_json(const AuditReport& report) {
  json j;
  j["taxonomy"] = taxonomy_to_json(report.taxonomy);
  j["tool_version"] = kToolVersion;
  j["seed"] = report.seed;
  j["accuracy"] = {{"micro_pct", report.micro_accuracy_pct},
                   {"per_group_pct", report.per_group_accuracy_pct.rates},
                   {"scale", "percent"}};
  j["fairness"] = {{"dob_pct", report.dob_pct},
                   {"dob_relative", report.dob_relative},
                   {"dpd", report.parity.dpd},
                   {"dpr", report.parity.dpr},
                   {"dpr_defined", report.parity.dpr_defined}};
  if (report.robustness) {
    const RobustnessScores& r = *report.robustness;
    j["robustness"] = {{"home", r.home},
                       {"mama_raw", r.mama_raw},
                       {"mima_raw", r.mima_raw},
                       {"mama_norm", r.mama_norm},
                       {"mima_norm", r.mima_norm},
                       {"identities_used", r.identities_used}};
  }
  if (report.estimator) {
    const EstimatorBlock& e = *report.estimator;
    json ej;
    json m_hat = json::array();
    for (double v : e.plugin.m_hat) {
      if (std::isnan(v))
        m_hat.push_back(nullptr);
      else
        m_hat.push_back(v);
    }
    ej["m_hat"] = std::move(m_hat);
    ej["tau_hat"] = e.plugin.tau_hat;
    ej["undefined_groups"] = e.plugin.undefined_groups;
    if (e.bias) {
      ej["population_m"] = e.bias->m;
      ej["bias"] = e.bias->bias;
      ej["bias_bound"] = e.bias->bound;
    }
    if (e.corrected) ej["corrected_p"] = *e.corrected;
    if (e.inflation_factor) ej["inflation_factor"] = *e.inflation_factor;
    j["estimator"] = std::move(ej);
  }
  if (!report.input_digests.empty()) j["input_digests"] = report.input_digests;
  return j;
}

}  // namespace fairprobe
