// fairprobe: audit demographic attribute inference pipelines from the
// command line. Subcommands cover metric audits, confusion-matrix
// estimation, noisy-label correction, Monte Carlo verification, and
// SVM/kNN probing heads over precomputed embeddings.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <unordered_map>

#include <CLI11.hpp>

#include "fairprobe/error.hpp"
#include "fairprobe/estimator.hpp"
#include "fairprobe/io.hpp"
#include "fairprobe/report.hpp"
#include "fairprobe/simulator.hpp"

namespace fp = fairprobe;

namespace {

unsigned default_threads() {
  if (const char* env = std::getenv("FAIRPROBE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return 1;
}

void emit_error_json(const std::string& code, const std::string& message) {
  fp::json j{{"error", code}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

void write_sweep_csv(const std::string& path,
                     const std::vector<fp::SweepRow>& rows) {
  std::ofstream out(path);
  if (!out)
    throw fp::Error(fp::ErrorCode::InvalidInput, "cannot write " + path);
  out << "config_index,group,identities_per_run,m_hat_mean,m_hat_se,"
         "population_m,closed_form_bias,bias_bound\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.config_index << ',' << r.group << ',' << r.identities_per_run
        << ',' << r.m_hat_mean << ',' << r.m_hat_se << ',' << r.population_m
        << ',' << r.closed_form_bias << ',' << r.bias_bound << '\n';
  }
}

std::vector<fp::SweepRow> report_rows(const fp::SimReport& report,
                                      std::size_t config_index) {
  std::vector<fp::SweepRow> rows;
  for (std::size_t g = 0; g < report.k; ++g) {
    fp::SweepRow row;
    row.config_index = config_index;
    row.group = g;
    row.identities_per_run = report.identities_per_run;
    row.m_hat_mean = report.m_hat_mean[g];
    row.m_hat_se = report.m_hat_se[g];
    row.population_m = report.population_m[g];
    row.closed_form_bias = report.closed_form_bias[g];
    row.bias_bound = report.bias_bound[g];
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairprobe: demographic attribute inference audit toolkit"};
  app.require_subcommand(1);

  unsigned threads = default_threads();
  std::uint64_t seed = 0;
  bool strict = false;
  app.add_option("--threads", threads, "Worker threads for the simulator");
  app.add_option("--seed", seed, "Seed for all randomized steps");
  app.add_flag("--strict", strict,
               "Escalate undefined-group warnings to errors");

  // audit
  auto* audit = app.add_subcommand("audit", "Accuracy/fairness/robustness report");
  std::string tax_path, labels_path, preds_path, out_path;
  std::size_t min_images = 1;
  bool no_robustness = false;
  audit->add_option("--taxonomy", tax_path)->required();
  audit->add_option("--labels", labels_path)->required();
  audit->add_option("--preds", preds_path)->required();
  audit->add_option("--out", out_path)->required();
  audit->add_option("--min-images", min_images,
                    "Drop identities with fewer images from robustness");
  audit->add_flag("--no-robustness", no_robustness);

  // robustness
  auto* robustness = app.add_subcommand("robustness",
                                        "Robustness block from predictions only");
  std::string rob_tax, rob_preds, rob_out;
  std::size_t rob_min_images = 1;
  robustness->add_option("--taxonomy", rob_tax)->required();
  robustness->add_option("--preds", rob_preds)->required();
  robustness->add_option("--out", rob_out)->required();
  robustness->add_option("--min-images", rob_min_images);

  // confusion
  auto* confusion = app.add_subcommand("confusion",
                                       "Empirical confusion matrix JSON");
  std::string conf_tax, conf_labels, conf_preds, conf_out;
  confusion->add_option("--taxonomy", conf_tax)->required();
  confusion->add_option("--labels", conf_labels)->required();
  confusion->add_option("--preds", conf_preds)->required();
  confusion->add_option("--out", conf_out)->required();

  // correct
  auto* correct = app.add_subcommand(
      "correct", "Confusion-corrected success rates from trials");
  std::string corr_trials, corr_confusion, corr_pi, corr_out;
  correct->add_option("--trials", corr_trials)->required();
  correct->add_option("--confusion", corr_confusion)->required();
  correct->add_option("--pi", corr_pi)->required();
  correct->add_option("--out", corr_out)->required();

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo verification of the estimator theory");
  std::string sim_config, sim_out, sim_csv;
  int sim_prop = 2;
  simulate->add_option("--config", sim_config)->required();
  simulate->add_option("--out", sim_out)->required();
  simulate->add_option("--results-csv", sim_csv, "Flat per-group results table");
  simulate->add_option("--prop", sim_prop, "Which proposition to verify (1 or 2)")
      ->check(CLI::IsMember({1, 2}));

  // train-head
  auto* train = app.add_subcommand("train-head",
                                   "Train an SVM head on embeddings");
  std::string th_embeddings, th_labels, th_tax, th_out, th_kind = "rbf";
  double th_reg = 1.0;
  bool th_balanced = false;
  train->add_option("--embeddings", th_embeddings)->required();
  train->add_option("--labels", th_labels)->required();
  train->add_option("--taxonomy", th_tax)->required();
  train->add_option("--out", th_out)->required();
  train->add_option("--kind", th_kind)->check(CLI::IsMember({"linear", "rbf"}));
  train->add_option("--reg", th_reg, "Regularization parameter");
  train->add_flag("--balanced", th_balanced, "Balanced class weights");

  // predict
  auto* predict_cmd = app.add_subcommand("predict",
                                         "Predict segments with a trained head");
  std::string pr_head, pr_embeddings, pr_out;
  predict_cmd->add_option("--head", pr_head)->required();
  predict_cmd->add_option("--embeddings", pr_embeddings)->required();
  predict_cmd->add_option("--out", pr_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*audit) {
      const fp::Taxonomy taxonomy =
          fp::taxonomy_from_json(fp::load_json_file(tax_path));
      const fp::SampleTable labels = fp::read_labels(labels_path, taxonomy);
      const fp::SampleTable preds = fp::read_labels(preds_path, taxonomy);
      const fp::SampleTable merged = fp::merge_predictions(labels, preds);
      fp::AuditOptions options;
      options.min_images_per_identity = min_images;
      options.include_robustness = !no_robustness;
      fp::AuditReport report = fp::build_audit_report(merged, taxonomy, options);
      report.seed = seed;
      report.input_digests["taxonomy"] = fp::digest_hex_of_file(tax_path);
      report.input_digests["labels"] = fp::digest_hex_of_file(labels_path);
      report.input_digests["preds"] = fp::digest_hex_of_file(preds_path);
      fp::save_json_file(out_path, fp::audit_report_to_json(report));
    } else if (*robustness) {
      const fp::Taxonomy taxonomy =
          fp::taxonomy_from_json(fp::load_json_file(rob_tax));
      const fp::SampleTable preds = fp::read_labels(rob_preds, taxonomy);
      const fp::RobustnessScores scores =
          fp::robustness_scores(preds, taxonomy, rob_min_images);
      fp::save_json_file(rob_out,
                         fp::json{{"home", scores.home},
                                  {"mama_raw", scores.mama_raw},
                                  {"mima_raw", scores.mima_raw},
                                  {"mama_norm", scores.mama_norm},
                                  {"mima_norm", scores.mima_norm},
                                  {"identities_used", scores.identities_used}});
    } else if (*confusion) {
      const fp::Taxonomy taxonomy =
          fp::taxonomy_from_json(fp::load_json_file(conf_tax));
      const fp::SampleTable labels = fp::read_labels(conf_labels, taxonomy);
      const fp::SampleTable preds = fp::read_labels(conf_preds, taxonomy);
      const fp::SampleTable merged = fp::merge_predictions(labels, preds);
      const fp::ConfusionMatrix cm = fp::empirical_confusion(merged, taxonomy);
      fp::json j = fp::confusion_to_json(cm);
      j["taxonomy"] = fp::taxonomy_to_json(taxonomy);
      fp::save_json_file(conf_out, j);
    } else if (*correct) {
      const fp::ConfusionMatrix cm =
          fp::confusion_from_json(fp::load_json_file(corr_confusion));
      const std::vector<double> pi =
          fp::vector_from_json(fp::load_json_file(corr_pi), "pi");
      const fp::BinaryTrialTable trials =
          fp::read_trials(corr_trials, cm.size());
      const fp::PluginEstimate plugin =
          fp::plugin_estimate(trials, cm.size(), strict);
      const std::vector<double> corrected =
          fp::corrected_estimator(cm, plugin.tau_hat, plugin.m_hat, pi);
      fp::save_json_file(
          corr_out,
          fp::json{{"corrected_p", corrected},
                   {"tau_hat", plugin.tau_hat},
                   {"m_hat", plugin.m_hat},
                   {"inflation_factor", fp::variance_inflation_factor(cm)},
                   {"pi", pi}});
    } else if (*simulate) {
      const fp::json cfg = fp::load_json_file(sim_config);
      if (cfg.is_array()) {
        std::vector<fp::SimConfig> configs;
        for (const auto& c : cfg) configs.push_back(fp::sim_config_from_json(c));
        const fp::SweepResult result = fp::sweep(configs, threads);
        fp::json out = fp::json::array();
        for (const auto& entry : result.entries) {
          if (entry.failed)
            out.push_back(fp::json{{"failed", true}, {"error", entry.error}});
          else
            out.push_back(fp::sim_report_to_json(entry.report));
        }
        fp::save_json_file(sim_out, out);
        if (!sim_csv.empty()) write_sweep_csv(sim_csv, result.table);
      } else {
        fp::SimConfig config = fp::sim_config_from_json(cfg);
        const fp::SimReport report = sim_prop == 1
                                         ? fp::verify_prop1(config, threads)
                                         : fp::verify_prop2(config, threads);
        fp::save_json_file(sim_out, fp::sim_report_to_json(report));
        if (!sim_csv.empty()) write_sweep_csv(sim_csv, report_rows(report, 0));
      }
    } else if (*train) {
      const fp::Taxonomy taxonomy =
          fp::taxonomy_from_json(fp::load_json_file(th_tax));
      const fp::EmbeddingSet embeddings = fp::read_embeddings(th_embeddings);
      const fp::SampleTable labels = fp::read_labels(th_labels, taxonomy);
      std::unordered_map<std::string, std::size_t> label_by_image;
      for (const auto& row : labels.rows) {
        if (!row.true_segment)
          throw fp::Error(fp::ErrorCode::MissingLabel,
                          "row " + row.image_id + " lacks true_segment");
        label_by_image[row.image_id] = *row.true_segment;
      }
      std::vector<std::size_t> y;
      y.reserve(embeddings.count());
      for (const auto& id : embeddings.image_ids) {
        const auto it = label_by_image.find(id);
        if (it == label_by_image.end())
          throw fp::Error(fp::ErrorCode::MissingLabel,
                          "no label for embedding " + id);
        y.push_back(it->second);
      }
      std::vector<double> weights;
      if (th_balanced)
        weights = fp::balanced_class_weights(y, taxonomy.size());
      const fp::SvmHead head = fp::train_head(
          embeddings, y, taxonomy.size(),
          th_kind == "rbf" ? fp::HeadKind::Rbf : fp::HeadKind::Linear,
          th_balanced ? &weights : nullptr, th_reg);
      fp::json j = fp::head_to_json(head, taxonomy);
      j["embeddings_digest"] = fp::digest_hex_of_file(th_embeddings);
      fp::save_json_file(th_out, j);
    } else if (*predict_cmd) {
      fp::Taxonomy taxonomy;
      const fp::SvmHead head =
          fp::head_from_json(fp::load_json_file(pr_head), &taxonomy);
      const fp::EmbeddingSet embeddings = fp::read_embeddings(pr_embeddings);
      const fp::PredictResult result = fp::predict(head, embeddings);
      fp::write_labels(pr_out, result.table, taxonomy);
      if (result.tie_count > 0)
        std::cerr << fp::json{{"warning", "decision ties"},
                              {"count", result.tie_count}}
                         .dump()
                  << '\n';
    }
  } catch (const fp::Error& e) {
    emit_error_json(fp::to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error_json("InternalError", e.what());
    return 1;
  }
  return 0;
}
