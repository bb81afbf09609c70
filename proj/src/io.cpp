#include "fairprobe/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "fairprobe/error.hpp"

namespace fairprobe {

namespace {

std::uint32_t read_u32_le(std::istream& in, const std::string& path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4))
    throw Error(ErrorCode::TruncatedFile, path);
  return static_cast<std::uint32_t>(buf[0]) |
         (static_cast<std::uint32_t>(buf[1]) << 8) |
         (static_cast<std::uint32_t>(buf[2]) << 16) |
         (static_cast<std::uint32_t>(buf[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const unsigned char buf[4] = {
      static_cast<unsigned char>(v & 0xFF),
      static_cast<unsigned char>((v >> 8) & 0xFF),
      static_cast<unsigned char>((v >> 16) & 0xFF),
      static_cast<unsigned char>((v >> 24) & 0xFF)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

EmbeddingSet read_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4)) throw Error(ErrorCode::TruncatedFile, path);
  if (std::memcmp(magic, "FEMB", 4) != 0)
    throw Error(ErrorCode::BadMagic, path);
  const std::uint32_t version = read_u32_le(in, path);
  if (version != 1)
    throw Error(ErrorCode::BadMagic, path + ": unsupported version " +
                                         std::to_string(version));
  const std::uint32_t count = read_u32_le(in, path);
  const std::uint32_t dim = read_u32_le(in, path);

  EmbeddingSet set;
  set.matrix = Matrix(count, dim);
  std::vector<unsigned char> payload(static_cast<std::size_t>(count) * dim * 4);
  if (!payload.empty() &&
      !in.read(reinterpret_cast<char*>(payload.data()),
               static_cast<std::streamsize>(payload.size())))
    throw Error(ErrorCode::TruncatedFile, path + ": float payload");
  for (std::size_t idx = 0; idx < static_cast<std::size_t>(count) * dim; ++idx) {
    std::uint32_t bits = static_cast<std::uint32_t>(payload[idx * 4]) |
                         (static_cast<std::uint32_t>(payload[idx * 4 + 1]) << 8) |
                         (static_cast<std::uint32_t>(payload[idx * 4 + 2]) << 16) |
                         (static_cast<std::uint32_t>(payload[idx * 4 + 3]) << 24);
    float f;
    std::memcpy(&f, &bits, 4);
    if (!std::isfinite(f))
      throw Error(ErrorCode::NonFiniteValue,
                  path + ": row " + std::to_string(idx / dim) + " col " +
                      std::to_string(idx % dim));
    set.matrix.data()[idx] = static_cast<double>(f);
  }

  set.image_ids.reserve(count);
  std::string id;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!std::getline(in, id))
      throw Error(ErrorCode::TruncatedFile, path + ": image id block");
    set.image_ids.push_back(id);
  }
  set.validate();
  return set;
}

void write_embeddings(const std::string& path, const EmbeddingSet& set) {
  set.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out.write("FEMB", 4);
  write_u32_le(out, 1);
  write_u32_le(out, static_cast<std::uint32_t>(set.count()));
  write_u32_le(out, static_cast<std::uint32_t>(set.dim()));
  for (double v : set.matrix.data()) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    write_u32_le(out, bits);
  }
  for (const auto& id : set.image_ids) out << id << '\n';
}

SampleTable read_labels(const std::string& path, const Taxonomy& taxonomy) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::EmptyTable, path + ": missing header");
  const std::vector<std::string> header = split_csv_line(strip_cr(line));
  int true_col = -1, pred_col = -1;
  if (header.size() < 2 || header[0] != "image_id" || header[1] != "identity_id")
    throw Error(ErrorCode::InvalidInput,
                path + ": header must start with image_id,identity_id");
  for (std::size_t c = 2; c < header.size(); ++c) {
    if (header[c] == "true_segment")
      true_col = static_cast<int>(c);
    else if (header[c] == "predicted_segment")
      pred_col = static_cast<int>(c);
    else
      throw Error(ErrorCode::InvalidInput, path + ": unknown column " + header[c]);
  }

  SampleTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error(ErrorCode::InvalidInput,
                  path + ":" + std::to_string(line_no) + ": field count");
    SampleRow row;
    row.image_id = fields[0];
    row.identity_id = fields[1];
    const auto resolve = [&](int col) -> std::optional<std::size_t> {
      if (col < 0 || fields[col].empty()) return std::nullopt;
      try {
        return taxonomy.index_of(fields[col]);
      } catch (const Error&) {
        throw Error(ErrorCode::UnknownSegment,
                    path + ":" + std::to_string(line_no) + ": " + fields[col]);
      }
    };
    row.true_segment = resolve(true_col);
    row.predicted_segment = resolve(pred_col);
    table.rows.push_back(std::move(row));
  }
  table.validate(taxonomy.size());
  return table;
}

void write_labels(const std::string& path, const SampleTable& table,
                  const Taxonomy& taxonomy) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  bool any_true = false, any_pred = false;
  for (const auto& row : table.rows) {
    any_true = any_true || row.true_segment.has_value();
    any_pred = any_pred || row.predicted_segment.has_value();
  }
  out << "image_id,identity_id";
  if (any_true) out << ",true_segment";
  if (any_pred) out << ",predicted_segment";
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.image_id << ',' << row.identity_id;
    if (any_true)
      out << ',' << (row.true_segment ? taxonomy.segments[*row.true_segment] : "");
    if (any_pred)
      out << ','
          << (row.predicted_segment ? taxonomy.segments[*row.predicted_segment]
                                    : "");
    out << '\n';
  }
}

BinaryTrialTable read_trials(const std::string& path, std::size_t k) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::EmptyTable, path + ": missing header");
  const std::vector<std::string> header = split_csv_line(strip_cr(line));
  if (header.size() < 3 || header[0] != "identity_id" || header[1] != "y" ||
      header[2] != "g_hat")
    throw Error(ErrorCode::InvalidInput,
                path + ": header must be identity_id,y,g_hat[,g_true]");
  const bool has_true = header.size() == 4 && header[3] == "g_true";

  BinaryTrialTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error(ErrorCode::InvalidInput,
                  path + ":" + std::to_string(line_no) + ": field count");
    BinaryTrialRow row;
    row.identity_id = fields[0];
    row.y = fields[1] == "1";
    if (fields[1] != "0" && fields[1] != "1")
      throw Error(ErrorCode::InvalidInput,
                  path + ":" + std::to_string(line_no) + ": y must be 0 or 1");
    row.g_hat = static_cast<std::size_t>(std::stoul(fields[2]));
    if (has_true && !fields[3].empty())
      row.g_true = static_cast<std::size_t>(std::stoul(fields[3]));
    table.rows.push_back(std::move(row));
  }
  table.validate(k);
  return table;
}

void write_trials(const std::string& path, const BinaryTrialTable& table) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  bool any_true = false;
  for (const auto& row : table.rows)
    any_true = any_true || row.g_true.has_value();
  out << "identity_id,y,g_hat";
  if (any_true) out << ",g_true";
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.identity_id << ',' << (row.y ? 1 : 0) << ',' << row.g_hat;
    if (any_true) {
      out << ',';
      if (row.g_true) out << *row.g_true;
    }
    out << '\n';
  }
}

SampleTable merge_predictions(const SampleTable& labels,
                              const SampleTable& predictions) {
  std::unordered_map<std::string, std::size_t> pred_by_image;
  for (const auto& row : predictions.rows) {
    if (!row.predicted_segment)
      throw Error(ErrorCode::MissingLabel,
                  "prediction row " + row.image_id + " has no predicted segment");
    if (!pred_by_image.emplace(row.image_id, *row.predicted_segment).second)
      throw Error(ErrorCode::DuplicateImageId, row.image_id);
  }
  SampleTable merged = labels;
  for (auto& row : merged.rows) {
    const auto it = pred_by_image.find(row.image_id);
    if (it == pred_by_image.end())
      throw Error(ErrorCode::MissingLabel,
                  "no prediction for image " + row.image_id);
    row.predicted_segment = it->second;
  }
  return merged;
}

json taxonomy_to_json(const Taxonomy& taxonomy) {
  return json{{"attribute_name", taxonomy.attribute_name},
              {"segments", taxonomy.segments}};
}

Taxonomy taxonomy_from_json(const json& j) {
  return Taxonomy(j.at("attribute_name").get<std::string>(),
                  j.at("segments").get<std::vector<std::string>>());
}

json confusion_to_json(const ConfusionMatrix& cm) {
  const std::size_t k = cm.size();
  json rows = json::array();
  for (std::size_t a = 0; a < k; ++a) {
    json row = json::array();
    for (std::size_t b = 0; b < k; ++b) row.push_back(cm.entries(a, b));
    rows.push_back(std::move(row));
  }
  json j{{"entries", std::move(rows)}};
  if (!cm.row_counts.empty()) j["row_counts"] = cm.row_counts;
  return j;
}

ConfusionMatrix confusion_from_json(const json& j) {
  const auto& rows = j.at("entries");
  const std::size_t k = rows.size();
  ConfusionMatrix cm;
  cm.entries = Matrix(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    if (rows[a].size() != k)
      throw Error(ErrorCode::InvalidInput, "confusion matrix must be square");
    for (std::size_t b = 0; b < k; ++b)
      cm.entries(a, b) = rows[a][b].get<double>();
  }
  if (j.contains("row_counts"))
    cm.row_counts = j["row_counts"].get<std::vector<std::size_t>>();
  cm.validate();
  return cm;
}

json group_model_to_json(const GroupModel& model) {
  return json{{"pi", model.pi},
              {"p", model.p},
              {"confusion", confusion_to_json(model.confusion)},
              {"tau", model.tau}};
}

GroupModel group_model_from_json(const json& j) {
  // accept either {"confusion": {"entries": [[...]]}}, a bare 2-D array
  // under "confusion", or the shorthand key "C"
  json entries;
  if (j.contains("confusion")) {
    const json& c = j.at("confusion");
    entries = c.is_array() ? c : c.at("entries");
  } else {
    entries = j.at("C");
  }
  ConfusionMatrix cm = confusion_from_json(json{{"entries", entries}});
  return GroupModel::make(j.at("pi").get<std::vector<double>>(),
                          j.at("p").get<std::vector<double>>(), std::move(cm));
}

json sim_config_to_json(const SimConfig& config) {
  return json{{"model", group_model_to_json(config.model)},
              {"identities_per_run", config.identities_per_run},
              {"replications", config.replications},
              {"seed", config.seed},
              {"tolerances",
               {{"se_multiplier", config.tolerances.se_multiplier},
                {"cov_slack", config.tolerances.cov_slack}}}};
}

SimConfig sim_config_from_json(const json& j) {
  SimConfig config;
  config.model = group_model_from_json(j.at("model"));
  config.identities_per_run = j.at("identities_per_run").get<std::size_t>();
  config.replications = j.at("replications").get<std::size_t>();
  config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (t.contains("se_multiplier"))
      config.tolerances.se_multiplier = t["se_multiplier"].get<double>();
    if (t.contains("cov_slack"))
      config.tolerances.cov_slack = t["cov_slack"].get<double>();
  }
  config.validate();
  return config;
}

json sim_report_to_json(const SimReport& report) {
  json j{{"k", report.k},
         {"identities_per_run", report.identities_per_run},
         {"replications", report.replications},
         {"seed", report.seed},
         {"tolerances",
          {{"se_multiplier", report.tolerances.se_multiplier},
           {"cov_slack", report.tolerances.cov_slack}}},
         {"m_hat_mean", report.m_hat_mean},
         {"m_hat_variance", report.m_hat_variance},
         {"m_hat_se", report.m_hat_se},
         {"population_m", report.population_m},
         {"closed_form_bias", report.closed_form_bias},
         {"bias_bound", report.bias_bound},
         {"empirical_bias", report.empirical_bias},
         {"dropped_replications", report.dropped_replications},
         {"verdicts",
          {{"prop1_ok", report.prop1_ok}, {"bound_ok", report.bound_ok}}}};
  if (report.has_corrected) {
    j["corrected_mean"] = report.corrected_mean;
    j["corrected_se"] = report.corrected_se;
    j["cov_corrected_norm"] = report.cov_corrected_norm;
    j["cov_n_norm"] = report.cov_n_norm;
    j["inflation_factor"] = report.inflation_factor;
    j["verdicts"]["prop2_unbiased_ok"] = report.prop2_unbiased_ok;
    j["verdicts"]["prop2_variance_ok"] = report.prop2_variance_ok;
  }
  return j;
}

json head_to_json(const SvmHead& head, const Taxonomy& taxonomy) {
  json machines = json::array();
  for (const auto& m : head.machines)
    machines.push_back(json{{"weights", m.weights},
                            {"bias", m.bias},
                            {"converged", m.converged}});
  json j{{"format_version", 1},
         {"kind", head.kind == HeadKind::Rbf ? "rbf" : "linear"},
         {"regularization", head.regularization},
         {"class_weights", head.class_weights},
         {"dim", head.dim},
         {"machines", std::move(machines)},
         {"taxonomy", taxonomy_to_json(taxonomy)}};
  if (head.kind == HeadKind::Rbf) {
    j["gamma"] = head.gamma;
    j["support_indices"] = head.support_indices;
    json support = json::array();
    for (std::size_t r = 0; r < head.support.rows(); ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < head.support.cols(); ++c)
        row.push_back(head.support(r, c));
      support.push_back(std::move(row));
    }
    j["support_vectors"] = std::move(support);
  }
  return j;
}

SvmHead head_from_json(const json& j, Taxonomy* taxonomy_out) {
  if (j.at("format_version").get<int>() != 1)
    throw Error(ErrorCode::InvalidInput, "unsupported head format version");
  SvmHead head;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "rbf")
    head.kind = HeadKind::Rbf;
  else if (kind == "linear")
    head.kind = HeadKind::Linear;
  else
    throw Error(ErrorCode::InvalidInput, "unknown head kind " + kind);
  head.regularization = j.at("regularization").get<double>();
  head.class_weights = j.at("class_weights").get<std::vector<double>>();
  head.dim = j.at("dim").get<std::size_t>();
  for (const auto& m : j.at("machines")) {
    SvmMachine machine;
    machine.weights = m.at("weights").get<std::vector<double>>();
    machine.bias = m.at("bias").get<double>();
    machine.converged = m.value("converged", true);
    head.machines.push_back(std::move(machine));
  }
  if (head.kind == HeadKind::Rbf) {
    head.gamma = j.at("gamma").get<double>();
    head.support_indices =
        j.at("support_indices").get<std::vector<std::size_t>>();
    const auto& support = j.at("support_vectors");
    head.support = Matrix(support.size(), head.dim);
    for (std::size_t r = 0; r < support.size(); ++r)
      for (std::size_t c = 0; c < head.dim; ++c)
        head.support(r, c) = support[r][c].get<double>();
  }
  if (taxonomy_out) *taxonomy_out = taxonomy_from_json(j.at("taxonomy"));
  return head;
}

std::vector<double> vector_from_json(const json& j, const std::string& key) {
  if (j.is_array()) return j.get<std::vector<double>>();
  return j.at(key).get<std::vector<double>>();
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  json j;
  in >> j;
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out << j.dump(2) << '\n';
}

std::string digest_hex_of_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001B3ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(hex);
}

}  // namespace fairprobe
