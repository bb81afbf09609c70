#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fairprobe/core.hpp"
#include "fairprobe/metrics.hpp"
#include "fairprobe/probing.hpp"
#include "fairprobe/simulator.hpp"

namespace fairprobe {

using json = nlohmann::json;

// --- FEMB binary embeddings ---
// magic "FEMB" | u32 version=1 | u32 I | u32 D | I*D little-endian f32
// row-major | I newline-terminated UTF-8 image ids.
EmbeddingSet read_embeddings(const std::string& path);
void write_embeddings(const std::string& path, const EmbeddingSet& set);

// --- CSV tables ---
// Labels: header image_id,identity_id[,true_segment][,predicted_segment];
// segment values are names resolved against the taxonomy.
SampleTable read_labels(const std::string& path, const Taxonomy& taxonomy);
void write_labels(const std::string& path, const SampleTable& table,
                  const Taxonomy& taxonomy);

// Trials: header identity_id,y,g_hat[,g_true]; segments are 0-based indices.
BinaryTrialTable read_trials(const std::string& path, std::size_t k);
void write_trials(const std::string& path, const BinaryTrialTable& table);

// Merge true labels and predictions by image_id; prediction rows for
// unknown images are rejected.
SampleTable merge_predictions(const SampleTable& labels,
                              const SampleTable& predictions);

// --- JSON codecs ---
json taxonomy_to_json(const Taxonomy& taxonomy);
Taxonomy taxonomy_from_json(const json& j);

json confusion_to_json(const ConfusionMatrix& cm);
ConfusionMatrix confusion_from_json(const json& j);

json group_model_to_json(const GroupModel& model);
GroupModel group_model_from_json(const json& j);

json sim_config_to_json(const SimConfig& config);
SimConfig sim_config_from_json(const json& j);

json sim_report_to_json(const SimReport& report);

json head_to_json(const SvmHead& head, const Taxonomy& taxonomy);
SvmHead head_from_json(const json& j, Taxonomy* taxonomy_out = nullptr);

std::vector<double> vector_from_json(const json& j, const std::string& key);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

// FNV-1a 64-bit content digest, hex-encoded; used for report provenance.
std::string digest_hex_of_file(const std::string& path);

}  // namespace fairprobe
