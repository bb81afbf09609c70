#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fairprobe/linalg.hpp"

namespace fairprobe {

inline constexpr double kSimplexTol = 1e-9;

/// A named demographic attribute with K ordered segment names.
struct Taxonomy {
  std::string attribute_name;
  std::vector<std::string> segments;

  Taxonomy() = default;
  Taxonomy(std::string name, std::vector<std::string> segs);

  std::size_t size() const { return segments.size(); }

  // Index of a segment name; throws UnknownSegment if absent.
  std::size_t index_of(const std::string& name) const;
};

struct SampleRow {
  std::string image_id;
  std::string identity_id;
  std::optional<std::size_t> true_segment;
  std::optional<std::size_t> predicted_segment;
};

/// Per-image records. image_id is unique across rows; segment indices are
/// 0-based against the owning Taxonomy.
struct SampleTable {
  std::vector<SampleRow> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }

  // Throws if an image_id repeats or a segment index is out of range.
  void validate(std::size_t k) const;
};

struct BinaryTrialRow {
  std::string identity_id;
  bool y = false;
  std::optional<std::size_t> g_true;
  std::size_t g_hat = 0;
};

struct BinaryTrialTable {
  std::vector<BinaryTrialRow> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }

  void validate(std::size_t k) const;
};

/// Row-stochastic K x K matrix; entry (a, b) = P(predicted = b | true = a).
struct ConfusionMatrix {
  Matrix entries;
  std::vector<std::size_t> row_counts;  // empty when not derived from data

  std::size_t size() const { return entries.rows(); }

  // Entries in [0,1], rows sum to 1 within tol.
  void validate(double tol = kSimplexTol) const;
};

/// The (pi, p, C) triple with derived tau = C^T pi.
struct GroupModel {
  std::vector<double> pi;
  std::vector<double> p;
  ConfusionMatrix confusion;
  std::vector<double> tau;

  std::size_t size() const { return pi.size(); }

  static GroupModel make(std::vector<double> pi, std::vector<double> p,
                         ConfusionMatrix confusion);

  void validate() const;
};

bool validate_simplex(const std::vector<double>& v, double tol = kSimplexTol);

std::vector<double> derive_tau(const ConfusionMatrix& confusion,
                               const std::vector<double>& pi);

ConfusionMatrix empirical_confusion(const SampleTable& table,
                                    const Taxonomy& taxonomy);

struct GroupCounts {
  std::vector<long long> counts;
  std::vector<long long> successes;
};

GroupCounts group_counts(const BinaryTrialTable& table, std::size_t k);

}  // namespace fairprobe
