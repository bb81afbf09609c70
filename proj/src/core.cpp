#include "fairprobe/core.hpp"

#include <cmath>
#include <unordered_set>

#include "fairprobe/error.hpp"

namespace fairprobe {

Taxonomy::Taxonomy(std::string name, std::vector<std::string> segs)
    : attribute_name(std::move(name)), segments(std::move(segs)) {
  if (segments.size() < 2)
    throw Error(ErrorCode::InvalidInput, "taxonomy needs at least 2 segments");
  std::unordered_set<std::string> seen;
  for (const auto& s : segments) {
    if (s.empty())
      throw Error(ErrorCode::InvalidInput, "empty segment name");
    if (!seen.insert(s).second)
      throw Error(ErrorCode::InvalidInput, "duplicate segment name: " + s);
  }
}

std::size_t Taxonomy::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < segments.size(); ++i)
    if (segments[i] == name) return i;
  throw Error(ErrorCode::UnknownSegment, name);
}

void SampleTable::validate(std::size_t k) const {
  std::unordered_set<std::string> ids;
  for (const auto& row : rows) {
    if (!ids.insert(row.image_id).second)
      throw Error(ErrorCode::DuplicateImageId, row.image_id);
    if (row.true_segment && *row.true_segment >= k)
      throw Error(ErrorCode::UnknownSegment,
                  "true segment index out of range for image " + row.image_id);
    if (row.predicted_segment && *row.predicted_segment >= k)
      throw Error(ErrorCode::UnknownSegment,
                  "predicted segment index out of range for image " + row.image_id);
  }
}

void BinaryTrialTable::validate(std::size_t k) const {
  for (const auto& row : rows) {
    if (row.g_hat >= k)
      throw Error(ErrorCode::UnknownSegment, "g_hat out of range");
    if (row.g_true && *row.g_true >= k)
      throw Error(ErrorCode::UnknownSegment, "g_true out of range");
  }
}

void ConfusionMatrix::validate(double tol) const {
  const std::size_t k = entries.rows();
  if (entries.cols() != k)
    throw Error(ErrorCode::InvalidInput, "confusion matrix must be square");
  for (std::size_t a = 0; a < k; ++a) {
    double row_sum = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
      const double c = entries(a, b);
      if (!(c >= -tol && c <= 1.0 + tol))
        throw Error(ErrorCode::InvalidInput,
                    "confusion entry outside [0,1] at row " + std::to_string(a));
      row_sum += c;
    }
    if (std::abs(row_sum - 1.0) > tol)
      throw Error(ErrorCode::InvalidInput,
                  "confusion row " + std::to_string(a) + " does not sum to 1");
  }
}

GroupModel GroupModel::make(std::vector<double> pi, std::vector<double> p,
                            ConfusionMatrix confusion) {
  GroupModel model;
  model.pi = std::move(pi);
  model.p = std::move(p);
  model.confusion = std::move(confusion);
  model.tau = derive_tau(model.confusion, model.pi);
  model.validate();
  return model;
}

void GroupModel::validate() const {
  const std::size_t k = pi.size();
  if (k < 2 || p.size() != k || confusion.size() != k || tau.size() != k)
    throw Error(ErrorCode::InvalidInput, "group model dimension mismatch");
  if (!validate_simplex(pi))
    throw Error(ErrorCode::InvalidInput, "pi is not on the simplex");
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(ErrorCode::InvalidInput, "p entry outside [0,1]");
  confusion.validate();
  const std::vector<double> expected = derive_tau(confusion, pi);
  for (std::size_t g = 0; g < k; ++g)
    if (std::abs(expected[g] - tau[g]) > 1e-12)
      throw Error(ErrorCode::InvalidInput, "stored tau inconsistent with C^T pi");
}

bool validate_simplex(const std::vector<double>& v, double tol) {
  if (v.empty()) return false;
  double sum = 0.0;
  for (double x : v) {
    if (x < -tol) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

std::vector<double> derive_tau(const ConfusionMatrix& confusion,
                               const std::vector<double>& pi) {
  const std::size_t k = pi.size();
  std::vector<double> tau(k, 0.0);
  for (std::size_t b = 0; b < k; ++b) {
    double acc = 0.0;
    for (std::size_t a = 0; a < k; ++a) acc += pi[a] * confusion.entries(a, b);
    tau[b] = acc;
  }
  return tau;
}

ConfusionMatrix empirical_confusion(const SampleTable& table,
                                    const Taxonomy& taxonomy) {
  const std::size_t k = taxonomy.size();
  std::vector<std::vector<std::size_t>> counts(k, std::vector<std::size_t>(k, 0));
  std::vector<std::size_t> row_totals(k, 0);
  for (const auto& row : table.rows) {
    if (!row.true_segment || !row.predicted_segment)
      throw Error(ErrorCode::MissingLabel,
                  "row " + row.image_id + " lacks true or predicted segment");
    ++counts[*row.true_segment][*row.predicted_segment];
    ++row_totals[*row.true_segment];
  }
  for (std::size_t a = 0; a < k; ++a)
    if (row_totals[a] == 0)
      throw Error(ErrorCode::EmptyRow,
                  "no samples with true segment " + taxonomy.segments[a]);

  ConfusionMatrix cm;
  cm.entries = Matrix(k, k);
  cm.row_counts.assign(row_totals.begin(), row_totals.end());
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      cm.entries(a, b) = static_cast<double>(counts[a][b]) /
                         static_cast<double>(row_totals[a]);
  return cm;
}

GroupCounts group_counts(const BinaryTrialTable& table, std::size_t k) {
  GroupCounts out;
  out.counts.assign(k, 0);
  out.successes.assign(k, 0);
  for (const auto& row : table.rows) {
    ++out.counts[row.g_hat];
    if (row.y) ++out.successes[row.g_hat];
  }
  return out;
}

}  // namespace fairprobe
