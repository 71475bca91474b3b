#include "moralmap/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <istream>
#include <map>
#include <numeric>

#include "moralmap/csv.hpp"
#include "moralmap/format.hpp"
#include "moralmap/kernels.hpp"
#include "moralmap/text.hpp"

namespace moralmap {

void EmbeddingTable::add(std::string id, std::span<const double> values) {
  if (ids_.empty() && dim_ == 0) dim_ = values.size();
  if (values.size() != dim_)
    throw DataError("embedding for '" + id + "' has dimension " + std::to_string(values.size()) +
                    ", expected " + std::to_string(dim_));
  if (!index_.emplace(id, ids_.size()).second) throw DataError("duplicate embedding id '" + id + "'");
  ids_.push_back(std::move(id));
  values_.insert(values_.end(), values.begin(), values.end());
}

std::span<const double> EmbeddingTable::at(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw DataError("no embedding for id '" + id + "'");
  return row(it->second);
}

LoadedEmbeddings load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read embedding file: " + path.string());
  return parse_embeddings(in);
}

LoadedEmbeddings parse_embeddings(std::istream& in) {
  LoadedEmbeddings out;
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> dim;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (!dim && lineno == 1 && text::trim(fields[0]) == "id") continue;
    if (fields.size() < 2) throw DataError("embedding row " + std::to_string(lineno) + " has no values");
    const std::size_t d = fields.size() - 1;
    if (!dim) dim = d;
    if (d != *dim)
      throw DataError("embedding row " + std::to_string(lineno) + " has arity " + std::to_string(d) +
                      ", expected " + std::to_string(*dim));
    values.assign(d, 0.0);
    double norm2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const auto v = parse_double(fields[j + 1]);
      if (!v || !std::isfinite(*v))
        throw DataError("embedding row " + std::to_string(lineno) + " has a non-finite value");
      values[j] = *v;
      norm2 += *v * *v;
    }
    std::string id(text::trim(fields[0]));
    if (out.table.contains(id))
      throw DataError("duplicate embedding id '" + id + "' at row " + std::to_string(lineno));
    if (norm2 == 0.0) {
      out.errors.push_back({lineno, "zero vector for '" + id + "'"});
      continue;
    }
    if (out.table.size() == 0) out.table = EmbeddingTable(d);
    out.table.add(std::move(id), values);
  }
  return out;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DomainError("cosine: dimension mismatch");
  const double nu = kernels::squared_norm(u);
  const double nv = kernels::squared_norm(v);
  if (nu == 0.0 || nv == 0.0) throw DomainError("cosine: zero-norm vector");
  return std::clamp(kernels::dot(u, v) / std::sqrt(nu * nv), -1.0, 1.0);
}

double video_comment_alignment(std::span<const double> video,
                               const std::vector<std::span<const double>>& comments) {
  if (comments.empty()) throw DomainError("video_comment_alignment: no comment vectors");
  std::vector<double> mean(video.size(), 0.0);
  for (const auto& c : comments) {
    if (c.size() != video.size()) throw DomainError("video_comment_alignment: dimension mismatch");
    kernels::accumulate(mean, c);
  }
  const double inv = 1.0 / static_cast<double>(comments.size());
  for (double& x : mean) x *= inv;
  if (kernels::squared_norm(mean) == 0.0)
    throw DomainError("video_comment_alignment: mean comment vector has zero norm");
  return cosine(mean, video);
}

SilhouetteReport silhouette(const Matrix& points, std::span<const int> labels, Metric metric,
                            Warnings* warnings) {
  if (labels.size() != points.rows()) throw DomainError("silhouette: label count mismatch");
  SilhouetteReport rep;
  rep.scores.assign(points.rows(), std::nullopt);

  // Dense cluster index per label.
  std::map<int, std::size_t> cluster_of;
  for (int l : labels)
    if (l != kNoise) cluster_of.emplace(l, 0);
  std::size_t k = 0;
  for (auto& [label, idx] : cluster_of) idx = k++;
  std::vector<std::size_t> sizes(k, 0);
  for (int l : labels)
    if (l != kNoise) ++sizes[cluster_of[l]];

  std::vector<std::size_t> members;
  std::vector<std::size_t> cidx(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kNoise) continue;
    members.push_back(i);
    cidx[i] = cluster_of[labels[i]];
  }

  if (k < 2) {
    warn(warnings, "silhouette needs at least two clusters; scores set to 0");
    for (std::size_t i : members) rep.scores[i] = 0.0;
  } else {
    std::vector<double> sums(k);
    for (std::size_t i : members) {
      std::fill(sums.begin(), sums.end(), 0.0);
      for (std::size_t j : members) {
        if (j == i) continue;
        sums[cidx[j]] += distance(metric, points.row(i), points.row(j));
      }
      const std::size_t own = cidx[i];
      if (sizes[own] == 1) {
        rep.scores[i] = 0.0;
        continue;
      }
      const double a = sums[own] / static_cast<double>(sizes[own] - 1);
      double b = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c)
        if (c != own) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
      const double denom = std::max(a, b);
      rep.scores[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
  }

  std::vector<double> csum(k, 0.0);
  double total = 0.0;
  for (std::size_t i : members) {
    csum[cidx[i]] += *rep.scores[i];
    total += *rep.scores[i];
  }
  for (const auto& [label, idx] : cluster_of)
    rep.cluster_means.emplace_back(label, csum[idx] / static_cast<double>(sizes[idx]));
  rep.overall = members.empty() ? 0.0 : total / static_cast<double>(members.size());
  return rep;
}

std::vector<std::string> top_k_central(const Matrix& points, std::span<const std::string> ids,
                                       std::size_t k) {
  if (ids.size() != points.rows()) throw DomainError("top_k_central: id count mismatch");
  if (points.rows() == 0) return {};
  std::vector<double> centroid(points.cols(), 0.0);
  for (std::size_t i = 0; i < points.rows(); ++i) kernels::accumulate(centroid, points.row(i));
  for (double& c : centroid) c /= static_cast<double>(points.rows());

  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i)
    ranked.emplace_back(kernels::squared_euclidean(points.row(i), centroid), i);
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return ids[a.second] < ids[b.second];
  });
  const std::size_t n = std::min(k, ranked.size());
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ids[ranked[i].second]);
  return out;
}

}  // namespace moralmap
