#include "moralmap/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

#include <json.hpp>

#include "moralmap/csv.hpp"
#include "moralmap/embedding.hpp"
#include "moralmap/format.hpp"
#include "moralmap/parallel.hpp"
#include "moralmap/text.hpp"

namespace moralmap {
namespace {

constexpr double kCoreFloor = 1e-12;

struct ClusterGeometry {
  std::vector<std::size_t> members;  // indices into points
  std::vector<double> core;          // all-points core distance per member
  std::vector<std::size_t> internal; // positions in `members`
  double sparseness = 0.0;
};

// Mean of (1/d)^dim over the other members, raised to -1/dim. Zero distances
// are skipped; the result is floored at kCoreFloor.
std::vector<double> all_points_core(const Matrix& x, const std::vector<std::size_t>& members,
                                    Metric metric) {
  const std::size_t m = members.size();
  const double dim = static_cast<double>(x.cols());
  std::vector<double> core(m, kCoreFloor);
  parallel_for(m, [&](std::size_t i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double d = distance(metric, x.row(members[i]), x.row(members[j]));
      if (d != 0.0) sum += std::pow(1.0 / d, dim);
    }
    sum /= static_cast<double>(m - 1);
    core[i] = sum > 0.0 ? std::max(kCoreFloor, std::pow(sum, -1.0 / dim)) : kCoreFloor;
  });
  return core;
}

ClusterGeometry cluster_geometry(const Matrix& x, std::vector<std::size_t> members, Metric metric) {
  ClusterGeometry g;
  g.members = std::move(members);
  g.core = all_points_core(x, g.members, metric);
  const std::size_t m = g.members.size();
  auto mreach = [&](std::size_t i, std::size_t j) {
    return std::max({distance(metric, x.row(g.members[i]), x.row(g.members[j])), g.core[i], g.core[j]});
  };

  // Prim from member 0. Each new vertex attaches to the lowest-index tree
  // vertex whose reachability matches the chosen weight (relative 1e-5,
  // absolute 1e-8), so tied MSTs resolve the same way every run.
  struct Edge {
    std::size_t a, b;
    double w;
  };
  std::vector<Edge> edges;
  std::vector<char> in_tree(m, 0);
  std::vector<double> best(m, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> order{0};
  in_tree[0] = 1;
  std::size_t current = 0;
  for (std::size_t step = 1; step < m; ++step) {
    std::size_t next = m;
    for (std::size_t j = 0; j < m; ++j) {
      if (in_tree[j]) continue;
      best[j] = std::min(best[j], mreach(current, j));
      if (next == m || best[j] < best[next]) next = j;
    }
    const double w = best[next];
    std::size_t attach = m;
    for (std::size_t t : order) {
      const double v = mreach(next, t);
      if (std::fabs(v - w) <= 1e-8 + 1e-5 * std::fabs(w)) attach = std::min(attach, t);
    }
    if (attach == m) attach = current;
    edges.push_back({attach, next, w});
    in_tree[next] = 1;
    order.push_back(next);
    current = next;
  }

  std::vector<std::size_t> degree(m, 0);
  for (const auto& e : edges) {
    ++degree[e.a];
    ++degree[e.b];
  }
  for (std::size_t i = 0; i < m; ++i)
    if (degree[i] > 1) g.internal.push_back(i);
  if (g.internal.empty()) g.internal.push_back(0);
  std::vector<char> is_internal(m, 0);
  for (std::size_t i : g.internal) is_internal[i] = 1;

  bool any_internal_edge = false;
  double sparse_internal = 0.0, sparse_all = 0.0;
  for (const auto& e : edges) {
    sparse_all = std::max(sparse_all, e.w);
    if (is_internal[e.a] && is_internal[e.b]) {
      any_internal_edge = true;
      sparse_internal = std::max(sparse_internal, e.w);
    }
  }
  g.sparseness = any_internal_edge ? sparse_internal : sparse_all;
  return g;
}

double separation(const Matrix& x, const ClusterGeometry& p, const ClusterGeometry& q, Metric metric) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i : p.internal)
    for (std::size_t j : q.internal) {
      const double d = distance(metric, x.row(p.members[i]), x.row(q.members[j]));
      best = std::min(best, std::max({d, p.core[i], q.core[j]}));
    }
  return best;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  // Rejection sampling keeps the draw exactly uniform and portable.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do v = rng();
  while (v >= limit);
  return v % bound;
}

}  // namespace

std::optional<ClusteringParams> ClusteringParams::preset(std::string_view name) {
  if (name == "communal-default") return ClusteringParams{15, 15, Metric::manhattan};
  if (name == "agency-default") return ClusteringParams{15, 150, Metric::euclidean};
  return std::nullopt;
}

void ClusteringParams::validate() const {
  if (min_samples < 1) throw ValidationError("min_samples must be >= 1");
  if (min_cluster_size < 2) throw ValidationError("min_cluster_size must be >= 2");
  if (metric == Metric::cosine) throw ValidationError("clustering metric must be euclidean or manhattan");
}

std::string_view narrative_name(NarrativeLabel l) noexcept {
  switch (l) {
    case NarrativeLabel::educate_inform:
      return "educate_inform";
    case NarrativeLabel::educate_inspire:
      return "educate_inspire";
    case NarrativeLabel::fight_protest:
      return "fight_protest";
    case NarrativeLabel::fight_convert:
      return "fight_convert";
    case NarrativeLabel::goodhealth_personal:
      return "goodhealth_personal";
    case NarrativeLabel::goodhealth_benefits:
      return "goodhealth_benefits";
    case NarrativeLabel::choose_personal:
      return "choose_personal";
    case NarrativeLabel::choose_discuss:
      return "choose_discuss";
    case NarrativeLabel::other:
      return "other";
  }
  return "other";
}

std::optional<NarrativeLabel> parse_narrative(std::string_view s) noexcept {
  for (int i = 0; i <= static_cast<int>(NarrativeLabel::other); ++i) {
    const auto l = static_cast<NarrativeLabel>(i);
    if (narrative_name(l) == s) return l;
  }
  return std::nullopt;
}

bool narrative_compatible(NarrativeLabel l, Orientation o) noexcept {
  if (l == NarrativeLabel::other) return true;
  const bool communal = l == NarrativeLabel::educate_inform || l == NarrativeLabel::educate_inspire ||
                        l == NarrativeLabel::fight_protest || l == NarrativeLabel::fight_convert;
  if (o == Orientation::communal) return communal;
  if (o == Orientation::agency) return !communal;
  return false;
}

std::vector<std::size_t> ClusterModel::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(n_clusters, 0)), 0);
  for (int l : labels)
    if (l >= 0 && l < n_clusters) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

double ClusterModel::noise_fraction() const {
  if (labels.empty()) return 0.0;
  const auto noise = std::count(labels.begin(), labels.end(), kNoise);
  return static_cast<double>(noise) / static_cast<double>(labels.size());
}

double dbcv(const Matrix& points, std::span<const int> labels, Metric metric) {
  if (labels.size() != points.rows()) throw DomainError("dbcv: label count mismatch");
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != kNoise) groups[labels[i]].push_back(i);
  if (groups.size() < 2) throw UndefinedScoreError("DBCV needs at least two clusters");
  for (const auto& [label, members] : groups)
    if (members.size() < 2)
      throw UndefinedScoreError("DBCV needs at least two points in cluster " + std::to_string(label));

  std::vector<ClusterGeometry> geo;
  geo.reserve(groups.size());
  for (auto& [label, members] : groups) geo.push_back(cluster_geometry(points, members, metric));

  const std::size_t k = geo.size();
  std::vector<double> min_sep(k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double s = separation(points, geo[i], geo[j], metric);
      min_sep[i] = std::min(min_sep[i], s);
      min_sep[j] = std::min(min_sep[j], s);
    }

  double total = 0.0;
  const auto n = static_cast<double>(points.rows());
  for (std::size_t i = 0; i < k; ++i) {
    const double denom = std::max(min_sep[i], geo[i].sparseness);
    const double validity = denom > 0.0 ? (min_sep[i] - geo[i].sparseness) / denom : 0.0;
    total += static_cast<double>(geo[i].members.size()) / n * validity;
  }
  return total;
}

SearchSpace SearchSpace::defaults() {
  return {range(5, 30), range(15, 200), {Metric::euclidean, Metric::manhattan}};
}

std::vector<std::size_t> SearchSpace::range(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> out;
  for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

std::size_t SearchSpace::cardinality() const noexcept {
  return min_samples.size() * min_cluster_size.size() * metrics.size();
}

SearchResult random_search(const Matrix& points, const SearchSpace& space, std::size_t trials,
                           std::uint64_t seed) {
  if (trials < 1) throw ValidationError("random search needs at least one trial");
  const std::size_t total = space.cardinality();
  if (total == 0) throw ValidationError("random search space is empty");

  // Distinct draws: a seeded partial Fisher-Yates over the flattened space.
  std::vector<std::size_t> flat(total);
  std::iota(flat.begin(), flat.end(), 0);
  const std::size_t count = std::min(trials, total);
  if (count < total) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(bounded(rng, total - i));
      std::swap(flat[i], flat[j]);
    }
  }
  flat.resize(count);

  std::vector<Trial> log(count);
  std::vector<ClusterModel> models(count);
  const std::size_t n_cs = space.min_cluster_size.size(), n_m = space.metrics.size();
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t f = flat[t];
    log[t].params = {space.min_samples[f / (n_cs * n_m)], space.min_cluster_size[(f / n_m) % n_cs],
                     space.metrics[f % n_m]};
    log[t].params.validate();
  }
  parallel_for(count, [&](std::size_t t) {
    models[t] = hdbscan(points, log[t].params);
    log[t].n_clusters = models[t].n_clusters;
    log[t].noise_fraction = models[t].noise_fraction();
    try {
      log[t].dbcv = dbcv(points, models[t].labels, log[t].params.metric);
    } catch (const UndefinedScoreError&) {
      log[t].dbcv.reset();
    }
    models[t].dbcv = log[t].dbcv;
  }, 1);

  std::optional<std::size_t> best;
  for (std::size_t t = 0; t < count; ++t)
    if (log[t].dbcv && (!best || *log[t].dbcv > *log[*best].dbcv)) best = t;
  if (!best) throw SearchFailure("no trial produced a defined DBCV score", log);
  return {log[*best].params, std::move(models[*best]), std::move(log)};
}

void write_trial_log(std::ostream& out, const std::vector<Trial>& log) {
  for (const auto& t : log) {
    nlohmann::ordered_json j;
    j["params"] = {{"min_samples", t.params.min_samples},
                   {"min_cluster_size", t.params.min_cluster_size},
                   {"metric", metric_name(t.params.metric)}};
    j["dbcv"] = t.dbcv ? nlohmann::ordered_json(*t.dbcv) : nlohmann::ordered_json(nullptr);
    j["n_clusters"] = t.n_clusters;
    j["noise_fraction"] = t.noise_fraction;
    out << j.dump() << '\n';
  }
}

std::map<int, NarrativeLabel> read_label_mapping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read label mapping: " + path.string());
  return parse_label_mapping(in);
}

std::map<int, NarrativeLabel> parse_label_mapping(std::istream& in) {
  std::map<int, NarrativeLabel> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = csv::split(t, '\t');
    const auto where = " at label-mapping line " + std::to_string(lineno);
    if (fields.size() != 2) throw ValidationError("expected cluster_id<TAB>narrative_label" + where);
    const auto id = parse_double(fields[0]);
    if (!id || *id < 0 || std::floor(*id) != *id) throw ValidationError("bad cluster id" + where);
    const auto label = parse_narrative(text::trim(fields[1]));
    if (!label) throw ValidationError("unknown narrative label '" + std::string(fields[1]) + "'" + where);
    if (!out.emplace(static_cast<int>(*id), *label).second)
      throw ValidationError("cluster mapped twice" + where);
  }
  return out;
}

ClusterModel apply_narrative_labels(ClusterModel model, const std::map<int, NarrativeLabel>& mapping,
                                    Orientation orientation) {
  for (const auto& [cluster, label] : mapping) {
    if (cluster < 0 || cluster >= model.n_clusters)
      throw ValidationError("label mapping names unknown cluster " + std::to_string(cluster));
    if (!narrative_compatible(label, orientation))
      throw ValidationError("narrative '" + std::string(narrative_name(label)) + "' is not valid for " +
                            std::string(orientation_name(orientation)) + " cluster " +
                            std::to_string(cluster));
  }
  for (const auto& [cluster, label] : mapping) model.narrative_labels[cluster] = label;
  return model;
}

void write_cluster_file(std::ostream& out, std::span<const std::string> ids, const ClusterModel& model) {
  out << "id,label,narrative_label\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int l = model.labels.at(i);
    out << ids[i] << ',' << l << ',';
    if (const auto it = model.narrative_labels.find(l); it != model.narrative_labels.end())
      out << narrative_name(it->second);
    out << '\n';
  }
}

}  // namespace moralmap
