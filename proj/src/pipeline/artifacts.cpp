#include "artifacts.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "moralmap/csv.hpp"
#include "moralmap/error.hpp"
#include "moralmap/format.hpp"

namespace moralmap::artifacts {

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DataError("artifact is missing column '" + std::string(name) + "'");
}

double Table::number(std::size_t row, std::string_view name) const {
  const auto& cell = get(row, name);
  const auto v = parse_double(cell);
  if (!v) throw DataError("artifact column '" + std::string(name) + "' has non-numeric value '" + cell + "'");
  return *v;
}

Table read_table(const fs::path& path, std::string_view producer) {
  if (!fs::exists(path))
    throw DataError(path.string() + " not found; run the '" + std::string(producer) + "' stage first");
  const auto lines = csv::read_lines(path);
  Table t;
  if (lines.empty()) return t;
  for (auto f : csv::split(lines[0])) t.header.emplace_back(f);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> row;
    for (auto f : csv::split(lines[i])) row.emplace_back(f);
    if (row.size() != t.header.size())
      throw DataError(path.string() + ": row " + std::to_string(i + 1) + " has " + std::to_string(row.size()) +
                      " fields, expected " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_ids(const fs::path& path, const std::vector<std::string>& ids) {
  auto out = csv::open_output(path);
  for (const auto& id : ids) out << id << '\n';
}

std::vector<std::string> read_ids(const fs::path& path, std::string_view producer) {
  if (!fs::exists(path))
    throw DataError(path.string() + " not found; run the '" + std::string(producer) + "' stage first");
  std::vector<std::string> ids;
  for (auto& line : csv::read_lines(path))
    if (!line.empty()) ids.push_back(std::move(line));
  return ids;
}

std::set<std::string> read_id_set(const fs::path& path, std::string_view producer) {
  const auto ids = read_ids(path, producer);
  return {ids.begin(), ids.end()};
}

void write_text(const fs::path& path, const std::string& content) {
  auto out = csv::open_output(path);
  out << content;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fingerprint(std::string_view data, std::uint64_t h) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) {
  std::uint64_t z = seed ^ fingerprint(purpose);
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::map<std::string, Orientation> read_orientations(const Layout& l) {
  const auto t = read_table(l.ci(), "ci");
  std::map<std::string, Orientation> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto o = parse_orientation(t.get(r, "orientation"));
    if (!o) throw DataError("ci.csv: bad orientation '" + t.get(r, "orientation") + "'");
    out.emplace(t.get(r, "id"), *o);
  }
  return out;
}

std::pair<std::vector<std::string>, Matrix> read_layout(const Layout& l, Orientation o) {
  const auto t = read_table(l.layout(o), "reduce");
  std::vector<std::string> ids;
  Matrix m(t.rows.size(), 2);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    ids.push_back(t.get(r, "id"));
    m(r, 0) = t.number(r, "x");
    m(r, 1) = t.number(r, "y");
  }
  return {ids, m};
}

ClusterModel read_cluster_model(const Layout& l, Orientation o, const std::vector<std::string>& ids) {
  const auto t = read_table(l.clusters(o), "cluster");
  std::map<std::string, int> label;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    label[t.get(r, "id")] = static_cast<int>(t.number(r, "label"));
  ClusterModel m;
  for (const auto& id : ids) {
    const auto it = label.find(id);
    if (it == label.end()) throw DataError("cluster file has no label for '" + id + "'");
    m.labels.push_back(it->second);
  }
  const auto meta = nlohmann::json::parse(read_text(l.cluster_meta(o)));
  m.n_clusters = meta.at("n_clusters").get<int>();
  m.params.min_samples = meta.at("params").at("min_samples").get<std::size_t>();
  m.params.min_cluster_size = meta.at("params").at("min_cluster_size").get<std::size_t>();
  m.params.metric = parse_metric(meta.at("params").at("metric").get<std::string>()).value_or(Metric::euclidean);
  if (!meta.at("dbcv").is_null()) m.dbcv = meta.at("dbcv").get<double>();
  for (const auto& [k, v] : meta.at("narrative_labels").items())
    if (const auto n = parse_narrative(v.get<std::string>())) m.narrative_labels[std::stoi(k)] = *n;
  return m;
}

Preprocessed read_preprocessed(const Layout& l) {
  if (!fs::exists(l.preprocessed()))
    throw DataError(l.preprocessed().string() + " not found; run the 'filter' stage first");
  auto parsed = parse_corpus(l.preprocessed());
  Preprocessed p;
  for (auto& v : parsed.corpus.videos) p.videos.emplace(v.id, std::move(v));
  for (auto& c : parsed.corpus.comments) p.comments[c.video_id].push_back(std::move(c));
  return p;
}

}  // namespace moralmap::artifacts
