#include <fstream>

#include "moralmap/collective_action.hpp"
#include "moralmap/error.hpp"
#include "moralmap/pipeline.hpp"

namespace moralmap {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class Checker {
 public:
  explicit Checker(const json& doc) : doc_(doc) {}

  const json* find(std::string_view path) const {
    const json* node = &doc_;
    std::size_t start = 0;
    while (start <= path.size()) {
      const auto dot = path.find('.', start);
      const auto key = std::string(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
      if (!node->is_object() || !node->contains(key)) return nullptr;
      node = &(*node)[key];
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    return node;
  }

  void fail(std::string_view path, const std::string& message) {
    errors_.push_back(std::string(path) + ": " + message);
  }

  std::optional<std::string> string(std::string_view path, bool required = true) {
    const json* n = find(path);
    if (n == nullptr || n->is_null()) {
      if (required) fail(path, "is required");
      return std::nullopt;
    }
    if (!n->is_string()) {
      fail(path, "must be a string");
      return std::nullopt;
    }
    return n->get<std::string>();
  }

  std::optional<double> number(std::string_view path) {
    const json* n = find(path);
    if (n == nullptr || n->is_null()) return std::nullopt;
    if (!n->is_number()) {
      fail(path, "must be a number");
      return std::nullopt;
    }
    return n->get<double>();
  }

  std::size_t count(std::string_view path, std::size_t fallback, std::size_t min = 0) {
    const json* n = find(path);
    if (n == nullptr || n->is_null()) return fallback;
    if (!n->is_number_integer() || n->get<long long>() < static_cast<long long>(min)) {
      fail(path, "must be an integer >= " + std::to_string(min));
      return fallback;
    }
    return n->get<std::size_t>();
  }

  bool boolean(std::string_view path, bool fallback) {
    const json* n = find(path);
    if (n == nullptr || n->is_null()) return fallback;
    if (!n->is_boolean()) {
      fail(path, "must be true or false");
      return fallback;
    }
    return n->get<bool>();
  }

  std::optional<fs::path> path(std::string_view field, const fs::path& base, bool required) {
    const auto s = string(field, required);
    if (!s) return std::nullopt;
    fs::path p = fs::path(*s).is_absolute() ? fs::path(*s) : base / *s;
    p = p.lexically_normal();
    if (!fs::exists(p)) {
      fail(field, "file not found: " + p.string());
      return std::nullopt;
    }
    return p;
  }

  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  const json& doc_;
  std::vector<std::string> errors_;
};

void merge(json& base, const json& patch, const std::string& prefix, std::vector<std::string>& errors) {
  for (const auto& [key, value] : patch.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) {
      errors.push_back(path + ": unknown field");
      continue;
    }
    auto& target = base[key];
    if (target.is_object() && value.is_object())
      merge(target, value, path, errors);
    else
      target = value;
  }
}

ClusteringParams cluster_params(Checker& c, const json* node, std::string_view path) {
  if (node != nullptr && node->is_string()) {
    if (auto p = ClusteringParams::preset(node->get<std::string>())) return *p;
    c.fail(path, "unknown preset '" + node->get<std::string>() + "'");
    return {};
  }
  if (node == nullptr || !node->is_object()) {
    c.fail(path, "must be a preset name or {min_samples, min_cluster_size, metric}");
    return {};
  }
  const std::string p(path);
  ClusteringParams out;
  out.min_samples = c.count(p + ".min_samples", 15, 1);
  out.min_cluster_size = c.count(p + ".min_cluster_size", 15, 2);
  if (const auto m = c.string(p + ".metric", false)) {
    const auto metric = parse_metric(*m);
    if (!metric || *metric == Metric::cosine)
      c.fail(p + ".metric", "must be euclidean or manhattan");
    else
      out.metric = *metric;
  }
  return out;
}

std::optional<Variable> variable(Checker& c, const json* node, const std::string& path) {
  if (node == nullptr || !node->is_object()) {
    c.fail(path, "must be {name, transform}");
    return std::nullopt;
  }
  Variable v;
  const auto name = node->find("name");
  if (name == node->end() || !name->is_string() || name->get<std::string>().empty())
    c.fail(path + ".name", "is required");
  else
    v.name = name->get<std::string>();
  if (const auto t = node->find("transform"); t != node->end() && !t->is_null()) {
    const auto parsed = t->is_string() ? parse_transform(t->get<std::string>()) : std::nullopt;
    if (parsed)
      v.transform = *parsed;
    else
      c.fail(path + ".transform", "must be none, log or sqrt");
  }
  return v;
}

json variable_json(const Variable& v) {
  return json{{"name", v.name}, {"transform", std::string(transform_name(v.transform))}};
}

}  // namespace

json default_config_document() {
  const auto standard = RegressionSpec::standard();
  json predictors = json::array();
  for (const auto& p : standard.predictors) predictors.push_back(variable_json(p));
  return json{
      {"inputs",
       {{"corpus", nullptr},
        {"embeddings", nullptr},
        {"moral_scores", nullptr},
        {"lexicon", nullptr},
        {"ca_dictionary", nullptr},
        {"label_mapping", {{"communal", nullptr}, {"agency", nullptr}}}}},
      {"output_dir", "moralmap_out"},
      {"seed", 0},
      {"filter", {{"language_prefix", "en"}, {"transcript_min_unique", 5}, {"comment_min_unique", 6}}},
      {"topics",
       {{"n_topics", 2},
        {"iterations", 1000},
        {"burn_in", 100},
        {"alpha", nullptr},
        {"beta", 0.01},
        {"min_df", 2},
        {"keep_topic", nullptr},
        {"drop_anchor", "recipe"},
        {"top_words", 10},
        {"top_docs", 5}}},
      {"orientation", {{"communal_max", 0.4}, {"agency_min", 0.6}}},
      {"moral", {{"scorer", "external"}, {"standardize", "orientation"}, {"reducer_input", "adjusted"}}},
      {"reducer", {{"n_neighbors", 15}, {"min_dist", 0.1}, {"n_epochs", 500}, {"metric", "euclidean"}}},
      {"cluster",
       {{"mode", "search"},
        {"trials", 50},
        {"space",
         {{"min_samples", {5, 30}},
          {"min_cluster_size", {15, 200}},
          {"metrics", {"euclidean", "manhattan"}}}},
        {"communal", "communal-default"},
        {"agency", "agency-default"}}},
      {"annotation", {{"k", 30}}},
      {"coherence", {{"metric", "cosine"}}},
      {"regression",
       {{"dependent", variable_json(standard.dependent)},
        {"predictors", predictors},
        {"standardize", true},
        {"include_intercept", true}}},
      {"report", {{"svg", true}}},
  };
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ValidationError("--set expects key=value, got '" + std::string(assignment) + "'");
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError("--set: malformed key '" + key + "'");
    if (!node->is_object()) *node = json::object();
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

PipelineConfig resolve_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ValidationError("config: top level must be an object");
  json merged = default_config_document();
  std::vector<std::string> unknown;
  merge(merged, doc, "", unknown);
  Checker c(merged);
  for (const auto& u : unknown) c.fail(u.substr(0, u.find(':')), "unknown field");

  PipelineConfig cfg;
  const auto base = base_dir.empty() ? fs::current_path() : base_dir;

  if (auto p = c.path("inputs.corpus", base, true)) cfg.inputs.corpus = *p;
  if (auto p = c.path("inputs.embeddings", base, true)) cfg.inputs.embeddings = *p;

  if (const auto s = c.string("moral.scorer")) {
    if (*s == "external")
      cfg.moral.scorer = Scorer::external;
    else if (*s == "lexicon")
      cfg.moral.scorer = Scorer::lexicon;
    else
      c.fail("moral.scorer", "must be external or lexicon");
  }
  cfg.inputs.moral_scores = c.path("inputs.moral_scores", base, cfg.moral.scorer == Scorer::external);
  cfg.inputs.lexicon = c.path("inputs.lexicon", base, cfg.moral.scorer == Scorer::lexicon);
  if (c.find("inputs.ca_dictionary")->is_null())
    cfg.inputs.ca_dictionary = default_dictionary_path();
  else if (auto p = c.path("inputs.ca_dictionary", base, true))
    cfg.inputs.ca_dictionary = *p;
  for (auto o : kGroups) {
    const std::string field = "inputs.label_mapping." + std::string(orientation_name(o));
    if (auto p = c.path(field, base, false)) cfg.inputs.label_mapping[o] = *p;
  }

  if (const auto out = c.string("output_dir"))
    cfg.output_dir = (fs::path(*out).is_absolute() ? fs::path(*out) : base / *out).lexically_normal();
  {
    const json* seed = c.find("seed");
    if (seed->is_number_unsigned() || (seed->is_number_integer() && seed->get<long long>() >= 0))
      cfg.seed = seed->get<std::uint64_t>();
    else
      c.fail("seed", "must be a non-negative integer");
  }

  if (const auto s = c.string("filter.language_prefix")) cfg.filter.language_prefix = *s;
  cfg.filter.transcript_min_unique = c.count("filter.transcript_min_unique", 5, 1);
  cfg.filter.comment_min_unique = c.count("filter.comment_min_unique", 6, 1);

  cfg.topics.lda.n_topics = c.count("topics.n_topics", 2, 2);
  cfg.topics.lda.iterations = c.count("topics.iterations", 1000, 1);
  cfg.topics.lda.burn_in = c.count("topics.burn_in", 100, 0);
  cfg.topics.lda.alpha = c.number("topics.alpha");
  if (cfg.topics.lda.alpha && !(*cfg.topics.lda.alpha > 0)) c.fail("topics.alpha", "must be positive");
  cfg.topics.lda.beta = c.number("topics.beta").value_or(0.01);
  if (!(cfg.topics.lda.beta > 0)) c.fail("topics.beta", "must be positive");
  cfg.topics.min_df = c.count("topics.min_df", 2, 1);
  if (!c.find("topics.keep_topic")->is_null()) {
    cfg.topics.keep_topic = c.count("topics.keep_topic", 0, 0);
    if (*cfg.topics.keep_topic >= cfg.topics.lda.n_topics) c.fail("topics.keep_topic", "must be < topics.n_topics");
  }
  cfg.topics.drop_anchor = c.string("topics.drop_anchor", false).value_or("");
  if (!cfg.topics.keep_topic && (cfg.topics.drop_anchor.empty() || cfg.topics.lda.n_topics != 2))
    c.fail("topics.keep_topic", "is required unless n_topics is 2 and topics.drop_anchor is set");
  cfg.topics.top_words = c.count("topics.top_words", 10, 1);
  cfg.topics.top_docs = c.count("topics.top_docs", 5, 1);

  const auto cmax = c.number("orientation.communal_max");
  const auto amin = c.number("orientation.agency_min");
  if (cmax) cfg.thresholds.communal_max = *cmax;
  if (amin) cfg.thresholds.agency_min = *amin;
  if (!(0.0 < cfg.thresholds.communal_max && cfg.thresholds.communal_max < cfg.thresholds.agency_min &&
        cfg.thresholds.agency_min < 1.0))
    c.fail("orientation", "thresholds must satisfy 0 < communal_max < agency_min < 1");

  if (const auto s = c.string("moral.standardize")) {
    if (*s == "orientation")
      cfg.moral.scope = StandardizeScope::orientation;
    else if (*s == "global")
      cfg.moral.scope = StandardizeScope::global;
    else
      c.fail("moral.standardize", "must be orientation or global");
  }
  if (const auto s = c.string("moral.reducer_input")) {
    if (*s == "adjusted")
      cfg.moral.reducer_input = ScoreVariant::adjusted;
    else if (*s == "raw")
      cfg.moral.reducer_input = ScoreVariant::raw;
    else
      c.fail("moral.reducer_input", "must be adjusted or raw");
  }

  cfg.reducer.n_neighbors = c.count("reducer.n_neighbors", 15, 2);
  cfg.reducer.min_dist = c.number("reducer.min_dist").value_or(0.1);
  if (cfg.reducer.min_dist < 0) c.fail("reducer.min_dist", "must be >= 0");
  cfg.reducer.n_epochs = c.count("reducer.n_epochs", 500, 1);
  if (const auto s = c.string("reducer.metric")) {
    if (const auto m = parse_metric(*s))
      cfg.reducer.metric = *m;
    else
      c.fail("reducer.metric", "unknown metric '" + *s + "'");
  }

  if (const auto s = c.string("cluster.mode")) {
    if (*s == "search")
      cfg.cluster.mode = ClusterMode::search;
    else if (*s == "fixed")
      cfg.cluster.mode = ClusterMode::fixed;
    else
      c.fail("cluster.mode", "must be search or fixed");
  }
  cfg.cluster.trials = c.count("cluster.trials", 50, 1);
  const auto bounds = [&](std::string_view field, std::size_t min) -> std::vector<std::size_t> {
    const json* n = c.find(field);
    if (n == nullptr || !n->is_array() || n->size() != 2 || !(*n)[0].is_number_integer() ||
        !(*n)[1].is_number_integer() || (*n)[0].get<long long>() < static_cast<long long>(min) ||
        (*n)[0].get<long long>() > (*n)[1].get<long long>()) {
      c.fail(field, "must be [lo, hi] with " + std::to_string(min) + " <= lo <= hi");
      return {};
    }
    return SearchSpace::range((*n)[0].get<std::size_t>(), (*n)[1].get<std::size_t>());
  };
  cfg.cluster.space.min_samples = bounds("cluster.space.min_samples", 1);
  cfg.cluster.space.min_cluster_size = bounds("cluster.space.min_cluster_size", 2);
  cfg.cluster.space.metrics.clear();
  if (const json* m = c.find("cluster.space.metrics"); m != nullptr && m->is_array() && !m->empty()) {
    for (const auto& v : *m) {
      const auto metric = v.is_string() ? parse_metric(v.get<std::string>()) : std::nullopt;
      if (!metric || *metric == Metric::cosine) {
        c.fail("cluster.space.metrics", "entries must be euclidean or manhattan");
        break;
      }
      cfg.cluster.space.metrics.push_back(*metric);
    }
  } else {
    c.fail("cluster.space.metrics", "must be a non-empty list");
  }
  for (auto o : kGroups) {
    const std::string field = "cluster." + std::string(orientation_name(o));
    cfg.cluster.fixed[o] = cluster_params(c, c.find(field), field);
  }

  cfg.annotation_k = c.count("annotation.k", 30, 1);
  if (const auto s = c.string("coherence.metric")) {
    if (const auto m = parse_metric(*s))
      cfg.coherence_metric = *m;
    else
      c.fail("coherence.metric", "unknown metric '" + *s + "'");
  }

  RegressionSpec spec;
  if (auto v = variable(c, c.find("regression.dependent"), "regression.dependent")) spec.dependent = *v;
  spec.predictors.clear();
  if (const json* preds = c.find("regression.predictors"); preds != nullptr && preds->is_array()) {
    for (std::size_t i = 0; i < preds->size(); ++i)
      if (auto v = variable(c, &(*preds)[i], "regression.predictors[" + std::to_string(i) + "]"))
        spec.predictors.push_back(*v);
  } else {
    c.fail("regression.predictors", "must be a list");
  }
  spec.standardize = c.boolean("regression.standardize", true);
  spec.include_intercept = c.boolean("regression.include_intercept", true);
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    c.fail("regression", e.what());
  }
  cfg.regression = spec;
  cfg.svg = c.boolean("report.svg", true);

  if (!c.errors().empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : c.errors()) msg += "\n  " + e;
    throw ValidationError(msg);
  }

  merged["inputs"]["corpus"] = cfg.inputs.corpus.string();
  merged["inputs"]["embeddings"] = cfg.inputs.embeddings.string();
  merged["inputs"]["moral_scores"] = cfg.inputs.moral_scores ? json(cfg.inputs.moral_scores->string()) : json();
  merged["inputs"]["lexicon"] = cfg.inputs.lexicon ? json(cfg.inputs.lexicon->string()) : json();
  merged["inputs"]["ca_dictionary"] = cfg.inputs.ca_dictionary.string();
  for (auto o : kGroups) {
    const auto it = cfg.inputs.label_mapping.find(o);
    merged["inputs"]["label_mapping"][std::string(orientation_name(o))] =
        it == cfg.inputs.label_mapping.end() ? json() : json(it->second.string());
  }
  merged["output_dir"] = cfg.output_dir.string();
  cfg.echo = std::move(merged);
  return cfg;
}

PipelineConfig validate_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config: cannot read " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ValidationError("config: " + path.string() + " is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  return resolve_config(doc, fs::absolute(path).parent_path());
}

}  // namespace moralmap
