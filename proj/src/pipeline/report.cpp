// Run report and per-figure data files. Everything here is derived from
// persisted stage artifacts, so the report can be rebuilt without rerunning
// any upstream stage.

#include <cstdio>
#include <set>

#include <json.hpp>

#include "moralmap/csv.hpp"
#include "moralmap/format.hpp"
#include "stage_context.hpp"

namespace moralmap {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 5> kDims = {"care", "fairness", "loyalty", "authority", "sanctity"};

struct Membership {
  Orientation o;
  int cluster;
  std::string group;
};

struct Summary {
  std::size_t n = 0;
  double sum = 0.0;
  void add(double v) {
    ++n;
    sum += v;
  }
  json value() const { return n == 0 ? json(nullptr) : json(sum / static_cast<double>(n)); }
};

std::map<std::string, std::size_t> index_by_id(const artifacts::Table& t) {
  std::map<std::string, std::size_t> m;
  for (std::size_t r = 0; r < t.rows.size(); ++r) m[t.get(r, "id")] = r;
  return m;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void write_svg(const fs::path& path, const std::map<Orientation, std::pair<std::vector<std::string>, Matrix>>& layouts,
               const std::map<Orientation, ClusterModel>& models) {
  static constexpr std::array<std::string_view, 8> palette = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                                              "#66a61e", "#e6ab02", "#a6761d", "#1f78b4"};
  constexpr double panel = 400.0, margin = 20.0;
  auto out = csv::open_output(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * panel << "\" height=\"" << panel + margin
      << "\">\n";
  double x0 = 0.0;
  for (auto o : kGroups) {
    out << "<text x=\"" << fixed2(x0 + margin) << "\" y=\"14\" font-size=\"12\">" << orientation_name(o)
        << "</text>\n";
    const auto& [ids, y] = layouts.at(o);
    const auto& model = models.at(o);
    if (!ids.empty()) {
      double lo[2] = {y(0, 0), y(0, 1)}, hi[2] = {y(0, 0), y(0, 1)};
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t d = 0; d < 2; ++d) {
          lo[d] = std::min(lo[d], y(i, d));
          hi[d] = std::max(hi[d], y(i, d));
        }
      const double span = panel - 2 * margin;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const double sx = hi[0] > lo[0] ? (y(i, 0) - lo[0]) / (hi[0] - lo[0]) : 0.5;
        const double sy = hi[1] > lo[1] ? (y(i, 1) - lo[1]) / (hi[1] - lo[1]) : 0.5;
        const int l = model.labels[i];
        const std::string_view colour = l < 0 ? "#bbbbbb" : palette[static_cast<std::size_t>(l) % palette.size()];
        out << "<circle cx=\"" << fixed2(x0 + margin + sx * span) << "\" cy=\"" << fixed2(2 * margin + (1 - sy) * span)
            << "\" r=\"2.5\" fill=\"" << colour << "\"/>\n";
      }
    }
    x0 += panel;
  }
  out << "</svg>\n";
}

json stage_counts(StageContext& ctx) {
  const auto corpus = parse_corpus(ctx.out.corpus()).corpus;
  const std::vector<std::pair<std::string, std::string>> stages = {
      {"english", "filter"}, {"with_transcript", "filter"}, {"valid_topic", "topics"}, {"commented", "filter"}};
  CorpusStats stats({"original", "english", "with_transcript", "valid_topic", "valid_comments"});
  std::vector<VideoDoc> current;
  for (const auto& v : corpus.videos)
    if (v.challenge != Challenge::baseline) current.push_back(v);
  stats.record(0, current, corpus.comments);
  // The comment-validity list is computed over transcript-filtered videos;
  // intersecting with the running set keeps the stages in series.
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const auto keep = artifacts::read_id_set(ctx.out.ids(stages[s].first), stages[s].second);
    std::erase_if(current, [&](const VideoDoc& v) { return !keep.contains(v.id); });
    stats.record(s + 1, current, corpus.comments);
  }
  {
    auto out = csv::open_output(ctx.out.figures() / "stage_counts.csv");
    stats.write_csv(out);
  }
  json rows = json::array();
  for (std::size_t s = 0; s < stats.stages().size(); ++s) {
    const auto c = stats.total(s);
    rows.push_back({{"stage", stats.stages()[s]}, {"videos", c.videos}, {"comments", c.comments}});
  }
  std::size_t baseline = 0;
  for (const auto& v : corpus.videos) baseline += v.challenge == Challenge::baseline;
  return {{"stages", rows},
          {"monotone", stats.monotone()},
          {"baseline_videos_ingested", baseline},
          {"baseline_videos_retained", artifacts::read_ids(ctx.out.ids("baseline"), "filter").size()}};
}

}  // namespace

void write_report(StageContext& ctx) {
  const auto& out = ctx.out;
  const auto fig = out.figures();
  fs::create_directories(fig);

  json report;
  report["version"] = MORALMAP_VERSION;
  report["seed"] = ctx.cfg.seed;
  report["config"] = ctx.cfg.echo;
  report["stage_counts"] = stage_counts(ctx);

  const auto orient = artifacts::read_orientations(out);
  json orientation_counts = {{"communal", 0}, {"agency", 0}, {"unclassified", 0}};
  for (const auto& [id, o] : orient) {
    auto& slot = orientation_counts[std::string(orientation_name(o))];
    slot = slot.get<std::size_t>() + 1;
  }
  report["orientation_counts"] = orientation_counts;
  report["topics"] = json::parse(artifacts::read_text(out.topics_dir() / "summary.json"));

  std::map<Orientation, std::pair<std::vector<std::string>, Matrix>> layouts;
  std::map<Orientation, ClusterModel> models;
  std::map<std::string, Membership> member;
  json clusters = json::object();
  for (auto o : kGroups) {
    layouts[o] = artifacts::read_layout(out, o);
    const auto& ids = layouts[o].first;
    models[o] = artifacts::read_cluster_model(out, o, ids);
    auto meta = json::parse(artifacts::read_text(out.cluster_meta(o)));
    meta.erase("input_hash");
    clusters[std::string(orientation_name(o))] = std::move(meta);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const int l = models[o].labels[i];
      member[ids[i]] = {o, l, group_name(o, l, models[o])};
    }
  }
  report["clusters"] = clusters;

  const auto adjusted = artifacts::read_table(out.moral_adjusted(), "moral");
  const auto coherence = artifacts::read_table(out.coherence(), "coherence");
  const auto alignment = artifacts::read_table(out.alignment(), "align");
  const auto ca = artifacts::read_table(out.ca_videos(), "ca");
  const auto adj_row = index_by_id(adjusted);
  const auto coh_row = index_by_id(coherence);
  const auto ali_row = index_by_id(alignment);
  const auto ca_row = index_by_id(ca);

  // Cluster layouts.
  {
    auto f = csv::open_output(fig / "cluster_layout.csv");
    f << "orientation,id,x,y,cluster,group\n";
    for (auto o : kGroups) {
      const auto& [ids, y] = layouts[o];
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& m = member.at(ids[i]);
        f << orientation_name(o) << ',' << ids[i] << ',' << format_double(y(i, 0)) << ',' << format_double(y(i, 1))
          << ',' << m.cluster << ',' << m.group << '\n';
      }
    }
  }
  if (ctx.cfg.svg)
    write_svg(fig / "cluster_layout.svg", layouts, models);
  else
    fs::remove(fig / "cluster_layout.svg");

  // Moral, collective-action and coherence files share the per-video join on
  // cluster membership.
  auto moral_out = csv::open_output(fig / "moral_profiles.csv");
  auto ca_out = csv::open_output(fig / "collective_action.csv");
  auto coherence_out = csv::open_output(fig / "coherence_alignment.csv");
  moral_out << "id,orientation,cluster,group";
  for (auto d : kDims) moral_out << ',' << d;
  moral_out << '\n';
  ca_out << "id,orientation,cluster,group,n_comments,mean_ca_freq,marker_fraction\n";
  coherence_out << "id,orientation,cluster,group,silhouette,alignment\n";

  struct NarrativeStats {
    std::size_t videos = 0;
    std::array<Summary, 5> moral;
    Summary silhouette, alignment, mean_ca_freq, marker_fraction, n_comments;
  };
  std::map<std::pair<Orientation, int>, NarrativeStats> narratives;
  for (const auto& [id, m] : member) {
    if (m.cluster < 0) continue;
    auto& ns = narratives[{m.o, m.cluster}];
    ++ns.videos;
    const std::string prefix = id + ',' + std::string(orientation_name(m.o)) + ',' + std::to_string(m.cluster) + ',' +
                               m.group;
    if (const auto it = adj_row.find(id); it != adj_row.end()) {
      moral_out << prefix;
      for (std::size_t d = 0; d < kDims.size(); ++d) {
        const double v = adjusted.number(it->second, kDims[d]);
        ns.moral[d].add(v);
        moral_out << ',' << format_double(v);
      }
      moral_out << '\n';
    }
    if (const auto it = ca_row.find(id); it != ca_row.end()) {
      const double n = ca.number(it->second, "n_comments");
      const double freq = ca.number(it->second, "mean_ca_freq");
      const double frac = ca.number(it->second, "marker_fraction");
      ns.n_comments.add(n);
      ns.mean_ca_freq.add(freq);
      ns.marker_fraction.add(frac);
      ca_out << prefix << ',' << ca.get(it->second, "n_comments") << ',' << format_double(freq) << ','
         << format_double(frac) << '\n';
    }
    const auto c = coh_row.find(id);
    const auto a = ali_row.find(id);
    if (c != coh_row.end()) ns.silhouette.add(coherence.number(c->second, "silhouette"));
    if (a != ali_row.end()) ns.alignment.add(alignment.number(a->second, "alignment"));
    if (c != coh_row.end() || a != ali_row.end())
      coherence_out << prefix << ',' << (c != coh_row.end() ? coherence.get(c->second, "silhouette") : "") << ','
         << (a != ali_row.end() ? alignment.get(a->second, "alignment") : "") << '\n';
  }

  json narrative_rows = json::array();
  for (const auto& [key, ns] : narratives) {
    const auto& model = models.at(key.first);
    json row;
    row["orientation"] = std::string(orientation_name(key.first));
    row["cluster"] = key.second;
    row["group"] = group_name(key.first, key.second, model);
    if (const auto it = model.narrative_labels.find(key.second); it != model.narrative_labels.end())
      row["narrative_label"] = std::string(narrative_name(it->second));
    else
      row["narrative_label"] = nullptr;
    row["videos"] = ns.videos;
    json moral = json::object();
    for (std::size_t d = 0; d < kDims.size(); ++d) moral[std::string(kDims[d])] = ns.moral[d].value();
    row["moral_adjusted_mean"] = std::move(moral);
    row["silhouette_mean"] = ns.silhouette.value();
    row["alignment_mean"] = ns.alignment.value();
    row["videos_with_comments"] = ns.marker_fraction.n;
    row["n_comments_mean"] = ns.n_comments.value();
    row["mean_ca_freq"] = ns.mean_ca_freq.value();
    row["marker_fraction_mean"] = ns.marker_fraction.value();
    narrative_rows.push_back(std::move(row));
  }
  report["narratives"] = std::move(narrative_rows);

  // Layout of the video embeddings.
  fs::copy_file(out.embedding_layout(), fig / "embedding_layout.csv", fs::copy_options::overwrite_existing);

  auto regression = json::parse(artifacts::read_text(out.regression_meta()));
  const auto coef = csv::read_lines(out.regression_result());
  json rows = json::array();
  for (std::size_t i = 1; i < coef.size(); ++i) {
    const auto f = csv::split(coef[i]);
    if (f.size() != 6) continue;
    rows.push_back({{"variable", std::string(f[0])},
                    {"coefficient", parse_double(f[1]).value_or(0.0)},
                    {"std_err", parse_double(f[2]).value_or(0.0)},
                    {"t", parse_double(f[3]).value_or(0.0)},
                    {"p", parse_double(f[4]).value_or(1.0)},
                    {"significance_flag", std::string(f[5])}});
  }
  regression["coefficients"] = std::move(rows);
  report["regression"] = std::move(regression);

  json warnings = json::object();
  for (std::string_view name : {"ingest", "filter", "topics", "ci", "moral", "reduce", "cluster", "search",
                                "annotate-export", "annotate-apply", "coherence", "align", "ca", "regress"}) {
    const auto path = out.warnings(name);
    if (!fs::exists(path)) continue;
    json list = json::array();
    for (auto& line : csv::read_lines(path))
      if (!line.empty()) list.push_back(std::move(line));
    if (!list.empty()) warnings[std::string(name)] = std::move(list);
  }
  report["warnings"] = std::move(warnings);

  json files = json::array();
  for (auto name : {"stage_counts.csv", "cluster_layout.csv", "cluster_layout.svg", "moral_profiles.csv",
                    "collective_action.csv", "coherence_alignment.csv", "embedding_layout.csv"})
    if (fs::exists(fig / name)) files.push_back(std::string("figures/") + name);
  report["figures"] = std::move(files);

  artifacts::write_text(out.report(), report.dump(2) + "\n");
}

}  // namespace moralmap
