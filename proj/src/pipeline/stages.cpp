#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "moralmap/collective_action.hpp"
#include "moralmap/csv.hpp"
#include "moralmap/embedding.hpp"
#include "moralmap/format.hpp"
#include "moralmap/pipeline.hpp"
#include "moralmap/text.hpp"
#include "stage_context.hpp"

namespace moralmap {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using artifacts::derive_seed;
using artifacts::fingerprint;

namespace {

constexpr std::array<std::pair<Stage, std::string_view>, 15> kStageNames = {{
    {Stage::ingest, "ingest"},
    {Stage::filter, "filter"},
    {Stage::topics, "topics"},
    {Stage::ci, "ci"},
    {Stage::moral, "moral"},
    {Stage::reduce, "reduce"},
    {Stage::cluster, "cluster"},
    {Stage::search, "search"},
    {Stage::annotate_export, "annotate-export"},
    {Stage::annotate_apply, "annotate-apply"},
    {Stage::coherence, "coherence"},
    {Stage::align, "align"},
    {Stage::ca, "ca"},
    {Stage::regress, "regress"},
    {Stage::report, "report"},
}};

std::string list_ids(const std::vector<std::string>& ids) {
  std::string s;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 5);
  for (std::size_t i = 0; i < shown; ++i) s += (i ? ", " : "") + ids[i];
  if (ids.size() > shown) s += ", ...";
  return s;
}

bool language_matches(const std::string& lang, const std::string& prefix) {
  const std::string l = text::to_lower_ascii(lang);
  return l == prefix || l.starts_with(prefix + "-") || l.starts_with(prefix + "_");
}

Corpus read_ingested(const artifacts::Layout& out) {
  if (!fs::exists(out.corpus()))
    throw DataError(out.corpus().string() + " not found; run the 'ingest' stage first");
  return parse_corpus(out.corpus()).corpus;
}

// ---------------------------------------------------------------- ingest

void run_ingest(StageContext& ctx) {
  auto parsed = parse_corpus(ctx.cfg.inputs.corpus);
  fs::create_directories(ctx.out.root);
  write_corpus(ctx.out.corpus(), parsed.corpus);
  auto errors = csv::open_output(ctx.out.ingest_errors());
  write_error_report(errors, parsed.errors);
  if (!parsed.errors.empty())
    ctx.warnings.add(std::to_string(parsed.errors.size()) + " corpus records rejected; see ingest_errors.jsonl");
}

// ---------------------------------------------------------------- filter

void run_filter(StageContext& ctx) {
  const auto& f = ctx.cfg.filter;
  const Corpus corpus = read_ingested(ctx.out);

  Corpus kept;
  std::vector<std::string> english, with_transcript, baseline;
  std::set<std::string> kept_ids;
  for (const auto& v : corpus.videos) {
    if (!language_matches(v.lang, f.language_prefix)) continue;
    const bool target = v.challenge != Challenge::baseline;
    if (target) english.push_back(v.id);
    VideoDoc p = v;
    p.transcript = preprocess_transcript(v.transcript);
    if (p.transcript.empty() || !passes_unique_word_filter(p.transcript, f.transcript_min_unique)) continue;
    (target ? with_transcript : baseline).push_back(v.id);
    kept_ids.insert(v.id);
    kept.videos.push_back(std::move(p));
  }

  std::set<std::string> has_valid_comment;
  for (const auto& c : corpus.comments) {
    if (!kept_ids.contains(c.video_id)) continue;
    Comment p = c;
    p.text = preprocess_comment(c.text);
    if (p.text.empty()) continue;
    if (passes_unique_word_filter(p.text, f.comment_min_unique)) has_valid_comment.insert(c.video_id);
    kept.comments.push_back(std::move(p));
  }
  std::vector<std::string> commented;
  for (const auto& id : with_transcript)
    if (has_valid_comment.contains(id)) commented.push_back(id);

  for (auto* ids : {&english, &with_transcript, &baseline, &commented}) std::sort(ids->begin(), ids->end());
  write_corpus(ctx.out.preprocessed(), kept);
  artifacts::write_ids(ctx.out.ids("english"), english);
  artifacts::write_ids(ctx.out.ids("with_transcript"), with_transcript);
  artifacts::write_ids(ctx.out.ids("baseline"), baseline);
  artifacts::write_ids(ctx.out.ids("commented"), commented);
  if (baseline.empty()) ctx.warnings.add("no baseline video survived filtering");
}

// ---------------------------------------------------------------- topics

bool run_topics(StageContext& ctx) {
  const auto& t = ctx.cfg.topics;
  const auto pre = artifacts::read_preprocessed(ctx.out);
  const auto ids = artifacts::read_ids(ctx.out.ids("with_transcript"), "filter");
  std::vector<std::string> texts;
  texts.reserve(ids.size());
  for (const auto& id : ids) texts.push_back(pre.videos.at(id).transcript);

  json subtree = ctx.cfg.echo.at("topics");
  subtree["seed"] = ctx.cfg.seed;
  std::uint64_t h = fingerprint(subtree.dump());
  for (std::size_t i = 0; i < ids.size(); ++i) h = fingerprint(ids[i] + '\n' + texts[i] + '\n', h);
  const auto dir = ctx.out.topics_dir();
  const auto hash_file = dir / "input.hash";
  if (fs::exists(hash_file) && artifacts::read_text(hash_file) == artifacts::hex(h) &&
      fs::exists(ctx.out.ids("valid_topic")) && fs::exists(dir / "summary.json"))
    return true;
  fs::remove(hash_file);

  const auto corpus = build_topic_corpus(ids, texts, t.min_df);
  LdaConfig lda = t.lda;
  lda.seed = derive_seed(ctx.cfg.seed, "topics");
  const auto model = lda_fit(corpus, lda);

  std::size_t keep = 0;
  if (t.keep_topic) {
    keep = *t.keep_topic;
  } else {
    const auto anchor = topic_for_anchor(model, t.drop_anchor);
    if (!anchor)
      throw ValidationError("topics.drop_anchor: '" + t.drop_anchor +
                            "' is not in the topic vocabulary; set topics.keep_topic");
    keep = 1 - *anchor;
  }
  const auto kept = filter_by_topic(model, keep);

  {
    auto out = csv::open_output(dir / "topic_words.csv");
    write_topic_words(out, model, t.top_words);
  }
  {
    auto out = csv::open_output(dir / "topic_docs.csv");
    write_topic_docs(out, model, t.top_docs);
  }
  {
    auto out = csv::open_output(dir / "doc_topics.csv");
    write_doc_topics(out, model);
  }
  json summary;
  summary["n_topics"] = model.n_topics;
  summary["keep_topic"] = keep;
  summary["alpha"] = model.alpha;
  summary["beta"] = model.beta;
  summary["sweeps"] = model.iterations;
  summary["burn_in"] = lda.burn_in;
  summary["seed"] = model.seed;
  summary["documents"] = corpus.doc_ids.size();
  summary["vocabulary_size"] = corpus.vocabulary.size();
  summary["tokens"] = corpus.token_count();
  summary["retained"] = kept.size();
  json words = json::object();
  for (std::size_t k = 0; k < model.n_topics; ++k) words[std::to_string(k)] = top_words(model, k, t.top_words);
  summary["top_words"] = std::move(words);
  artifacts::write_text(dir / "summary.json", summary.dump(2) + "\n");
  artifacts::write_ids(ctx.out.ids("valid_topic"), kept);
  artifacts::write_text(hash_file, artifacts::hex(h));
  return false;
}

// ---------------------------------------------------------------- ci

void run_ci(StageContext& ctx) {
  const auto pre = artifacts::read_preprocessed(ctx.out);
  const auto ids = artifacts::read_ids(ctx.out.ids("valid_topic"), "topics");
  std::map<Orientation, std::size_t> counts;
  {
    auto out = csv::open_output(ctx.out.ci());
    write_ci_header(out);
    for (const auto& id : ids) {
      const auto st = pronoun_frequencies(pre.videos.at(id).transcript);
      const double index = ci_index(st);
      const auto o = classify_orientation(index, ctx.cfg.thresholds);
      ++counts[o];
      write_ci_row(out, id, st, index, o);
    }
  }
  if (counts[Orientation::communal] == 0 && counts[Orientation::agency] == 0)
    throw StageError("ci", "no videos in orientation groups");
  for (auto o : kGroups)
    if (counts[o] == 0) ctx.warnings.add("no " + std::string(orientation_name(o)) + " videos after gating");
}

// ---------------------------------------------------------------- moral

void run_moral(StageContext& ctx) {
  const auto orient = artifacts::read_orientations(ctx.out);
  const auto baseline_ids = artifacts::read_ids(ctx.out.ids("baseline"), "filter");

  ScoreTable all;
  std::vector<RecordError> errors;
  if (ctx.cfg.moral.scorer == Scorer::external) {
    auto loaded = load_external_scores(*ctx.cfg.inputs.moral_scores);
    all = std::move(loaded.scores);
    errors = std::move(loaded.errors);
  } else {
    const auto lexicon = load_lexicon(*ctx.cfg.inputs.lexicon);
    const auto pre = artifacts::read_preprocessed(ctx.out);
    for (const auto& [id, o] : orient)
      if (o != Orientation::unclassified) all[id] = score_with_lexicon(pre.videos.at(id).transcript, lexicon);
    for (const auto& id : baseline_ids) all[id] = score_with_lexicon(pre.videos.at(id).transcript, lexicon);
  }
  {
    auto out = csv::open_output(ctx.out.moral_errors());
    write_error_report(out, errors);
  }
  if (!errors.empty())
    ctx.warnings.add(std::to_string(errors.size()) + " moral score records rejected; see moral/errors.jsonl");

  std::map<Orientation, ScoreTable> groups;
  ScoreTable baseline, raw;
  std::vector<std::string> missing;
  for (const auto& [id, o] : orient) {
    if (o == Orientation::unclassified) continue;
    const auto it = all.find(id);
    if (it == all.end()) {
      missing.push_back(id);
      continue;
    }
    groups[o][id] = it->second;
    raw[id] = it->second;
  }
  if (!missing.empty())
    ctx.warnings.add(std::to_string(missing.size()) + " oriented videos have no moral scores and are excluded: " +
                     list_ids(missing));
  for (const auto& id : baseline_ids)
    if (const auto it = all.find(id); it != all.end()) baseline[id] = it->second;
  if (baseline.empty()) throw DataError("moral: no baseline video has moral scores");
  for (const auto& [id, sc] : baseline) raw[id] = sc;

  ScoreTable adjusted;
  if (ctx.cfg.moral.scope == StandardizeScope::orientation) {
    for (const auto& [o, table] : groups) {
      if (table.empty()) continue;
      adjusted.merge(baseline_adjust(table, baseline, &ctx.warnings));
    }
  } else {
    ScoreTable merged;
    for (const auto& [o, table] : groups) merged.insert(table.begin(), table.end());
    if (!merged.empty()) adjusted = baseline_adjust(merged, baseline, &ctx.warnings);
  }
  {
    auto out = csv::open_output(ctx.out.moral_raw());
    write_scores(out, raw, ScoreVariant::raw);
  }
  auto out = csv::open_output(ctx.out.moral_adjusted());
  write_scores(out, adjusted, ScoreVariant::adjusted);
}

// ---------------------------------------------------------------- reduce

void run_reduce(StageContext& ctx) {
  const auto orient = artifacts::read_orientations(ctx.out);
  const bool use_adjusted = ctx.cfg.moral.reducer_input == ScoreVariant::adjusted;
  const auto table = artifacts::read_table(use_adjusted ? ctx.out.moral_adjusted() : ctx.out.moral_raw(), "moral");
  static constexpr std::array<std::string_view, 5> dims = {"care", "fairness", "loyalty", "authority", "sanctity"};

  for (auto o : kGroups) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto it = orient.find(table.get(r, "id"));
      if (it != orient.end() && it->second == o) rows.push_back(r);
    }
    auto out = csv::open_output(ctx.out.layout(o));
    out << "id,x,y\n";
    const std::string name(orientation_name(o));
    if (rows.size() <= ctx.cfg.reducer.n_neighbors) {
      if (!rows.empty())
        ctx.warnings.add(name + " group has " + std::to_string(rows.size()) +
                         " videos, not more than reducer.n_neighbors; it is not reduced or clustered");
      continue;
    }
    Matrix x(rows.size(), dims.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t d = 0; d < dims.size(); ++d) x(i, d) = table.number(rows[i], dims[d]);
    ReducerConfig rc = ctx.cfg.reducer;
    rc.seed = derive_seed(ctx.cfg.seed, "reduce:" + name);
    const Matrix y = umap_fit(x, rc, &ctx.warnings);
    for (std::size_t i = 0; i < rows.size(); ++i)
      out << table.get(rows[i], "id") << ',' << format_double(y(i, 0)) << ',' << format_double(y(i, 1)) << '\n';
  }
}

// ---------------------------------------------------------------- cluster / search

json params_json(const ClusteringParams& p) {
  return {{"min_samples", p.min_samples},
          {"min_cluster_size", p.min_cluster_size},
          {"metric", std::string(metric_name(p.metric))}};
}

void write_cluster_artifacts(StageContext& ctx, Orientation o, const std::vector<std::string>& ids,
                             const ClusterModel& model, const std::string& mode, const std::string& input_hash,
                             std::size_t trials) {
  {
    auto out = csv::open_output(ctx.out.clusters(o));
    write_cluster_file(out, ids, model);
  }
  json meta;
  meta["mode"] = mode;
  if (!input_hash.empty()) meta["input_hash"] = input_hash;
  meta["n_videos"] = ids.size();
  meta["params"] = params_json(model.params);
  meta["dbcv"] = model.dbcv ? json(*model.dbcv) : json(nullptr);
  meta["n_clusters"] = model.n_clusters;
  meta["sizes"] = model.cluster_sizes();
  meta["noise_fraction"] = ids.empty() ? 0.0 : model.noise_fraction();
  meta["trials"] = trials;
  json labels = json::object();
  for (const auto& [k, v] : model.narrative_labels) labels[std::to_string(k)] = std::string(narrative_name(v));
  meta["narrative_labels"] = std::move(labels);
  artifacts::write_text(ctx.out.cluster_meta(o), meta.dump(2) + "\n");
}

bool run_cluster(StageContext& ctx, bool search) {
  bool all_reused = true;
  for (auto o : kGroups) {
    const std::string name(orientation_name(o));
    const auto [ids, layout] = artifacts::read_layout(ctx.out, o);
    if (ids.empty()) {
      ClusterModel empty;
      empty.params = search ? ClusteringParams{} : ctx.cfg.cluster.fixed.at(o);
      write_cluster_artifacts(ctx, o, ids, empty, search ? "search" : "fixed", "", 0);
      if (search) {
        auto log = csv::open_output(ctx.out.trials(o));
      }
      all_reused = false;
      continue;
    }
    if (!search) {
      ClusterModel model = hdbscan(layout, ctx.cfg.cluster.fixed.at(o));
      try {
        model.dbcv = dbcv(layout, model.labels, model.params.metric);
      } catch (const UndefinedScoreError& e) {
        ctx.warnings.add(name + ": DBCV undefined (" + e.what() + ")");
      }
      write_cluster_artifacts(ctx, o, ids, model, "fixed", "", 0);
      all_reused = false;
      continue;
    }

    std::uint64_t h = fingerprint(artifacts::read_text(ctx.out.layout(o)));
    h = fingerprint(ctx.cfg.echo.at("cluster").dump(), h);
    h = fingerprint(std::to_string(ctx.cfg.seed), h);
    const std::string key = artifacts::hex(h);
    if (fs::exists(ctx.out.cluster_meta(o)) && fs::exists(ctx.out.clusters(o)) && fs::exists(ctx.out.trials(o))) {
      const auto meta = json::parse(artifacts::read_text(ctx.out.cluster_meta(o)), nullptr, false);
      if (!meta.is_discarded() && meta.value("input_hash", "") == key) continue;
    }
    all_reused = false;
    fs::remove(ctx.out.cluster_meta(o));
    try {
      const auto result =
          random_search(layout, ctx.cfg.cluster.space, ctx.cfg.cluster.trials, derive_seed(ctx.cfg.seed, "search:" + name));
      {
        auto log = csv::open_output(ctx.out.trials(o));
        write_trial_log(log, result.log);
      }
      write_cluster_artifacts(ctx, o, ids, result.model, "search", key, result.log.size());
    } catch (const SearchFailure& e) {
      auto log = csv::open_output(ctx.out.trials(o));
      write_trial_log(log, e.log());
      throw StageError("search", name + ": " + e.what());
    }
  }
  return all_reused;
}

// ---------------------------------------------------------------- annotation

void run_annotate_export(StageContext& ctx) {
  const auto pre = artifacts::read_preprocessed(ctx.out);
  for (auto o : kGroups) {
    const auto [ids, layout] = artifacts::read_layout(ctx.out, o);
    const auto model = artifacts::read_cluster_model(ctx.out, o, ids);
    export_annotation_bundle(ctx.out.annotation_dir(o), ids, layout, model, pre.videos, o, ctx.cfg.annotation_k);
  }
}

void run_annotate_apply(StageContext& ctx) {
  for (auto o : kGroups) {
    const std::string name(orientation_name(o));
    const auto [ids, layout] = artifacts::read_layout(ctx.out, o);
    auto model = artifacts::read_cluster_model(ctx.out, o, ids);
    fs::path mapping_path;
    if (const auto it = ctx.cfg.inputs.label_mapping.find(o); it != ctx.cfg.inputs.label_mapping.end())
      mapping_path = it->second;
    else if (fs::exists(ctx.out.annotation_dir(o) / "labels.tsv"))
      mapping_path = ctx.out.annotation_dir(o) / "labels.tsv";
    if (mapping_path.empty()) {
      ctx.warnings.add("no label mapping for " + name + " clusters");
      continue;
    }
    const auto mapping = read_label_mapping(mapping_path);
    if (mapping.empty() && model.n_clusters > 0) ctx.warnings.add(name + " label mapping is empty");
    model = apply_narrative_labels(std::move(model), mapping, o);
    {
      auto out = csv::open_output(ctx.out.clusters(o));
      write_cluster_file(out, ids, model);
    }
    auto meta = json::parse(artifacts::read_text(ctx.out.cluster_meta(o)));
    json labels = json::object();
    for (const auto& [k, v] : model.narrative_labels) labels[std::to_string(k)] = std::string(narrative_name(v));
    meta["narrative_labels"] = std::move(labels);
    artifacts::write_text(ctx.out.cluster_meta(o), meta.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------- coherence

EmbeddingTable read_embeddings(StageContext& ctx) {
  auto loaded = load_embeddings(ctx.cfg.inputs.embeddings);
  if (!loaded.errors.empty())
    ctx.warnings.add(std::to_string(loaded.errors.size()) + " embedding records rejected (zero or malformed vectors)");
  return std::move(loaded.table);
}

void run_coherence(StageContext& ctx) {
  const auto emb = read_embeddings(ctx);
  const auto orient = artifacts::read_orientations(ctx.out);

  struct Member {
    std::string id;
    Orientation o;
    int cluster;
    std::string group;
  };
  std::vector<Member> members;
  std::map<std::string, std::string> group_of;
  std::vector<std::string> missing;
  int offset = 0;
  std::vector<int> labels;
  for (auto o : kGroups) {
    const auto [ids, layout] = artifacts::read_layout(ctx.out, o);
    const auto model = artifacts::read_cluster_model(ctx.out, o, ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const int l = model.labels[i];
      group_of[ids[i]] = group_name(o, l, model);
      if (l < 0) continue;
      if (!emb.contains(ids[i])) {
        missing.push_back(ids[i]);
        continue;
      }
      members.push_back({ids[i], o, l, group_name(o, l, model)});
      labels.push_back(offset + l);
    }
    offset += model.n_clusters;
  }
  if (!missing.empty())
    ctx.warnings.add(std::to_string(missing.size()) + " clustered videos have no embedding: " + list_ids(missing));

  {
    auto out = csv::open_output(ctx.out.coherence());
    out << "id,orientation,cluster,group,silhouette\n";
    if (!members.empty()) {
      Matrix points(members.size(), emb.dim());
      for (std::size_t i = 0; i < members.size(); ++i) {
        const auto v = emb.at(members[i].id);
        std::copy(v.begin(), v.end(), points.row(i).begin());
      }
      const auto rep = silhouette(points, labels, ctx.cfg.coherence_metric, &ctx.warnings);
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (!rep.scores[i]) continue;
        out << members[i].id << ',' << orientation_name(members[i].o) << ',' << members[i].cluster << ','
            << members[i].group << ',' << format_double(*rep.scores[i]) << '\n';
      }
    } else {
      ctx.warnings.add("no clustered video with an embedding; coherence is empty");
    }
  }

  // Layout of the video embeddings themselves, for the embedding-space figure.
  std::vector<std::string> ids;
  for (const auto& [id, o] : orient)
    if (emb.contains(id)) ids.push_back(id);
  auto out = csv::open_output(ctx.out.embedding_layout());
  out << "id,orientation,group,x,y\n";
  if (ids.size() <= ctx.cfg.reducer.n_neighbors) {
    ctx.warnings.add("too few videos with embeddings for the embedding layout");
    return;
  }
  Matrix x(ids.size(), emb.dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto v = emb.at(ids[i]);
    std::copy(v.begin(), v.end(), x.row(i).begin());
  }
  ReducerConfig rc = ctx.cfg.reducer;
  rc.metric = Metric::cosine;
  rc.seed = derive_seed(ctx.cfg.seed, "embedding-layout");
  const Matrix y = umap_fit(x, rc, &ctx.warnings);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto g = group_of.find(ids[i]);
    out << ids[i] << ',' << orientation_name(orient.at(ids[i])) << ',' << (g == group_of.end() ? "" : g->second)
        << ',' << format_double(y(i, 0)) << ',' << format_double(y(i, 1)) << '\n';
  }
}

// ---------------------------------------------------------------- align

void run_align(StageContext& ctx) {
  const auto emb = read_embeddings(ctx);
  const auto orient = artifacts::read_orientations(ctx.out);
  const auto pre = artifacts::read_preprocessed(ctx.out);
  auto out = csv::open_output(ctx.out.alignment());
  out << "id,n_comment_vectors,alignment\n";
  std::vector<std::string> no_video, no_comments;
  for (const auto& [id, o] : orient) {
    if (o == Orientation::unclassified) continue;
    if (!emb.contains(id)) {
      no_video.push_back(id);
      continue;
    }
    std::vector<std::span<const double>> vecs;
    if (const auto it = pre.comments.find(id); it != pre.comments.end())
      for (const auto& c : it->second)
        if (emb.contains(c.id)) vecs.push_back(emb.at(c.id));
    if (vecs.empty()) {
      no_comments.push_back(id);
      continue;
    }
    try {
      const double a = video_comment_alignment(emb.at(id), vecs);
      out << id << ',' << vecs.size() << ',' << format_double(a) << '\n';
    } catch (const DomainError& e) {
      ctx.warnings.add(id + ": alignment undefined (" + e.what() + ")");
    }
  }
  if (!no_video.empty())
    ctx.warnings.add(std::to_string(no_video.size()) + " oriented videos have no embedding: " + list_ids(no_video));
  if (!no_comments.empty())
    ctx.warnings.add(std::to_string(no_comments.size()) +
                     " oriented videos have no embedded comments: " + list_ids(no_comments));
}

// ---------------------------------------------------------------- ca

void run_ca(StageContext& ctx) {
  const auto dict = compile_dictionary(ctx.cfg.inputs.ca_dictionary);
  const auto orient = artifacts::read_orientations(ctx.out);
  const auto commented = artifacts::read_id_set(ctx.out.ids("commented"), "filter");
  const auto pre = artifacts::read_preprocessed(ctx.out);

  std::map<std::string, VideoCA> videos;
  auto comments_out = csv::open_output(ctx.out.ca_comments());
  comments_out << "comment_id,video_id,matched,total,frequency,has_marker\n";
  for (const auto& [id, o] : orient) {
    if (o == Orientation::unclassified || !commented.contains(id)) continue;
    std::vector<CommentCA> scored;
    if (const auto it = pre.comments.find(id); it != pre.comments.end()) {
      for (const auto& c : it->second) {
        const auto s = ca_frequency(c.text, dict);
        comments_out << c.id << ',' << id << ',' << s.matched << ',' << s.total << ','
                     << format_double(s.frequency) << ',' << (s.has_marker ? 1 : 0) << '\n';
        scored.push_back(s);
      }
    }
    Warnings w;
    if (const auto stats = video_ca_stats(scored, &w))
      videos[id] = *stats;
    else
      ctx.warnings.add(id + ": no scorable comments");
  }
  auto out = csv::open_output(ctx.out.ca_videos());
  write_video_ca(out, videos);
}

// ---------------------------------------------------------------- regress

std::map<std::string, double> column_by_id(const artifacts::Table& t, std::string_view column) {
  std::map<std::string, double> m;
  for (std::size_t r = 0; r < t.rows.size(); ++r) m[t.get(r, "id")] = t.number(r, column);
  return m;
}

void run_regress(StageContext& ctx) {
  const auto coherence = artifacts::read_table(ctx.out.coherence(), "coherence");
  const auto alignment = artifacts::read_table(ctx.out.alignment(), "align");
  const auto ca = artifacts::read_table(ctx.out.ca_videos(), "ca");
  const auto moral = artifacts::read_table(ctx.out.moral_raw(), "moral");

  std::map<std::string, std::map<std::string, double>> sources;
  sources["silhouette"] = column_by_id(coherence, "silhouette");
  sources["video_comment_alignment"] = column_by_id(alignment, "alignment");
  sources["n_comments"] = column_by_id(ca, "n_comments");
  sources["mean_ca_freq"] = column_by_id(ca, "mean_ca_freq");
  sources["marker_fraction"] = column_by_id(ca, "marker_fraction");
  for (auto d : {"care", "fairness", "loyalty", "authority", "sanctity"}) sources[d] = column_by_id(moral, d);

  std::vector<std::string> ids;
  for (const auto& [id, v] : sources.at("silhouette")) {
    bool complete = true;
    for (const auto& [name, col] : sources) complete = complete && col.contains(id);
    if (complete) ids.push_back(id);
  }
  VariableTable table;
  table.ids = ids;
  for (const auto& [name, col] : sources) {
    auto& values = table.columns[name];
    for (const auto& id : ids) values.push_back(col.at(id));
  }
  {
    auto out = csv::open_output(ctx.out.regression_table());
    out << "id";
    for (const auto& [name, col] : table.columns) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out << ids[i];
      for (const auto& [name, col] : table.columns) out << ',' << format_double(col[i]);
      out << '\n';
    }
  }

  RegressionResult result;
  try {
    result = ols_fit(ctx.cfg.regression, table, &ctx.warnings);
  } catch (const ValidationError& e) {
    throw StageError("regress", e.what());
  }
  {
    auto out = csv::open_output(ctx.out.regression_result());
    write_regression(out, result);
  }
  json fit;
  fit["dependent"] = ctx.cfg.regression.dependent.label();
  json predictors = json::array();
  for (const auto& p : ctx.cfg.regression.predictors) predictors.push_back(p.label());
  fit["predictors"] = std::move(predictors);
  fit["standardized"] = ctx.cfg.regression.standardize;
  fit["standard_errors"] = "classical";
  fit["n"] = result.n;
  fit["df"] = result.df;
  fit["r_squared"] = result.r_squared;
  fit["condition_number"] = result.condition_number;
  json shifts = json::object();
  for (const auto& [name, s] : result.log_shifts) shifts[name] = s;
  fit["log_shifts"] = std::move(shifts);
  artifacts::write_text(ctx.out.regression_meta(), fit.dump(2) + "\n");
}

bool dispatch(Stage stage, StageContext& ctx) {
  switch (stage) {
    case Stage::ingest: run_ingest(ctx); return false;
    case Stage::filter: run_filter(ctx); return false;
    case Stage::topics: return run_topics(ctx);
    case Stage::ci: run_ci(ctx); return false;
    case Stage::moral: run_moral(ctx); return false;
    case Stage::reduce: run_reduce(ctx); return false;
    case Stage::cluster: return run_cluster(ctx, false);
    case Stage::search: return run_cluster(ctx, true);
    case Stage::annotate_export: run_annotate_export(ctx); return false;
    case Stage::annotate_apply: run_annotate_apply(ctx); return false;
    case Stage::coherence: run_coherence(ctx); return false;
    case Stage::align: run_align(ctx); return false;
    case Stage::ca: run_ca(ctx); return false;
    case Stage::regress: run_regress(ctx); return false;
    case Stage::report: write_report(ctx); return false;
  }
  return false;
}

void write_warnings(const StageContext& ctx, std::string_view name) {
  std::string text;
  for (const auto& m : ctx.warnings.messages) text += m + '\n';
  artifacts::write_text(ctx.out.warnings(name), text);
}

}  // namespace

std::string group_name(Orientation o, int label, const ClusterModel& model) {
  if (label < 0) return "noise";
  if (const auto it = model.narrative_labels.find(label); it != model.narrative_labels.end())
    return std::string(narrative_name(it->second));
  return std::string(orientation_name(o)) + "_" + std::to_string(label);
}

std::string_view stage_name(Stage s) noexcept {
  for (const auto& [stage, name] : kStageNames)
    if (stage == s) return name;
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view s) noexcept {
  for (const auto& [stage, name] : kStageNames)
    if (name == s) return stage;
  return std::nullopt;
}

bool run_stage(Stage stage, const PipelineConfig& config) {
  StageContext ctx{config, artifacts::Layout(config.output_dir), {}};
  const std::string name(stage_name(stage));
  try {
    const bool reused = dispatch(stage, ctx);
    write_warnings(ctx, name);
    return reused;
  } catch (...) {
    try {
      write_warnings(ctx, name);
    } catch (...) {
    }
    try {
      throw;
    } catch (const ValidationError& e) {
      throw ValidationError(name + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(name + ": " + e.what());
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  }
}

json run_pipeline(const PipelineConfig& config) {
  const Stage clustering = config.cluster.mode == ClusterMode::search ? Stage::search : Stage::cluster;
  for (Stage s : {Stage::ingest, Stage::filter, Stage::topics, Stage::ci, Stage::moral, Stage::reduce, clustering,
                  Stage::annotate_export, Stage::annotate_apply, Stage::coherence, Stage::align, Stage::ca,
                  Stage::regress, Stage::report})
    run_stage(s, config);
  return json::parse(artifacts::read_text(artifacts::Layout(config.output_dir).report()));
}

std::map<int, std::size_t> export_annotation_bundle(const fs::path& dir, std::span<const std::string> ids,
                                                    const Matrix& layout, const ClusterModel& model,
                                                    const std::map<std::string, VideoDoc>& videos,
                                                    Orientation orientation, std::size_t k) {
  if (ids.size() != layout.rows() || ids.size() != model.labels.size())
    throw DomainError("export_annotation_bundle: ids, layout and labels differ in length");
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::map<int, std::size_t> sizes;
  const auto counts = model.cluster_sizes();
  for (int c = 0; c < model.n_clusters; ++c) {
    std::vector<std::string> member_ids;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (model.labels[i] == c) {
        member_ids.push_back(ids[i]);
        rows.push_back(i);
      }
    Matrix pts(rows.size(), layout.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      std::copy(layout.row(rows[i]).begin(), layout.row(rows[i]).end(), pts.row(i).begin());
    const auto central = top_k_central(pts, member_ids, k);

    auto out = csv::open_output(dir / ("cluster_" + std::to_string(c) + ".jsonl"));
    for (std::size_t r = 0; r < central.size(); ++r) {
      json j;
      j["rank"] = r + 1;
      j["cluster"] = c;
      j["orientation"] = std::string(orientation_name(orientation));
      j["id"] = central[r];
      if (const auto it = videos.find(central[r]); it != videos.end()) {
        const auto& v = it->second;
        j["challenge"] = std::string(challenge_name(v.challenge));
        j["published_at"] = v.published_at.text;
        j["title"] = v.title;
        j["transcript_source"] = std::string(transcript_source_name(v.transcript_source));
        j["transcript"] = v.transcript;
      }
      out << j.dump() << '\n';
    }
    sizes[c] = central.size();
  }

  auto tsv = csv::open_output(dir / "labels.tsv");
  tsv << "# Narrative labels for " << orientation_name(orientation) << " clusters.\n"
      << "# Add one line per cluster: <cluster id><TAB><narrative label>.\n"
      << "# Allowed labels:";
  for (int l = 0; l <= static_cast<int>(NarrativeLabel::other); ++l) {
    const auto label = static_cast<NarrativeLabel>(l);
    if (narrative_compatible(label, orientation)) tsv << ' ' << narrative_name(label);
  }
  tsv << '\n';
  for (int c = 0; c < model.n_clusters; ++c)
    tsv << "# cluster " << c << ": " << counts[static_cast<std::size_t>(c)] << " videos, bundle cluster_" << c
        << ".jsonl\n";
  return sizes;
}

}  // namespace moralmap
