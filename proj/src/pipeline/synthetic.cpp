#include "moralmap/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <vector>

#include <json.hpp>

#include "moralmap/corpus.hpp"
#include "moralmap/csv.hpp"
#include "moralmap/format.hpp"
#include "moralmap/moral.hpp"

namespace moralmap {

namespace fs = std::filesystem;

namespace {

// Challenge-topic and recipe-topic vocabularies share no word, so a
// two-topic model separates them.
constexpr std::array<std::string_view, 30> kTopicWords = {
    "animals", "planet",  "climate",   "month",    "plants",      "future",  "ethics",  "farming",
    "forests", "oceans",  "health",    "journey",  "lifestyle",   "kindness", "wildlife", "emissions",
    "habits",  "compassion", "earth",  "choices",  "welfare",     "footprint", "nature", "impact",
    "sustainable", "dairy", "january", "cows",     "pigs",        "chickens"};
constexpr std::array<std::string_view, 24> kRecipeWords = {
    "recipe", "oven",  "bake", "flour",   "minutes", "tablespoon", "sauce", "pan",
    "garlic", "onion", "tofu", "lentils", "chop",    "simmer",     "stir",  "salt",
    "pepper", "cups",  "dough", "skillet", "roast",  "blend",      "spices", "cumin"};
constexpr std::array<std::string_view, 12> kSpanishWords = {"hola", "amigos", "comida", "animales", "planeta",
                                                            "semana", "receta", "verduras", "salud", "mundo",
                                                            "cocina", "gracias"};
// Pronouns are drawn from forms that are also stopwords, so they steer the
// CI index without entering the topic vocabulary.
constexpr std::array<std::string_view, 3> kPlural = {"we", "our", "ourselves"};
constexpr std::array<std::string_view, 4> kSingular = {"i", "me", "my", "myself"};
// Comment vocabulary with no collective-action dictionary match.
constexpr std::array<std::string_view, 36> kChatWords = {
    "great",   "video",    "thanks",  "love",    "this",    "looks",   "tasty",   "nice",    "interesting",
    "helpful", "watch",    "amazing", "content", "really",  "enjoyed", "funny",   "editing", "music",
    "cute",    "dog",      "kitchen", "weekend", "morning", "coffee",  "friends", "family",  "tried",
    "lovely",  "voice",    "beautiful", "colours", "camera", "cool",   "sweet",   "yummy",   "wow"};
constexpr std::array<std::string_view, 10> kActionPhrases = {
    "join the movement",      "sign the petition",   "we stand together", "support local farmers",
    "spread the word",        "vote for change",     "unite for animals", "pledge with us",
    "organize a local event", "volunteer at the shelter"};

// Portable draws: only the raw 64-bit engine output is used, so results do
// not depend on the standard library's distribution implementations.
struct Rng {
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  std::mt19937_64 gen;

  double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n))); }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  template <std::size_t N>
  std::string_view pick(const std::array<std::string_view, N>& words) {
    return words[below(N)];
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }
};

enum class Kind { oriented, mixed, recipe, foreign, short_text, baseline };

struct Planted {
  std::string id;
  Kind kind = Kind::oriented;
  Challenge challenge = Challenge::veganuary;
  Orientation orientation = Orientation::unclassified;
  int cluster = -1;
  int profile = -1;
};

// Cluster profiles: orientation, planted cluster and the moral dimension the
// cluster scores high on.
struct Profile {
  Orientation o;
  int cluster;
  Dimension high;
};
constexpr std::array<Profile, 4> kProfiles = {{{Orientation::communal, 0, Dimension::loyalty},
                                               {Orientation::communal, 1, Dimension::care},
                                               {Orientation::agency, 0, Dimension::sanctity},
                                               {Orientation::agency, 1, Dimension::fairness}}};

std::string id_of(char prefix, std::size_t i, std::size_t width) {
  const std::string digits = std::to_string(i);
  return std::string(1, prefix) + std::string(width - std::min(width, digits.size()), '0') + digits;
}

template <std::size_t N>
std::string transcript(Rng& rng, std::size_t n, double plural, double singular,
                       const std::array<std::string_view, N>& vocabulary) {
  const auto n_plural = static_cast<std::size_t>(std::lround(plural * static_cast<double>(n)));
  const auto n_singular = static_cast<std::size_t>(std::lround(singular * static_cast<double>(n)));
  std::vector<std::string_view> words;
  for (std::size_t i = 0; i < n_plural; ++i) words.push_back(rng.pick(kPlural));
  for (std::size_t i = 0; i < n_singular; ++i) words.push_back(rng.pick(kSingular));
  while (words.size() < n) words.push_back(rng.pick(vocabulary));
  rng.shuffle(words);
  std::string s;
  for (auto w : words) s += (s.empty() ? "" : " ") + std::string(w);
  return s;
}

std::string timestamp(Challenge c, std::size_t day, std::size_t minute) {
  static constexpr const char* months[] = {"2021-01", "2022-03", "2023-05", "2022-06"};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s-%02zuT%02zu:%02zu:00Z", months[static_cast<int>(c)], 1 + day % 28,
                (minute / 60) % 24, minute % 60);
  return buf;
}

std::string comment_text(Rng& rng, bool marker) {
  std::string s;
  const std::size_t n = 7 + rng.below(5);
  for (std::size_t i = 0; i < n; ++i) s += (s.empty() ? "" : " ") + std::string(rng.pick(kChatWords));
  if (marker) s += " " + std::string(rng.pick(kActionPhrases));
  return s;
}

void write_vector(std::ostream& out, const std::string& id, const std::vector<double>& v) {
  out << id;
  for (double x : v) out << ',' << format_double(x);
  out << '\n';
}

}  // namespace

SyntheticTruth write_synthetic_fixture(const fs::path& dir, std::uint64_t seed) {
  Rng rng(seed);
  constexpr std::size_t kPerCluster = 50;
  constexpr std::size_t kDim = 16;
  constexpr std::array<Challenge, 3> challenges = {Challenge::veganuary, Challenge::meatless_march,
                                                   Challenge::no_meat_may};

  std::vector<Planted> videos;
  auto add = [&](Kind kind, int profile) {
    Planted p;
    p.kind = kind;
    p.profile = profile;
    if (profile >= 0) {
      p.orientation = kProfiles[static_cast<std::size_t>(profile)].o;
      p.cluster = kProfiles[static_cast<std::size_t>(profile)].cluster;
    }
    videos.push_back(p);
  };
  for (int pr = 0; pr < static_cast<int>(kProfiles.size()); ++pr)
    for (std::size_t i = 0; i < kPerCluster; ++i) add(Kind::oriented, pr);
  for (std::size_t i = 0; i < 30; ++i) add(Kind::mixed, -1);
  for (std::size_t i = 0; i < 30; ++i) add(Kind::recipe, -1);
  for (std::size_t i = 0; i < 20; ++i) add(Kind::foreign, -1);
  for (std::size_t i = 0; i < 20; ++i) add(Kind::short_text, -1);
  // Ids are assigned after shuffling so that id order carries no structure.
  rng.shuffle(videos);
  for (std::size_t i = 0; i < videos.size(); ++i) {
    videos[i].id = id_of('v', i + 1, 4);
    videos[i].challenge = challenges[rng.below(challenges.size())];
  }
  for (std::size_t i = 0; i < 60; ++i) {
    Planted p;
    p.id = id_of('b', i + 1, 3);
    p.kind = Kind::baseline;
    p.challenge = Challenge::baseline;
    videos.push_back(p);
  }

  Corpus corpus;
  SyntheticTruth truth;
  truth.ca_enriched_cluster = 0;
  auto scores = csv::open_output(dir / "moral_scores.csv");
  scores << "id,care,fairness,loyalty,authority,sanctity\n";
  auto emb = csv::open_output(dir / "embeddings.csv");
  emb << "id";
  for (std::size_t d = 0; d < kDim; ++d) emb << ",e" << d;
  emb << '\n';

  std::size_t comment_no = 0;
  for (std::size_t vi = 0; vi < videos.size(); ++vi) {
    const auto& p = videos[vi];
    VideoDoc v;
    v.id = p.id;
    v.challenge = p.challenge;
    v.published_at = *parse_rfc3339(timestamp(p.challenge, vi, vi * 37));
    v.title = "day " + std::to_string(vi % 31 + 1) + " of my challenge";
    v.lang = "en";
    v.transcript_source = vi % 3 == 0 ? TranscriptSource::asr : TranscriptSource::captions;
    const std::size_t len = 250 + rng.below(100);
    switch (p.kind) {
      case Kind::oriented:
        v.transcript = p.orientation == Orientation::communal ? transcript(rng, len, 0.35, 0.0, kTopicWords)
                                                              : transcript(rng, len, 0.0, 0.35, kTopicWords);
        break;
      case Kind::mixed: v.transcript = transcript(rng, len, 0.15, 0.15, kTopicWords); break;
      case Kind::recipe: v.transcript = transcript(rng, len, 0.35, 0.0, kRecipeWords); break;
      case Kind::foreign:
        v.transcript = transcript(rng, len, 0.0, 0.0, kSpanishWords);
        v.lang = "es";
        break;
      case Kind::short_text: v.transcript = "[Music] wow nice [Music]"; break;
      case Kind::baseline: v.transcript = transcript(rng, len, 0.1, 0.1, kTopicWords); break;
    }
    if (vi % 7 == 0) v.transcript = "[Music] " + v.transcript;
    corpus.videos.push_back(v);

    // Moral scores: clustered videos sit near their profile, everything
    // else near a flat 0.3.
    MoralVector m{};
    double loyalty = 0.0;
    for (std::size_t d = 0; d < m.size(); ++d) {
      double centre = 0.3, sd = 0.06;
      if (p.profile >= 0) centre = static_cast<std::size_t>(kProfiles[static_cast<std::size_t>(p.profile)].high) == d ? 0.75 : 0.2;
      if (p.kind == Kind::baseline) sd = 0.05;
      m[d] = std::clamp(centre + sd * rng.normal(), 0.0, 1.0);
    }
    loyalty = m[static_cast<std::size_t>(Dimension::loyalty)];
    scores << p.id;
    for (double x : m) scores << ',' << format_double(x);
    scores << '\n';

    std::vector<double> vvec(kDim);
    for (std::size_t d = 0; d < kDim; ++d) vvec[d] = rng.normal();
    if (p.profile >= 0) vvec[static_cast<std::size_t>(p.profile) * 3] += 4.0;
    write_vector(emb, p.id, vvec);

    // Comment counts and collective-action markers. The marker share rises
    // with the loyalty score inside and across clusters.
    std::size_t n_comments = 3;
    if (p.kind == Kind::oriented) n_comments = 8 + rng.below(9);
    else if (p.kind == Kind::mixed) n_comments = 6;
    const double marker_share = p.kind == Kind::oriented ? std::clamp(0.02 + 0.8 * (loyalty - 0.15), 0.0, 1.0) : 0.1;
    const auto n_markers = static_cast<std::size_t>(std::lround(marker_share * static_cast<double>(n_comments)));
    std::vector<bool> marked(n_comments, false);
    for (std::size_t c = 0; c < n_markers; ++c) marked[c] = true;
    rng.shuffle(marked);
    for (std::size_t c = 0; c < n_comments; ++c) {
      Comment cm;
      cm.id = id_of('c', ++comment_no, 5);
      cm.video_id = p.id;
      cm.published_at = *parse_rfc3339(timestamp(p.challenge, vi + 1 + c, (vi * 37 + c * 11) % 1440));
      cm.text = comment_text(rng, marked[c]);
      if (c % 5 == 4) cm.text = "@friend " + cm.text + " https://example.org/x";
      corpus.comments.push_back(cm);
      std::vector<double> cvec(kDim);
      for (std::size_t d = 0; d < kDim; ++d) cvec[d] = vvec[d] + 1.5 * rng.normal();
      write_vector(emb, cm.id, cvec);
    }

    if (p.kind == Kind::oriented || p.kind == Kind::mixed) truth.orientation[p.id] = p.orientation;
    if (p.kind == Kind::oriented) truth.cluster[p.id] = p.cluster;
  }
  write_corpus(dir / "corpus.jsonl", corpus);

  {
    auto out = csv::open_output(dir / "truth" / "orientation.csv");
    out << "id,orientation\n";
    for (const auto& [id, o] : truth.orientation) out << id << ',' << orientation_name(o) << '\n';
  }
  {
    auto out = csv::open_output(dir / "truth" / "clusters.csv");
    out << "id,orientation,cluster,ca_enriched\n";
    for (const auto& [id, c] : truth.cluster) {
      const auto o = truth.orientation.at(id);
      out << id << ',' << orientation_name(o) << ',' << c << ','
          << (o == Orientation::communal && c == truth.ca_enriched_cluster ? 1 : 0) << '\n';
    }
  }

  nlohmann::ordered_json config = {
      {"inputs", {{"corpus", "corpus.jsonl"}, {"embeddings", "embeddings.csv"}, {"moral_scores", "moral_scores.csv"}}},
      {"output_dir", "out"},
      {"seed", 0},
      {"cluster",
       {{"mode", "search"},
        {"trials", 40},
        {"space", {{"min_samples", {5, 15}}, {"min_cluster_size", {25, 45}}, {"metrics", {"euclidean", "manhattan"}}}}}},
  };
  auto out = csv::open_output(dir / "config.json");
  out << config.dump(2) << '\n';
  return truth;
}

}  // namespace moralmap
