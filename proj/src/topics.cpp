#include "moralmap/topics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>

#include "moralmap/error.hpp"
#include "moralmap/format.hpp"
#include "moralmap/text.hpp"

namespace moralmap {
namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void check_topic(const LdaModel& m, std::size_t topic) {
  if (topic >= m.n_topics)
    throw ValidationError("topic " + std::to_string(topic) + " out of range (model has " +
                          std::to_string(m.n_topics) + ")");
}

std::size_t argmax_topic(const LdaModel& m, std::size_t d, std::size_t prefer) {
  std::size_t best = prefer;
  for (std::size_t t = 0; t < m.n_topics; ++t)
    if (m.doc_topic(d, t) > m.doc_topic(d, best)) best = t;
  return best;
}

}  // namespace

std::size_t TopicCorpus::token_count() const noexcept {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.size();
  return n;
}

TopicCorpus build_topic_corpus(const std::vector<std::string>& doc_ids,
                               const std::vector<std::string>& texts, std::size_t min_df) {
  if (doc_ids.size() != texts.size()) throw std::invalid_argument("doc id / text count mismatch");
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(texts.size());
  std::map<std::string, std::size_t> df;
  for (const auto& t : texts) {
    auto words = text::word_tokens(t);
    std::erase_if(words, [](const std::string& w) { return text::is_stopword(w); });
    for (const auto& w : std::set<std::string>(words.begin(), words.end())) ++df[w];
    tokens.push_back(std::move(words));
  }
  TopicCorpus c;
  c.doc_ids = doc_ids;
  std::map<std::string, std::size_t> index;
  for (const auto& [w, n] : df) {
    if (n < min_df) continue;
    index.emplace(w, c.vocabulary.size());
    c.vocabulary.push_back(w);
  }
  for (const auto& words : tokens) {
    std::vector<std::size_t> doc;
    for (const auto& w : words)
      if (const auto it = index.find(w); it != index.end()) doc.push_back(it->second);
    c.docs.push_back(std::move(doc));
  }
  return c;
}

LdaModel lda_fit(const TopicCorpus& corpus, const LdaConfig& cfg, const SweepObserver& observer) {
  const std::size_t K = cfg.n_topics;
  const std::size_t V = corpus.vocabulary.size();
  const std::size_t D = corpus.docs.size();
  if (K < 1) throw ValidationError("n_topics must be >= 1");
  if (D == 0) throw ValidationError("LDA corpus is empty");
  if (V == 0 || corpus.token_count() == 0) throw ValidationError("LDA vocabulary is empty");
  if (D < K) throw ValidationError("LDA needs at least as many documents as topics");
  if (cfg.iterations == 0) throw ValidationError("LDA needs at least one iteration");
  const double alpha = cfg.effective_alpha();
  const double beta = cfg.beta;
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ValidationError("alpha and beta must be positive");

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> nwk(V * K, 0), ndk(D * K, 0), nk(K, 0);
  std::vector<std::vector<std::size_t>> z(D);
  for (std::size_t d = 0; d < D; ++d) {
    z[d].resize(corpus.docs[d].size());
    for (std::size_t i = 0; i < corpus.docs[d].size(); ++i) {
      const std::size_t t = static_cast<std::size_t>(rng() % K);
      z[d][i] = t;
      ++nwk[corpus.docs[d][i] * K + t];
      ++ndk[d * K + t];
      ++nk[t];
    }
  }

  std::vector<double> p(K);
  const double vbeta = static_cast<double>(V) * beta;
  // Burn-in sweeps are part of the chain; the retained sample is the state
  // after the final sweep, so the total is max(iterations, burn_in + 1).
  const std::size_t sweeps = std::max(cfg.iterations, cfg.burn_in + 1);
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      const auto& doc = corpus.docs[d];
      for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::size_t w = doc[i];
        const std::size_t old = z[d][i];
        --nwk[w * K + old];
        --ndk[d * K + old];
        --nk[old];
        double total = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
          total += (static_cast<double>(nwk[w * K + t]) + beta) / (static_cast<double>(nk[t]) + vbeta) *
                   (static_cast<double>(ndk[d * K + t]) + alpha);
          p[t] = total;
        }
        const double u = uniform01(rng) * total;
        std::size_t t = 0;
        while (t + 1 < K && p[t] <= u) ++t;
        z[d][i] = t;
        ++nwk[w * K + t];
        ++ndk[d * K + t];
        ++nk[t];
      }
    }
    if (observer) observer(sweep, nk);
  }

  LdaModel m;
  m.n_topics = K;
  m.alpha = alpha;
  m.beta = beta;
  m.iterations = sweeps;
  m.seed = cfg.seed;
  m.vocabulary = corpus.vocabulary;
  m.doc_ids = corpus.doc_ids;
  m.assignments = std::move(z);
  m.topic_word = Matrix(K, V);
  for (std::size_t t = 0; t < K; ++t) {
    const double denom = static_cast<double>(nk[t]) + vbeta;
    for (std::size_t w = 0; w < V; ++w) m.topic_word(t, w) = (static_cast<double>(nwk[w * K + t]) + beta) / denom;
  }
  m.doc_topic = Matrix(D, K);
  for (std::size_t d = 0; d < D; ++d) {
    const double denom = static_cast<double>(corpus.docs[d].size()) + static_cast<double>(K) * alpha;
    for (std::size_t t = 0; t < K; ++t) m.doc_topic(d, t) = (static_cast<double>(ndk[d * K + t]) + alpha) / denom;
  }
  return m;
}

std::vector<std::string> top_words(const LdaModel& m, std::size_t topic, std::size_t k) {
  check_topic(m, topic);
  std::vector<std::size_t> order(m.vocabulary.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return m.topic_word(topic, a) > m.topic_word(topic, b);
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) out.push_back(m.vocabulary[order[i]]);
  return out;
}

std::vector<std::string> top_docs(const LdaModel& m, std::size_t topic, std::size_t k) {
  check_topic(m, topic);
  std::vector<std::size_t> order(m.doc_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (m.doc_topic(a, topic) != m.doc_topic(b, topic)) return m.doc_topic(a, topic) > m.doc_topic(b, topic);
    return m.doc_ids[a] < m.doc_ids[b];
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) out.push_back(m.doc_ids[order[i]]);
  return out;
}

std::vector<std::string> filter_by_topic(const LdaModel& m, std::size_t keep_topic) {
  check_topic(m, keep_topic);
  std::vector<std::string> out;
  for (std::size_t d = 0; d < m.doc_ids.size(); ++d)
    if (argmax_topic(m, d, keep_topic) == keep_topic) out.push_back(m.doc_ids[d]);
  return out;
}

std::optional<std::size_t> topic_for_anchor(const LdaModel& m, const std::string& word) {
  const auto it = std::lower_bound(m.vocabulary.begin(), m.vocabulary.end(), word);
  if (it == m.vocabulary.end() || *it != word) return std::nullopt;
  const auto w = static_cast<std::size_t>(it - m.vocabulary.begin());
  std::size_t best = 0;
  for (std::size_t t = 1; t < m.n_topics; ++t)
    if (m.topic_word(t, w) > m.topic_word(best, w)) best = t;
  return best;
}

void write_topic_words(std::ostream& out, const LdaModel& m, std::size_t k) {
  out << "topic,rank,word,probability\n";
  for (std::size_t t = 0; t < m.n_topics; ++t) {
    const auto words = top_words(m, t, k);
    for (std::size_t r = 0; r < words.size(); ++r) {
      const auto w = static_cast<std::size_t>(
          std::lower_bound(m.vocabulary.begin(), m.vocabulary.end(), words[r]) - m.vocabulary.begin());
      out << t << ',' << r + 1 << ',' << words[r] << ',' << format_double(m.topic_word(t, w)) << '\n';
    }
  }
}

void write_topic_docs(std::ostream& out, const LdaModel& m, std::size_t k) {
  out << "topic,rank,doc_id,share\n";
  std::map<std::string, std::size_t> row;
  for (std::size_t d = 0; d < m.doc_ids.size(); ++d) row.emplace(m.doc_ids[d], d);
  for (std::size_t t = 0; t < m.n_topics; ++t) {
    const auto docs = top_docs(m, t, k);
    for (std::size_t r = 0; r < docs.size(); ++r)
      out << t << ',' << r + 1 << ',' << docs[r] << ',' << format_double(m.doc_topic(row[docs[r]], t)) << '\n';
  }
}

void write_doc_topics(std::ostream& out, const LdaModel& m) {
  out << "doc_id,argmax";
  for (std::size_t t = 0; t < m.n_topics; ++t) out << ",p" << t;
  out << '\n';
  for (std::size_t d = 0; d < m.doc_ids.size(); ++d) {
    out << m.doc_ids[d] << ',' << argmax_topic(m, d, 0);
    for (std::size_t t = 0; t < m.n_topics; ++t) out << ',' << format_double(m.doc_topic(d, t));
    out << '\n';
  }
}

}  // namespace moralmap
