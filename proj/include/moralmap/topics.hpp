#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "moralmap/matrix.hpp"

namespace moralmap {

/// Documents as vocabulary indices, ready for the sampler.
struct TopicCorpus {
  std::vector<std::string> doc_ids;
  std::vector<std::string> vocabulary;  // sorted
  std::vector<std::vector<std::size_t>> docs;

  std::size_t token_count() const noexcept;
};

/// Tokenizes texts, drops stopwords and words appearing in fewer than
/// `min_df` documents. Documents may end up empty.
TopicCorpus build_topic_corpus(const std::vector<std::string>& doc_ids,
                               const std::vector<std::string>& texts, std::size_t min_df = 2);

struct LdaConfig {
  std::size_t n_topics = 2;
  std::size_t iterations = 1000;
  std::size_t burn_in = 100;
  std::optional<double> alpha;  // defaults to 50 / n_topics
  double beta = 0.01;
  std::uint64_t seed = 0;

  double effective_alpha() const noexcept {
    return alpha.value_or(50.0 / static_cast<double>(n_topics));
  }
};

struct LdaModel {
  std::size_t n_topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> vocabulary;
  std::vector<std::string> doc_ids;
  Matrix topic_word;  // n_topics x V, rows sum to 1
  Matrix doc_topic;   // n_docs x n_topics, rows sum to 1
  std::vector<std::vector<std::size_t>> assignments;  // final topic per token
};

/// Called after every sweep with the per-topic token totals.
using SweepObserver = std::function<void(std::size_t sweep, const std::vector<std::size_t>& topic_totals)>;

/// Collapsed Gibbs sampling; the model is the single sample after the last
/// sweep. Deterministic for a given seed. Throws ValidationError for an empty
/// corpus, an empty vocabulary or fewer documents than topics.
LdaModel lda_fit(const TopicCorpus& corpus, const LdaConfig& config,
                 const SweepObserver& observer = nullptr);

/// k most probable words of `topic`; ties by word.
std::vector<std::string> top_words(const LdaModel& model, std::size_t topic, std::size_t k = 10);

/// k documents with the highest share of `topic`; ties by id.
std::vector<std::string> top_docs(const LdaModel& model, std::size_t topic, std::size_t k = 5);

/// Documents whose most probable topic is keep_topic; a document tied
/// between keep_topic and another topic is kept.
std::vector<std::string> filter_by_topic(const LdaModel& model, std::size_t keep_topic);

/// Topic owning the highest probability for `word`, if the word is known.
std::optional<std::size_t> topic_for_anchor(const LdaModel& model, const std::string& word);

/// topic,rank,word,probability
void write_topic_words(std::ostream& out, const LdaModel& model, std::size_t k = 10);
/// topic,rank,doc_id,share
void write_topic_docs(std::ostream& out, const LdaModel& model, std::size_t k = 5);
/// doc_id,argmax,p0,...,p{K-1}
void write_doc_topics(std::ostream& out, const LdaModel& model);

}  // namespace moralmap
