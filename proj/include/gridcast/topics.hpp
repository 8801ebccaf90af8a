#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast {

// Dense word <-> id bijection, ids in [0, V).
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  int size() const { return static_cast<int>(words_.size()); }
  const std::string& word(int id) const { return words_[static_cast<std::size_t>(id)]; }
  const std::vector<std::string>& words() const { return words_; }

  std::optional<int> id_of(std::string_view word) const {
    auto it = ids_.find(std::string(word));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
};

// Lowercase + whitespace split.
std::vector<std::string> tokenize_text(std::string_view text);

// Token ids of a document against a vocabulary; out-of-vocabulary dropped.
std::vector<int> tokenize(const Vocabulary& vocab, std::string_view text);

// Words with corpus frequency < min_count are excluded. Ids are assigned by
// descending count, ties broken lexicographically, so the mapping is
// deterministic. Throws DataError if nothing survives the filter.
Vocabulary build_vocabulary(std::span<const std::string> corpus, int min_count);

struct LdaModel {
  int K = 0;
  double alpha = 0.0;  // symmetric document-topic prior
  double beta = 0.0;   // symmetric topic-word prior
  Vocabulary vocab;
  std::vector<double> phi;  // K x V row-major, rows sum to 1

  double phi_at(int t, int w) const {
    return phi[static_cast<std::size_t>(t) * vocab.size() + w];
  }
};

struct LdaFitConfig {
  int K = 16;
  double alpha = 0.0;  // 0 means default 50/K
  double beta = 0.01;
  int iterations = 200;
  std::uint64_t seed = 1;
};

// Bookkeeping totals observable from outside the sampler.
struct LdaFitDiag {
  std::vector<std::int64_t> sweep_totals;        // sum of n_t after each sweep
  std::vector<std::int64_t> final_topic_totals;  // n_t
  std::vector<std::int64_t> final_row_sums;      // per-topic sum over words of n_tw
};

// Collapsed Gibbs sampling over token-topic assignments. phi is read out from
// the final counts as (n_tw + beta) / (n_t + V*beta).
LdaModel fit_lda(const std::vector<std::vector<int>>& docs,
                 const Vocabulary& vocab, const LdaFitConfig& cfg,
                 LdaFitDiag* diag = nullptr);

// Posterior topic proportion of one document under a frozen model (r_a).
struct ActivityRelevance {
  std::vector<double> theta;
  bool oov_fallback = false;  // no in-vocabulary tokens, theta is the prior mean
};

struct InferConfig {
  int sweeps = 30;
  int average_last = 10;
};

// Fold-in Gibbs with phi frozen; theta is averaged over the last
// `average_last` sweeps. The sampling seed derives from the document content
// hash, so inference is a pure function of (model, text).
ActivityRelevance infer_relevance(const LdaModel& model, std::string_view text,
                                  const InferConfig& cfg = {});

// Checkpoint: directory with manifest.json + phi.f64 (row-major LE doubles).
void save_lda(const std::filesystem::path& dir, const LdaModel& model);
LdaModel load_lda(const std::filesystem::path& dir);

}  // namespace gridcast
