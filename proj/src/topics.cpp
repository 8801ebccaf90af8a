#include "gridcast/topics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include <json.hpp>

namespace gridcast {

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  ids_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i)
    ids_.emplace(words_[i], static_cast<int>(i));
  if (ids_.size() != words_.size()) throw DataError("vocabulary has duplicate words");
}

std::vector<std::string> tokenize_text(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<int> tokenize(const Vocabulary& vocab, std::string_view text) {
  std::vector<int> ids;
  for (const auto& tok : tokenize_text(text))
    if (auto id = vocab.id_of(tok)) ids.push_back(*id);
  return ids;
}

Vocabulary build_vocabulary(std::span<const std::string> corpus, int min_count) {
  if (corpus.empty()) throw DataError("empty corpus");
  std::map<std::string, std::int64_t> counts;
  for (const auto& doc : corpus)
    for (auto& tok : tokenize_text(doc)) ++counts[tok];

  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (auto& [word, count] : counts)
    if (count >= min_count) kept.emplace_back(word, count);
  if (kept.empty()) throw DataError("vocabulary empty after min_count filter");

  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [word, count] : kept) words.push_back(std::move(word));
  return Vocabulary(std::move(words));
}

LdaModel fit_lda(const std::vector<std::vector<int>>& docs,
                 const Vocabulary& vocab, const LdaFitConfig& cfg,
                 LdaFitDiag* diag) {
  if (docs.empty()) throw DataError("fit_lda: empty corpus");
  if (cfg.K < 2) throw DataError("fit_lda: K must be >= 2");
  const int K = cfg.K;
  const int V = vocab.size();
  const double alpha = cfg.alpha > 0.0 ? cfg.alpha : 50.0 / K;
  const double beta = cfg.beta;
  const double v_beta = V * beta;

  const std::size_t D = docs.size();
  std::vector<std::int64_t> n_tw(static_cast<std::size_t>(K) * V, 0);  // [t][w]
  std::vector<std::int64_t> n_t(static_cast<std::size_t>(K), 0);
  std::vector<std::vector<std::int64_t>> n_dt(D, std::vector<std::int64_t>(K, 0));
  std::vector<std::vector<int>> z(D);

  Rng rng(cfg.seed);

  for (std::size_t d = 0; d < D; ++d) {
    z[d].resize(docs[d].size());
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      const int w = docs[d][i];
      const int t = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(K)));
      z[d][i] = t;
      ++n_tw[static_cast<std::size_t>(t) * V + w];
      ++n_t[t];
      ++n_dt[d][t];
    }
  }

  std::vector<double> cumulative(static_cast<std::size_t>(K));
  for (int sweep = 0; sweep < cfg.iterations; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      auto& doc_topics = n_dt[d];
      for (std::size_t i = 0; i < docs[d].size(); ++i) {
        const int w = docs[d][i];
        const int old_t = z[d][i];
        --n_tw[static_cast<std::size_t>(old_t) * V + w];
        --n_t[old_t];
        --doc_topics[old_t];

        double total = 0.0;
        for (int t = 0; t < K; ++t) {
          const double p = (n_tw[static_cast<std::size_t>(t) * V + w] + beta) /
                           (n_t[t] + v_beta) * (doc_topics[t] + alpha);
          total += p;
          cumulative[t] = total;
        }
        const double u = rng.uniform() * total;
        int new_t = 0;
        while (new_t < K - 1 && u >= cumulative[new_t]) ++new_t;

        z[d][i] = new_t;
        ++n_tw[static_cast<std::size_t>(new_t) * V + w];
        ++n_t[new_t];
        ++doc_topics[new_t];
      }
    }
    if (diag) {
      std::int64_t total = 0;
      for (int t = 0; t < K; ++t) total += n_t[t];
      diag->sweep_totals.push_back(total);
    }
  }
  if (diag) {
    diag->final_topic_totals.assign(n_t.begin(), n_t.end());
    diag->final_row_sums.assign(static_cast<std::size_t>(K), 0);
    for (int t = 0; t < K; ++t)
      for (int w = 0; w < V; ++w)
        diag->final_row_sums[t] += n_tw[static_cast<std::size_t>(t) * V + w];
  }

  LdaModel model;
  model.K = K;
  model.alpha = alpha;
  model.beta = beta;
  model.vocab = vocab;
  model.phi.resize(static_cast<std::size_t>(K) * V);
  for (int t = 0; t < K; ++t) {
    const double denom = n_t[t] + v_beta;
    for (int w = 0; w < V; ++w)
      model.phi[static_cast<std::size_t>(t) * V + w] =
          (n_tw[static_cast<std::size_t>(t) * V + w] + beta) / denom;
  }
  return model;
}

ActivityRelevance infer_relevance(const LdaModel& model, std::string_view text,
                                  const InferConfig& cfg) {
  const int K = model.K;
  ActivityRelevance rel;
  rel.theta.assign(static_cast<std::size_t>(K), 1.0 / K);

  const std::vector<int> tokens = tokenize(model.vocab, text);
  if (tokens.empty()) {
    rel.oov_fallback = true;
    return rel;
  }

  Rng rng(fnv1a64(text));
  const std::size_t N = tokens.size();
  std::vector<int> z(N);
  std::vector<std::int64_t> n_t(static_cast<std::size_t>(K), 0);
  const int V = model.vocab.size();

  for (std::size_t i = 0; i < N; ++i) {
    const int t = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(K)));
    z[i] = t;
    ++n_t[t];
  }

  std::vector<double> cumulative(static_cast<std::size_t>(K));
  std::vector<double> theta_sum(static_cast<std::size_t>(K), 0.0);
  const int avg_from = std::max(0, cfg.sweeps - cfg.average_last);
  int averaged = 0;

  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    for (std::size_t i = 0; i < N; ++i) {
      const int w = tokens[i];
      --n_t[z[i]];
      double total = 0.0;
      const double* phi_col = model.phi.data() + w;
      for (int t = 0; t < K; ++t) {
        total += phi_col[static_cast<std::size_t>(t) * V] * (n_t[t] + model.alpha);
        cumulative[t] = total;
      }
      const double u = rng.uniform() * total;
      int new_t = 0;
      while (new_t < K - 1 && u >= cumulative[new_t]) ++new_t;
      z[i] = new_t;
      ++n_t[new_t];
    }
    if (sweep >= avg_from) {
      // Empirical assignment proportions; the prior only shapes the sampling.
      const double inv_n = 1.0 / static_cast<double>(N);
      for (int t = 0; t < K; ++t) theta_sum[t] += n_t[t] * inv_n;
      ++averaged;
    }
  }

  double total = 0.0;
  for (int t = 0; t < K; ++t) {
    rel.theta[t] = theta_sum[t] / averaged;
    total += rel.theta[t];
  }
  for (auto& v : rel.theta) v /= total;
  return rel;
}

void save_lda(const std::filesystem::path& dir, const LdaModel& model) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["K"] = model.K;
  manifest["alpha"] = model.alpha;
  manifest["beta"] = model.beta;
  manifest["V"] = model.vocab.size();
  manifest["vocabulary"] = model.vocab.words();
  write_text_file(dir / "manifest.json", manifest.dump(1));
  write_f64_file(dir / "phi.f64", model.phi);
}

LdaModel load_lda(const std::filesystem::path& dir) {
  const auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  LdaModel model;
  model.K = manifest.at("K").get<int>();
  model.alpha = manifest.at("alpha").get<double>();
  model.beta = manifest.at("beta").get<double>();
  model.vocab = Vocabulary(manifest.at("vocabulary").get<std::vector<std::string>>());
  if (model.vocab.size() != manifest.at("V").get<int>())
    throw DataError("lda manifest V mismatch");
  model.phi = read_f64_file(dir / "phi.f64");
  if (model.phi.size() !=
      static_cast<std::size_t>(model.K) * model.vocab.size())
    throw DataError("lda phi size mismatch");
  return model;
}

}  // namespace gridcast
