#include "gridcast/loglab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <json.hpp>

namespace gridcast {

namespace {

std::string_view strip_eol(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
    line.remove_suffix(1);
  return line;
}

bool all_whitespace(std::string_view s) {
  return s.find_first_not_of(" \t\v\f\r\n") == std::string_view::npos;
}

}  // namespace

std::optional<LogEntry> parse_log_line(std::string_view line,
                                       ParseReject* reason) {
  line = strip_eol(line);
  const auto tab1 = line.find('\t');
  const auto tab2 = tab1 == std::string_view::npos
                        ? std::string_view::npos
                        : line.find('\t', tab1 + 1);
  if (tab1 == std::string_view::npos || tab2 == std::string_view::npos ||
      line.find('\t', tab2 + 1) != std::string_view::npos) {
    if (reason) *reason = ParseReject::FieldCount;
    return std::nullopt;
  }
  const std::string_view entity = line.substr(0, tab1);
  const std::string_view ts_field = line.substr(tab1 + 1, tab2 - tab1 - 1);
  const std::string_view text = line.substr(tab2 + 1);

  if (entity.empty()) {
    if (reason) *reason = ParseReject::EmptyEntity;
    return std::nullopt;
  }
  std::int64_t ts = 0;
  const auto [ptr, ec] =
      std::from_chars(ts_field.data(), ts_field.data() + ts_field.size(), ts);
  if (ec != std::errc{} || ptr != ts_field.data() + ts_field.size()) {
    if (reason) *reason = ParseReject::BadTimestamp;
    return std::nullopt;
  }
  if (all_whitespace(text)) {
    if (reason) *reason = ParseReject::EmptyText;
    return std::nullopt;
  }
  return LogEntry{std::string(entity), ts, std::string(text)};
}

std::vector<LogEntry> parse_log_stream(std::string_view content,
                                       ParseStats& stats) {
  std::vector<LogEntry> out;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    const std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (strip_eol(line).empty()) continue;  // blank lines are not records
    ParseReject reason;
    if (auto entry = parse_log_line(line, &reason)) {
      out.push_back(std::move(*entry));
      ++stats.accepted;
    } else {
      switch (reason) {
        case ParseReject::FieldCount: ++stats.rejected_field_count; break;
        case ParseReject::BadTimestamp: ++stats.rejected_bad_timestamp; break;
        case ParseReject::EmptyEntity: ++stats.rejected_empty_entity; break;
        case ParseReject::EmptyText: ++stats.rejected_empty_text; break;
      }
    }
  }
  return out;
}

BucketResult bucket_entries(std::span<const LogEntry> entries,
                            const PeriodSpec& spec) {
  if (!spec.valid()) throw DataError("invalid period spec");
  BucketResult result;
  result.input_count = entries.size();
  std::map<EntityPeriod, std::set<std::string>> docs;
  std::map<EntityPeriod, std::uint64_t> raw;
  for (const auto& e : entries) {
    const auto period = spec.period_of(e.timestamp);
    if (!period) {
      ++result.dropped_out_of_range;
      continue;
    }
    EntityPeriod key{e.entity_id, *period};
    docs[key].insert(e.resource_text);
    ++raw[key];
  }
  for (auto& [key, set] : docs) {
    EntityPeriodBundle bundle;
    bundle.entity_id = key.entity_id;
    bundle.period_index = key.period_index;
    bundle.documents.assign(set.begin(), set.end());
    bundle.raw_count = raw[key];
    result.bundles.emplace(key, std::move(bundle));
  }
  return result;
}

namespace {

struct Burst {
  double cx, cy;       // latent-space center
  int start_period;
  int duration;
  double amplitude;
};

std::string topic_word(int topic, int j) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "t%03dw%03d", topic, j);
  return buf;
}

}  // namespace

SynthResult generate_synthetic_logs(const SynthConfig& cfg) {
  if (!cfg.valid()) throw DataError("invalid synth config");
  const int K = cfg.topic_count;
  const int E = cfg.entity_count;
  const int P = cfg.period_count;

  Rng rng(cfg.seed);
  Rng layout_rng = rng.fork(1);
  Rng entity_rng = rng.fork(2);
  Rng text_rng = rng.fork(3);

  SynthResult result;
  GroundTruth& gt = result.truth;

  gt.topic_positions.resize(static_cast<std::size_t>(K));
  for (auto& p : gt.topic_positions) {
    p[0] = layout_rng.uniform();
    p[1] = layout_rng.uniform();
  }
  gt.topic_words.resize(static_cast<std::size_t>(K));
  for (int t = 0; t < K; ++t) {
    gt.topic_words[t].reserve(static_cast<std::size_t>(cfg.words_per_topic));
    for (int j = 0; j < cfg.words_per_topic; ++j)
      gt.topic_words[t].push_back(topic_word(t, j));
  }

  gt.entity_ids.resize(static_cast<std::size_t>(E));
  gt.intensity.assign(static_cast<std::size_t>(E),
                      std::vector<std::vector<double>>(
                          static_cast<std::size_t>(P),
                          std::vector<double>(static_cast<std::size_t>(K), 0.0)));

  const int trending = static_cast<int>(std::floor(cfg.trend_fraction * K));

  // Shared archetype profiles: spatial kernels around random topic-layout
  // points. Entity behavior mixes these, so frames are low-rank and
  // spatially coherent rather than 64 independent cells.
  const int M = cfg.archetype_count;
  const double kernel_width = std::max(1e-6, cfg.burst_radius);
  std::vector<std::vector<double>> profiles(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    const double cx = layout_rng.uniform();
    const double cy = layout_rng.uniform();
    auto& profile = profiles[m];
    profile.assign(static_cast<std::size_t>(K), 0.0);
    double total = 0.0;
    for (int t = 0; t < K; ++t) {
      const double dx = gt.topic_positions[t][0] - cx;
      const double dy = gt.topic_positions[t][1] - cy;
      profile[t] = std::exp(-(dx * dx + dy * dy) / (2.0 * kernel_width * kernel_width));
      total += profile[t];
    }
    for (auto& v : profile) v /= total;
  }

  for (int e = 0; e < E; ++e) {
    char name[32];
    std::snprintf(name, sizeof(name), "e%05d", e);
    gt.entity_ids[e] = name;

    Rng erng = entity_rng.fork(static_cast<std::uint64_t>(e));
    const std::vector<double> mixture = erng.dirichlet(M, cfg.base_concentration);
    const std::vector<double> idio = erng.dirichlet(K, cfg.base_concentration);
    std::vector<double> pref(static_cast<std::size_t>(K), 0.0);
    for (int t = 0; t < K; ++t) {
      double mixed = 0.0;
      for (int m = 0; m < M; ++m) mixed += mixture[m] * profiles[m][t];
      pref[t] = (1.0 - cfg.preference_jitter) * mixed +
                cfg.preference_jitter * idio[t];
    }

    // Trending topics: ramps land on topics the entity actually exercises,
    // picked from its upper preference half.
    std::vector<int> order(static_cast<std::size_t>(K));
    for (int t = 0; t < K; ++t) order[t] = t;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return pref[a] > pref[b]; });
    order.resize(static_cast<std::size_t>(std::max(trending, (K + 1) / 2)));
    erng.shuffle(order);
    std::vector<double> slope(static_cast<std::size_t>(K), 0.0);
    for (int i = 0; i < trending; ++i) {
      // Mostly growth, some decay; decays are bounded so intensity stays > 0.
      const double s = erng.uniform() < 0.7 ? erng.uniform(0.8, 2.5)
                                            : erng.uniform(-0.6, -0.2);
      slope[order[i]] = s;
    }

    // Bursts: spatially localized in the latent layout. Each ramps up over a
    // few consecutive periods and then stays elevated, a regime shift whose
    // continuation is predictable from the window.
    std::vector<Burst> bursts;
    // Expected cfg.burst_rate bursts per entity.
    for (double expect = cfg.burst_rate; expect > 0.0; expect -= 1.0) {
      if (erng.uniform() >= std::min(1.0, expect)) continue;
      Burst b;
      const int center_topic = static_cast<int>(erng.uniform_int(K));
      b.cx = gt.topic_positions[center_topic][0];
      b.cy = gt.topic_positions[center_topic][1];
      b.duration = 3 + static_cast<int>(erng.uniform_int(3));  // ramp length 3..5
      b.start_period = static_cast<int>(
          erng.uniform_int(static_cast<std::uint64_t>(std::max(1, P - 1))));
      b.amplitude = cfg.burst_gain * erng.uniform(0.5, 1.0);
      bursts.push_back(b);
    }

    for (int p = 0; p < P; ++p) {
      const double ramp_pos = P > 1 ? static_cast<double>(p) / (P - 1) : 0.0;
      for (int t = 0; t < K; ++t) {
        double lambda = cfg.docs_per_period * pref[t];
        lambda *= std::max(0.05, 1.0 + slope[t] * ramp_pos);
        for (const auto& b : bursts) {
          if (p < b.start_period) continue;
          const double dx = gt.topic_positions[t][0] - b.cx;
          const double dy = gt.topic_positions[t][1] - b.cy;
          const double dist = std::sqrt(dx * dx + dy * dy);
          if (cfg.burst_radius <= 0.0 || dist >= cfg.burst_radius) continue;
          const double closeness = 1.0 - dist / cfg.burst_radius;
          const double phase = std::min(
              1.0, static_cast<double>(p - b.start_period + 1) / b.duration);
          lambda *= 1.0 + b.amplitude * closeness * phase;
        }
        if (cfg.noise_level > 0.0)
          lambda *= std::exp(cfg.noise_level * erng.normal());
        gt.intensity[e][p][t] = lambda;
      }
    }
  }

  // Emit documents. Counts are the rounded intensities so that, with all
  // dynamics and noise disabled, per-topic counts are constant across periods.
  for (int e = 0; e < E; ++e) {
    for (int p = 0; p < P; ++p) {
      const std::int64_t t0 = static_cast<std::int64_t>(p) * cfg.period_length;
      for (int t = 0; t < K; ++t) {
        const auto count =
            static_cast<std::int64_t>(std::llround(gt.intensity[e][p][t]));
        for (std::int64_t d = 0; d < count; ++d) {
          const int len =
              1 + static_cast<int>(text_rng.uniform_int(static_cast<std::uint64_t>(
                      std::max(1.0, 2.0 * cfg.words_per_doc - 1.0))));
          std::string text;
          for (int w = 0; w < len; ++w) {
            if (w) text += ' ';
            text += gt.topic_words[t][static_cast<std::size_t>(
                text_rng.uniform_int(static_cast<std::uint64_t>(cfg.words_per_topic)))];
          }
          LogEntry entry;
          entry.entity_id = gt.entity_ids[e];
          entry.timestamp =
              t0 + static_cast<std::int64_t>(text_rng.uniform_int(
                       static_cast<std::uint64_t>(cfg.period_length)));
          entry.resource_text = std::move(text);
          result.entries.push_back(std::move(entry));
        }
      }
    }
  }
  return result;
}

std::string to_tsv(std::span<const LogEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.entity_id;
    out += '\t';
    out += std::to_string(e.timestamp);
    out += '\t';
    out += e.resource_text;
    out += '\n';
  }
  return out;
}

void write_ground_truth(const std::filesystem::path& path,
                        const GroundTruth& gt) {
  nlohmann::json j;
  j["entities"] = nlohmann::json::object();
  for (std::size_t e = 0; e < gt.entity_ids.size(); ++e)
    j["entities"][gt.entity_ids[e]] = gt.intensity[e];
  j["topic_words"] = gt.topic_words;
  j["topic_positions"] = gt.topic_positions;
  write_text_file(path, j.dump(1));
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(read_text_file(path));
  GroundTruth gt;
  for (const auto& [id, periods] : j.at("entities").items()) {
    gt.entity_ids.push_back(id);
    gt.intensity.push_back(periods.get<std::vector<std::vector<double>>>());
  }
  gt.topic_words = j.at("topic_words").get<std::vector<std::vector<std::string>>>();
  for (const auto& p : j.at("topic_positions"))
    gt.topic_positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return gt;
}

}  // namespace gridcast
