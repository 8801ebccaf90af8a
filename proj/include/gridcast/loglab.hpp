#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast {

// One parsed activity record.
struct LogEntry {
  std::string entity_id;
  std::int64_t timestamp = 0;  // seconds since epoch
  std::string resource_text;
};

// Uniform time bucketing: period of ts = floor((ts - origin) / length),
// valid when in [0, count).
struct PeriodSpec {
  std::int64_t origin = 0;
  std::int64_t length = 0;
  std::int64_t count = 0;

  bool valid() const { return length > 0 && count > 0; }

  std::optional<std::int64_t> period_of(std::int64_t ts) const {
    const std::int64_t shifted = ts - origin;
    std::int64_t p = shifted / length;
    if (shifted < 0 && shifted % length != 0) --p;  // floor for negatives
    if (p < 0 || p >= count) return std::nullopt;
    return p;
  }
};

enum class ParseReject { FieldCount, BadTimestamp, EmptyEntity, EmptyText };

struct ParseStats {
  std::uint64_t accepted = 0;
  std::uint64_t rejected_field_count = 0;
  std::uint64_t rejected_bad_timestamp = 0;
  std::uint64_t rejected_empty_entity = 0;
  std::uint64_t rejected_empty_text = 0;

  std::uint64_t rejected_total() const {
    return rejected_field_count + rejected_bad_timestamp +
           rejected_empty_entity + rejected_empty_text;
  }
};

// Parses one TSV record: entity \t timestamp \t text. Trailing \r or \n is
// stripped. Returns nullopt with the reason on malformed input; never throws.
std::optional<LogEntry> parse_log_line(std::string_view line,
                                       ParseReject* reason = nullptr);

// Parses a whole stream, counting rejections per reason.
std::vector<LogEntry> parse_log_stream(std::string_view content,
                                       ParseStats& stats);

struct EntityPeriod {
  std::string entity_id;
  std::int64_t period_index = 0;
  auto operator<=>(const EntityPeriod&) const = default;
};

// Activities of one entity in one period, deduplicated to unique content
// documents (byte-exact equality). Documents are kept sorted.
struct EntityPeriodBundle {
  std::string entity_id;
  std::int64_t period_index = 0;
  std::vector<std::string> documents;
  std::uint64_t raw_count = 0;  // pre-dedup entry count
};

struct BucketResult {
  std::map<EntityPeriod, EntityPeriodBundle> bundles;
  std::uint64_t input_count = 0;
  std::uint64_t dropped_out_of_range = 0;
};

BucketResult bucket_entries(std::span<const LogEntry> entries,
                            const PeriodSpec& spec);

// Synthetic log generator configuration. Replaces the unavailable production
// dataset with known dynamics: per-entity base topic preferences, linear
// trends on a subset of topics, and bursts that co-activate topics lying
// close together in a latent 2D topic layout.
struct SynthConfig {
  int entity_count = 100;
  int topic_count = 16;
  int period_count = 12;
  double base_concentration = 0.3;  // Dirichlet concentration of preferences
  double trend_fraction = 0.25;     // share of topics ramped per entity
  double burst_radius = 0.25;       // latent-space reach of a burst
  double burst_rate = 1.5;          // expected bursts per entity
  double burst_gain = 4.0;          // peak multiplier at a burst center
  double noise_level = 0.15;        // lognormal sigma on per-topic intensity
  double docs_per_period = 12.0;    // mean documents per entity-period
  double words_per_doc = 8.0;       // mean words per document
  int words_per_topic = 40;         // disjoint vocabulary block size
  // Entity preferences mix a few shared spatial archetype profiles, so
  // behavior lives on a low-dimensional manifold; jitter is the per-entity
  // idiosyncratic share.
  int archetype_count = 8;
  double preference_jitter = 0.15;
  std::int64_t period_length = 86400;
  std::uint64_t seed = 1;

  bool valid() const {
    return entity_count > 0 && topic_count > 0 && period_count > 0 &&
           base_concentration > 0 && trend_fraction >= 0 &&
           trend_fraction <= 1 && burst_radius >= 0 && burst_rate >= 0 &&
           noise_level >= 0 && docs_per_period > 0 && words_per_doc >= 1 &&
           words_per_topic > 0 && period_length > 0 && archetype_count > 0 &&
           preference_jitter >= 0 && preference_jitter <= 1;
  }
};

// What the generator knows and the pipeline must recover: the realized
// per-topic intensity driving each entity-period, the disjoint vocabulary
// block of each topic, and the latent 2D positions bursts were drawn over.
struct GroundTruth {
  std::vector<std::string> entity_ids;
  // intensity[entity][period][topic]
  std::vector<std::vector<std::vector<double>>> intensity;
  std::vector<std::vector<std::string>> topic_words;
  std::vector<std::array<double, 2>> topic_positions;
};

struct SynthResult {
  std::vector<LogEntry> entries;
  GroundTruth truth;
};

// Deterministic given cfg.seed; same seed twice gives byte-identical streams.
SynthResult generate_synthetic_logs(const SynthConfig& cfg);

// TSV wire format helpers.
std::string to_tsv(std::span<const LogEntry> entries);
void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt);
GroundTruth read_ground_truth(const std::filesystem::path& path);

}  // namespace gridcast
