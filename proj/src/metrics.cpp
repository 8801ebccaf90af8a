#include "gridcast/metrics.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

namespace gridcast {

double topical_volume(const EntityPeriodBundle& bundle,
                      std::span<const ActivityRelevance> relevances, int topic) {
  if (relevances.size() != bundle.documents.size())
    throw DataError("topical_volume: relevance missing for some documents");
  double sum = 0.0;
  for (const auto& rel : relevances) sum += rel.theta[static_cast<std::size_t>(topic)];
  return std::log(sum + 1.0);
}

std::vector<double> metric_vector(const EntityPeriodBundle& bundle,
                                  std::span<const ActivityRelevance> relevances,
                                  int K) {
  if (relevances.size() != bundle.documents.size())
    throw DataError("metric_vector: relevance missing for some documents");
  std::vector<double> sums(static_cast<std::size_t>(K), 0.0);
  for (const auto& rel : relevances) {
    if (rel.theta.size() != static_cast<std::size_t>(K))
      throw DataError("metric_vector: relevance dimension mismatch");
    for (int t = 0; t < K; ++t) sums[t] += rel.theta[t];
  }
  for (auto& v : sums) v = std::log(v + 1.0);
  return sums;
}

std::map<std::string, MetricSeries> build_metric_series(
    const BucketResult& buckets, const RelevanceFn& relevance, int K,
    const PeriodSpec& spec) {
  if (!spec.valid()) throw DataError("build_metric_series: invalid period spec");

  std::set<std::string> entity_ids;
  for (const auto& [key, bundle] : buckets.bundles) entity_ids.insert(key.entity_id);

  std::map<std::string, MetricSeries> out;
  for (const auto& id : entity_ids) {
    MetricSeries series;
    series.entity_id = id;
    series.periods.reserve(static_cast<std::size_t>(spec.count));
    for (std::int64_t p = 0; p < spec.count; ++p) {
      TopicalMetricVector vec;
      vec.entity_id = id;
      vec.period_index = p;
      const auto it = buckets.bundles.find(EntityPeriod{id, p});
      if (it == buckets.bundles.end()) {
        vec.values.assign(static_cast<std::size_t>(K), 0.0);
      } else {
        std::vector<double> sums(static_cast<std::size_t>(K), 0.0);
        for (const auto& doc : it->second.documents) {
          const std::vector<double>& theta = relevance(doc);
          if (theta.size() != static_cast<std::size_t>(K))
            throw DataError("build_metric_series: relevance dimension mismatch");
          for (int t = 0; t < K; ++t) sums[t] += theta[t];
        }
        for (auto& v : sums) v = std::log(v + 1.0);
        vec.values = std::move(sums);
      }
      series.periods.push_back(std::move(vec));
    }
    out.emplace(id, std::move(series));
  }
  return out;
}

MetricTensor pack_metric_tensor(const std::map<std::string, MetricSeries>& series) {
  MetricTensor t;
  if (series.empty()) return t;
  const auto& first = series.begin()->second;
  t.period_begin = first.periods.front().period_index;
  t.period_count = static_cast<std::int64_t>(first.periods.size());
  t.K = static_cast<int>(first.periods.front().values.size());
  t.entities.reserve(series.size());
  t.data.reserve(series.size() * static_cast<std::size_t>(t.period_count) *
                 static_cast<std::size_t>(t.K));
  for (const auto& [id, s] : series) {
    if (static_cast<std::int64_t>(s.periods.size()) != t.period_count)
      throw DataError("pack_metric_tensor: ragged series");
    t.entities.push_back(id);
    for (const auto& vec : s.periods)
      t.data.insert(t.data.end(), vec.values.begin(), vec.values.end());
  }
  return t;
}

std::map<std::string, MetricSeries> unpack_metric_tensor(const MetricTensor& tensor) {
  std::map<std::string, MetricSeries> out;
  std::size_t idx = 0;
  for (const auto& id : tensor.entities) {
    MetricSeries series;
    series.entity_id = id;
    for (std::int64_t p = 0; p < tensor.period_count; ++p) {
      TopicalMetricVector vec;
      vec.entity_id = id;
      vec.period_index = tensor.period_begin + p;
      vec.values.assign(tensor.data.begin() + idx,
                        tensor.data.begin() + idx + static_cast<std::size_t>(tensor.K));
      idx += static_cast<std::size_t>(tensor.K);
      series.periods.push_back(std::move(vec));
    }
    out.emplace(id, std::move(series));
  }
  return out;
}

void write_metric_tensor(const std::filesystem::path& dir, const MetricTensor& t) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["entities"] = t.entities;
  manifest["period_begin"] = t.period_begin;
  manifest["period_count"] = t.period_count;
  manifest["K"] = t.K;
  write_text_file(dir / "manifest.json", manifest.dump(1));
  write_f64_file(dir / "values.f64", t.data);
}

MetricTensor read_metric_tensor(const std::filesystem::path& dir) {
  const auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  MetricTensor t;
  t.entities = manifest.at("entities").get<std::vector<std::string>>();
  t.period_begin = manifest.at("period_begin").get<std::int64_t>();
  t.period_count = manifest.at("period_count").get<std::int64_t>();
  t.K = manifest.at("K").get<int>();
  t.data = read_f64_file(dir / "values.f64");
  const auto expected = t.entities.size() *
                        static_cast<std::size_t>(t.period_count) *
                        static_cast<std::size_t>(t.K);
  if (t.data.size() != expected) throw DataError("metric tensor size mismatch");
  return t;
}

}  // namespace gridcast
