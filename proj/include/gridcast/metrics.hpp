#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gridcast/loglab.hpp"
#include "gridcast/topics.hpp"

namespace gridcast {

// Length-K vector of topical volumes for one entity and one period.
struct TopicalMetricVector {
  std::string entity_id;
  std::int64_t period_index = 0;
  std::vector<double> values;
};

// Consecutive periods of one entity, always spanning the full period range.
struct MetricSeries {
  std::string entity_id;
  std::vector<TopicalMetricVector> periods;
};

// Topical volume over topic t: ln(sum of theta_t over the bundle's unique
// documents, plus one). relevances must align 1:1 with bundle.documents.
double topical_volume(const EntityPeriodBundle& bundle,
                      std::span<const ActivityRelevance> relevances, int topic);

// All K volumes of a bundle at once.
std::vector<double> metric_vector(const EntityPeriodBundle& bundle,
                                  std::span<const ActivityRelevance> relevances,
                                  int K);

// theta provider for a document's content; must be pure.
using RelevanceFn = std::function<const std::vector<double>&(const std::string&)>;

// One vector per (entity, period); periods with no activity are all-zero, so
// every series is rectangular over [0, spec.count).
std::map<std::string, MetricSeries> build_metric_series(
    const BucketResult& buckets, const RelevanceFn& relevance, int K,
    const PeriodSpec& spec);

// Dump format: manifest.json (E, P, K, entity order, period range) +
// values.f64, layout [entity][period][topic].
struct MetricTensor {
  std::vector<std::string> entities;
  std::int64_t period_begin = 0;
  std::int64_t period_count = 0;
  int K = 0;
  std::vector<double> data;

  double at(std::size_t e, std::int64_t p, int t) const {
    return data[(e * static_cast<std::size_t>(period_count) +
                 static_cast<std::size_t>(p - period_begin)) *
                    static_cast<std::size_t>(K) +
                static_cast<std::size_t>(t)];
  }
};

MetricTensor pack_metric_tensor(const std::map<std::string, MetricSeries>& series);
std::map<std::string, MetricSeries> unpack_metric_tensor(const MetricTensor& tensor);

void write_metric_tensor(const std::filesystem::path& dir, const MetricTensor& t);
MetricTensor read_metric_tensor(const std::filesystem::path& dir);

}  // namespace gridcast
