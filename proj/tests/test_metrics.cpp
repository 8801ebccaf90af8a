#include <doctest.h>

#include <cmath>

#include "gridcast/metrics.hpp"

using namespace gridcast;

namespace {

ActivityRelevance rel(std::vector<double> theta) {
  ActivityRelevance r;
  r.theta = std::move(theta);
  return r;
}

EntityPeriodBundle bundle_of(int n_docs) {
  EntityPeriodBundle b;
  b.entity_id = "e";
  b.period_index = 0;
  for (int i = 0; i < n_docs; ++i) b.documents.push_back("doc" + std::to_string(i));
  b.raw_count = static_cast<std::uint64_t>(n_docs);
  return b;
}

}  // namespace

TEST_CASE("topical_volume of an empty bundle is zero") {
  const EntityPeriodBundle b = bundle_of(0);
  CHECK(topical_volume(b, {}, 0) == 0.0);
}

TEST_CASE("topical_volume hits exact analytic values") {
  // Two docs whose theta_0 sums to e-1 give volume exactly 1.
  const double half = (std::exp(1.0) - 1.0) / 2.0;
  const EntityPeriodBundle b2 = bundle_of(2);
  const std::vector<ActivityRelevance> r2 = {rel({half, 1.0 - half}),
                                             rel({half, 1.0 - half})};
  CHECK(topical_volume(b2, r2, 0) == doctest::Approx(1.0).epsilon(1e-12));

  // r values {0.5, 0.5, 1.0} -> ln 3. Oracle: direct arithmetic.
  const double expected = std::log(0.5 + 0.5 + 1.0 + 1.0);
  const EntityPeriodBundle b3 = bundle_of(3);
  const std::vector<ActivityRelevance> r3 = {
      rel({0.5, 0.5}), rel({0.5, 0.5}), rel({1.0, 0.0})};
  CHECK(topical_volume(b3, r3, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(1.0986122886681098).epsilon(1e-12));
}

TEST_CASE("topical_volume requires one relevance per document") {
  const EntityPeriodBundle b = bundle_of(2);
  const std::vector<ActivityRelevance> r = {rel({1.0})};
  CHECK_THROWS_AS(topical_volume(b, r, 0), DataError);
}

TEST_CASE("topical_volume is order-independent and monotone") {
  const EntityPeriodBundle b3 = bundle_of(3);
  const std::vector<ActivityRelevance> fwd = {
      rel({0.2, 0.8}), rel({0.7, 0.3}), rel({0.4, 0.6})};
  const std::vector<ActivityRelevance> rev = {
      rel({0.4, 0.6}), rel({0.7, 0.3}), rel({0.2, 0.8})};
  CHECK(topical_volume(b3, fwd, 0) == topical_volume(b3, rev, 0));
  CHECK(topical_volume(b3, fwd, 1) == topical_volume(b3, rev, 1));

  // Adding a doc with theta_t > 0 strictly increases the volume at t.
  const EntityPeriodBundle b4 = bundle_of(4);
  std::vector<ActivityRelevance> more = fwd;
  more.push_back(rel({0.01, 0.99}));
  CHECK(topical_volume(b4, more, 0) > topical_volume(b3, fwd, 0));
}

TEST_CASE("metric_vector equals per-topic topical_volume") {
  const EntityPeriodBundle b = bundle_of(2);
  const std::vector<ActivityRelevance> r = {rel({0.3, 0.7}), rel({0.9, 0.1})};
  const auto vec = metric_vector(b, r, 2);
  REQUIRE(vec.size() == 2);
  CHECK(vec[0] == doctest::Approx(topical_volume(b, r, 0)).epsilon(1e-15));
  CHECK(vec[1] == doctest::Approx(topical_volume(b, r, 1)).epsilon(1e-15));
  for (double v : vec) CHECK(v >= 0.0);
}

TEST_CASE("build_metric_series fills absent periods with zeros") {
  std::vector<LogEntry> entries = {
      {"e1", 0, "alpha"},      // period 0
      {"e1", 125, "beta"},     // period 2
      {"e2", 65, "gamma"},     // period 1
  };
  const PeriodSpec spec{0, 60, 3};
  const auto buckets = bucket_entries(entries, spec);

  const std::vector<double> one_hot = {1.0, 0.0};
  RelevanceFn fn = [&](const std::string&) -> const std::vector<double>& {
    return one_hot;
  };
  const auto series = build_metric_series(buckets, fn, 2, spec);
  REQUIRE(series.size() == 2);

  const auto& s1 = series.at("e1");
  REQUIRE(s1.periods.size() == 3);
  // Single doc with one-hot theta: ln(2) at topic 0, 0 elsewhere.
  CHECK(s1.periods[0].values[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(s1.periods[0].values[1] == 0.0);
  CHECK(s1.periods[1].values == std::vector<double>{0.0, 0.0});
  CHECK(s1.periods[2].values[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Period indices strictly consecutive ascending.
  for (std::size_t p = 0; p < s1.periods.size(); ++p)
    CHECK(s1.periods[p].period_index == static_cast<std::int64_t>(p));
}

TEST_CASE("series shapes: E entities x P periods x K topics") {
  std::vector<LogEntry> entries;
  for (int e = 0; e < 4; ++e)
    for (int p = 0; p < 5; ++p)
      entries.push_back({"e" + std::to_string(e), p * 10 + 1, "doc"});
  const PeriodSpec spec{0, 10, 5};
  const auto buckets = bucket_entries(entries, spec);
  const std::vector<double> theta = {0.5, 0.25, 0.25};
  RelevanceFn fn = [&](const std::string&) -> const std::vector<double>& {
    return theta;
  };
  const auto series = build_metric_series(buckets, fn, 3, spec);
  CHECK(series.size() == 4);
  for (const auto& [id, s] : series) {
    CHECK(s.periods.size() == 5);
    for (const auto& v : s.periods) CHECK(v.values.size() == 3);
  }
}

TEST_CASE("metric tensor round-trips through the dump format") {
  std::vector<LogEntry> entries = {
      {"a", 1, "x y"}, {"a", 11, "z"}, {"b", 5, "w"}, {"b", 15, "x"}};
  const PeriodSpec spec{0, 10, 2};
  const auto buckets = bucket_entries(entries, spec);
  const std::vector<double> theta = {0.6, 0.4};
  RelevanceFn fn = [&](const std::string&) -> const std::vector<double>& {
    return theta;
  };
  const auto series = build_metric_series(buckets, fn, 2, spec);
  const MetricTensor tensor = pack_metric_tensor(series);
  CHECK(tensor.entities == std::vector<std::string>{"a", "b"});
  CHECK(tensor.period_count == 2);
  CHECK(tensor.K == 2);

  const auto dir = std::filesystem::temp_directory_path() / "metric_tensor_test";
  write_metric_tensor(dir, tensor);
  const MetricTensor loaded = read_metric_tensor(dir);
  CHECK(loaded.data == tensor.data);
  CHECK(loaded.entities == tensor.entities);

  const auto unpacked = unpack_metric_tensor(loaded);
  REQUIRE(unpacked.size() == series.size());
  for (const auto& [id, s] : series) {
    const auto& u = unpacked.at(id);
    for (std::size_t p = 0; p < s.periods.size(); ++p)
      CHECK(u.periods[p].values == s.periods[p].values);
  }
  std::filesystem::remove_all(dir);
}
