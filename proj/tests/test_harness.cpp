#include <doctest.h>

#include <cmath>
#include <set>

#include "gridcast/harness.hpp"

using namespace gridcast;

namespace {

// Series whose every metric value equals its period index, so window
// positions are visible in the produced samples.
std::map<std::string, MetricSeries> period_coded_series(int entities, int periods,
                                                        int K) {
  std::map<std::string, MetricSeries> out;
  for (int e = 0; e < entities; ++e) {
    char name[16];
    std::snprintf(name, sizeof(name), "e%04d", e);
    MetricSeries s;
    s.entity_id = name;
    for (int p = 0; p < periods; ++p) {
      TopicalMetricVector v;
      v.entity_id = name;
      v.period_index = p;
      v.values.assign(static_cast<std::size_t>(K), static_cast<double>(p));
      s.periods.push_back(std::move(v));
    }
    out.emplace(name, std::move(s));
  }
  return out;
}

GridAssignment identity_assignment(int k) {
  GridAssignment a;
  a.k = k;
  for (int t = 0; t < k * k; ++t) a.cell_of.push_back({t / k, t % k});
  return a;
}

}  // namespace

TEST_CASE("split spec validation") {
  SplitSpec ok;
  ok.validate();

  SplitSpec bad_sum{0.5, 0.2, 0.2, 1};
  CHECK_THROWS_AS(bad_sum.validate(), DataError);
  SplitSpec bad_shift{0.7, 0.08, 0.22, 0};
  CHECK_THROWS_AS(bad_shift.validate(), DataError);
}

TEST_CASE("make_splits partitions 100 entities as 70/8/22") {
  const auto series = period_coded_series(100, 12, 4);
  const auto assignment = identity_assignment(2);
  const SplitSpec spec;
  const SampleSets sets = make_splits(series, assignment, spec, 8, 42);

  CHECK(sets.entities.train.size() == 70);
  CHECK(sets.entities.val.size() == 8);
  CHECK(sets.entities.test.size() == 22);

  std::set<std::string> all;
  all.insert(sets.entities.train.begin(), sets.entities.train.end());
  all.insert(sets.entities.val.begin(), sets.entities.val.end());
  all.insert(sets.entities.test.begin(), sets.entities.test.end());
  CHECK(all.size() == 100);  // pairwise disjoint and covering
}

TEST_CASE("test windows are shifted past every training period") {
  const int T = 8;
  const SplitSpec spec{0.70, 0.08, 0.22, 2};
  const auto series = period_coded_series(50, 12, 4);
  const auto assignment = identity_assignment(2);
  const SampleSets sets = make_splits(series, assignment, spec, T, 7);

  // Train/val target period is T; test target is shift + T = 10 > 8.
  for (const auto& s : sets.train) CHECK(s.target[0] == doctest::Approx(8.0));
  for (const auto& s : sets.val) CHECK(s.target[0] == doctest::Approx(8.0));
  for (const auto& s : sets.test) {
    CHECK(s.target[0] == doctest::Approx(10.0));
    CHECK(s.inputs.at(0, 0, 0) == doctest::Approx(2.0));  // first input period = shift
  }
}

TEST_CASE("make_splits is fatal when series are too short") {
  const auto series = period_coded_series(10, 6, 4);  // needs shift+T+1 = 11
  const auto assignment = identity_assignment(2);
  CHECK_THROWS_AS(make_splits(series, assignment, SplitSpec{}, 8, 1), DataError);
}

TEST_CASE("evaluate delegates to the loss and is deterministic") {
  ModelConfig cfg;
  cfg.arch = Arch::Mlp;
  cfg.k = 2;
  cfg.T = 2;
  cfg.dense_widths = {4};
  cfg.seed = 3;
  auto model = build_model(cfg);

  Rng rng(4);
  SequenceSample sample;
  sample.entity_id = "e";
  sample.inputs = Tensor({2, 2, 2});
  sample.target = Tensor({2, 2});
  for (std::size_t i = 0; i < sample.inputs.size(); ++i)
    sample.inputs[i] = rng.uniform(0.0, 1.0);
  for (std::size_t i = 0; i < sample.target.size(); ++i)
    sample.target[i] = rng.uniform(0.0, 1.0);
  std::vector<SequenceSample> samples = {sample};

  const double direct = rle_loss(sample.target, model->forward(sample.inputs)).value;
  CHECK(evaluate(*model, samples, LossKind::Rle) == direct);
  CHECK(evaluate(*model, samples, LossKind::Rle) == direct);  // twice identical

  // A model reproducing its target exactly scores zero.
  SequenceSample exact = sample;
  exact.target = model->forward(sample.inputs);
  for (std::size_t i = 0; i < exact.target.size(); ++i)
    exact.target[i] = std::max(0.0, exact.target[i]);
  const Tensor pred = model->forward(exact.inputs);
  bool all_non_negative = true;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] < 0) all_non_negative = false;
  if (all_non_negative) {
    std::vector<SequenceSample> perfect = {exact};
    CHECK(evaluate(*model, perfect, LossKind::Rle) == 0.0);
  }

  CHECK_THROWS_AS(evaluate(*model, {}, LossKind::Rle), DataError);
}

TEST_CASE("prediction_gain arithmetic") {
  CHECK(prediction_gain(1.0, 0.85) == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(prediction_gain(2.0, 2.0) == 0.0);
  CHECK(prediction_gain(1.0, 1.2) < 0.0);  // worse than baseline
  CHECK(prediction_gain(1.0, 0.5) > prediction_gain(1.0, 0.9));
  CHECK_THROWS_AS(prediction_gain(0.0, 0.5), DataError);
  CHECK_THROWS_AS(prediction_gain(-1.0, 0.5), DataError);
}

TEST_CASE("config json applies partial overrides over defaults") {
  const PipelineConfig cfg = config_from_json(
      R"({"seed": 99, "grid": {"k": 3},
          "synth": {"topics": 9, "entities": 20,
                    "archetype_count": 3, "preference_jitter": 0.4},
          "train": {"epochs": 5, "archs": ["mlp", "tdrn"]}})");
  CHECK(cfg.seed == 99);
  CHECK(cfg.grid_k == 3);
  CHECK(cfg.synth.topic_count == 9);
  CHECK(cfg.synth.entity_count == 20);
  CHECK(cfg.synth.archetype_count == 3);
  CHECK(cfg.synth.preference_jitter == 0.4);
  CHECK(cfg.synth.seed == 99);
  CHECK(cfg.epochs == 5);
  REQUIRE(cfg.archs.size() == 2);
  CHECK(cfg.archs[1] == Arch::Tdrn);
  // Untouched defaults survive.
  CHECK(cfg.batch_size == 32);
  CHECK(cfg.split.shift == 2);

  CHECK_THROWS_AS(config_from_json("{nope"), DataError);

  // Round trip through the echo.
  const PipelineConfig again = config_from_json(config_to_json(cfg));
  CHECK(again.seed == cfg.seed);
  CHECK(again.grid_k == cfg.grid_k);
  CHECK(again.archs == cfg.archs);
  CHECK(again.synth.archetype_count == cfg.synth.archetype_count);
  CHECK(again.synth.preference_jitter == cfg.synth.preference_jitter);
}

TEST_CASE("csv and svg emission shapes") {
  ArchResult arch;
  arch.name = "mlp";
  arch.train_rle = {3.0, 2.0, 1.5};
  arch.val_rle = {3.1, 2.1, 1.6};
  arch.test_rle = {3.2, 2.2, 1.7};
  const std::string csv = curves_csv(arch);
  CHECK(csv.substr(0, 32) == "epoch,train_rle,val_rle,test_rle");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 epochs

  ArchResult empty;
  empty.name = "mlp";
  CHECK_THROWS_AS(curves_csv(empty), DataError);
  CHECK_THROWS_AS(curves_svg({empty}, "train"), DataError);

  MetricFrame frame;
  frame.k = 3;
  frame.cells = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  const std::string svg = frame_svg(frame, 0.0, 8.0);
  std::size_t rects = 0, pos = 0;
  while ((pos = svg.find("<rect", pos)) != std::string::npos) {
    ++rects;
    pos += 5;
  }
  CHECK(rects == 9);  // one per cell
}

TEST_CASE("run_experiment produces a full artifact set deterministically") {
  PipelineConfig cfg;
  cfg.seed = 31;
  cfg.synth.entity_count = 24;
  cfg.synth.topic_count = 16;
  cfg.synth.period_count = 8;
  cfg.synth.docs_per_period = 6.0;
  cfg.synth.words_per_topic = 10;
  cfg.synth.seed = 31;
  cfg.grid_k = 4;
  cfg.T = 4;
  cfg.split.shift = 2;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.lda_iterations = 30;
  cfg.lstm_width = 8;
  cfg.dense_widths = {16};
  cfg.conv_layers = 1;
  cfg.conv_channels = 2;
  cfg.kernel = 2;

  const auto dir1 = std::filesystem::temp_directory_path() / "gridcast_exp1";
  const auto dir2 = std::filesystem::temp_directory_path() / "gridcast_exp2";
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);

  const ExperimentReport report = run_experiment(cfg, dir1);
  REQUIRE(report.archs.size() == 4);
  CHECK(report.train_entities == 17);  // llround(0.70 * 24)
  CHECK(report.val_entities == 2);
  CHECK(report.test_entities == 5);
  for (const auto& a : report.archs) {
    CHECK(a.train_rle.size() == 2);
    CHECK(a.val_rle.size() == 2);
    CHECK(a.test_rle.size() == 2);
    CHECK(a.best_epoch >= 0);
    CHECK(std::isfinite(a.test_mse_at_best));
  }
  CHECK(report.find("mlp")->gain_vs_mlp == 0.0);

  for (const char* f :
       {"report.json", "timing.json", "logs.tsv", "ground_truth.json",
        "assignment.json", "splits.json", "curves_mlp.csv", "curves_tdrn.csv",
        "curves_lrcn.csv", "curves_sccn.csv", "curves_train.svg",
        "curves_val.svg", "curves_test.svg"})
    CHECK(std::filesystem::exists(dir1 / f));
  CHECK(std::filesystem::exists(dir1 / "models" / "sccn" / "manifest.json"));
  CHECK(std::filesystem::exists(dir1 / "lda" / "phi.f64"));
  CHECK(std::filesystem::exists(dir1 / "metrics" / "values.f64"));
  CHECK(!std::filesystem::is_empty(dir1 / "heatmaps"));

  // Same config and seed: byte-identical report.
  run_experiment(cfg, dir2);
  CHECK(read_text_file(dir1 / "report.json") == read_text_file(dir2 / "report.json"));

  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}
