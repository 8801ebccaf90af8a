#include "gridcast/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

namespace gridcast {

void SplitSpec::validate() const {
  if (train_fraction <= 0 || val_fraction <= 0 || test_fraction <= 0)
    throw DataError("split fractions must be positive");
  const double sum = train_fraction + val_fraction + test_fraction;
  if (std::abs(sum - 1.0) > 1e-9)
    throw DataError("split fractions must sum to 1, got " + format_double(sum));
  if (shift < 1) throw DataError("test-window shift must be >= 1");
}

namespace {

SampleSets build_sample_sets(const std::map<std::string, MetricSeries>& series,
                             const GridAssignment& assignment,
                             const EntitySplits& entities, int T, int shift) {
  SampleSets sets;
  sets.entities = entities;
  sets.T = T;
  sets.shift = shift;
  auto series_of = [&](const std::string& id) -> const MetricSeries& {
    auto it = series.find(id);
    if (it == series.end()) throw DataError("split references unknown entity " + id);
    return it->second;
  };
  for (const auto& id : entities.train)
    sets.train.push_back(make_sample(series_of(id), assignment, 0, T));
  for (const auto& id : entities.val)
    sets.val.push_back(make_sample(series_of(id), assignment, 0, T));
  for (const auto& id : entities.test)
    sets.test.push_back(make_sample(series_of(id), assignment, shift, T));
  return sets;
}

}  // namespace

SampleSets make_splits(const std::map<std::string, MetricSeries>& series,
                       const GridAssignment& assignment, const SplitSpec& spec,
                       int T, std::uint64_t seed) {
  spec.validate();
  if (T < 1) throw DataError("make_splits: T must be positive");
  if (series.empty()) throw DataError("make_splits: no series");

  // Every series must accommodate the shifted test window.
  for (const auto& [id, s] : series) {
    if (static_cast<int>(s.periods.size()) < spec.shift + T + 1)
      throw DataError("make_splits: series for " + id +
                      " too short for shift+T+1 periods");
  }

  std::vector<std::string> ids;
  ids.reserve(series.size());
  for (const auto& [id, s] : series) ids.push_back(id);
  Rng rng(seed);
  rng.shuffle(ids);

  const auto E = ids.size();
  const auto n_train =
      static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(E)));
  const auto n_val =
      static_cast<std::size_t>(std::llround(spec.val_fraction * static_cast<double>(E)));
  if (n_train + n_val >= E)
    throw DataError("make_splits: fractions leave no test entities");

  EntitySplits entities;
  entities.train.assign(ids.begin(), ids.begin() + n_train);
  entities.val.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
  entities.test.assign(ids.begin() + n_train + n_val, ids.end());
  return build_sample_sets(series, assignment, entities, T, spec.shift);
}

double evaluate(Model& model, std::span<const SequenceSample> samples,
                LossKind loss) {
  if (samples.empty()) throw DataError("evaluate: no samples");
  double sum = 0.0;
  for (const auto& sample : samples) {
    const Tensor pred = model.forward(sample.inputs);
    const LossResult r = loss == LossKind::Rle ? rle_loss(sample.target, pred)
                                               : mse_loss(sample.target, pred);
    sum += r.value;
  }
  return sum / static_cast<double>(samples.size());
}

double prediction_gain(double baseline_loss, double model_loss) {
  if (!(baseline_loss > 0.0))
    throw DataError("prediction_gain: baseline loss must be positive");
  return (baseline_loss - model_loss) / baseline_loss;
}

// ---------------------------------------------------------------- config

void PipelineConfig::validate() const {
  if (!synth.valid()) throw DataError("invalid synth config");
  if (grid_k < 1 || synth.topic_count != grid_k * grid_k)
    throw DataError("topic count must equal grid k^2 (topics=" +
                    std::to_string(synth.topic_count) + ", k=" +
                    std::to_string(grid_k) + ")");
  split.validate();
  if (T < 1 || epochs < 1 || batch_size < 1)
    throw DataError("T, epochs, batch_size must be positive");
  if (synth.period_count < split.shift + T + 1)
    throw DataError("period count must be >= shift + T + 1");
  if (lda_iterations < 1) throw DataError("lda iterations must be positive");
  if (archs.empty()) throw DataError("no architectures selected");
}

namespace {

using nlohmann::json;

template <typename T>
void maybe(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

PipelineConfig config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("config parse error: ") + e.what());
  }
  PipelineConfig cfg;
  maybe(j, "seed", cfg.seed);
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    maybe(s, "entities", cfg.synth.entity_count);
    maybe(s, "topics", cfg.synth.topic_count);
    maybe(s, "periods", cfg.synth.period_count);
    maybe(s, "base_concentration", cfg.synth.base_concentration);
    maybe(s, "trend_fraction", cfg.synth.trend_fraction);
    maybe(s, "burst_radius", cfg.synth.burst_radius);
    maybe(s, "burst_rate", cfg.synth.burst_rate);
    maybe(s, "burst_gain", cfg.synth.burst_gain);
    maybe(s, "noise_level", cfg.synth.noise_level);
    maybe(s, "docs_per_period", cfg.synth.docs_per_period);
    maybe(s, "words_per_doc", cfg.synth.words_per_doc);
    maybe(s, "words_per_topic", cfg.synth.words_per_topic);
    maybe(s, "archetype_count", cfg.synth.archetype_count);
    maybe(s, "preference_jitter", cfg.synth.preference_jitter);
    maybe(s, "period_length", cfg.synth.period_length);
  }
  cfg.synth.seed = cfg.seed;
  if (j.contains("lda")) {
    const auto& l = j.at("lda");
    maybe(l, "iterations", cfg.lda_iterations);
    maybe(l, "alpha", cfg.lda_alpha);
    maybe(l, "beta", cfg.lda_beta);
    maybe(l, "min_count", cfg.vocab_min_count);
    maybe(l, "infer_sweeps", cfg.infer.sweeps);
    maybe(l, "infer_average_last", cfg.infer.average_last);
  }
  if (j.contains("grid")) maybe(j.at("grid"), "k", cfg.grid_k);
  if (j.contains("split")) {
    const auto& s = j.at("split");
    maybe(s, "train", cfg.split.train_fraction);
    maybe(s, "val", cfg.split.val_fraction);
    maybe(s, "test", cfg.split.test_fraction);
    maybe(s, "shift", cfg.split.shift);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    maybe(m, "T", cfg.T);
    maybe(m, "lstm_width", cfg.lstm_width);
    maybe(m, "conv_layers", cfg.conv_layers);
    maybe(m, "conv_channels", cfg.conv_channels);
    maybe(m, "kernel", cfg.kernel);
    maybe(m, "dense_widths", cfg.dense_widths);
    maybe(m, "l2", cfg.l2);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    maybe(t, "epochs", cfg.epochs);
    maybe(t, "batch_size", cfg.batch_size);
    maybe(t, "lr", cfg.lr);
    if (t.contains("archs")) {
      cfg.archs.clear();
      for (const auto& a : t.at("archs"))
        cfg.archs.push_back(arch_from_string(a.get<std::string>()));
    }
  }
  return cfg;
}

std::string config_to_json(const PipelineConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["synth"] = {{"entities", cfg.synth.entity_count},
                {"topics", cfg.synth.topic_count},
                {"periods", cfg.synth.period_count},
                {"base_concentration", cfg.synth.base_concentration},
                {"trend_fraction", cfg.synth.trend_fraction},
                {"burst_radius", cfg.synth.burst_radius},
                {"burst_rate", cfg.synth.burst_rate},
                {"burst_gain", cfg.synth.burst_gain},
                {"noise_level", cfg.synth.noise_level},
                {"docs_per_period", cfg.synth.docs_per_period},
                {"words_per_doc", cfg.synth.words_per_doc},
                {"words_per_topic", cfg.synth.words_per_topic},
                {"archetype_count", cfg.synth.archetype_count},
                {"preference_jitter", cfg.synth.preference_jitter},
                {"period_length", cfg.synth.period_length}};
  j["lda"] = {{"iterations", cfg.lda_iterations},
              {"alpha", cfg.lda_alpha},
              {"beta", cfg.lda_beta},
              {"min_count", cfg.vocab_min_count},
              {"infer_sweeps", cfg.infer.sweeps},
              {"infer_average_last", cfg.infer.average_last}};
  j["grid"] = {{"k", cfg.grid_k}};
  j["split"] = {{"train", cfg.split.train_fraction},
                {"val", cfg.split.val_fraction},
                {"test", cfg.split.test_fraction},
                {"shift", cfg.split.shift}};
  j["model"] = {{"T", cfg.T},
                {"lstm_width", cfg.lstm_width},
                {"conv_layers", cfg.conv_layers},
                {"conv_channels", cfg.conv_channels},
                {"kernel", cfg.kernel},
                {"dense_widths", cfg.dense_widths},
                {"l2", cfg.l2}};
  json arch_names = json::array();
  for (Arch a : cfg.archs) arch_names.push_back(arch_name(a));
  j["train"] = {{"epochs", cfg.epochs},
                {"batch_size", cfg.batch_size},
                {"lr", cfg.lr},
                {"archs", arch_names}};
  return j.dump(1);
}

// ---------------------------------------------------------------- report

const ArchResult* ExperimentReport::find(const std::string& name) const {
  for (const auto& a : archs)
    if (a.name == name) return &a;
  return nullptr;
}

std::string report_to_json(const ExperimentReport& report,
                           const PipelineConfig& cfg) {
  json j;
  j["config"] = json::parse(config_to_json(cfg));
  j["entities"] = {{"train", report.train_entities},
                   {"val", report.val_entities},
                   {"test", report.test_entities}};
  j["epochs"] = report.epochs;
  json archs = json::array();
  for (const auto& a : report.archs) {
    json e;
    e["name"] = a.name;
    e["train_rle"] = a.train_rle;
    e["val_rle"] = a.val_rle;
    e["test_rle"] = a.test_rle;
    e["best_epoch"] = a.best_epoch;
    e["test_rle_at_best"] = a.test_rle_at_best;
    e["test_mse_at_best"] = a.test_mse_at_best;
    e["gain_vs_mlp"] = a.gain_vs_mlp;
    archs.push_back(e);
  }
  j["architectures"] = archs;
  return j.dump(1);
}

// ---------------------------------------------------------------- pipeline

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct ParamSnapshot {
  std::vector<std::vector<double>> values;

  void capture(const std::vector<ParamRef>& params) {
    values.clear();
    for (const auto& p : params) values.push_back(p.value->values());
  }
  void restore(const std::vector<ParamRef>& params) const {
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i].value->values() = values[i];
  }
};

}  // namespace

ExperimentReport run_experiment(const PipelineConfig& cfg,
                                const std::filesystem::path& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  std::string stage = "init";
  try {
    stage = "synth";
    const SynthResult synth = generate_synthetic_logs(cfg.synth);
    write_text_file(out_dir / "logs.tsv", to_tsv(synth.entries));
    write_ground_truth(out_dir / "ground_truth.json", synth.truth);

    stage = "ingest";
    const PeriodSpec periods{0, cfg.synth.period_length, cfg.synth.period_count};
    const BucketResult buckets = bucket_entries(synth.entries, periods);

    stage = "lda-fit";
    std::vector<std::string> benchmark_corpus;
    for (const auto& [key, bundle] : buckets.bundles)
      if (key.period_index == 0)
        benchmark_corpus.insert(benchmark_corpus.end(), bundle.documents.begin(),
                                bundle.documents.end());
    const Vocabulary vocab = build_vocabulary(benchmark_corpus, cfg.vocab_min_count);
    std::vector<std::vector<int>> token_docs;
    token_docs.reserve(benchmark_corpus.size());
    for (const auto& doc : benchmark_corpus)
      token_docs.push_back(tokenize(vocab, doc));
    LdaFitConfig lda_cfg;
    lda_cfg.K = cfg.synth.topic_count;
    lda_cfg.alpha = cfg.lda_alpha;
    lda_cfg.beta = cfg.lda_beta;
    lda_cfg.iterations = cfg.lda_iterations;
    lda_cfg.seed = cfg.seed ^ 0x1daull;
    const LdaModel lda = fit_lda(token_docs, vocab, lda_cfg);
    save_lda(out_dir / "lda", lda);

    stage = "metrics";
    std::unordered_map<std::string, std::vector<double>> theta_cache;
    RelevanceFn relevance = [&](const std::string& doc) -> const std::vector<double>& {
      auto it = theta_cache.find(doc);
      if (it == theta_cache.end())
        it = theta_cache.emplace(doc, infer_relevance(lda, doc, cfg.infer).theta).first;
      return it->second;
    };
    const auto series = build_metric_series(buckets, relevance, lda.K, periods);
    write_metric_tensor(out_dir / "metrics", pack_metric_tensor(series));

    stage = "layout";
    const auto embedding =
        pca_embed(hellinger_features(lda), lda.K, lda.vocab.size());
    const GridAssignment assignment =
        split_diffuse_map(embedding, GridSpec{cfg.grid_k});
    write_assignment(out_dir / "assignment.json", assignment);
    write_frame_tensor(out_dir / "frames", series, assignment);

    stage = "split";
    const SampleSets sets =
        make_splits(series, assignment, cfg.split, cfg.T, cfg.seed ^ 0x5eed);
    {
      json sj;
      sj["train"] = sets.entities.train;
      sj["val"] = sets.entities.val;
      sj["test"] = sets.entities.test;
      sj["T"] = sets.T;
      sj["shift"] = sets.shift;
      write_text_file(out_dir / "splits.json", sj.dump(1));
    }

    stage = "train";
    ExperimentReport report;
    report.train_entities = sets.entities.train.size();
    report.val_entities = sets.entities.val.size();
    report.test_entities = sets.entities.test.size();
    report.epochs = cfg.epochs;

    std::vector<std::unique_ptr<Model>> best_models;
    for (std::size_t a = 0; a < cfg.archs.size(); ++a) {
      const Arch arch = cfg.archs[a];
      ModelConfig mc;
      mc.arch = arch;
      mc.k = cfg.grid_k;
      mc.T = cfg.T;
      mc.dense_widths = cfg.dense_widths;
      mc.lstm_width = cfg.lstm_width;
      mc.conv_layers = cfg.conv_layers;
      mc.conv_channels = cfg.conv_channels;
      mc.kernel = cfg.kernel;
      mc.l2 = cfg.l2;
      mc.seed = cfg.seed * 0x9E37u + 0x1000u + a;
      auto model = build_model(mc);

      AdamConfig ac;
      ac.lr = cfg.lr;
      ac.weight_decay = cfg.l2;
      AdamOptimizer opt(ac);
      opt.attach(model->params());

      ArchResult result;
      result.name = arch_name(arch);
      ParamSnapshot best;
      double best_val = std::numeric_limits<double>::infinity();

      for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double train_loss =
            train_epoch(*model, sets.train, cfg.batch_size, opt,
                        mc.seed ^ (0xE90Cull + static_cast<std::uint64_t>(epoch)));
        const auto t1 = std::chrono::steady_clock::now();
        result.epoch_seconds.push_back(
            std::chrono::duration<double>(t1 - t0).count());
        result.train_rle.push_back(train_loss);
        result.val_rle.push_back(evaluate(*model, sets.val, LossKind::Rle));
        result.test_rle.push_back(evaluate(*model, sets.test, LossKind::Rle));
        if (result.val_rle.back() < best_val) {
          best_val = result.val_rle.back();
          result.best_epoch = epoch;
          best.capture(model->params());
        }
      }

      best.restore(model->params());
      result.test_rle_at_best = result.test_rle[static_cast<std::size_t>(result.best_epoch)];
      result.test_mse_at_best = evaluate(*model, sets.test, LossKind::Mse);
      save_params(out_dir / "models" / result.name, model->params(), mc.seed,
                  opt.step_count());
      report.archs.push_back(std::move(result));
      best_models.push_back(std::move(model));
    }

    stage = "report";
    if (const ArchResult* mlp = report.find("mlp")) {
      for (auto& a : report.archs)
        a.gain_vs_mlp = prediction_gain(mlp->test_rle_at_best, a.test_rle_at_best);
    }
    const ArchResult* lrcn = report.find("lrcn");
    const ArchResult* sccn = report.find("sccn");
    if (lrcn && sccn) {
      const double lm = median(lrcn->epoch_seconds);
      if (lm > 0.0)
        report.sccn_lrcn_epoch_ratio = median(sccn->epoch_seconds) / lm;
    }

    write_text_file(out_dir / "report.json", report_to_json(report, cfg));
    {
      json tj;
      for (const auto& a : report.archs) {
        tj["epoch_seconds"][a.name] = a.epoch_seconds;
        tj["median_epoch_seconds"][a.name] = median(a.epoch_seconds);
      }
      tj["sccn_lrcn_epoch_ratio"] = report.sccn_lrcn_epoch_ratio;
      write_text_file(out_dir / "timing.json", tj.dump(1));
    }
    emit_plots(report, out_dir);

    stage = "heatmaps";
    {
      std::filesystem::create_directories(out_dir / "heatmaps");
      const std::size_t n_show = std::min<std::size_t>(3, sets.test.size());
      for (std::size_t i = 0; i < n_show; ++i) {
        const SequenceSample& sample = sets.test[i];
        std::vector<MetricFrame> frames;
        MetricFrame truth;
        truth.entity_id = sample.entity_id;
        truth.k = cfg.grid_k;
        truth.cells.assign(sample.target.data(),
                           sample.target.data() + sample.target.size());
        frames.push_back(truth);
        for (std::size_t a = 0; a < best_models.size(); ++a) {
          const Tensor pred = best_models[a]->forward(sample.inputs);
          MetricFrame f;
          f.entity_id = sample.entity_id;
          f.k = cfg.grid_k;
          f.cells.assign(pred.data(), pred.data() + pred.size());
          frames.push_back(f);
        }
        double lo = frames[0].cells[0], hi = frames[0].cells[0];
        for (const auto& f : frames)
          for (double v : f.cells) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
          }
        write_text_file(out_dir / "heatmaps" / (sample.entity_id + "_true.svg"),
                        frame_svg(frames[0], lo, hi));
        for (std::size_t a = 0; a < best_models.size(); ++a)
          write_text_file(out_dir / "heatmaps" /
                              (sample.entity_id + "_" +
                               report.archs[a].name + ".svg"),
                          frame_svg(frames[a + 1], lo, hi));
      }
    }
    return report;
  } catch (const DataError& e) {
    throw DataError("stage " + stage + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError("stage " + stage + ": " + e.what());
  }
}

}  // namespace gridcast
