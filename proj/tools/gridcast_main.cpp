// gridcast command line: drives the pipeline stage by stage or end to end.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridcast/harness.hpp"

namespace fs = std::filesystem;
using namespace gridcast;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

PipelineConfig load_config(const GlobalOpts& g) {
  PipelineConfig cfg;
  if (!g.config_path.empty())
    cfg = config_from_json(read_text_file(g.config_path));
  if (g.seed_set) {
    cfg.seed = g.seed;
    cfg.synth.seed = g.seed;
  }
  return cfg;
}

PeriodSpec periods_of(const PipelineConfig& cfg) {
  return PeriodSpec{0, cfg.synth.period_length, cfg.synth.period_count};
}

void write_bundles(const fs::path& path, const BucketResult& buckets) {
  nlohmann::json j;
  j["input_count"] = buckets.input_count;
  j["dropped_out_of_range"] = buckets.dropped_out_of_range;
  auto arr = nlohmann::json::array();
  for (const auto& [key, bundle] : buckets.bundles) {
    nlohmann::json b;
    b["entity"] = bundle.entity_id;
    b["period"] = bundle.period_index;
    b["raw_count"] = bundle.raw_count;
    b["documents"] = bundle.documents;
    arr.push_back(b);
  }
  j["bundles"] = arr;
  write_text_file(path, j.dump(1));
}

BucketResult read_bundles(const fs::path& path) {
  const auto j = nlohmann::json::parse(read_text_file(path));
  BucketResult result;
  result.input_count = j.at("input_count").get<std::uint64_t>();
  result.dropped_out_of_range = j.at("dropped_out_of_range").get<std::uint64_t>();
  for (const auto& b : j.at("bundles")) {
    EntityPeriodBundle bundle;
    bundle.entity_id = b.at("entity").get<std::string>();
    bundle.period_index = b.at("period").get<std::int64_t>();
    bundle.raw_count = b.at("raw_count").get<std::uint64_t>();
    bundle.documents = b.at("documents").get<std::vector<std::string>>();
    result.bundles.emplace(EntityPeriod{bundle.entity_id, bundle.period_index},
                           std::move(bundle));
  }
  return result;
}

std::map<std::string, MetricSeries> compute_series(const PipelineConfig& cfg,
                                                   const BucketResult& buckets,
                                                   const LdaModel& lda) {
  std::map<std::string, std::vector<double>> cache;
  RelevanceFn relevance = [&](const std::string& doc) -> const std::vector<double>& {
    auto it = cache.find(doc);
    if (it == cache.end())
      it = cache.emplace(doc, infer_relevance(lda, doc, cfg.infer).theta).first;
    return it->second;
  };
  return build_metric_series(buckets, relevance, lda.K, periods_of(cfg));
}

struct SplitFileData {
  EntitySplits entities;
  int T = 0;
  int shift = 0;
};

SplitFileData read_split_file(const fs::path& path) {
  const auto j = nlohmann::json::parse(read_text_file(path));
  SplitFileData d;
  d.entities.train = j.at("train").get<std::vector<std::string>>();
  d.entities.val = j.at("val").get<std::vector<std::string>>();
  d.entities.test = j.at("test").get<std::vector<std::string>>();
  d.T = j.at("T").get<int>();
  d.shift = j.at("shift").get<int>();
  return d;
}

ModelConfig model_config(const PipelineConfig& cfg, Arch arch, std::size_t index) {
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
  mc.seed = cfg.seed * 0x9E37u + 0x1000u + index;
  return mc;
}

std::vector<SequenceSample> samples_for(
    const std::map<std::string, MetricSeries>& series,
    const GridAssignment& assignment, const std::vector<std::string>& ids,
    int first, int T) {
  std::vector<SequenceSample> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = series.find(id);
    if (it == series.end()) throw DataError("unknown entity in split: " + id);
    out.push_back(make_sample(it->second, assignment, first, T));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topical behavior grids: synthesize, summarize, lay out, predict"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", g.seed, "override config seed");
  app.add_option("--out-dir", g.out_dir, "output directory");

  auto* cmd_synth = app.add_subcommand("synth", "generate synthetic logs + ground truth");

  std::string logs_path;
  auto* cmd_ingest = app.add_subcommand("ingest", "parse and bucket a TSV log file");
  cmd_ingest->add_option("--logs", logs_path, "input TSV log file")->required();

  auto* cmd_topics = app.add_subcommand("topics", "LDA model operations");
  cmd_topics->require_subcommand(1);
  std::string bundles_path, model_dir, input_path;
  auto* cmd_fit = cmd_topics->add_subcommand("fit", "fit LDA on the benchmark period corpus");
  cmd_fit->add_option("--bundles", bundles_path, "bundles.json from ingest")->required();
  auto* cmd_infer = cmd_topics->add_subcommand("infer", "per-document topic relevance");
  cmd_infer->add_option("--model", model_dir, "LDA checkpoint directory")->required();
  cmd_infer->add_option("--input", input_path, "file with one document per line")->required();

  std::string metrics_bundles, metrics_model;
  auto* cmd_metrics = app.add_subcommand("metrics", "compute topical metric series");
  cmd_metrics->add_option("--bundles", metrics_bundles, "bundles.json")->required();
  cmd_metrics->add_option("--model", metrics_model, "LDA checkpoint directory")->required();

  std::string layout_model, layout_metrics;
  auto* cmd_layout = app.add_subcommand("layout", "embed topics and assign grid cells");
  cmd_layout->add_option("--model", layout_model, "LDA checkpoint directory")->required();
  cmd_layout->add_option("--metrics", layout_metrics,
                         "metrics tensor directory; also emits the frame tensor");

  std::string split_metrics, split_assignment;
  auto* cmd_split = app.add_subcommand("split", "partition entities into train/val/test");
  cmd_split->add_option("--metrics", split_metrics, "metrics tensor directory")->required();
  cmd_split->add_option("--assignment", split_assignment, "assignment.json")->required();

  std::string train_arch, train_metrics, train_assignment, train_splits;
  auto* cmd_train = app.add_subcommand("train", "train one architecture");
  cmd_train->add_option("--arch", train_arch, "mlp|tdrn|lrcn|sccn")->required();
  cmd_train->add_option("--metrics", train_metrics, "metrics tensor directory")->required();
  cmd_train->add_option("--assignment", train_assignment, "assignment.json")->required();
  cmd_train->add_option("--splits", train_splits, "splits.json")->required();

  std::string eval_arch, eval_checkpoint, eval_metrics, eval_assignment,
      eval_splits, eval_split_name = "test", eval_loss = "rle";
  auto* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint on one split");
  cmd_eval->add_option("--arch", eval_arch, "mlp|tdrn|lrcn|sccn")->required();
  cmd_eval->add_option("--checkpoint", eval_checkpoint, "model checkpoint directory")->required();
  cmd_eval->add_option("--metrics", eval_metrics, "metrics tensor directory")->required();
  cmd_eval->add_option("--assignment", eval_assignment, "assignment.json")->required();
  cmd_eval->add_option("--splits", eval_splits, "splits.json")->required();
  cmd_eval->add_option("--split", eval_split_name, "train|val|test (default test)");
  cmd_eval->add_option("--loss", eval_loss, "rle|mse (default rle)");

  std::string report_dir;
  auto* cmd_report = app.add_subcommand("report", "rebuild plots from an out directory");
  cmd_report->add_option("--dir", report_dir, "directory holding report.json");

  auto* cmd_run_all = app.add_subcommand("run-all", "full experiment end to end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    g.seed_set = seed_opt->count() > 0;
    const PipelineConfig cfg = load_config(g);
    const fs::path out(g.out_dir);
    fs::create_directories(out);

    if (cmd_synth->parsed()) {
      const SynthResult synth = generate_synthetic_logs(cfg.synth);
      write_text_file(out / "logs.tsv", to_tsv(synth.entries));
      write_ground_truth(out / "ground_truth.json", synth.truth);
      std::cout << "entries=" << synth.entries.size()
                << " entities=" << cfg.synth.entity_count
                << " periods=" << cfg.synth.period_count << "\n";
    } else if (cmd_ingest->parsed()) {
      ParseStats stats;
      const auto entries = parse_log_stream(read_text_file(logs_path), stats);
      const BucketResult buckets = bucket_entries(entries, periods_of(cfg));
      write_bundles(out / "bundles.json", buckets);
      std::cout << "accepted=" << stats.accepted
                << " rejected_field_count=" << stats.rejected_field_count
                << " rejected_bad_timestamp=" << stats.rejected_bad_timestamp
                << " rejected_empty_entity=" << stats.rejected_empty_entity
                << " rejected_empty_text=" << stats.rejected_empty_text
                << " dropped_out_of_range=" << buckets.dropped_out_of_range
                << " bundles=" << buckets.bundles.size() << "\n";
    } else if (cmd_fit->parsed()) {
      const BucketResult buckets = read_bundles(bundles_path);
      std::vector<std::string> corpus;
      for (const auto& [key, bundle] : buckets.bundles)
        if (key.period_index == 0)
          corpus.insert(corpus.end(), bundle.documents.begin(),
                        bundle.documents.end());
      const Vocabulary vocab = build_vocabulary(corpus, cfg.vocab_min_count);
      std::vector<std::vector<int>> docs;
      docs.reserve(corpus.size());
      for (const auto& d : corpus) docs.push_back(tokenize(vocab, d));
      LdaFitConfig lc;
      lc.K = cfg.synth.topic_count;
      lc.alpha = cfg.lda_alpha;
      lc.beta = cfg.lda_beta;
      lc.iterations = cfg.lda_iterations;
      lc.seed = cfg.seed ^ 0x1daull;
      const LdaModel lda = fit_lda(docs, vocab, lc);
      save_lda(out / "lda", lda);
      std::cout << "K=" << lda.K << " V=" << lda.vocab.size()
                << " docs=" << docs.size() << "\n";
    } else if (cmd_infer->parsed()) {
      const LdaModel lda = load_lda(model_dir);
      const std::string content = read_text_file(input_path);
      std::size_t pos = 0;
      while (pos < content.size()) {
        auto nl = content.find('\n', pos);
        if (nl == std::string::npos) nl = content.size();
        const std::string doc = content.substr(pos, nl - pos);
        pos = nl + 1;
        if (doc.empty()) continue;
        const ActivityRelevance rel = infer_relevance(lda, doc, cfg.infer);
        for (int t = 0; t < lda.K; ++t) {
          if (t) std::cout << ' ';
          std::cout << format_double(rel.theta[t]);
        }
        std::cout << (rel.oov_fallback ? " # oov-fallback" : "") << "\n";
      }
    } else if (cmd_metrics->parsed()) {
      const BucketResult buckets = read_bundles(metrics_bundles);
      const LdaModel lda = load_lda(metrics_model);
      const auto series = compute_series(cfg, buckets, lda);
      write_metric_tensor(out / "metrics", pack_metric_tensor(series));
      std::cout << "entities=" << series.size()
                << " periods=" << cfg.synth.period_count << " K=" << lda.K << "\n";
    } else if (cmd_layout->parsed()) {
      const LdaModel lda = load_lda(layout_model);
      const auto embedding =
          pca_embed(hellinger_features(lda), lda.K, lda.vocab.size());
      const GridAssignment assignment =
          split_diffuse_map(embedding, GridSpec{cfg.grid_k});
      write_assignment(out / "assignment.json", assignment);
      if (!layout_metrics.empty()) {
        const auto series = unpack_metric_tensor(read_metric_tensor(layout_metrics));
        write_frame_tensor(out / "frames", series, assignment);
      }
      std::cout << "k=" << cfg.grid_k
                << " lambda1=" << format_double(embedding.eigenvalues[0])
                << " lambda2=" << format_double(embedding.eigenvalues[1]) << "\n";
    } else if (cmd_split->parsed()) {
      const auto series = unpack_metric_tensor(read_metric_tensor(split_metrics));
      const GridAssignment assignment = read_assignment(split_assignment);
      const SampleSets sets =
          make_splits(series, assignment, cfg.split, cfg.T, cfg.seed ^ 0x5eed);
      nlohmann::json sj;
      sj["train"] = sets.entities.train;
      sj["val"] = sets.entities.val;
      sj["test"] = sets.entities.test;
      sj["T"] = sets.T;
      sj["shift"] = sets.shift;
      write_text_file(out / "splits.json", sj.dump(1));
      std::cout << "train=" << sets.train.size() << " val=" << sets.val.size()
                << " test=" << sets.test.size() << "\n";
    } else if (cmd_train->parsed()) {
      const auto series = unpack_metric_tensor(read_metric_tensor(train_metrics));
      const GridAssignment assignment = read_assignment(train_assignment);
      const SplitFileData split = read_split_file(train_splits);
      const auto train_set =
          samples_for(series, assignment, split.entities.train, 0, split.T);
      const auto val_set =
          samples_for(series, assignment, split.entities.val, 0, split.T);
      const auto test_set = samples_for(series, assignment, split.entities.test,
                                        split.shift, split.T);

      const Arch arch = arch_from_string(train_arch);
      std::size_t index = 0;
      for (std::size_t i = 0; i < cfg.archs.size(); ++i)
        if (cfg.archs[i] == arch) index = i;
      const ModelConfig mc = model_config(cfg, arch, index);
      auto model = build_model(mc);
      AdamConfig ac;
      ac.lr = cfg.lr;
      ac.weight_decay = cfg.l2;
      AdamOptimizer opt(ac);
      opt.attach(model->params());

      ArchResult result;
      result.name = arch_name(arch);
      std::vector<std::vector<double>> best_values;
      double best_val = std::numeric_limits<double>::infinity();
      for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double train_loss =
            train_epoch(*model, train_set, cfg.batch_size, opt,
                        mc.seed ^ (0xE90Cull + static_cast<std::uint64_t>(epoch)));
        result.train_rle.push_back(train_loss);
        result.val_rle.push_back(evaluate(*model, val_set, LossKind::Rle));
        result.test_rle.push_back(evaluate(*model, test_set, LossKind::Rle));
        if (result.val_rle.back() < best_val) {
          best_val = result.val_rle.back();
          result.best_epoch = epoch;
          best_values.clear();
          for (const auto& p : model->params()) best_values.push_back(p.value->values());
        }
        std::cout << "epoch " << epoch << " train=" << format_double(train_loss)
                  << " val=" << format_double(result.val_rle.back())
                  << " test=" << format_double(result.test_rle.back()) << "\n";
      }
      for (std::size_t i = 0; i < model->params().size(); ++i)
        model->params()[i].value->values() = best_values[i];
      save_params(out / "models" / result.name, model->params(), mc.seed,
                  opt.step_count());
      write_text_file(out / ("curves_" + result.name + ".csv"), curves_csv(result));
      std::cout << "best_epoch=" << result.best_epoch << " test_rle="
                << format_double(result.test_rle[static_cast<std::size_t>(
                       result.best_epoch)])
                << "\n";
    } else if (cmd_eval->parsed()) {
      const auto series = unpack_metric_tensor(read_metric_tensor(eval_metrics));
      const GridAssignment assignment = read_assignment(eval_assignment);
      const SplitFileData split = read_split_file(eval_splits);
      const Arch arch = arch_from_string(eval_arch);
      const ModelConfig mc = model_config(cfg, arch, 0);
      auto model = build_model(mc);
      load_params(eval_checkpoint, model->params());

      std::vector<SequenceSample> samples;
      if (eval_split_name == "train")
        samples = samples_for(series, assignment, split.entities.train, 0, split.T);
      else if (eval_split_name == "val")
        samples = samples_for(series, assignment, split.entities.val, 0, split.T);
      else if (eval_split_name == "test")
        samples = samples_for(series, assignment, split.entities.test,
                              split.shift, split.T);
      else
        throw UsageError("unknown split: " + eval_split_name);

      const LossKind kind = eval_loss == "mse" ? LossKind::Mse
                           : eval_loss == "rle"
                               ? LossKind::Rle
                               : throw UsageError("unknown loss: " + eval_loss);
      std::cout << format_double(evaluate(*model, samples, kind)) << "\n";
    } else if (cmd_report->parsed()) {
      const fs::path dir = report_dir.empty() ? out : fs::path(report_dir);
      const auto j = nlohmann::json::parse(read_text_file(dir / "report.json"));
      ExperimentReport report;
      for (const auto& a : j.at("architectures")) {
        ArchResult r;
        r.name = a.at("name").get<std::string>();
        r.train_rle = a.at("train_rle").get<std::vector<double>>();
        r.val_rle = a.at("val_rle").get<std::vector<double>>();
        r.test_rle = a.at("test_rle").get<std::vector<double>>();
        r.best_epoch = a.at("best_epoch").get<int>();
        r.test_rle_at_best = a.at("test_rle_at_best").get<double>();
        report.archs.push_back(std::move(r));
      }
      emit_plots(report, dir);
      for (const auto& a : report.archs)
        std::cout << a.name << " best_epoch=" << a.best_epoch
                  << " test_rle=" << format_double(a.test_rle_at_best)
                  << " gain_vs_mlp="
                  << format_double(
                         j.at("architectures")[&a - report.archs.data()]
                             .at("gain_vs_mlp")
                             .get<double>())
                  << "\n";
    } else if (cmd_run_all->parsed()) {
      const ExperimentReport report = run_experiment(cfg, out);
      for (const auto& a : report.archs)
        std::cout << a.name << " best_epoch=" << a.best_epoch
                  << " test_rle=" << format_double(a.test_rle_at_best)
                  << " gain_vs_mlp=" << format_double(a.gain_vs_mlp) << "\n";
      std::cout << "sccn/lrcn epoch time ratio: "
                << format_double(report.sccn_lrcn_epoch_ratio) << "\n";
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
}
