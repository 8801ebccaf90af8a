#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridcast/loglab.hpp"
#include "gridcast/models.hpp"

namespace gridcast {

// Entity-wise split fractions plus the test-window shift: test samples read
// later periods than anything the training windows touch.
struct SplitSpec {
  double train_fraction = 0.70;
  double val_fraction = 0.08;
  double test_fraction = 0.22;
  int shift = 2;  // s >= 1

  void validate() const;
};

struct EntitySplits {
  std::vector<std::string> train, val, test;
};

struct SampleSets {
  std::vector<SequenceSample> train, val, test;
  EntitySplits entities;
  int T = 0;
  int shift = 0;
};

// Partitions entities by a seeded shuffle. Train/val windows are periods
// [0, T) -> T; test windows are [s, s+T) -> s+T.
SampleSets make_splits(const std::map<std::string, MetricSeries>& series,
                       const GridAssignment& assignment, const SplitSpec& spec,
                       int T, std::uint64_t seed);

enum class LossKind { Rle, Mse };

// Mean loss over samples, no parameter updates.
double evaluate(Model& model, std::span<const SequenceSample> samples,
                LossKind loss);

// Fractional loss reduction relative to a baseline: (baseline - model) / baseline.
double prediction_gain(double baseline_loss, double model_loss);

// Everything one experiment needs, with desk-scale defaults.
struct PipelineConfig {
  std::uint64_t seed = 7;
  SynthConfig synth;
  int lda_iterations = 200;
  double lda_alpha = 0.0;  // 0 = 50/K
  double lda_beta = 0.01;
  int vocab_min_count = 1;
  InferConfig infer;
  int grid_k = 4;
  SplitSpec split;
  int T = 4;
  int epochs = 10;
  int batch_size = 32;
  double lr = 3e-3;
  double l2 = 1e-4;
  int lstm_width = 64;
  int conv_layers = 2;
  int conv_channels = 8;
  int kernel = 3;
  std::vector<int> dense_widths = {256, 64};
  std::vector<Arch> archs = {Arch::Mlp, Arch::Tdrn, Arch::Lrcn, Arch::Sccn};

  void validate() const;
};

PipelineConfig config_from_json(const std::string& json_text);
std::string config_to_json(const PipelineConfig& cfg);

struct ArchResult {
  std::string name;
  std::vector<double> train_rle, val_rle, test_rle;  // per epoch
  std::vector<double> epoch_seconds;                 // excluded from report.json
  int best_epoch = -1;  // argmin of val_rle
  double test_rle_at_best = 0.0;
  double test_mse_at_best = 0.0;
  double gain_vs_mlp = 0.0;  // from test RLE at each model's best epoch
};

struct ExperimentReport {
  std::vector<ArchResult> archs;
  std::size_t train_entities = 0, val_entities = 0, test_entities = 0;
  int epochs = 0;
  double sccn_lrcn_epoch_ratio = 0.0;  // median SCCN / median LRCN seconds

  const ArchResult* find(const std::string& name) const;
};

// Runs synth -> ingest -> LDA -> metrics -> layout -> splits -> train/eval
// for every architecture with shared splits and seeds, then writes
// report.json, curves CSVs, SVG plots, heatmaps, and checkpoints under
// out_dir. Timing goes to timing.json so report.json stays byte-reproducible
// for a fixed config and seed.
ExperimentReport run_experiment(const PipelineConfig& cfg,
                                const std::filesystem::path& out_dir);

// report.json payload (deterministic fields only).
std::string report_to_json(const ExperimentReport& report,
                           const PipelineConfig& cfg);

// Loss-curve CSV: header epoch,train_rle,val_rle,test_rle.
std::string curves_csv(const ArchResult& arch);

// Per-model loss curves as a standalone SVG line chart.
std::string curves_svg(const std::vector<ArchResult>& archs,
                       const std::string& split_name);

// Heatmap of one frame; linear color ramp from lo to hi.
std::string frame_svg(const MetricFrame& frame, double lo, double hi);

void emit_plots(const ExperimentReport& report,
                const std::filesystem::path& out_dir);

}  // namespace gridcast
