#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gridcast/layout.hpp"
#include "gridcast/neurons.hpp"

namespace gridcast {

enum class Arch { Mlp, Tdrn, Lrcn, Sccn };

Arch arch_from_string(std::string_view tag);
std::string arch_name(Arch arch);

struct ModelConfig {
  Arch arch = Arch::Mlp;
  int k = 8;
  int T = 8;
  std::vector<int> dense_widths = {256, 64};  // MLP hidden stack
  int lstm_width = 64;
  int conv_layers = 2;
  int conv_channels = 8;
  int kernel = 3;
  double l2 = 1e-4;
  std::uint64_t seed = 1;

  void validate() const;
};

// T input frames for consecutive periods plus the frame of the period after.
struct SequenceSample {
  std::string entity_id;
  Tensor inputs;  // [T][k][k]
  Tensor target;  // [k][k]
};

// One architecture instance over sequences of metric frames. forward caches
// activations for the matching backward; parameter gradients accumulate until
// zero_grads.
class Model {
 public:
  virtual ~Model() = default;

  virtual Tensor forward(const Tensor& frames) = 0;  // [T][k][k] -> [k][k]
  virtual void backward(const Tensor& dpred) = 0;

  const ModelConfig& config() const { return cfg_; }
  const std::vector<ParamRef>& params() { return params_; }
  void zero_grads();

 protected:
  explicit Model(const ModelConfig& cfg) : cfg_(cfg) {}
  void check_input(const Tensor& frames) const;

  ModelConfig cfg_;
  std::vector<ParamRef> params_;
};

std::unique_ptr<Model> build_model(const ModelConfig& cfg);

// Dense stack over the T frames cascaded into one vector.
class MlpModel : public Model {
 public:
  explicit MlpModel(const ModelConfig& cfg);
  Tensor forward(const Tensor& frames) override;
  void backward(const Tensor& dpred) override;

  std::vector<DenseLayer> layers;  // hidden stack + linear readout

 private:
  std::vector<DenseLayer::Cache> caches_;
  std::vector<Tensor> activations_;  // tanh outputs of hidden layers
};

// Two stacked LSTM layers over the T periods: the first tracks the metric
// vectors period by period, the second tracks the first layer's output
// states. Purely temporal; no spatial weight sharing.
class TdrnModel : public Model {
 public:
  explicit TdrnModel(const ModelConfig& cfg);
  Tensor forward(const Tensor& frames) override;
  void backward(const Tensor& dpred) override;

  LSTMCell lstm1;  // k*k -> width
  LSTMCell lstm2;  // width -> width
  DenseLayer readout;

 private:
  std::vector<LSTMCell::Cache> caches1_, caches2_;  // [T]
  DenseLayer::Cache readout_cache_;
};

// Shared spatial stack applied to every frame, flattened into a temporal
// LSTM. SpatialLayer is Conv2DLayer for the LRCN and LocallyConnected2DLayer
// for the SCCN; connectivity and output shapes are identical.
template <typename SpatialLayer>
class RecurrentSpatialModel : public Model {
 public:
  explicit RecurrentSpatialModel(const ModelConfig& cfg);
  Tensor forward(const Tensor& frames) override;
  void backward(const Tensor& dpred) override;

  std::vector<SpatialLayer> spatial_layers;
  LSTMCell temporal;
  DenseLayer readout;

  int flat_dim() const { return flat_dim_; }

 private:
  int flat_dim_ = 0;
  std::vector<std::vector<typename SpatialLayer::Cache>> spatial_caches_;  // [T][L]
  std::vector<std::vector<Tensor>> spatial_acts_;  // tanh outputs per [T][L]
  std::vector<LSTMCell::Cache> temporal_caches_;   // [T]
  DenseLayer::Cache readout_cache_;
};

using LrcnModel = RecurrentSpatialModel<Conv2DLayer>;
using SccnModel = RecurrentSpatialModel<LocallyConnected2DLayer>;

// Copies the LRCN's shared kernels into every positional slot of the SCCN's
// LCN layers (and the LSTM/readout parameters), after which the two produce
// identical forward outputs on any input.
void init_sccn_from_lrcn(Model& sccn, Model& lrcn);

// Mean pre-update batch loss for one epoch: shuffle with the epoch-seeded
// RNG, then per batch run forward, RLE over the batch cells, backward, and
// one Adam step. Throws NumericError on a non-finite loss.
double train_epoch(Model& model, std::span<const SequenceSample> samples,
                   int batch_size, AdamOptimizer& optimizer,
                   std::uint64_t epoch_seed);

// Builds the sample whose inputs are series periods [first, first+T) and
// whose target is period first+T, as grid frames.
SequenceSample make_sample(const MetricSeries& series,
                           const GridAssignment& assignment, int first, int T);

struct Prediction {
  MetricFrame frame;                // period after the series end
  std::vector<double> topic_values; // frame routed back through the assignment
};

// Predicts the frame for the period following the series, using its last T
// periods as input.
Prediction predict(Model& model, const MetricSeries& series,
                   const GridAssignment& assignment);

}  // namespace gridcast
