#include "gridcast/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <type_traits>

namespace gridcast {

Arch arch_from_string(std::string_view tag) {
  if (tag == "mlp") return Arch::Mlp;
  if (tag == "tdrn") return Arch::Tdrn;
  if (tag == "lrcn") return Arch::Lrcn;
  if (tag == "sccn") return Arch::Sccn;
  throw DataError("unknown architecture tag: " + std::string(tag));
}

std::string arch_name(Arch arch) {
  switch (arch) {
    case Arch::Mlp: return "mlp";
    case Arch::Tdrn: return "tdrn";
    case Arch::Lrcn: return "lrcn";
    case Arch::Sccn: return "sccn";
  }
  throw DataError("unknown architecture");
}

void ModelConfig::validate() const {
  if (k < 1) throw DataError("ModelConfig: k must be positive");
  if (T < 1) throw DataError("ModelConfig: T must be positive");
  if (lstm_width < 1) throw DataError("ModelConfig: lstm_width must be positive");
  if (l2 < 0) throw DataError("ModelConfig: l2 must be non-negative");
  for (int w : dense_widths)
    if (w < 1) throw DataError("ModelConfig: dense widths must be positive");
  if (arch == Arch::Lrcn || arch == Arch::Sccn) {
    if (conv_layers < 1 || conv_channels < 1)
      throw DataError("ModelConfig: conv stack sizes must be positive");
    if (kernel < 1 || kernel > k)
      throw DataError("ModelConfig: kernel must be in [1, k]");
    if (k - conv_layers * (kernel - 1) < 1)
      throw DataError("ModelConfig: conv stack consumes the whole grid");
  }
}

void Model::zero_grads() {
  for (auto& p : params_) p.grad->fill(0.0);
}

void Model::check_input(const Tensor& frames) const {
  if (frames.ndim() != 3 || frames.dim(0) != cfg_.T || frames.dim(1) != cfg_.k ||
      frames.dim(2) != cfg_.k)
    throw DataError("model input must be [T][k][k], got " + shape_string(frames));
}

namespace {

Tensor tanh_forward(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

// dx from dy and the cached tanh output.
Tensor tanh_backward(const Tensor& dy, const Tensor& y) {
  Tensor dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * (1.0 - y[i] * y[i]);
  return dx;
}

}  // namespace

// ---------------------------------------------------------------- MLP

MlpModel::MlpModel(const ModelConfig& cfg) : Model(cfg) {
  const int input = cfg.T * cfg.k * cfg.k;
  const int output = cfg.k * cfg.k;
  Rng rng(cfg.seed);
  int prev = input;
  for (int width : cfg.dense_widths) {
    layers.emplace_back(prev, width);
    prev = width;
  }
  layers.emplace_back(prev, output);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].init(rng);
    layers[l].collect_params("dense" + std::to_string(l), params_);
  }
  caches_.resize(layers.size());
  activations_.resize(layers.size());
}

Tensor MlpModel::forward(const Tensor& frames) {
  check_input(frames);
  Tensor x({cfg_.T * cfg_.k * cfg_.k});
  std::copy(frames.data(), frames.data() + frames.size(), x.data());
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    x = tanh_forward(layers[l].forward(x, caches_[l]));
    activations_[l] = x;
  }
  Tensor out = layers.back().forward(x, caches_.back());
  Tensor pred({cfg_.k, cfg_.k});
  std::copy(out.data(), out.data() + out.size(), pred.data());
  return pred;
}

void MlpModel::backward(const Tensor& dpred) {
  Tensor dy({cfg_.k * cfg_.k});
  std::copy(dpred.data(), dpred.data() + dpred.size(), dy.data());
  dy = layers.back().backward(dy, caches_.back());
  for (std::size_t l = layers.size() - 1; l-- > 0;) {
    dy = tanh_backward(dy, activations_[l]);
    dy = layers[l].backward(dy, caches_[l]);
  }
}

// ---------------------------------------------------------------- TDRN

TdrnModel::TdrnModel(const ModelConfig& cfg)
    : Model(cfg),
      lstm1(cfg.k * cfg.k, cfg.lstm_width),
      lstm2(cfg.lstm_width, cfg.lstm_width),
      readout(cfg.lstm_width, cfg.k * cfg.k) {
  Rng rng(cfg.seed);
  lstm1.init(rng);
  lstm2.init(rng);
  readout.init(rng);
  lstm1.collect_params("lstm1", params_);
  lstm2.collect_params("lstm2", params_);
  readout.collect_params("readout", params_);
  caches1_.resize(static_cast<std::size_t>(cfg.T));
  caches2_.resize(static_cast<std::size_t>(cfg.T));
}

Tensor TdrnModel::forward(const Tensor& frames) {
  check_input(frames);
  const int cells = cfg_.k * cfg_.k;
  LSTMCell::State s1 = lstm1.initial_state();
  LSTMCell::State s2 = lstm2.initial_state();
  Tensor x({cells});
  for (int p = 0; p < cfg_.T; ++p) {
    std::copy(frames.data() + static_cast<std::size_t>(p) * cells,
              frames.data() + static_cast<std::size_t>(p + 1) * cells, x.data());
    s1 = lstm1.forward(x, s1, caches1_[p]);
    s2 = lstm2.forward(s1.h, s2, caches2_[p]);
  }
  Tensor out = readout.forward(s2.h, readout_cache_);
  Tensor pred({cfg_.k, cfg_.k});
  std::copy(out.data(), out.data() + out.size(), pred.data());
  return pred;
}

void TdrnModel::backward(const Tensor& dpred) {
  const int cells = cfg_.k * cfg_.k;
  Tensor dy({cells});
  std::copy(dpred.data(), dpred.data() + dpred.size(), dy.data());
  Tensor dh_final = readout.backward(dy, readout_cache_);

  LSTMCell::StateGrad d2{dh_final, Tensor({cfg_.lstm_width})};
  LSTMCell::StateGrad d1{Tensor({cfg_.lstm_width}), Tensor({cfg_.lstm_width})};
  for (int p = cfg_.T - 1; p >= 0; --p) {
    Tensor dh1;  // gradient into layer 1's output at step p
    d2 = lstm2.backward(d2, caches2_[p], &dh1);
    for (int j = 0; j < cfg_.lstm_width; ++j) d1.dh[j] += dh1[j];
    d1 = lstm1.backward(d1, caches1_[p], nullptr);
  }
}

// --------------------------------------------------- LRCN / SCCN (shared)

namespace {

Conv2DLayer make_spatial_layer(const ModelConfig& cfg, int in_ch, int /*h*/,
                               int /*w*/, std::type_identity<Conv2DLayer>) {
  return Conv2DLayer(in_ch, cfg.conv_channels, cfg.kernel, cfg.kernel);
}

LocallyConnected2DLayer make_spatial_layer(
    const ModelConfig& cfg, int in_ch, int h, int w,
    std::type_identity<LocallyConnected2DLayer>) {
  return LocallyConnected2DLayer(in_ch, cfg.conv_channels, cfg.kernel,
                                 cfg.kernel, h, w);
}

}  // namespace

template <typename SpatialLayer>
RecurrentSpatialModel<SpatialLayer>::RecurrentSpatialModel(const ModelConfig& cfg)
    : Model(cfg),
      temporal(1, 1),  // re-built below once flat_dim_ is known
      readout(1, 1) {
  Rng rng(cfg.seed);
  int h = cfg.k, w = cfg.k, in_ch = 1;
  for (int l = 0; l < cfg.conv_layers; ++l) {
    spatial_layers.push_back(make_spatial_layer(
        cfg, in_ch, h, w, std::type_identity<SpatialLayer>{}));
    spatial_layers.back().init(rng);
    h -= cfg.kernel - 1;
    w -= cfg.kernel - 1;
    in_ch = cfg.conv_channels;
  }
  flat_dim_ = in_ch * h * w;
  temporal = LSTMCell(flat_dim_, cfg.lstm_width);
  temporal.init(rng);
  readout = DenseLayer(cfg.lstm_width, cfg.k * cfg.k);
  readout.init(rng);

  for (std::size_t l = 0; l < spatial_layers.size(); ++l)
    spatial_layers[l].collect_params("spatial" + std::to_string(l), params_);
  temporal.collect_params("temporal_lstm", params_);
  readout.collect_params("readout", params_);

  spatial_caches_.assign(
      cfg.T, std::vector<typename SpatialLayer::Cache>(spatial_layers.size()));
  spatial_acts_.assign(cfg.T, std::vector<Tensor>(spatial_layers.size()));
  temporal_caches_.resize(static_cast<std::size_t>(cfg.T));
}

template <typename SpatialLayer>
Tensor RecurrentSpatialModel<SpatialLayer>::forward(const Tensor& frames) {
  check_input(frames);
  const int cells = cfg_.k * cfg_.k;
  LSTMCell::State state = temporal.initial_state();
  for (int p = 0; p < cfg_.T; ++p) {
    Tensor x({1, cfg_.k, cfg_.k});
    std::copy(frames.data() + static_cast<std::size_t>(p) * cells,
              frames.data() + static_cast<std::size_t>(p + 1) * cells, x.data());
    for (std::size_t l = 0; l < spatial_layers.size(); ++l) {
      x = tanh_forward(spatial_layers[l].forward(x, spatial_caches_[p][l]));
      spatial_acts_[p][l] = x;
    }
    Tensor flat({flat_dim_});
    std::copy(x.data(), x.data() + x.size(), flat.data());
    state = temporal.forward(flat, state, temporal_caches_[p]);
  }
  Tensor out = readout.forward(state.h, readout_cache_);
  Tensor pred({cfg_.k, cfg_.k});
  std::copy(out.data(), out.data() + out.size(), pred.data());
  return pred;
}

template <typename SpatialLayer>
void RecurrentSpatialModel<SpatialLayer>::backward(const Tensor& dpred) {
  Tensor dy({cfg_.k * cfg_.k});
  std::copy(dpred.data(), dpred.data() + dpred.size(), dy.data());
  Tensor dh_final = readout.backward(dy, readout_cache_);

  LSTMCell::StateGrad dstate{dh_final, Tensor({cfg_.lstm_width})};
  for (int p = cfg_.T - 1; p >= 0; --p) {
    Tensor dflat;
    dstate = temporal.backward(dstate, temporal_caches_[p], &dflat);

    const Tensor& top = spatial_acts_[p].back();
    Tensor dact(top.shape());
    std::copy(dflat.data(), dflat.data() + dflat.size(), dact.data());
    for (std::size_t l = spatial_layers.size(); l-- > 0;) {
      Tensor dz = tanh_backward(dact, spatial_acts_[p][l]);
      dact = spatial_layers[l].backward(dz, spatial_caches_[p][l]);
    }
  }
}

template class RecurrentSpatialModel<Conv2DLayer>;
template class RecurrentSpatialModel<LocallyConnected2DLayer>;

std::unique_ptr<Model> build_model(const ModelConfig& cfg) {
  cfg.validate();
  switch (cfg.arch) {
    case Arch::Mlp: return std::make_unique<MlpModel>(cfg);
    case Arch::Tdrn: return std::make_unique<TdrnModel>(cfg);
    case Arch::Lrcn: return std::make_unique<LrcnModel>(cfg);
    case Arch::Sccn: return std::make_unique<SccnModel>(cfg);
  }
  throw DataError("build_model: unknown architecture");
}

void init_sccn_from_lrcn(Model& sccn, Model& lrcn) {
  auto* s = dynamic_cast<SccnModel*>(&sccn);
  auto* l = dynamic_cast<LrcnModel*>(&lrcn);
  if (!s || !l) throw DataError("init_sccn_from_lrcn: wrong model kinds");
  if (s->spatial_layers.size() != l->spatial_layers.size())
    throw DataError("init_sccn_from_lrcn: layer count mismatch");
  for (std::size_t i = 0; i < s->spatial_layers.size(); ++i)
    s->spatial_layers[i].set_shared_kernel(l->spatial_layers[i].kernels,
                                           l->spatial_layers[i].bias);
  s->temporal.W = l->temporal.W;
  s->temporal.U = l->temporal.U;
  s->temporal.b = l->temporal.b;
  s->readout.W = l->readout.W;
  s->readout.b = l->readout.b;
}

// ---------------------------------------------------------------- training

double train_epoch(Model& model, std::span<const SequenceSample> samples,
                   int batch_size, AdamOptimizer& optimizer,
                   std::uint64_t epoch_seed) {
  if (samples.empty()) throw DataError("train_epoch: no samples");
  if (batch_size < 1) throw DataError("train_epoch: batch size must be positive");

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(epoch_seed);
  rng.shuffle(order);

  const int cells = model.config().k * model.config().k;
  double loss_sum = 0.0;
  int batches = 0;

  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    const double inv_cells =
        1.0 / (static_cast<double>(end - start) * static_cast<double>(cells));

    model.zero_grads();
    double batch_loss = 0.0;
    for (std::size_t s = start; s < end; ++s) {
      const SequenceSample& sample = samples[order[s]];
      const Tensor pred = model.forward(sample.inputs);
      Tensor dpred(pred.shape());
      for (int c = 0; c < cells; ++c) {
        const double v = sample.target[static_cast<std::size_t>(c)];
        const double diff = pred[static_cast<std::size_t>(c)] - v;
        batch_loss += v * diff * diff;
        dpred[static_cast<std::size_t>(c)] = 2.0 * v * diff * inv_cells;
      }
      model.backward(dpred);
    }
    batch_loss *= inv_cells;
    if (!std::isfinite(batch_loss))
      throw NumericError("train_epoch: non-finite loss in batch " +
                         std::to_string(batches) + " (epoch seed " +
                         std::to_string(epoch_seed) + ")");
    optimizer.step(model.params());
    loss_sum += batch_loss;
    ++batches;
  }
  return loss_sum / batches;
}

SequenceSample make_sample(const MetricSeries& series,
                           const GridAssignment& assignment, int first, int T) {
  const int k = assignment.k;
  if (first < 0 || T < 1 ||
      static_cast<std::size_t>(first) + static_cast<std::size_t>(T) >=
          series.periods.size())
    throw DataError("make_sample: series too short for window");
  SequenceSample sample;
  sample.entity_id = series.entity_id;
  sample.inputs = Tensor({T, k, k});
  for (int p = 0; p < T; ++p) {
    const MetricFrame frame =
        apply_assignment(series.periods[static_cast<std::size_t>(first + p)],
                         assignment);
    std::copy(frame.cells.begin(), frame.cells.end(),
              sample.inputs.data() + static_cast<std::size_t>(p) * k * k);
  }
  const MetricFrame target = apply_assignment(
      series.periods[static_cast<std::size_t>(first + T)], assignment);
  sample.target = Tensor({k, k});
  std::copy(target.cells.begin(), target.cells.end(), sample.target.data());
  return sample;
}

Prediction predict(Model& model, const MetricSeries& series,
                   const GridAssignment& assignment) {
  const int T = model.config().T;
  if (static_cast<int>(series.periods.size()) < T)
    throw DataError("predict: series shorter than T");
  const int first = static_cast<int>(series.periods.size()) - T;
  const int k = assignment.k;

  Tensor inputs({T, k, k});
  for (int p = 0; p < T; ++p) {
    const MetricFrame frame =
        apply_assignment(series.periods[static_cast<std::size_t>(first + p)],
                         assignment);
    std::copy(frame.cells.begin(), frame.cells.end(),
              inputs.data() + static_cast<std::size_t>(p) * k * k);
  }
  const Tensor out = model.forward(inputs);

  Prediction prediction;
  prediction.frame.entity_id = series.entity_id;
  prediction.frame.period_index = series.periods.back().period_index + 1;
  prediction.frame.k = k;
  prediction.frame.cells.assign(out.data(), out.data() + out.size());
  prediction.topic_values = invert_assignment(prediction.frame, assignment);
  return prediction;
}

}  // namespace gridcast
