#pragma once

#include <cassert>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast {

// Row-major 64-bit float tensor, up to 4 axes.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    std::size_t n = 1;
    for (int d : shape_) {
      assert(d > 0);
      n *= static_cast<std::size_t>(d);
    }
    data_.assign(n, 0.0);
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(int i) { return data_[static_cast<std::size_t>(i)]; }
  double at(int i) const { return data_[static_cast<std::size_t>(i)]; }
  double& at(int i, int j) {
    return data_[static_cast<std::size_t>(i) * shape_[1] + j];
  }
  double at(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * shape_[1] + j];
  }
  double& at(int i, int j, int k) {
    return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  double at(int i, int j, int k) const {
    return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  double& at(int i, int j, int k, int l) {
    return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) *
                     shape_[3] +
                 l];
  }
  double at(int i, int j, int k, int l) const {
    return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) *
                     shape_[3] +
                 l];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::string shape_string(const Tensor& t);
void require_same_shape(const Tensor& a, const Tensor& b, const char* where);

// Named handle on a parameter tensor and its gradient accumulator.
struct ParamRef {
  std::string name;
  Tensor* value = nullptr;
  Tensor* grad = nullptr;
  bool decay = true;  // L2 applies to weights, not biases
};

// Glorot-uniform fill: limit sqrt(6 / (fan_in + fan_out)).
void glorot_init(Tensor& t, int fan_in, int fan_out, Rng& rng);

// y = W x + b, single sample.
class DenseLayer {
 public:
  DenseLayer(int in_dim, int out_dim);
  void init(Rng& rng);

  struct Cache {
    Tensor input;
  };
  Tensor forward(const Tensor& x, Cache& cache) const;
  // Accumulates dW/db, returns dx.
  Tensor backward(const Tensor& dy, const Cache& cache);

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);
  void zero_grads();

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }

  Tensor W, b, dW, db;

 private:
  int in_dim_, out_dim_;
};

// Valid padding, stride 1. Input [in_ch][H][W] -> [out_ch][H-kh+1][W-kw+1].
class Conv2DLayer {
 public:
  Conv2DLayer(int in_ch, int out_ch, int kh, int kw);
  void init(Rng& rng);

  struct Cache {
    Tensor input;
  };
  Tensor forward(const Tensor& x, Cache& cache) const;
  Tensor backward(const Tensor& dy, const Cache& cache);

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);
  void zero_grads();

  int in_ch() const { return in_ch_; }
  int out_ch() const { return out_ch_; }
  int kh() const { return kh_; }
  int kw() const { return kw_; }

  Tensor kernels;  // [out_ch][in_ch][kh][kw]
  Tensor bias;     // [out_ch]
  Tensor dkernels, dbias;

 private:
  int in_ch_, out_ch_, kh_, kw_;
};

// Same connectivity as Conv2DLayer but one kernel per output position: no
// weight sharing across the grid, shared across samples. Output layout is
// identical to Conv2DLayer so the two are drop-in interchangeable.
class LocallyConnected2DLayer {
 public:
  LocallyConnected2DLayer(int in_ch, int out_ch, int kh, int kw, int in_h,
                          int in_w);
  void init(Rng& rng);

  struct Cache {
    Tensor input;
  };
  Tensor forward(const Tensor& x, Cache& cache) const;
  Tensor backward(const Tensor& dy, const Cache& cache);

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);
  void zero_grads();

  // Copies one shared kernel/bias into every positional slot; with this
  // initialization forward equals Conv2DLayer::forward bit for bit.
  void set_shared_kernel(const Tensor& conv_kernels, const Tensor& conv_bias);

  int in_ch() const { return in_ch_; }
  int out_ch() const { return out_ch_; }
  int out_h() const { return out_h_; }
  int out_w() const { return out_w_; }

  Tensor kernels;  // [out_h][out_w][out_ch][in_ch][kh][kw]
  Tensor bias;     // [out_h][out_w][out_ch]
  Tensor dkernels, dbias;

 private:
  int in_ch_, out_ch_, kh_, kw_, in_h_, in_w_, out_h_, out_w_;
};

// Single LSTM step with packed gate parameters, order i, f, g, o.
class LSTMCell {
 public:
  LSTMCell(int input_dim, int hidden_dim);
  void init(Rng& rng);  // forget-gate bias starts at 1

  struct State {
    Tensor h, c;
  };
  State initial_state() const;

  struct Cache {
    Tensor x, h_prev, c_prev;
    Tensor i, f, g, o, c_out, tanh_c;
  };
  State forward(const Tensor& x, const State& prev, Cache& cache) const;

  struct StateGrad {
    Tensor dh, dc;
  };
  // dnext holds gradients w.r.t. this step's (h, c) outputs. Returns grads
  // w.r.t. the previous state; writes dx if non-null; accumulates dW/dU/db.
  StateGrad backward(const StateGrad& dnext, const Cache& cache, Tensor* dx);

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);
  void zero_grads();

  int input_dim() const { return input_dim_; }
  int hidden_dim() const { return hidden_dim_; }

  Tensor W;  // [4H][input]
  Tensor U;  // [4H][H]
  Tensor b;  // [4H]
  Tensor dW, dU, db;

 private:
  int input_dim_, hidden_dim_;
};

// Targets and predictions over all grid cells of a batch, flattened.
struct PredictionBatch {
  Tensor targets;      // v, must be element-wise >= 0
  Tensor predictions;  // v-hat, same shape
};

struct LossResult {
  double value = 0.0;
  Tensor grad;  // d loss / d predictions
};

// Risk loss error: mean of v * (v_hat - v)^2. Zero-valued targets carry zero
// weight, so missed activity costs more than false positives.
LossResult rle_loss(const PredictionBatch& batch);
LossResult rle_loss(const Tensor& targets, const Tensor& predictions);

LossResult mse_loss(const PredictionBatch& batch);
LossResult mse_loss(const Tensor& targets, const Tensor& predictions);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // L2 coefficient; gradient term 2*wd*w
};

class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Allocates moment accumulators mirroring the parameter shapes.
  void attach(const std::vector<ParamRef>& params);
  // Applies one update from the accumulated gradients. Order and count must
  // match attach().
  void step(const std::vector<ParamRef>& params);

  std::int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  std::int64_t step_ = 0;
};

// Central-difference gradient verification. `eval` recomputes the scalar at
// the current parameter values; analytic gradients must already be stored in
// each ParamRef's grad tensor. Relative error per coordinate is
// |a - n| / max(1e-12, |a| + |n|).
struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t coords_checked = 0;
};

GradCheckReport grad_check(const std::function<double()>& eval,
                           const std::vector<ParamRef>& params, double h);

// Parameter checkpoint: manifest.json (names, shapes, seed, step count) plus
// one raw little-endian f64 file per tensor.
void save_params(const std::filesystem::path& dir,
                 const std::vector<ParamRef>& params, std::uint64_t seed,
                 std::int64_t step_count);
struct CheckpointInfo {
  std::uint64_t seed = 0;
  std::int64_t step_count = 0;
};
CheckpointInfo load_params(const std::filesystem::path& dir,
                           const std::vector<ParamRef>& params);

}  // namespace gridcast
