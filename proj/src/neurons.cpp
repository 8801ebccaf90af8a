#include "gridcast/neurons.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace gridcast {

std::string shape_string(const Tensor& t) {
  std::string s = "[";
  for (int i = 0; i < t.ndim(); ++i) {
    if (i) s += "x";
    s += std::to_string(t.dim(i));
  }
  return s + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b))
    throw DataError(std::string(where) + ": shape mismatch " + shape_string(a) +
                    " vs " + shape_string(b));
}

void glorot_init(Tensor& t, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
}

namespace {

inline double dot_n(const double* a, const double* b, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Shared by Conv2D and LocallyConnected2D so their forward passes execute the
// identical floating-point sequence; kernel is [in_ch][kh][kw] contiguous.
inline double patch_dot(const double* x, int H, int W, int in_ch, int oy,
                        int ox, const double* kernel, int kh, int kw) {
  double acc = 0.0;
  for (int ic = 0; ic < in_ch; ++ic) {
    const double* plane = x + static_cast<std::size_t>(ic) * H * W;
    for (int ky = 0; ky < kh; ++ky) {
      const double* row = plane + static_cast<std::size_t>(oy + ky) * W + ox;
      const double* krow = kernel + (static_cast<std::size_t>(ic) * kh + ky) * kw;
      for (int kx = 0; kx < kw; ++kx) acc += row[kx] * krow[kx];
    }
  }
  return acc;
}

}  // namespace

// ---------------------------------------------------------------- Dense

DenseLayer::DenseLayer(int in_dim, int out_dim)
    : W({out_dim, in_dim}),
      b({out_dim}),
      dW({out_dim, in_dim}),
      db({out_dim}),
      in_dim_(in_dim),
      out_dim_(out_dim) {}

void DenseLayer::init(Rng& rng) { glorot_init(W, in_dim_, out_dim_, rng); }

Tensor DenseLayer::forward(const Tensor& x, Cache& cache) const {
  if (x.size() != static_cast<std::size_t>(in_dim_))
    throw DataError("DenseLayer::forward: input size " +
                    std::to_string(x.size()) + " != " + std::to_string(in_dim_));
  cache.input = x;
  Tensor y({out_dim_});
  for (int o = 0; o < out_dim_; ++o)
    y[o] = b[o] + dot_n(W.data() + static_cast<std::size_t>(o) * in_dim_,
                        x.data(), in_dim_);
  return y;
}

Tensor DenseLayer::backward(const Tensor& dy, const Cache& cache) {
  if (dy.size() != static_cast<std::size_t>(out_dim_))
    throw DataError("DenseLayer::backward: gradient size mismatch");
  const double* x = cache.input.data();
  Tensor dx({in_dim_});
  for (int o = 0; o < out_dim_; ++o) {
    const double g = dy[o];
    db[o] += g;
    double* dw_row = dW.data() + static_cast<std::size_t>(o) * in_dim_;
    const double* w_row = W.data() + static_cast<std::size_t>(o) * in_dim_;
    for (int i = 0; i < in_dim_; ++i) {
      dw_row[i] += g * x[i];
      dx[i] += g * w_row[i];
    }
  }
  return dx;
}

void DenseLayer::collect_params(const std::string& prefix,
                                std::vector<ParamRef>& out) {
  out.push_back({prefix + ".W", &W, &dW, true});
  out.push_back({prefix + ".b", &b, &db, false});
}

void DenseLayer::zero_grads() {
  dW.fill(0.0);
  db.fill(0.0);
}

// ---------------------------------------------------------------- Conv2D

Conv2DLayer::Conv2DLayer(int in_ch, int out_ch, int kh, int kw)
    : kernels({out_ch, in_ch, kh, kw}),
      bias({out_ch}),
      dkernels({out_ch, in_ch, kh, kw}),
      dbias({out_ch}),
      in_ch_(in_ch),
      out_ch_(out_ch),
      kh_(kh),
      kw_(kw) {}

void Conv2DLayer::init(Rng& rng) {
  glorot_init(kernels, in_ch_ * kh_ * kw_, out_ch_ * kh_ * kw_, rng);
}

Tensor Conv2DLayer::forward(const Tensor& x, Cache& cache) const {
  if (x.ndim() != 3 || x.dim(0) != in_ch_ || x.dim(1) < kh_ || x.dim(2) < kw_)
    throw DataError("Conv2DLayer::forward: bad input shape " + shape_string(x));
  const int H = x.dim(1), W_in = x.dim(2);
  const int out_h = H - kh_ + 1, out_w = W_in - kw_ + 1;
  cache.input = x;
  Tensor y({out_ch_, out_h, out_w});
  const std::size_t ksize = static_cast<std::size_t>(in_ch_) * kh_ * kw_;
  for (int oc = 0; oc < out_ch_; ++oc) {
    const double* kernel = kernels.data() + oc * ksize;
    const double bias_oc = bias[oc];
    for (int oy = 0; oy < out_h; ++oy)
      for (int ox = 0; ox < out_w; ++ox)
        y.at(oc, oy, ox) =
            bias_oc + patch_dot(x.data(), H, W_in, in_ch_, oy, ox, kernel, kh_, kw_);
  }
  return y;
}

Tensor Conv2DLayer::backward(const Tensor& dy, const Cache& cache) {
  const Tensor& x = cache.input;
  const int H = x.dim(1), W_in = x.dim(2);
  const int out_h = H - kh_ + 1, out_w = W_in - kw_ + 1;
  if (dy.ndim() != 3 || dy.dim(0) != out_ch_ || dy.dim(1) != out_h ||
      dy.dim(2) != out_w)
    throw DataError("Conv2DLayer::backward: bad gradient shape " + shape_string(dy));

  Tensor dx({in_ch_, H, W_in});
  const std::size_t ksize = static_cast<std::size_t>(in_ch_) * kh_ * kw_;
  for (int oc = 0; oc < out_ch_; ++oc) {
    const double* kernel = kernels.data() + oc * ksize;
    double* dkernel = dkernels.data() + oc * ksize;
    for (int oy = 0; oy < out_h; ++oy) {
      for (int ox = 0; ox < out_w; ++ox) {
        const double g = dy.at(oc, oy, ox);
        if (g == 0.0) continue;
        dbias[oc] += g;
        for (int ic = 0; ic < in_ch_; ++ic) {
          const double* x_plane = x.data() + static_cast<std::size_t>(ic) * H * W_in;
          double* dx_plane = dx.data() + static_cast<std::size_t>(ic) * H * W_in;
          for (int ky = 0; ky < kh_; ++ky) {
            const double* x_row =
                x_plane + static_cast<std::size_t>(oy + ky) * W_in + ox;
            double* dx_row =
                dx_plane + static_cast<std::size_t>(oy + ky) * W_in + ox;
            double* dk_row = dkernel + (static_cast<std::size_t>(ic) * kh_ + ky) * kw_;
            const double* k_row =
                kernel + (static_cast<std::size_t>(ic) * kh_ + ky) * kw_;
            for (int kx = 0; kx < kw_; ++kx) {
              dk_row[kx] += g * x_row[kx];
              dx_row[kx] += g * k_row[kx];
            }
          }
        }
      }
    }
  }
  return dx;
}

void Conv2DLayer::collect_params(const std::string& prefix,
                                 std::vector<ParamRef>& out) {
  out.push_back({prefix + ".kernels", &kernels, &dkernels, true});
  out.push_back({prefix + ".bias", &bias, &dbias, false});
}

void Conv2DLayer::zero_grads() {
  dkernels.fill(0.0);
  dbias.fill(0.0);
}

// ------------------------------------------------------- LocallyConnected2D

LocallyConnected2DLayer::LocallyConnected2DLayer(int in_ch, int out_ch, int kh,
                                                 int kw, int in_h, int in_w)
    : kernels({in_h - kh + 1, in_w - kw + 1, out_ch * in_ch * kh * kw}),
      bias({in_h - kh + 1, in_w - kw + 1, out_ch}),
      dkernels({in_h - kh + 1, in_w - kw + 1, out_ch * in_ch * kh * kw}),
      dbias({in_h - kh + 1, in_w - kw + 1, out_ch}),
      in_ch_(in_ch),
      out_ch_(out_ch),
      kh_(kh),
      kw_(kw),
      in_h_(in_h),
      in_w_(in_w),
      out_h_(in_h - kh + 1),
      out_w_(in_w - kw + 1) {
  if (out_h_ < 1 || out_w_ < 1)
    throw DataError("LocallyConnected2DLayer: kernel larger than input");
}

void LocallyConnected2DLayer::init(Rng& rng) {
  // Same fan as the equivalent convolution; each position draws its own.
  glorot_init(kernels, in_ch_ * kh_ * kw_, out_ch_ * kh_ * kw_, rng);
}

void LocallyConnected2DLayer::set_shared_kernel(const Tensor& conv_kernels,
                                                const Tensor& conv_bias) {
  const std::size_t block = static_cast<std::size_t>(out_ch_) * in_ch_ * kh_ * kw_;
  if (conv_kernels.size() != block || conv_bias.size() != static_cast<std::size_t>(out_ch_))
    throw DataError("set_shared_kernel: shape mismatch");
  for (int oy = 0; oy < out_h_; ++oy)
    for (int ox = 0; ox < out_w_; ++ox) {
      std::copy(conv_kernels.data(), conv_kernels.data() + block,
                kernels.data() + (static_cast<std::size_t>(oy) * out_w_ + ox) * block);
      std::copy(conv_bias.data(), conv_bias.data() + out_ch_,
                bias.data() + (static_cast<std::size_t>(oy) * out_w_ + ox) * out_ch_);
    }
}

Tensor LocallyConnected2DLayer::forward(const Tensor& x, Cache& cache) const {
  if (x.ndim() != 3 || x.dim(0) != in_ch_ || x.dim(1) != in_h_ || x.dim(2) != in_w_)
    throw DataError("LocallyConnected2DLayer::forward: bad input shape " +
                    shape_string(x));
  cache.input = x;
  Tensor y({out_ch_, out_h_, out_w_});
  const std::size_t ksize = static_cast<std::size_t>(in_ch_) * kh_ * kw_;
  for (int oy = 0; oy < out_h_; ++oy) {
    for (int ox = 0; ox < out_w_; ++ox) {
      const std::size_t pos = static_cast<std::size_t>(oy) * out_w_ + ox;
      const double* pos_kernels = kernels.data() + pos * out_ch_ * ksize;
      const double* pos_bias = bias.data() + pos * out_ch_;
      for (int oc = 0; oc < out_ch_; ++oc)
        y.at(oc, oy, ox) =
            pos_bias[oc] + patch_dot(x.data(), in_h_, in_w_, in_ch_, oy, ox,
                                     pos_kernels + oc * ksize, kh_, kw_);
    }
  }
  return y;
}

Tensor LocallyConnected2DLayer::backward(const Tensor& dy, const Cache& cache) {
  if (dy.ndim() != 3 || dy.dim(0) != out_ch_ || dy.dim(1) != out_h_ ||
      dy.dim(2) != out_w_)
    throw DataError("LocallyConnected2DLayer::backward: bad gradient shape " +
                    shape_string(dy));
  const Tensor& x = cache.input;
  Tensor dx({in_ch_, in_h_, in_w_});
  const std::size_t ksize = static_cast<std::size_t>(in_ch_) * kh_ * kw_;
  for (int oy = 0; oy < out_h_; ++oy) {
    for (int ox = 0; ox < out_w_; ++ox) {
      const std::size_t pos = static_cast<std::size_t>(oy) * out_w_ + ox;
      const double* pos_kernels = kernels.data() + pos * out_ch_ * ksize;
      double* pos_dkernels = dkernels.data() + pos * out_ch_ * ksize;
      double* pos_dbias = dbias.data() + pos * out_ch_;
      for (int oc = 0; oc < out_ch_; ++oc) {
        const double g = dy.at(oc, oy, ox);
        if (g == 0.0) continue;
        pos_dbias[oc] += g;
        const double* kernel = pos_kernels + oc * ksize;
        double* dkernel = pos_dkernels + oc * ksize;
        for (int ic = 0; ic < in_ch_; ++ic) {
          const double* x_plane =
              x.data() + static_cast<std::size_t>(ic) * in_h_ * in_w_;
          double* dx_plane =
              dx.data() + static_cast<std::size_t>(ic) * in_h_ * in_w_;
          for (int ky = 0; ky < kh_; ++ky) {
            const double* x_row =
                x_plane + static_cast<std::size_t>(oy + ky) * in_w_ + ox;
            double* dx_row =
                dx_plane + static_cast<std::size_t>(oy + ky) * in_w_ + ox;
            double* dk_row = dkernel + (static_cast<std::size_t>(ic) * kh_ + ky) * kw_;
            const double* k_row =
                kernel + (static_cast<std::size_t>(ic) * kh_ + ky) * kw_;
            for (int kx = 0; kx < kw_; ++kx) {
              dk_row[kx] += g * x_row[kx];
              dx_row[kx] += g * k_row[kx];
            }
          }
        }
      }
    }
  }
  return dx;
}

void LocallyConnected2DLayer::collect_params(const std::string& prefix,
                                             std::vector<ParamRef>& out) {
  out.push_back({prefix + ".kernels", &kernels, &dkernels, true});
  out.push_back({prefix + ".bias", &bias, &dbias, false});
}

void LocallyConnected2DLayer::zero_grads() {
  dkernels.fill(0.0);
  dbias.fill(0.0);
}

// ---------------------------------------------------------------- LSTMCell

LSTMCell::LSTMCell(int input_dim, int hidden_dim)
    : W({4 * hidden_dim, input_dim}),
      U({4 * hidden_dim, hidden_dim}),
      b({4 * hidden_dim}),
      dW({4 * hidden_dim, input_dim}),
      dU({4 * hidden_dim, hidden_dim}),
      db({4 * hidden_dim}),
      input_dim_(input_dim),
      hidden_dim_(hidden_dim) {}

void LSTMCell::init(Rng& rng) {
  const int H = hidden_dim_;
  // Per-gate Glorot blocks.
  const double w_limit = std::sqrt(6.0 / (input_dim_ + H));
  for (std::size_t i = 0; i < W.size(); ++i) W[i] = rng.uniform(-w_limit, w_limit);
  const double u_limit = std::sqrt(6.0 / (H + H));
  for (std::size_t i = 0; i < U.size(); ++i) U[i] = rng.uniform(-u_limit, u_limit);
  b.fill(0.0);
  for (int j = 0; j < H; ++j) b[H + j] = 1.0;  // forget gate
}

LSTMCell::State LSTMCell::initial_state() const {
  return State{Tensor({hidden_dim_}), Tensor({hidden_dim_})};
}

LSTMCell::State LSTMCell::forward(const Tensor& x, const State& prev,
                                  Cache& cache) const {
  if (x.size() != static_cast<std::size_t>(input_dim_))
    throw DataError("LSTMCell::forward: input size " + std::to_string(x.size()) +
                    " != " + std::to_string(input_dim_));
  const int H = hidden_dim_;
  cache.x = x;
  cache.h_prev = prev.h;
  cache.c_prev = prev.c;

  // Pre-activations for all four gates.
  Tensor a({4 * H});
  for (int r = 0; r < 4 * H; ++r)
    a[r] = b[r] +
           dot_n(W.data() + static_cast<std::size_t>(r) * input_dim_, x.data(),
                 input_dim_) +
           dot_n(U.data() + static_cast<std::size_t>(r) * H, prev.h.data(), H);

  cache.i = Tensor({H});
  cache.f = Tensor({H});
  cache.g = Tensor({H});
  cache.o = Tensor({H});
  cache.c_out = Tensor({H});
  cache.tanh_c = Tensor({H});

  State next{Tensor({H}), Tensor({H})};
  for (int j = 0; j < H; ++j) {
    const double i_g = sigmoid(a[j]);
    const double f_g = sigmoid(a[H + j]);
    const double g_g = std::tanh(a[2 * H + j]);
    const double o_g = sigmoid(a[3 * H + j]);
    const double c_new = f_g * prev.c[j] + i_g * g_g;
    const double tc = std::tanh(c_new);
    cache.i[j] = i_g;
    cache.f[j] = f_g;
    cache.g[j] = g_g;
    cache.o[j] = o_g;
    cache.c_out[j] = c_new;
    cache.tanh_c[j] = tc;
    next.c[j] = c_new;
    next.h[j] = o_g * tc;
  }
  return next;
}

LSTMCell::StateGrad LSTMCell::backward(const StateGrad& dnext,
                                       const Cache& cache, Tensor* dx) {
  const int H = hidden_dim_;
  Tensor da({4 * H});
  StateGrad dprev{Tensor({H}), Tensor({H})};

  for (int j = 0; j < H; ++j) {
    const double dh = dnext.dh[j];
    const double tc = cache.tanh_c[j];
    const double dc_total = dnext.dc[j] + dh * cache.o[j] * (1.0 - tc * tc);
    const double i_g = cache.i[j], f_g = cache.f[j], g_g = cache.g[j],
                 o_g = cache.o[j];
    da[j] = dc_total * g_g * i_g * (1.0 - i_g);                  // input gate
    da[H + j] = dc_total * cache.c_prev[j] * f_g * (1.0 - f_g);  // forget gate
    da[2 * H + j] = dc_total * i_g * (1.0 - g_g * g_g);          // candidate
    da[3 * H + j] = dh * tc * o_g * (1.0 - o_g);                 // output gate
    dprev.dc[j] = dc_total * f_g;
  }

  if (dx) {
    *dx = Tensor({input_dim_});
  }
  const double* x = cache.x.data();
  const double* h_prev = cache.h_prev.data();
  for (int r = 0; r < 4 * H; ++r) {
    const double g = da[r];
    if (g == 0.0) continue;
    db[r] += g;
    double* dW_row = dW.data() + static_cast<std::size_t>(r) * input_dim_;
    const double* W_row = W.data() + static_cast<std::size_t>(r) * input_dim_;
    for (int idx = 0; idx < input_dim_; ++idx) {
      dW_row[idx] += g * x[idx];
      if (dx) (*dx)[idx] += g * W_row[idx];
    }
    double* dU_row = dU.data() + static_cast<std::size_t>(r) * H;
    const double* U_row = U.data() + static_cast<std::size_t>(r) * H;
    for (int j = 0; j < H; ++j) {
      dU_row[j] += g * h_prev[j];
      dprev.dh[j] += g * U_row[j];
    }
  }
  return dprev;
}

void LSTMCell::collect_params(const std::string& prefix,
                              std::vector<ParamRef>& out) {
  out.push_back({prefix + ".W", &W, &dW, true});
  out.push_back({prefix + ".U", &U, &dU, true});
  out.push_back({prefix + ".b", &b, &db, false});
}

void LSTMCell::zero_grads() {
  dW.fill(0.0);
  dU.fill(0.0);
  db.fill(0.0);
}

// ---------------------------------------------------------------- losses

LossResult rle_loss(const Tensor& targets, const Tensor& predictions) {
  require_same_shape(targets, predictions, "rle_loss");
  if (targets.size() == 0) throw DataError("rle_loss: empty batch");
  const std::size_t n = targets.size();
  LossResult result;
  result.grad = Tensor(targets.shape());
  double sum = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const double v = targets[idx];
    if (v < 0.0) throw DataError("rle_loss: negative target value");
    const double diff = predictions[idx] - v;
    sum += v * diff * diff;
    result.grad[idx] = 2.0 * v * diff * inv_n;
  }
  result.value = sum * inv_n;
  return result;
}

LossResult rle_loss(const PredictionBatch& batch) {
  return rle_loss(batch.targets, batch.predictions);
}

LossResult mse_loss(const Tensor& targets, const Tensor& predictions) {
  require_same_shape(targets, predictions, "mse_loss");
  if (targets.size() == 0) throw DataError("mse_loss: empty batch");
  const std::size_t n = targets.size();
  LossResult result;
  result.grad = Tensor(targets.shape());
  double sum = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const double diff = predictions[idx] - targets[idx];
    sum += diff * diff;
    result.grad[idx] = 2.0 * diff * inv_n;
  }
  result.value = sum * inv_n;
  return result;
}

LossResult mse_loss(const PredictionBatch& batch) {
  return mse_loss(batch.targets, batch.predictions);
}

// ---------------------------------------------------------------- Adam

void AdamOptimizer::attach(const std::vector<ParamRef>& params) {
  m_.clear();
  v_.clear();
  for (const auto& p : params) {
    m_.emplace_back(p.value->shape());
    v_.emplace_back(p.value->shape());
  }
  step_ = 0;
}

void AdamOptimizer::step(const std::vector<ParamRef>& params) {
  if (params.size() != m_.size())
    throw DataError("AdamOptimizer::step: parameter list changed since attach");
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& value = *params[p].value;
    const Tensor& grad = *params[p].grad;
    Tensor& m = m_[p];
    Tensor& v = v_[p];
    const bool decay = params[p].decay && cfg_.weight_decay > 0.0;
    for (std::size_t i = 0; i < value.size(); ++i) {
      double g = grad[i];
      if (decay) g += 2.0 * cfg_.weight_decay * value[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      value[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

// ---------------------------------------------------------------- grad check

GradCheckReport grad_check(const std::function<double()>& eval,
                           const std::vector<ParamRef>& params, double h) {
  GradCheckReport report;
  for (const auto& p : params) {
    Tensor& value = *p.value;
    const Tensor& analytic = *p.grad;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + h;
      const double f_plus = eval();
      value[i] = saved - h;
      const double f_minus = eval();
      value[i] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double a = analytic[i];
      const double rel =
          std::abs(a - numeric) / std::max(1e-12, std::abs(a) + std::abs(numeric));
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p.name + "[" + std::to_string(i) + "]";
      }
      ++report.coords_checked;
    }
  }
  return report;
}

// ---------------------------------------------------------------- checkpoints

namespace {

std::string param_file_name(const std::string& param_name) {
  std::string f = param_name;
  for (auto& c : f)
    if (c == '/' || c == '\\') c = '.';
  return f + ".f64";
}

}  // namespace

void save_params(const std::filesystem::path& dir,
                 const std::vector<ParamRef>& params, std::uint64_t seed,
                 std::int64_t step_count) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["seed"] = seed;
  manifest["step_count"] = step_count;
  auto layers = nlohmann::json::array();
  for (const auto& p : params) {
    nlohmann::json entry;
    entry["name"] = p.name;
    entry["shape"] = p.value->shape();
    entry["file"] = param_file_name(p.name);
    layers.push_back(entry);
  }
  manifest["params"] = layers;
  write_text_file(dir / "manifest.json", manifest.dump(1));
  for (const auto& p : params)
    write_f64_file(dir / param_file_name(p.name), p.value->values());
}

CheckpointInfo load_params(const std::filesystem::path& dir,
                           const std::vector<ParamRef>& params) {
  const auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  CheckpointInfo info;
  info.seed = manifest.at("seed").get<std::uint64_t>();
  info.step_count = manifest.at("step_count").get<std::int64_t>();
  const auto& entries = manifest.at("params");
  if (entries.size() != params.size())
    throw DataError("checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& entry = entries[i];
    if (entry.at("name").get<std::string>() != params[i].name)
      throw DataError("checkpoint parameter name mismatch: " +
                      entry.at("name").get<std::string>() + " vs " + params[i].name);
    if (entry.at("shape").get<std::vector<int>>() != params[i].value->shape())
      throw DataError("checkpoint shape mismatch for " + params[i].name);
    auto values = read_f64_file(dir / entry.at("file").get<std::string>());
    if (values.size() != params[i].value->size())
      throw DataError("checkpoint data size mismatch for " + params[i].name);
    params[i].value->values() = std::move(values);
  }
  return info;
}

}  // namespace gridcast
