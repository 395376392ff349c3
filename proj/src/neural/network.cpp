#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "modeflow/error.hpp"
#include "modeflow/kernels.hpp"
#include "modeflow/neural.hpp"

namespace modeflow::nn {
namespace {

namespace k = modeflow::kernels;

std::string dims_str(Dims d) { return "(" + std::to_string(d.rows) + ", " + std::to_string(d.cols) + ")"; }

std::string layer_name(const NetworkSpec& s, std::size_t i) {
  return "layer " + std::to_string(i) + " (" + std::string(to_string(s.layers[i].kind)) + ")";
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kLinear: return z;
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kElu: return z > 0.0 ? z : std::expm1(z);
    case Activation::kTanh: return std::tanh(z);
  }
  return z;
}

// Derivative from the pre-activation z and the activation value y.
double activate_grad(Activation a, double z, double y) {
  switch (a) {
    case Activation::kLinear: return 1.0;
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kElu: return z > 0.0 ? 1.0 : y + 1.0;
    case Activation::kTanh: return 1.0 - y * y;
  }
  return 1.0;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::size_t layer_param_count(const LayerSpec& l, Dims in) {
  switch (l.kind) {
    case LayerKind::kDense: return l.units * in.cols + l.units;
    case LayerKind::kConv1d: return l.units * l.kernel * in.cols + l.units;
    case LayerKind::kLstm: return 4 * l.units * (in.cols + l.units) + 4 * l.units;
    case LayerKind::kFlatten: return 0;
  }
  return 0;
}

double uniform(std::mt19937_64& rng, double limit) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return (2.0 * u - 1.0) * limit;
}

}  // namespace

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kElu: return "elu";
    case Activation::kTanh: return "tanh";
  }
  return "linear";
}

std::string_view to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kConv1d: return "conv1d";
    case LayerKind::kLstm: return "lstm";
    case LayerKind::kFlatten: return "flatten";
  }
  return "dense";
}

std::string_view to_string(LossKind kind) noexcept { return kind == LossKind::kPaMse ? "pa_mse" : "mse"; }

Activation parse_activation(std::string_view name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "relu") return Activation::kRelu;
  if (name == "elu") return Activation::kElu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected relu, elu, tanh or linear)");
}

LossKind parse_loss(std::string_view name) {
  if (name == "mse") return LossKind::kMse;
  if (name == "pa_mse") return LossKind::kPaMse;
  throw ConfigError("unknown loss '" + std::string(name) + "' (expected mse or pa_mse)");
}

double loss_value(const LossSpec& loss, std::span<const double> y, std::span<const double> target,
                  std::span<double> grad) {
  if (y.size() != target.size() || y.empty()) {
    throw ConfigError("loss: output has " + std::to_string(y.size()) + " values, target has " +
                      std::to_string(target.size()));
  }
  const double n = static_cast<double>(y.size());
  double value = k::sum_sq_diff(y, target) / n;
  if (!grad.empty()) {
    for (std::size_t i = 0; i < y.size(); ++i) grad[i] = 2.0 * (y[i] - target[i]) / n;
  }
  if (loss.kind == LossKind::kPaMse) {
    const std::size_t g = loss.group ? loss.group : y.size();
    if (y.size() % g != 0) throw ConfigError("pa_mse: output size is not a multiple of the species group");
    for (std::size_t base = 0; base < y.size(); base += g) {
      double sum = 0.0;
      if (loss.species.empty()) {
        for (std::size_t i = 0; i < g; ++i) sum += y[base + i];
      } else {
        for (auto s : loss.species) {
          if (s >= g) throw ConfigError("pa_mse: species index " + std::to_string(s) + " outside the group");
          sum += y[base + s];
        }
      }
      const double dev = sum - 1.0;
      value += loss.lambda * dev * dev;
      if (!grad.empty()) {
        const double d = 2.0 * loss.lambda * dev;
        if (loss.species.empty()) {
          for (std::size_t i = 0; i < g; ++i) grad[base + i] += d;
        } else {
          for (auto s : loss.species) grad[base + s] += d;
        }
      }
    }
  }
  return value;
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  if (spec_.input.size() == 0) throw ConfigError("network input must be non-empty");
  if (spec_.layers.empty()) throw ConfigError("network needs at least one layer");
  dims_.push_back(spec_.input);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& l = spec_.layers[i];
    const Dims in = dims_.back();
    Dims out;
    switch (l.kind) {
      case LayerKind::kDense:
        if (l.units == 0) throw ConfigError(layer_name(spec_, i) + ": needs at least one unit");
        out = {in.rows, l.units};
        break;
      case LayerKind::kConv1d:
        if (l.units == 0 || l.kernel == 0) throw ConfigError(layer_name(spec_, i) + ": filters and kernel must be positive");
        if (in.rows < l.kernel) {
          throw ConfigError(layer_name(spec_, i) + ": kernel " + std::to_string(l.kernel) + " longer than input " +
                            dims_str(in));
        }
        out = {in.rows - l.kernel + 1, l.units};
        break;
      case LayerKind::kLstm:
        if (l.units == 0) throw ConfigError(layer_name(spec_, i) + ": needs at least one unit");
        out = {1, l.units};
        break;
      case LayerKind::kFlatten:
        out = {1, in.size()};
        break;
    }
    dims_.push_back(out);
    offsets_.push_back(offsets_.back() + layer_param_count(l, in));
  }
  params_.assign(offsets_.back(), 0.0);

  std::mt19937_64 rng(spec_.seed);
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& l = spec_.layers[i];
    const Dims in = dims_[i];
    double* p = params_.data() + offsets_[i];
    const bool rectifier = l.activation == Activation::kRelu || l.activation == Activation::kElu;
    switch (l.kind) {
      case LayerKind::kDense:
      case LayerKind::kConv1d: {
        const std::size_t fan_in = l.kind == LayerKind::kDense ? in.cols : l.kernel * in.cols;
        const double limit = std::sqrt((rectifier ? 6.0 : 3.0) / static_cast<double>(fan_in));
        for (std::size_t j = 0; j < l.units * fan_in; ++j) p[j] = uniform(rng, limit);
        break;
      }
      case LayerKind::kLstm: {
        const std::size_t H = l.units;
        const double limit = 1.0 / std::sqrt(static_cast<double>(H));
        const std::size_t weights = 4 * H * (in.cols + H);
        for (std::size_t j = 0; j < weights; ++j) p[j] = uniform(rng, limit);
        // Gate order i, f, g, o; forget bias starts at 1.
        for (std::size_t j = 0; j < H; ++j) p[weights + H + j] = 1.0;
        break;
      }
      case LayerKind::kFlatten:
        break;
    }
  }
}

std::span<double> Network::layer_params(std::size_t i) {
  return std::span<double>(params_).subspan(offsets_.at(i), offsets_.at(i + 1) - offsets_.at(i));
}

void Network::forward(std::span<const double> x, Workspace& ws) const {
  if (x.size() != dims_.front().size()) {
    throw ConfigError("network input has " + std::to_string(x.size()) + " values, expected " +
                      dims_str(dims_.front()));
  }
  const std::size_t L = spec_.layers.size();
  ws.acts.resize(L + 1);
  ws.pre.resize(L);
  ws.acts[0].assign(x.begin(), x.end());
  for (std::size_t i = 0; i < L; ++i) {
    const LayerSpec& l = spec_.layers[i];
    const Dims in = dims_[i], out = dims_[i + 1];
    const double* p = params_.data() + offsets_[i];
    const std::vector<double>& a = ws.acts[i];
    std::vector<double>& y = ws.acts[i + 1];
    std::vector<double>& z = ws.pre[i];
    y.assign(out.size(), 0.0);
    switch (l.kind) {
      case LayerKind::kDense:
      case LayerKind::kConv1d: {
        const std::size_t width = l.kind == LayerKind::kDense ? in.cols : l.kernel * in.cols;
        const std::span<const double> w(p, l.units * width);
        const double* b = p + l.units * width;
        z.assign(out.size(), 0.0);
        for (std::size_t r = 0; r < out.rows; ++r) {
          std::span<double> zr(z.data() + r * l.units, l.units);
          std::copy(b, b + l.units, zr.begin());
          k::gemv(w, l.units, width, std::span<const double>(a.data() + r * in.cols, width), zr);
        }
        for (std::size_t j = 0; j < z.size(); ++j) y[j] = activate(l.activation, z[j]);
        break;
      }
      case LayerKind::kLstm: {
        const std::size_t H = l.units, C = in.cols, T = in.rows;
        const std::span<const double> W(p, 4 * H * C), U(p + 4 * H * C, 4 * H * H);
        const double* b = p + 4 * H * (C + H);
        // Per step: gates i f g o (4H), then c (H), then h (H).
        z.assign(T * 6 * H, 0.0);
        std::vector<double> h_prev(H, 0.0), c_prev(H, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
          double* g = z.data() + t * 6 * H;
          std::copy(b, b + 4 * H, g);
          std::span<double> gs(g, 4 * H);
          k::gemv(W, 4 * H, C, std::span<const double>(a.data() + t * C, C), gs);
          k::gemv(U, 4 * H, H, h_prev, gs);
          double* c = g + 4 * H;
          double* h = g + 5 * H;
          for (std::size_t j = 0; j < H; ++j) {
            g[j] = sigmoid(g[j]);
            g[H + j] = sigmoid(g[H + j]);
            g[2 * H + j] = std::tanh(g[2 * H + j]);
            g[3 * H + j] = sigmoid(g[3 * H + j]);
            c[j] = g[H + j] * c_prev[j] + g[j] * g[2 * H + j];
            h[j] = g[3 * H + j] * std::tanh(c[j]);
          }
          std::copy(c, c + H, c_prev.begin());
          std::copy(h, h + H, h_prev.begin());
        }
        std::copy(h_prev.begin(), h_prev.end(), y.begin());
        break;
      }
      case LayerKind::kFlatten:
        y = a;
        break;
    }
  }
}

std::span<const double> Network::backward(Workspace& ws, std::span<const double> dout, std::span<double> grad) const {
  const std::size_t L = spec_.layers.size();
  if (dout.size() != dims_.back().size()) throw ConfigError("backward: output gradient has the wrong size");
  if (grad.size() != params_.size()) throw ConfigError("backward: gradient buffer has the wrong size");
  ws.grad_acts.resize(L + 1);
  ws.grad_acts[L].assign(dout.begin(), dout.end());
  for (std::size_t i = L; i-- > 0;) {
    const LayerSpec& l = spec_.layers[i];
    const Dims in = dims_[i], out = dims_[i + 1];
    const double* p = params_.data() + offsets_[i];
    double* gp = grad.data() + offsets_[i];
    const std::vector<double>& a = ws.acts[i];
    const std::vector<double>& y = ws.acts[i + 1];
    const std::vector<double>& z = ws.pre[i];
    std::vector<double>& dy = ws.grad_acts[i + 1];
    std::vector<double>& da = ws.grad_acts[i];
    da.assign(in.size(), 0.0);
    switch (l.kind) {
      case LayerKind::kDense:
      case LayerKind::kConv1d: {
        const std::size_t width = l.kind == LayerKind::kDense ? in.cols : l.kernel * in.cols;
        const std::span<const double> w(p, l.units * width);
        const std::span<double> gw(gp, l.units * width);
        double* gb = gp + l.units * width;
        for (std::size_t j = 0; j < dy.size(); ++j) dy[j] *= activate_grad(l.activation, z[j], y[j]);
        for (std::size_t r = 0; r < out.rows; ++r) {
          const std::span<const double> dz(dy.data() + r * l.units, l.units);
          const std::span<const double> xr(a.data() + r * in.cols, width);
          k::ger(1.0, dz, xr, gw);
          for (std::size_t u = 0; u < l.units; ++u) gb[u] += dz[u];
          k::gemv_t(w, l.units, width, dz, std::span<double>(da.data() + r * in.cols, width));
        }
        break;
      }
      case LayerKind::kLstm: {
        const std::size_t H = l.units, C = in.cols, T = in.rows;
        const std::span<const double> W(p, 4 * H * C), U(p + 4 * H * C, 4 * H * H);
        const std::span<double> gW(gp, 4 * H * C), gU(gp + 4 * H * C, 4 * H * H);
        double* gb = gp + 4 * H * (C + H);
        std::vector<double> dh(dy.begin(), dy.end()), dc(H, 0.0), dz(4 * H), zeros(H, 0.0);
        for (std::size_t t = T; t-- > 0;) {
          const double* g = z.data() + t * 6 * H;
          const double* c = g + 4 * H;
          const double* c_prev = t ? z.data() + (t - 1) * 6 * H + 4 * H : zeros.data();
          const double* h_prev = t ? z.data() + (t - 1) * 6 * H + 5 * H : zeros.data();
          for (std::size_t j = 0; j < H; ++j) {
            const double ig = g[j], fg = g[H + j], gg = g[2 * H + j], og = g[3 * H + j];
            const double tc = std::tanh(c[j]);
            const double dct = dc[j] + dh[j] * og * (1.0 - tc * tc);
            dz[j] = dct * gg * ig * (1.0 - ig);
            dz[H + j] = dct * c_prev[j] * fg * (1.0 - fg);
            dz[2 * H + j] = dct * ig * (1.0 - gg * gg);
            dz[3 * H + j] = dh[j] * tc * og * (1.0 - og);
            dc[j] = dct * fg;
          }
          k::ger(1.0, dz, std::span<const double>(a.data() + t * C, C), gW);
          k::ger(1.0, dz, std::span<const double>(h_prev, H), gU);
          for (std::size_t j = 0; j < 4 * H; ++j) gb[j] += dz[j];
          k::gemv_t(W, 4 * H, C, dz, std::span<double>(da.data() + t * C, C));
          std::fill(dh.begin(), dh.end(), 0.0);
          k::gemv_t(U, 4 * H, H, dz, dh);
        }
        break;
      }
      case LayerKind::kFlatten:
        da = dy;
        break;
    }
  }
  return ws.grad_acts[0];
}

std::vector<double> Network::forward(std::span<const double> x) const {
  Workspace ws;
  forward(x, ws);
  return std::move(ws.acts.back());
}

std::vector<double> Network::forward_range(std::span<const double> x, std::size_t first, std::size_t last) const {
  if (first > last || last > spec_.layers.size()) throw ConfigError("forward_range: invalid layer range");
  if (x.size() != dims_[first].size()) {
    throw ConfigError("forward_range: input has " + std::to_string(x.size()) + " values, layer " + std::to_string(first) +
                      " expects " + dims_str(dims_[first]));
  }
  if (first == last) return {x.begin(), x.end()};
  NetworkSpec sub;
  sub.input = dims_[first];
  sub.layers.assign(spec_.layers.begin() + static_cast<std::ptrdiff_t>(first),
                    spec_.layers.begin() + static_cast<std::ptrdiff_t>(last));
  Network part(sub);
  std::copy(params_.begin() + static_cast<std::ptrdiff_t>(offsets_[first]),
            params_.begin() + static_cast<std::ptrdiff_t>(offsets_[last]), part.params_.begin());
  return part.forward(x);
}

double Network::loss(std::span<const double> x, std::span<const double> target) const {
  return loss_value(spec_.loss, forward(x), target);
}

double Network::accumulate_gradient(std::span<const double> x, std::span<const double> target, std::span<double> grad,
                                    Workspace& ws) const {
  forward(x, ws);
  std::vector<double> dout(ws.acts.back().size());
  const double value = loss_value(spec_.loss, ws.acts.back(), target, dout);
  backward(ws, dout, grad);
  return value;
}

}  // namespace modeflow::nn
