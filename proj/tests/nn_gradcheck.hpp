#pragma once

// Central finite-difference oracle for network gradients.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "modeflow/neural.hpp"

namespace testing {

struct GradCheck {
  double worst_rel = 0.0;  // over entries failing the absolute floor
  std::size_t checked = 0;
  std::size_t failures = 0;
};

/// Compare analytic gradients with central differences (step h); an entry
/// passes when |a - f| <= rel * max(|a|, |f|) or |a - f| <= abs_floor.
inline GradCheck gradient_check(modeflow::nn::Network& net, std::span<const double> x, std::span<const double> t,
                                double h = 1e-5, double rel = 1e-4, double abs_floor = 1e-6) {
  std::vector<double> grad(net.param_count(), 0.0);
  modeflow::nn::Workspace ws;
  net.accumulate_gradient(x, t, grad, ws);
  GradCheck out;
  auto p = net.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + h;
    const double up = net.loss(x, t);
    p[i] = saved - h;
    const double down = net.loss(x, t);
    p[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double diff = std::abs(fd - grad[i]);
    ++out.checked;
    if (diff > abs_floor && diff > rel * std::max(std::abs(fd), std::abs(grad[i]))) {
      ++out.failures;
      out.worst_rel = std::max(out.worst_rel, diff / std::max(std::abs(fd), std::abs(grad[i])));
    }
  }
  return out;
}

struct RandomNet {
  modeflow::nn::NetworkSpec spec;
  std::vector<double> x, t;
  std::string label;
};

/// Randomised small architecture covering dense, conv1d, lstm, flatten and
/// both losses. Activations are smooth (no ReLU kink under the FD stencil).
inline RandomNet random_net(std::uint64_t seed) {
  using namespace modeflow::nn;
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng() % (hi - lo + 1)); };
  const Activation acts[] = {Activation::kLinear, Activation::kTanh, Activation::kElu};
  auto act = [&] { return acts[rng() % 3]; };
  RandomNet r;
  const std::size_t shape = seed % 5;
  const std::size_t rows = pick(4, 7), cols = pick(1, 3), out = pick(1, 4);
  switch (shape) {
    case 0:
      r.spec.input = {1, pick(2, 5)};
      r.spec.layers = {LayerSpec::dense(pick(2, 5), act()), LayerSpec::dense(out, act())};
      r.label = "dense-dense";
      break;
    case 1:
      r.spec.input = {rows, cols};
      r.spec.layers = {LayerSpec::conv1d(pick(1, 3), pick(1, 3), act()), LayerSpec::flatten(), LayerSpec::dense(out, act())};
      r.label = "conv1d-flatten-dense";
      break;
    case 2:
      r.spec.input = {rows, cols};
      r.spec.layers = {LayerSpec::lstm(pick(1, 4)), LayerSpec::dense(out, act())};
      r.label = "lstm-dense";
      break;
    case 3:
      r.spec.input = {rows, cols};
      r.spec.layers = {LayerSpec::conv1d(pick(1, 3), 2, act()), LayerSpec::lstm(pick(1, 3)), LayerSpec::dense(out)};
      r.label = "conv1d-lstm-dense";
      break;
    default:
      r.spec.input = {rows, cols};
      r.spec.layers = {LayerSpec::dense(pick(2, 3), act()), LayerSpec::flatten(), LayerSpec::dense(out, act())};
      r.label = "rowwise-dense-flatten-dense";
      break;
  }
  if ((seed / 5) % 2 == 1) {
    r.spec.loss.kind = LossKind::kPaMse;
    r.spec.loss.lambda = 0.5 + static_cast<double>(rng() % 4) * 0.5;
    if (out > 1 && rng() % 2) r.spec.loss.species = {0, out - 1};
    r.label += "/pa_mse";
  } else {
    r.label += "/mse";
  }
  r.spec.seed = seed * 7919 + 1;
  std::normal_distribution<double> g;
  r.x.resize(r.spec.input.size());
  for (auto& v : r.x) v = g(rng);
  r.t.resize(out);
  for (auto& v : r.t) v = 0.5 * g(rng);
  return r;
}

}  // namespace testing
