#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "modeflow/error.hpp"
#include "modeflow/neural.hpp"

namespace modeflow::nn {
namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void check_finite(double value, const char* what, std::size_t epoch) {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string("training diverged: non-finite ") + what + " in epoch " + std::to_string(epoch) +
                         "; last finite epoch " + std::to_string(epoch - 1));
  }
}

}  // namespace

void Dataset::push(std::span<const double> xi, std::span<const double> yi) {
  if (xi.size() != in.size() || yi.size() != out.size()) throw ConfigError("dataset: sample has the wrong shape");
  x.insert(x.end(), xi.begin(), xi.end());
  y.insert(y.end(), yi.begin(), yi.end());
}

std::array<std::size_t, 3> split_counts(std::size_t K, const SplitFractions& f) {
  if (f.train < 0.0 || f.val < 0.0 || f.test < 0.0 || std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  const double k = static_cast<double>(K);
  const auto train = static_cast<std::size_t>(std::floor(k * f.train + 1e-9));
  const auto val = static_cast<std::size_t>(std::floor(k * f.val + 1e-9));
  std::array<std::size_t, 3> out{train, val, K - train - val};
  if (f.test == 0.0) {
    out[0] += out[2];
    out[2] = 0;
  }
  return out;
}

TrainHistory optimize(GradientProblem& problem, const TrainOptions& opts) {
  const std::size_t n = problem.train_count;
  if (n == 0) throw ConfigError("training set is empty");
  if (opts.batch == 0 || opts.batch > n) {
    throw ConfigError("batch size " + std::to_string(opts.batch) + " must be between 1 and the " + std::to_string(n) +
                      " training samples");
  }
  if (opts.epochs == 0) throw ConfigError("epochs must be at least 1");
  if (!(opts.lr > 0.0)) throw ConfigError("learning rate must be positive");

  const std::size_t blocks = problem.params.size();
  std::vector<std::vector<double>> grad_store(blocks), m(blocks), v(blocks), best(blocks);
  std::vector<std::span<double>> grads(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t sz = problem.params[b].size();
    grad_store[b].assign(sz, 0.0);
    m[b].assign(sz, 0.0);
    v[b].assign(sz, 0.0);
    best[b].assign(problem.params[b].begin(), problem.params[b].end());
    grads[b] = grad_store[b];
  }

  std::mt19937_64 rng(opts.seed);
  std::vector<std::size_t> order(n);
  TrainHistory h;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t wait = 0;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i-- > 1;) std::swap(order[i], order[rng() % (i + 1)]);

    for (std::size_t start = 0; start < n; start += opts.batch) {
      const std::size_t stop = std::min(n, start + opts.batch);
      for (auto& g : grad_store) std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t j = start; j < stop; ++j) check_finite(problem.sample_grad(order[j], grads), "loss", epoch);
      ++step;
      const double inv = 1.0 / static_cast<double>(stop - start);
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t b = 0; b < blocks; ++b) {
        auto& p = problem.params[b];
        for (std::size_t i = 0; i < p.size(); ++i) {
          const double g = grad_store[b][i] * inv;
          m[b][i] = kBeta1 * m[b][i] + (1.0 - kBeta1) * g;
          v[b][i] = kBeta2 * v[b][i] + (1.0 - kBeta2) * g * g;
          p[i] -= opts.lr * (m[b][i] / c1) / (std::sqrt(v[b][i] / c2) + kAdamEps);
        }
      }
    }

    const double tl = problem.train_loss();
    const double vl = problem.val_loss();
    check_finite(tl, "training loss", epoch);
    check_finite(vl, "validation loss", epoch);
    h.train_loss.push_back(tl);
    h.val_loss.push_back(vl);
    if (problem.on_epoch) problem.on_epoch({epoch, tl, vl});
    if (vl < best_val) {
      best_val = vl;
      h.best_epoch = epoch;
      wait = 0;
      for (std::size_t b = 0; b < blocks; ++b) std::copy(problem.params[b].begin(), problem.params[b].end(), best[b].begin());
    } else if (opts.patience > 0 && ++wait >= opts.patience) {
      h.stopped_early = true;
      break;
    }
  }
  for (std::size_t b = 0; b < blocks; ++b) std::copy(best[b].begin(), best[b].end(), problem.params[b].begin());
  return h;
}

double mean_loss(const Network& net, const Dataset& d) {
  if (d.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) sum += net.loss(d.input(i), d.target(i));
  return sum / static_cast<double>(d.size());
}

TrainedModel train(Network net, const Dataset& train_set, const Dataset& val_set, const TrainOptions& opts,
                   std::function<void(const EpochStats&)> on_epoch) {
  if (train_set.in != net.input_dims() || train_set.out.size() != net.output_dims().size()) {
    throw ConfigError("training data shape does not match the network");
  }
  if (val_set.size() == 0) throw ConfigError("validation set is empty");
  Workspace ws;
  GradientProblem problem;
  problem.params = {net.params()};
  problem.train_count = train_set.size();
  problem.sample_grad = [&](std::size_t i, std::vector<std::span<double>>& g) {
    return net.accumulate_gradient(train_set.input(i), train_set.target(i), g[0], ws);
  };
  problem.train_loss = [&] { return mean_loss(net, train_set); };
  problem.val_loss = [&] { return mean_loss(net, val_set); };
  problem.on_epoch = std::move(on_epoch);
  TrainHistory h = optimize(problem, opts);
  return TrainedModel{std::move(net), std::move(h)};
}

RollingWindowDataset make_windows(const Eigen::MatrixXd& m, std::size_t q, std::size_t p, const SplitFractions& split) {
  if (q == 0 || p == 0) throw ConfigError("windows need q >= 1 and p >= 1");
  const auto K = static_cast<std::size_t>(m.cols());
  const auto F = static_cast<std::size_t>(m.rows());
  RollingWindowDataset r;
  r.q = q;
  r.p = p;
  r.blocks = split_counts(K, split);
  const std::array<double, 3> fractions{split.train, split.val, split.test};
  const std::array<const char*, 3> names{"training", "validation", "test"};
  std::array<Dataset*, 3> sets{&r.train, &r.val, &r.test};
  std::size_t start = 0;
  std::vector<double> xi(q * F), yi(p * F);
  for (std::size_t b = 0; b < 3; ++b) {
    Dataset& d = *sets[b];
    d.in = {q, F};
    d.out = {p, F};
    const std::size_t len = r.blocks[b];
    if (fractions[b] > 0.0 && len < q + p) {
      throw ConfigError(std::string(names[b]) + " block has " + std::to_string(len) + " snapshots, fewer than q + p = " +
                        std::to_string(q + p));
    }
    for (std::size_t s = start; len >= q + p && s + q + p <= start + len; ++s) {
      for (std::size_t t = 0; t < q; ++t) {
        for (std::size_t f = 0; f < F; ++f) xi[t * F + f] = m(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(s + t));
      }
      for (std::size_t t = 0; t < p; ++t) {
        for (std::size_t f = 0; f < F; ++f) {
          yi[t * F + f] = m(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(s + q + t));
        }
      }
      d.push(xi, yi);
    }
    start += len;
  }
  return r;
}

}  // namespace modeflow::nn
