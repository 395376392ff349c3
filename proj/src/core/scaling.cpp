#include "modeflow/scaling.hpp"

#include <cmath>
#include <string>

#include "modeflow/error.hpp"

namespace modeflow {
namespace {

void check_layout(const Eigen::MatrixXd& m, const ScalerSpec& s) {
  if (static_cast<std::size_t>(m.rows()) != s.variables() * s.rows_per_variable) {
    throw ConfigError("scaler layout mismatch: fitted on " + std::to_string(s.variables()) + " variables x " +
                      std::to_string(s.rows_per_variable) + " rows, matrix has " + std::to_string(m.rows()) + " rows");
  }
}

}  // namespace

std::string_view to_string(ScalerKind kind) noexcept {
  switch (kind) {
    case ScalerKind::kNone: return "none";
    case ScalerKind::kRange: return "range";
    case ScalerKind::kAuto: return "auto";
    case ScalerKind::kPareto: return "pareto";
    case ScalerKind::kMpm: return "mpm";
  }
  return "none";
}

ScalerKind parse_scaler_kind(std::string_view name) {
  if (name == "none") return ScalerKind::kNone;
  if (name == "range") return ScalerKind::kRange;
  if (name == "auto") return ScalerKind::kAuto;
  if (name == "pareto") return ScalerKind::kPareto;
  if (name == "mpm") return ScalerKind::kMpm;
  throw ConfigError("unknown scaling '" + std::string(name) + "' (expected none, range, auto, pareto or mpm)");
}

bool default_centering(ScalerKind kind) noexcept {
  return kind == ScalerKind::kRange || kind == ScalerKind::kAuto || kind == ScalerKind::kPareto;
}

ScalerSpec fit_scaler(const Eigen::MatrixXd& m, ScalerKind kind, std::size_t variables) {
  return fit_scaler(m, kind, variables, default_centering(kind));
}

ScalerSpec fit_scaler(const Eigen::MatrixXd& m, ScalerKind kind, std::size_t variables, bool centering) {
  if (m.size() == 0) throw ConfigError("cannot fit a scaler on an empty matrix");
  const auto rows = static_cast<std::size_t>(m.rows());
  if (kind == ScalerKind::kMpm) {
    if (variables != 0 && variables != rows) throw ConfigError("mpm scaling treats every row (mode) as a variable");
    variables = rows;
  }
  if (variables == 0 || rows % variables != 0) {
    throw ConfigError(std::to_string(rows) + " rows cannot be split into " + std::to_string(variables) + " variables");
  }

  ScalerSpec s;
  s.kind = kind;
  s.centering = centering;
  s.rows_per_variable = rows / variables;
  s.means.assign(variables, 0.0);
  s.factors.assign(variables, 1.0);
  const auto block_rows = static_cast<Eigen::Index>(s.rows_per_variable);

  for (std::size_t v = 0; v < variables; ++v) {
    auto block = m.middleRows(static_cast<Eigen::Index>(v) * block_rows, block_rows);
    const double mean = block.mean();
    if (centering) s.means[v] = mean;
    switch (kind) {
      case ScalerKind::kNone:
      case ScalerKind::kMpm:
        break;
      case ScalerKind::kRange:
        s.factors[v] = block.maxCoeff() - block.minCoeff();
        break;
      case ScalerKind::kAuto:
      case ScalerKind::kPareto: {
        const double var = (block.array() - mean).square().mean();
        s.factors[v] = kind == ScalerKind::kAuto ? std::sqrt(var) : std::sqrt(std::sqrt(var));
        break;
      }
    }
    if (!(s.factors[v] > 0.0)) {
      throw NumericalError("variable " + std::to_string(v) + " is degenerate for " + std::string(to_string(kind)) +
                           " scaling (zero spread)");
    }
  }

  if (kind == ScalerKind::kMpm) {
    double divisor = 0.0;
    for (std::size_t v = 0; v < variables; ++v) {
      divisor += (m.row(static_cast<Eigen::Index>(v)).array() - s.means[v]).abs().maxCoeff();
    }
    if (!(divisor > 0.0)) throw NumericalError("mpm scaling: all modes are identically zero");
    s.factors.assign(variables, divisor);
  }
  return s;
}

Eigen::MatrixXd apply_scaler(const Eigen::MatrixXd& m, const ScalerSpec& s) {
  check_layout(m, s);
  Eigen::MatrixXd out(m.rows(), m.cols());
  const auto br = static_cast<Eigen::Index>(s.rows_per_variable);
  for (std::size_t v = 0; v < s.variables(); ++v) {
    const auto r0 = static_cast<Eigen::Index>(v) * br;
    out.middleRows(r0, br) = (m.middleRows(r0, br).array() - s.means[v]) / s.factors[v];
  }
  return out;
}

Eigen::MatrixXd invert_scaler(const Eigen::MatrixXd& m, const ScalerSpec& s) {
  check_layout(m, s);
  Eigen::MatrixXd out(m.rows(), m.cols());
  const auto br = static_cast<Eigen::Index>(s.rows_per_variable);
  for (std::size_t v = 0; v < s.variables(); ++v) {
    const auto r0 = static_cast<Eigen::Index>(v) * br;
    out.middleRows(r0, br) = m.middleRows(r0, br).array() * s.factors[v] + s.means[v];
  }
  return out;
}

}  // namespace modeflow
