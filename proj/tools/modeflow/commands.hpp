#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace modeflow::cli {

struct RunArgs {
  std::string input;
  std::string config;
  std::string output;
  std::string truth;   // optional reference for RRMSE
  std::string method;  // svd | hosvd for repair/superres
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
  bool plots = false;
  bool verbose = false;
};

struct SyntheticArgs {
  std::string config;
  std::string output;
  std::optional<std::size_t> modes;
  std::optional<double> noise;
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
};

void run_decompose(const std::string& method, const RunArgs& a);
void run_repair_gappy(const RunArgs& a);
void run_superres(const RunArgs& a);
void run_forecast_dmd(const RunArgs& a);
void run_forecast_nn(const RunArgs& a);
void run_reconstruct_nn(const RunArgs& a);
void run_autoencode(const RunArgs& a);
void run_generate_synthetic(const SyntheticArgs& a);
void run_info(const std::string& path);

}  // namespace modeflow::cli
