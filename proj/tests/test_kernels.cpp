#include <random>
#include <vector>

#include "doctest.h"
#include "modeflow/error.hpp"
#include "modeflow/kernels.hpp"

namespace k = modeflow::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<k::Isa> available() {
  std::vector<k::Isa> out;
  for (auto isa : {k::Isa::kScalar, k::Isa::kAvx2, k::Isa::kNeon}) {
    if (k::isa_supported(isa)) out.push_back(isa);
  }
  return out;
}

}  // namespace

TEST_CASE("scalar table matches naive loops") {
  const auto& s = k::table_for(k::Isa::kScalar);
  const auto x = random_vec(37, 1), y = random_vec(37, 2);
  double dot = 0.0, ssd = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    ssd += (x[i] - y[i]) * (x[i] - y[i]);
  }
  CHECK(s.dot(x.data(), y.data(), x.size()) == doctest::Approx(dot).epsilon(1e-14));
  CHECK(s.sum_sq_diff(x.data(), y.data(), x.size()) == doctest::Approx(ssd).epsilon(1e-14));
  auto z = y;
  s.axpy(0.5, x.data(), z.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(z[i] == doctest::Approx(y[i] + 0.5 * x[i]));
}

TEST_CASE("every available variant agrees with scalar, including ragged tails") {
  const auto& ref = k::table_for(k::Isa::kScalar);
  for (auto isa : available()) {
    CAPTURE(k::isa_name(isa));
    const auto& t = k::table_for(isa);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 17u, 63u, 1000u}) {
      CAPTURE(n);
      const auto x = random_vec(n, 10 + static_cast<unsigned>(n)), y = random_vec(n, 99 + static_cast<unsigned>(n));
      const double tol = 1e-13 * static_cast<double>(n + 1);
      CHECK(std::abs(t.dot(x.data(), y.data(), n) - ref.dot(x.data(), y.data(), n)) <= tol);
      CHECK(std::abs(t.sum_sq_diff(x.data(), y.data(), n) - ref.sum_sq_diff(x.data(), y.data(), n)) <= tol);
      auto a = y, b = y;
      t.axpy(-1.25, x.data(), a.data(), n);
      ref.axpy(-1.25, x.data(), b.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("matrix kernels follow row-major semantics under each variant") {
  const std::size_t rows = 5, cols = 9;
  const auto a = random_vec(rows * cols, 3), x = random_vec(cols, 4), xr = random_vec(rows, 5);
  for (auto isa : available()) {
    CAPTURE(k::isa_name(isa));
    k::set_isa(isa);
    std::vector<double> y(rows, 1.0);
    k::gemv(a, rows, cols, x, y);
    for (std::size_t r = 0; r < rows; ++r) {
      double want = 1.0;
      for (std::size_t c = 0; c < cols; ++c) want += a[r * cols + c] * x[c];
      CHECK(y[r] == doctest::Approx(want).epsilon(1e-14));
    }
    std::vector<double> yt(cols, 0.0);
    k::gemv_t(a, rows, cols, xr, yt);
    for (std::size_t c = 0; c < cols; ++c) {
      double want = 0.0;
      for (std::size_t r = 0; r < rows; ++r) want += a[r * cols + c] * xr[r];
      CHECK(yt[c] == doctest::Approx(want).epsilon(1e-14));
    }
    auto g = a;
    k::ger(2.0, xr, x, g);
    CHECK(g[2 * cols + 3] == doctest::Approx(a[2 * cols + 3] + 2.0 * xr[2] * x[3]).epsilon(1e-14));
  }
  k::set_isa(k::Isa::kScalar);
  CHECK(k::active_isa() == k::Isa::kScalar);
}

TEST_CASE("requesting an unavailable variant is a config error") {
  for (auto isa : {k::Isa::kAvx2, k::Isa::kNeon}) {
    if (!k::isa_supported(isa)) CHECK_THROWS_AS(k::set_isa(isa), modeflow::ConfigError);
  }
}
