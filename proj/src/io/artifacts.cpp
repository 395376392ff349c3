#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "modeflow/error.hpp"
#include "modeflow/io.hpp"

namespace modeflow::io {

ArtifactDir::ArtifactDir(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  if (std::filesystem::exists(root_, ec)) {
    throw Error("output directory '" + root_.string() + "' already exists; choose a new path");
  }
  if (!std::filesystem::create_directories(root_, ec) || ec) {
    throw Error("cannot create output directory '" + root_.string() + "': " + ec.message());
  }
}

void ArtifactDir::write_tensor(const std::string& name, const Tensor& t) const {
  bool gappy = false;
  for (double v : t.values()) gappy = gappy || std::isnan(v);
  write_tensor_file(path(name), t, gappy);
}

void ArtifactDir::write_text(const std::string& name, const std::string& text) const {
  std::ofstream os(path(name));
  if (!(os << text)) throw Error("cannot write '" + path(name).string() + "'");
}

void write_spectrum_svg(std::ostream& os, const std::vector<SpectrumRow>& rows) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 20, B = 50;
  double wmin = 0, wmax = 1, amin = 1, amax = 1;
  if (!rows.empty()) {
    wmin = wmax = rows[0].omega;
    amin = amax = std::max(rows[0].amplitude, 1e-300);
    for (const auto& r : rows) {
      wmin = std::min(wmin, r.omega);
      wmax = std::max(wmax, r.omega);
      amin = std::min(amin, std::max(r.amplitude, 1e-300));
      amax = std::max(amax, r.amplitude);
    }
  }
  if (wmax - wmin < 1e-12) {
    wmin -= 1;
    wmax += 1;
  }
  double lo = std::floor(std::log10(amin)), hi = std::ceil(std::log10(amax));
  if (hi - lo < 1) hi = lo + 1;
  auto x = [&](double w) { return L + (w - wmin) / (wmax - wmin) * (W - L - R); };
  auto y = [&](double a) { return T + (hi - std::log10(std::max(a, 1e-300))) / (hi - lo) * (H - T - B); };

  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (double e = lo; e <= hi; e += 1) {
    os << "<text x=\"" << L - 8 << "\" y=\"" << y(std::pow(10.0, e)) + 4
       << "\" font-size=\"11\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  os << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" font-size=\"11\">" << wmin << "</text>\n";
  os << "<text x=\"" << W - R << "\" y=\"" << H - B + 18 << "\" font-size=\"11\" text-anchor=\"end\">" << wmax << "</text>\n";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" font-size=\"13\" text-anchor=\"middle\">omega</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" font-size=\"13\" transform=\"rotate(-90 16 " << (T + H - B) / 2
     << ")\" text-anchor=\"middle\">amplitude</text>\n";
  for (const auto& r : rows) {
    os << "<circle cx=\"" << x(r.omega) << "\" cy=\"" << y(r.amplitude) << "\" r=\"4\" fill=\""
       << (mode_kind(r.delta) == "permanent" ? "#1f5fbf" : (r.delta < 0 ? "#999999" : "#c0392b")) << "\"/>\n";
  }
  os << "</svg>\n";
}

void write_heatmap_ppm(std::ostream& os, const Eigen::MatrixXd& field) {
  double scale = 0.0;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    if (std::isfinite(field.data()[i])) scale = std::max(scale, std::abs(field.data()[i]));
  }
  if (scale == 0.0) scale = 1.0;
  os << "P6\n" << field.cols() << " " << field.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < field.rows(); ++i) {
    for (Eigen::Index j = 0; j < field.cols(); ++j) {
      const double v = field(i, j);
      unsigned char rgb[3] = {0, 0, 0};
      if (std::isfinite(v)) {
        const double s = std::clamp(v / scale, -1.0, 1.0);
        const auto fade = static_cast<unsigned char>(std::lround(255.0 * (1.0 - std::abs(s))));
        rgb[0] = s < 0 ? fade : 255;
        rgb[1] = fade;
        rgb[2] = s > 0 ? fade : 255;
      }
      os.write(reinterpret_cast<const char*>(rgb), 3);
    }
  }
}

}  // namespace modeflow::io
