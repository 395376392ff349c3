#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "modeflow/error.hpp"
#include "modeflow/io.hpp"

namespace modeflow::io {
namespace {

constexpr char kMagic[4] = {'M', 'F', 'T', '1'};
constexpr std::size_t kMaxDims = 8;

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

bool get_u64(std::istream& is, std::uint64_t& v) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return true;
}

}  // namespace

void write_tensor(std::ostream& os, const Tensor& t, bool gappy) {
  if (t.order() == 0 || t.order() > kMaxDims) throw ConfigError("tensor files hold 1 to 8 dimensions");
  if (!gappy) {
    for (double v : t.values()) {
      if (std::isnan(v)) throw ConfigError("NaN values require a gappy tensor file");
    }
  }
  os.write(kMagic, 4);
  os.put(static_cast<char>(kDtypeF64 | (gappy ? kGappyFlag : 0)));
  os.put(static_cast<char>(t.order()));
  for (auto d : t.shape()) put_u64(os, d);
  for (double v : t.values()) put_u64(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw Error("failed writing tensor data");
}

void write_tensor_file(const std::filesystem::path& path, const Tensor& t, bool gappy) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  write_tensor(os, t, gappy);
}

TensorFile read_tensor(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) throw FormatError("bad magic: not a MFT1 tensor file");
  const int dtype = is.get();
  const int ndim = is.get();
  if (dtype == EOF || ndim == EOF) throw FormatError("truncated header");
  if ((dtype & 0x0f) != kDtypeF64 || (dtype & 0xe0) != 0) {
    throw FormatError("unsupported dtype code " + std::to_string(dtype));
  }
  if (ndim < 1 || static_cast<std::size_t>(ndim) > kMaxDims) throw FormatError("invalid ndim " + std::to_string(ndim));

  Shape shape(static_cast<std::size_t>(ndim));
  std::uint64_t count = 1;
  for (auto& d : shape) {
    std::uint64_t v = 0;
    if (!get_u64(is, v)) throw FormatError("truncated shape");
    if (v == 0) throw FormatError("zero-length axis in shape");
    if (count > std::numeric_limits<std::uint64_t>::max() / 8 / v) throw FormatError("shape product overflows");
    count *= v;
    d = static_cast<std::size_t>(v);
  }

  // Read in chunks so a forged shape cannot trigger a huge allocation up front.
  TensorFile f;
  f.gappy = (dtype & kGappyFlag) != 0;
  std::vector<double> data;
  std::uint64_t done = 0;
  constexpr std::uint64_t kChunk = 1u << 16;
  std::vector<unsigned char> buf;
  while (done < count) {
    const std::uint64_t n = std::min(kChunk, count - done);
    buf.resize(n * 8);
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 8))) {
      throw FormatError("truncated payload: expected " + std::to_string(count * 8) + " bytes");
    }
    for (std::uint64_t i = 0; i < n; ++i) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[i * 8 + b]) << (8 * b);
      const double v = std::bit_cast<double>(bits);
      if (std::isnan(v) && !f.gappy) throw FormatError("NaN payload entry in a file not flagged gappy");
      data.push_back(v);
    }
    done += n;
  }
  if (is.peek() != EOF) throw FormatError("trailing bytes after payload");
  f.tensor = Tensor(std::move(shape), std::move(data));
  return f;
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  try {
    return read_tensor(is);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Tensor read_csv(std::istream& is) {
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };

  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty CSV file");
  const std::size_t J = split(line).size();
  if (J == 0) throw FormatError("CSV header has no columns");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != J) {
      throw FormatError("CSV row " + std::to_string(rows.size() + 2) + " has " + std::to_string(cells.size()) +
                        " fields, header has " + std::to_string(J));
    }
    std::vector<double> row(J);
    for (std::size_t j = 0; j < J; ++j) {
      const std::string c = trim(cells[j]);
      if (c.empty() || c == "nan" || c == "NaN") {
        row[j] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      std::size_t used = 0;
      try {
        row[j] = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != c.size()) throw FormatError("CSV row " + std::to_string(rows.size() + 2) + ": bad number '" + c + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("CSV file has no data rows");
  const std::size_t K = rows.size();
  Tensor t({J, K});
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < J; ++j) t[j * K + k] = rows[k][j];
  }
  return t;
}

Tensor read_csv_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  return read_csv(is);
}

}  // namespace modeflow::io
