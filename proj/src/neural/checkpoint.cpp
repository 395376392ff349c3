#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "modeflow/error.hpp"
#include "modeflow/neural.hpp"

namespace modeflow::nn {
namespace {

using json = nlohmann::json;

constexpr char kMagic[5] = {'M', 'F', 'N', 'N', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw FormatError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

LayerKind parse_kind(const std::string& s) {
  if (s == "dense") return LayerKind::kDense;
  if (s == "conv1d") return LayerKind::kConv1d;
  if (s == "lstm") return LayerKind::kLstm;
  if (s == "flatten") return LayerKind::kFlatten;
  throw FormatError("unknown layer kind '" + s + "' in network spec");
}

json spec_json(const NetworkSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.layers) {
    layers.push_back({{"kind", to_string(l.kind)}, {"units", l.units}, {"kernel", l.kernel},
                      {"activation", to_string(l.activation)}});
  }
  return {{"input", {spec.input.rows, spec.input.cols}},
          {"layers", layers},
          {"loss",
           {{"kind", to_string(spec.loss.kind)},
            {"lambda", spec.loss.lambda},
            {"group", spec.loss.group},
            {"species", spec.loss.species}}},
          {"seed", spec.seed}};
}

NetworkSpec spec_from(const json& j) {
  NetworkSpec s;
  s.input = {j.at("input").at(0).get<std::size_t>(), j.at("input").at(1).get<std::size_t>()};
  for (const auto& l : j.at("layers")) {
    LayerSpec ls;
    ls.kind = parse_kind(l.at("kind").get<std::string>());
    ls.units = l.at("units").get<std::size_t>();
    ls.kernel = l.at("kernel").get<std::size_t>();
    ls.activation = parse_activation(l.at("activation").get<std::string>());
    s.layers.push_back(ls);
  }
  const json& loss = j.at("loss");
  s.loss.kind = parse_loss(loss.at("kind").get<std::string>());
  s.loss.lambda = loss.at("lambda").get<double>();
  s.loss.group = loss.at("group").get<std::size_t>();
  s.loss.species = loss.at("species").get<std::vector<std::size_t>>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

}  // namespace

std::string spec_to_json(const NetworkSpec& spec) { return spec_json(spec).dump(); }

NetworkSpec spec_from_json(const std::string& text) {
  try {
    return spec_from(json::parse(text));
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid network spec: ") + e.what());
  }
}

void save_checkpoint(std::ostream& os, const TrainedModel& model) {
  json doc = {{"spec", spec_json(model.net.spec())},
              {"history",
               {{"train_loss", model.history.train_loss},
                {"val_loss", model.history.val_loss},
                {"best_epoch", model.history.best_epoch},
                {"stopped_early", model.history.stopped_early}}}};
  const std::string text = doc.dump();
  os.write(kMagic, sizeof kMagic);
  put_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto params = model.net.params();
  put_u64(os, params.size());
  for (double p : params) put_u64(os, std::bit_cast<std::uint64_t>(p));
  if (!os) throw Error("failed to write checkpoint");
}

TrainedModel load_checkpoint(std::istream& is) {
  char magic[sizeof kMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a network checkpoint (bad magic)");
  }
  const std::uint64_t len = get_u64(is);
  if (len > (1u << 26)) throw FormatError("checkpoint header is implausibly large");
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw FormatError("checkpoint truncated");
  json doc;
  NetworkSpec spec;
  TrainHistory h;
  try {
    doc = json::parse(text);
    spec = spec_from(doc.at("spec"));
    const json& jh = doc.at("history");
    h.train_loss = jh.at("train_loss").get<std::vector<double>>();
    h.val_loss = jh.at("val_loss").get<std::vector<double>>();
    h.best_epoch = jh.at("best_epoch").get<std::size_t>();
    h.stopped_early = jh.at("stopped_early").get<bool>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid checkpoint header: ") + e.what());
  }
  Network net(std::move(spec));
  const std::uint64_t count = get_u64(is);
  if (count != net.param_count()) throw FormatError("checkpoint parameter count does not match its network spec");
  for (double& p : net.params()) p = std::bit_cast<double>(get_u64(is));
  return TrainedModel{std::move(net), std::move(h)};
}

}  // namespace modeflow::nn
