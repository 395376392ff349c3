#include <concepts>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "modeflow/error.hpp"
#include "modeflow/io.hpp"

namespace modeflow::io {
namespace {

using json = nlohmann::json;

// Walks one JSON object, consuming known keys; leftovers are rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown configuration key '" + child(key) + "'");
    }
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const char* key, double& out) {
    if (auto* v = find(key)) {
      if (!v->is_number()) fail(key, "a number");
      out = v->get<double>();
    }
  }
  void get(const char* key, bool& out) {
    if (auto* v = find(key)) {
      if (!v->is_boolean()) fail(key, "true or false");
      out = v->get<bool>();
    }
  }
  template <std::unsigned_integral U>
  void get(const char* key, U& out) {
    if (auto* v = find(key)) out = static_cast<U>(as_count(*v, key));
  }
  void get(const char* key, int& out) {
    if (auto* v = find(key)) {
      if (!v->is_number_integer()) fail(key, "an integer");
      out = v->get<int>();
    }
  }
  void get(const char* key, Eigen::Index& out) {
    if (auto* v = find(key)) out = static_cast<Eigen::Index>(as_count(*v, key));
  }
  template <class Enum, class Parse>
  void get_enum(const char* key, Enum& out, Parse parse) {
    if (auto* v = find(key)) {
      if (!v->is_string()) fail(key, "a string");
      try {
        out = parse(v->get<std::string>());
      } catch (const ConfigError& e) {
        throw ConfigError(child(key) + ": " + e.what());
      }
    }
  }
  void get(const char* key, std::vector<double>& out) {
    if (auto* v = find(key)) {
      if (v->is_number()) {
        out = {v->get<double>()};
        return;
      }
      if (!v->is_array()) fail(key, "a number or an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) fail(key, "an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }
  void get(const char* key, std::vector<std::size_t>& out) {
    if (auto* v = find(key)) {
      if (!v->is_array()) fail(key, "an array of non-negative integers");
      out.clear();
      for (const auto& e : *v) out.push_back(as_count(e, key));
    }
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "configuration" : "'" + path_ + "'"; }
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError("configuration key '" + child(key) + "' must be " + what);
  }
  std::size_t as_count(const json& v, const char* key) const {
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "a non-negative integer");
    return v.get<std::size_t>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Fn>
void section(Section& parent, const char* key, Fn fn) {
  if (auto* v = parent.find(key)) {
    Section s(*v, parent.child(key));
    fn(s);
  }
}

void read_train(Section& s, nn::TrainOptions& t) {
  s.get("lr", t.lr);
  s.get("batch", t.batch);
  s.get("epochs", t.epochs);
  s.get("patience", t.patience);
  s.get("seed", t.seed);
  if (auto* v = s.find("split")) {
    Section sp(*v, s.child("split"));
    sp.get("train", t.split.train);
    sp.get("val", t.split.val);
    sp.get("test", t.split.test);
  }
}

json train_json(const nn::TrainOptions& t) {
  return {{"lr", t.lr},
          {"batch", t.batch},
          {"epochs", t.epochs},
          {"patience", t.patience},
          {"seed", t.seed},
          {"split", {{"train", t.split.train}, {"val", t.split.val}, {"test", t.split.test}}}};
}

void parse_into(const json& root, RunConfig& c) {
  Section top(root, "");
  top.get("dt", c.dt);
  section(top, "svd", [&](Section& s) {
    s.get("tol", c.svd.tol);
    if (auto* v = s.find("max_rank")) {
      if (v->is_null()) {
        c.svd.max_rank.reset();
      } else {
        if (!v->is_number_integer() || v->get<long long>() < 1) {
          throw ConfigError("configuration key 'svd.max_rank' must be a positive integer or null");
        }
        c.svd.max_rank = v->get<Eigen::Index>();
      }
    }
  });
  section(top, "hosvd", [&](Section& s) { s.get("tols", c.hosvd.tols); });
  section(top, "hodmd", [&](Section& s) {
    s.get("d", c.hodmd.d);
    s.get("eps_svd", c.hodmd.eps_svd);
    s.get("eps_a", c.hodmd.eps_a);
    s.get("max_iters", c.hodmd.max_iters);
    s.get("iterative", c.hodmd.iterative);
  });
  section(top, "gappy", [&](Section& s) {
    s.get_enum("init_fill", c.gappy.init_fill, parse_init_fill);
    s.get("rank", c.gappy.rank);
    s.get("ranks", c.gappy.ranks);
    s.get("tol_gaps", c.gappy.tol_gaps);
    s.get("max_iters", c.gappy.max_iters);
  });
  section(top, "superres", [&](Section& s) {
    s.get("doublings", c.superres.doublings);
    s.get("rank", c.superres.rank);
    s.get_enum("interp", c.superres.interp, parse_interp);
    s.get_enum("temporal", c.superres.temporal, parse_temporal_mode);
  });
  section(top, "dmd_forecast", [&](Section& s) {
    s.get("eps_perm", c.dmd_forecast.eps_perm);
    s.get("freeze_growth", c.dmd_forecast.freeze_growth);
    s.get("horizon", c.dmd_forecast.horizon);
    s.get("d", c.dmd_forecast.d);
    s.get("eps_svd", c.dmd_forecast.eps_svd);
    s.get("eps_a", c.dmd_forecast.eps_a);
  });
  section(top, "forecast_nn", [&](Section& s) {
    auto& f = c.forecast_nn;
    s.get_enum("framework", f.framework, parse_framework);
    s.get_enum("model", f.model, parse_model_kind);
    s.get("svd_rank", f.svd_rank);
    s.get_enum("scaling1", f.scaling1, parse_scaler_kind);
    s.get_enum("scaling2", f.scaling2, parse_scaler_kind);
    s.get("q", f.q);
    s.get("p", f.p);
    s.get("hidden", f.hidden);
    s.get_enum("hidden_activation", f.hidden_activation, nn::parse_activation);
    s.get_enum("output_activation", f.output_activation, nn::parse_activation);
    s.get("cnn_filters", f.cnn_filters);
    s.get("cnn_kernel", f.cnn_kernel);
    section(s, "train", [&](Section& t) { read_train(t, f.train); });
  });
  section(top, "reconstruct", [&](Section& s) {
    auto& r = c.reconstruct;
    s.get("rank", r.rank);
    s.get("depth", r.depth);
    s.get("hidden", r.hidden);
    s.get_enum("activation", r.activation, nn::parse_activation);
    s.get("stride1", r.stride1);
    s.get("stride2", r.stride2);
    section(s, "train", [&](Section& t) { read_train(t, r.train); });
  });
  section(top, "autoencode", [&](Section& s) {
    auto& a = c.autoencode;
    s.get("encoding_dim", a.encoding_dim);
    s.get("hidden", a.hidden);
    s.get_enum("activation", a.activation, nn::parse_activation);
    s.get("train_fraction", a.train_fraction);
    section(s, "train", [&](Section& t) { read_train(t, a.train); });
  });
  section(top, "synthetic", [&](Section& s) {
    auto& g = c.synthetic;
    if (auto* v = s.find("modes")) {
      if (!v->is_array()) throw ConfigError("configuration key 'synthetic.modes' must be an array");
      g.modes.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        Section m((*v)[i], s.child("modes[" + std::to_string(i) + "]"));
        SyntheticModeSpec spec;
        m.get("a", spec.a);
        m.get("omega", spec.omega);
        m.get("delta", spec.delta);
        g.modes.push_back(spec);
      }
    }
    s.get("components", g.components);
    s.get("space", g.space);
    s.get("times", g.times);
    s.get("noise", g.noise);
    s.get("seed", g.seed);
  });
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  RunConfig c;
  parse_into(root, c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open configuration '" + path.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string config_to_json(const RunConfig& c) {
  json modes = json::array();
  for (const auto& m : c.synthetic.modes) modes.push_back({{"a", m.a}, {"omega", m.omega}, {"delta", m.delta}});
  const auto& f = c.forecast_nn;
  const auto& r = c.reconstruct;
  const auto& a = c.autoencode;
  json j = {
      {"dt", c.dt},
      {"svd", {{"tol", c.svd.tol}, {"max_rank", c.svd.max_rank ? json(*c.svd.max_rank) : json(nullptr)}}},
      {"hosvd", {{"tols", c.hosvd.tols}}},
      {"hodmd",
       {{"d", c.hodmd.d},
        {"eps_svd", c.hodmd.eps_svd},
        {"eps_a", c.hodmd.eps_a},
        {"max_iters", c.hodmd.max_iters},
        {"iterative", c.hodmd.iterative}}},
      {"gappy",
       {{"init_fill", to_string(c.gappy.init_fill)},
        {"rank", c.gappy.rank},
        {"ranks", c.gappy.ranks},
        {"tol_gaps", c.gappy.tol_gaps},
        {"max_iters", c.gappy.max_iters}}},
      {"superres",
       {{"doublings", c.superres.doublings},
        {"rank", c.superres.rank},
        {"interp", to_string(c.superres.interp)},
        {"temporal", to_string(c.superres.temporal)}}},
      {"dmd_forecast",
       {{"eps_perm", c.dmd_forecast.eps_perm},
        {"freeze_growth", c.dmd_forecast.freeze_growth},
        {"horizon", c.dmd_forecast.horizon},
        {"d", c.dmd_forecast.d},
        {"eps_svd", c.dmd_forecast.eps_svd},
        {"eps_a", c.dmd_forecast.eps_a}}},
      {"forecast_nn",
       {{"framework", to_string(f.framework)},
        {"model", to_string(f.model)},
        {"svd_rank", f.svd_rank},
        {"scaling1", to_string(f.scaling1)},
        {"scaling2", to_string(f.scaling2)},
        {"q", f.q},
        {"p", f.p},
        {"hidden", f.hidden},
        {"hidden_activation", nn::to_string(f.hidden_activation)},
        {"output_activation", nn::to_string(f.output_activation)},
        {"cnn_filters", f.cnn_filters},
        {"cnn_kernel", f.cnn_kernel},
        {"train", train_json(f.train)}}},
      {"reconstruct",
       {{"rank", r.rank},
        {"depth", r.depth},
        {"hidden", r.hidden},
        {"activation", nn::to_string(r.activation)},
        {"stride1", r.stride1},
        {"stride2", r.stride2},
        {"train", train_json(r.train)}}},
      {"autoencode",
       {{"encoding_dim", a.encoding_dim},
        {"hidden", a.hidden},
        {"activation", nn::to_string(a.activation)},
        {"train_fraction", a.train_fraction},
        {"train", train_json(a.train)}}},
      {"synthetic",
       {{"modes", modes},
        {"components", c.synthetic.components},
        {"space", c.synthetic.space},
        {"times", c.synthetic.times},
        {"noise", c.synthetic.noise},
        {"seed", c.synthetic.seed}}},
  };
  return j.dump(2);
}

}  // namespace modeflow::io
