#pragma once

// Experiment configuration: a JSON document naming a model, a task and the
// parameter blocks they need.  Parsing is strict; every problem is reported
// as a ConfigError carrying the dotted path of the offending field.
//
// Unit conventions: JC rates are ratios over gamma, drive strengths are
// eps_d/g and detunings Delta omega_d/g.  Kerr parameters are ratios over chi.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jcmp/error.hpp"

namespace jcmp::cli {

using Json = nlohmann::json;

class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class Model { jc_full, jc_dressed2, jc_dressed3, kerr, qsd };
enum class Task { sweep, steady_wigner, transient_wigner, g2, origin_trace, trajectories, saturation };

inline const std::map<std::string, Model>& model_names() {
  static const std::map<std::string, Model> m{{"jc_full", Model::jc_full},
                                              {"jc_dressed2", Model::jc_dressed2},
                                              {"jc_dressed3", Model::jc_dressed3},
                                              {"kerr", Model::kerr},
                                              {"qsd", Model::qsd}};
  return m;
}

inline const std::map<std::string, Task>& task_names() {
  static const std::map<std::string, Task> m{{"sweep", Task::sweep},
                                             {"steady_wigner", Task::steady_wigner},
                                             {"transient_wigner", Task::transient_wigner},
                                             {"g2", Task::g2},
                                             {"origin_trace", Task::origin_trace},
                                             {"trajectories", Task::trajectories},
                                             {"saturation", Task::saturation}};
  return m;
}

template <class E>
std::string name_of(const std::map<std::string, E>& names, E value) {
  for (const auto& [k, v] : names) {
    if (v == value) return k;
  }
  return "?";
}

/// Which tasks each model can run.
inline bool supports(Model m, Task t) {
  switch (m) {
    case Model::jc_full:
      return t == Task::sweep || t == Task::steady_wigner || t == Task::g2 || t == Task::saturation;
    case Model::jc_dressed3:
      return t == Task::saturation || t == Task::g2 || t == Task::steady_wigner || t == Task::transient_wigner ||
             t == Task::origin_trace;
    case Model::jc_dressed2:
      return t == Task::saturation || t == Task::g2 || t == Task::origin_trace;
    case Model::kerr:
      return t == Task::steady_wigner;
    case Model::qsd:
      return t == Task::trajectories;
  }
  return false;
}

struct JcParams {
  double g = 500.0;       // g / gamma
  double kappa = 0.5;     // kappa / gamma
  double eps_d = 0.05;    // eps_d / g
  std::optional<double> detuning;  // Delta omega_d / g; defaults to the resonance below
  int resonance = 3;      // n-photon resonance used when detuning is absent
  int fock_cutoff = 20;
};

struct KerrConfig {
  double delta = 2.0;     // Delta omega_dK / chi
  double eps = 0.04;      // |eps_dK| / chi
  double eps_phase = 0.0; // arg eps_dK
  double kappa = 1e-5;    // kappa_K / chi
  int fock_cutoff = 35;
};

struct GridConfig {
  double x_min = -3.0, x_max = 3.0, y_min = -3.0, y_max = 3.0;
  int nx = 241, ny = 241;
};

struct QsdConfig {
  double t_sample_start = 8.0;
  double t_end = 200.0;
  double sample_interval = 0.01;
  double noise_step = 1e-4;
  int bins = 100;
  int fock_cutoff = 15;
};

struct ExperimentConfig {
  Model model = Model::jc_full;
  Task task = Task::sweep;
  JcParams jc;
  KerrConfig kerr;
  GridConfig grid;
  QsdConfig qsd;
  std::vector<double> drives;     // eps_d / g for sweep and saturation
  std::vector<double> detunings;  // Delta omega_d / g for sweep
  std::vector<double> taus;       // gamma tau
  std::optional<double> p5;       // overrides the drive for jc_dressed3 fields
  std::vector<std::uint64_t> seeds{1};
  std::string out_dir;
  std::set<std::string> formats{"csv", "json"};
  unsigned threads = 1;
  Json source;  // the document as read, for the manifest
};

namespace detail {

inline void reject_unknown(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline double get_number(const Json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(join(path, key), "must be finite");
  return d;
}

inline int get_int(const Json& obj, const std::string& path, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

/// Either a list of numbers or {"start", "stop", "count"}.
inline std::vector<double> get_values(const Json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) return {};
  const Json& v = obj.at(key);
  const std::string p = join(path, key);
  std::vector<double> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(p + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
  } else if (v.is_object()) {
    reject_unknown(v, p, {"start", "stop", "count"});
    for (const char* k : {"start", "stop", "count"}) {
      if (!v.contains(k)) throw ConfigError(join(p, k), "required");
    }
    const double a = get_number(v, p, "start", 0.0);
    const double b = get_number(v, p, "stop", 0.0);
    const int n = get_int(v, p, "count", 0);
    if (n < 1) throw ConfigError(join(p, "count"), "must be >= 1");
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  } else {
    throw ConfigError(p, "expected a list or a {start, stop, count} range");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) throw ConfigError(p + "[" + std::to_string(i) + "]", "must be finite");
  }
  if (out.empty()) throw ConfigError(p, "must not be empty");
  return out;
}

}  // namespace detail

/// Validates `doc` and fills an ExperimentConfig.
inline ExperimentConfig parse_config(const Json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ConfigError("<root>", "expected a JSON object");
  reject_unknown(doc, "", {"model", "task", "params", "kerr", "grid", "qsd", "drives", "detunings", "taus", "p5",
                           "seeds", "output", "threads", "description"});
  ExperimentConfig c;
  c.source = doc;

  for (const char* k : {"model", "task"}) {
    if (!doc.contains(k)) throw ConfigError(k, "required");
    if (!doc.at(k).is_string()) throw ConfigError(k, "expected a string");
  }
  const auto model_it = model_names().find(doc.at("model").get<std::string>());
  if (model_it == model_names().end()) throw ConfigError("model", "unknown model");
  const auto task_it = task_names().find(doc.at("task").get<std::string>());
  if (task_it == task_names().end()) throw ConfigError("task", "unknown task");
  c.model = model_it->second;
  c.task = task_it->second;
  if (!supports(c.model, c.task)) {
    throw ConfigError("task", "model " + name_of(model_names(), c.model) + " does not support task " +
                                  name_of(task_names(), c.task));
  }

  if (doc.contains("params")) {
    const Json& p = doc.at("params");
    if (!p.is_object()) throw ConfigError("params", "expected an object");
    reject_unknown(p, "params", {"g", "kappa", "eps_d", "detuning", "resonance", "fock_cutoff"});
    c.jc.g = get_number(p, "params", "g", c.jc.g);
    c.jc.kappa = get_number(p, "params", "kappa", c.jc.kappa);
    c.jc.eps_d = get_number(p, "params", "eps_d", c.jc.eps_d);
    if (p.contains("detuning")) c.jc.detuning = get_number(p, "params", "detuning", 0.0);
    c.jc.resonance = get_int(p, "params", "resonance", c.jc.resonance);
    c.jc.fock_cutoff = get_int(p, "params", "fock_cutoff", c.jc.fock_cutoff);
  }
  if (!(c.jc.g > 0.0)) throw ConfigError("params.g", "must be > 0");
  if (c.jc.kappa < 0.0) throw ConfigError("params.kappa", "must be >= 0");
  if (c.jc.eps_d < 0.0) throw ConfigError("params.eps_d", "must be >= 0");
  if (c.jc.resonance != 2 && c.jc.resonance != 3) throw ConfigError("params.resonance", "must be 2 or 3");
  if (c.jc.fock_cutoff < 4) throw ConfigError("params.fock_cutoff", "must be >= 4");
  if (c.model == Model::jc_dressed2) c.jc.resonance = 2;
  if ((c.model == Model::jc_dressed2 || c.model == Model::jc_dressed3) && c.jc.kappa != 0.5) {
    throw ConfigError("params.kappa", "the dressed-state models assume gamma = 2 kappa (kappa = 0.5)");
  }

  if (doc.contains("kerr")) {
    const Json& k = doc.at("kerr");
    if (!k.is_object()) throw ConfigError("kerr", "expected an object");
    reject_unknown(k, "kerr", {"delta", "eps", "eps_phase", "kappa", "fock_cutoff"});
    c.kerr.delta = get_number(k, "kerr", "delta", c.kerr.delta);
    c.kerr.eps = get_number(k, "kerr", "eps", c.kerr.eps);
    c.kerr.eps_phase = get_number(k, "kerr", "eps_phase", c.kerr.eps_phase);
    c.kerr.kappa = get_number(k, "kerr", "kappa", c.kerr.kappa);
    c.kerr.fock_cutoff = get_int(k, "kerr", "fock_cutoff", c.kerr.fock_cutoff);
  }
  if (!(c.kerr.kappa > 0.0)) throw ConfigError("kerr.kappa", "must be > 0");
  if (c.kerr.eps < 0.0) throw ConfigError("kerr.eps", "must be >= 0");
  if (c.kerr.fock_cutoff < 2) throw ConfigError("kerr.fock_cutoff", "must be >= 2");

  if (doc.contains("grid")) {
    const Json& g = doc.at("grid");
    if (!g.is_object()) throw ConfigError("grid", "expected an object");
    reject_unknown(g, "grid", {"x_min", "x_max", "y_min", "y_max", "nx", "ny"});
    c.grid.x_min = get_number(g, "grid", "x_min", c.grid.x_min);
    c.grid.x_max = get_number(g, "grid", "x_max", c.grid.x_max);
    c.grid.y_min = get_number(g, "grid", "y_min", c.grid.y_min);
    c.grid.y_max = get_number(g, "grid", "y_max", c.grid.y_max);
    c.grid.nx = get_int(g, "grid", "nx", c.grid.nx);
    c.grid.ny = get_int(g, "grid", "ny", c.grid.ny);
  }
  if (c.grid.nx < 2) throw ConfigError("grid.nx", "must be >= 2");
  if (c.grid.ny < 2) throw ConfigError("grid.ny", "must be >= 2");
  if (!(c.grid.x_max > c.grid.x_min)) throw ConfigError("grid.x_max", "must exceed grid.x_min");
  if (!(c.grid.y_max > c.grid.y_min)) throw ConfigError("grid.y_max", "must exceed grid.y_min");

  if (doc.contains("qsd")) {
    const Json& q = doc.at("qsd");
    if (!q.is_object()) throw ConfigError("qsd", "expected an object");
    reject_unknown(q, "qsd", {"t_sample_start", "t_end", "sample_interval", "noise_step", "bins", "fock_cutoff"});
    c.qsd.t_sample_start = get_number(q, "qsd", "t_sample_start", c.qsd.t_sample_start);
    c.qsd.t_end = get_number(q, "qsd", "t_end", c.qsd.t_end);
    c.qsd.sample_interval = get_number(q, "qsd", "sample_interval", c.qsd.sample_interval);
    c.qsd.noise_step = get_number(q, "qsd", "noise_step", c.qsd.noise_step);
    c.qsd.bins = get_int(q, "qsd", "bins", c.qsd.bins);
    c.qsd.fock_cutoff = get_int(q, "qsd", "fock_cutoff", c.qsd.fock_cutoff);
  }
  if (!(c.qsd.t_sample_start < c.qsd.t_end)) throw ConfigError("qsd.t_end", "must exceed qsd.t_sample_start");
  if (!(c.qsd.sample_interval > 0.0)) throw ConfigError("qsd.sample_interval", "must be > 0");
  if (!(c.qsd.noise_step > 0.0)) throw ConfigError("qsd.noise_step", "must be > 0");
  if (c.qsd.bins < 1) throw ConfigError("qsd.bins", "must be >= 1");
  if (c.qsd.fock_cutoff < 4) throw ConfigError("qsd.fock_cutoff", "must be >= 4");

  c.drives = get_values(doc, "", "drives");
  c.detunings = get_values(doc, "", "detunings");
  c.taus = get_values(doc, "", "taus");
  for (std::size_t i = 0; i < c.drives.size(); ++i) {
    if (c.drives[i] < 0.0) throw ConfigError("drives[" + std::to_string(i) + "]", "must be >= 0");
  }
  for (std::size_t i = 0; i < c.taus.size(); ++i) {
    if (c.taus[i] < 0.0 || (i > 0 && c.taus[i] < c.taus[i - 1])) {
      throw ConfigError("taus[" + std::to_string(i) + "]", "must be non-negative and ascending");
    }
  }
  if (doc.contains("p5")) {
    c.p5 = get_number(doc, "", "p5", 0.0);
    if (*c.p5 < 0.0 || *c.p5 > 2.0 / 13.0) throw ConfigError("p5", "must lie in [0, 2/13]");
  }

  if (doc.contains("seeds")) {
    const Json& s = doc.at("seeds");
    if (!s.is_array() || s.empty()) throw ConfigError("seeds", "expected a non-empty list of integers");
    c.seeds.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_number_unsigned()) throw ConfigError("seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
      c.seeds.push_back(s[i].get<std::uint64_t>());
    }
  }

  if (doc.contains("output")) {
    const Json& o = doc.at("output");
    if (!o.is_object()) throw ConfigError("output", "expected an object");
    reject_unknown(o, "output", {"dir", "formats"});
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) throw ConfigError("output.dir", "expected a string");
      c.out_dir = o.at("dir").get<std::string>();
    }
    if (o.contains("formats")) {
      const Json& f = o.at("formats");
      if (!f.is_array()) throw ConfigError("output.formats", "expected a list");
      c.formats.clear();
      for (std::size_t i = 0; i < f.size(); ++i) {
        const std::string p = "output.formats[" + std::to_string(i) + "]";
        if (!f[i].is_string()) throw ConfigError(p, "expected a string");
        const std::string v = f[i].get<std::string>();
        if (v != "csv" && v != "json" && v != "svg") throw ConfigError(p, "unknown format " + v);
        c.formats.insert(v);
      }
    }
  }
  if (doc.contains("threads")) {
    const int t = get_int(doc, "", "threads", 1);
    if (t < 0) throw ConfigError("threads", "must be >= 0");
    c.threads = static_cast<unsigned>(t);
  }

  // Task-specific requirements.
  auto need = [&](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
  };
  switch (c.task) {
    case Task::sweep:
      need(doc.contains("detunings"), "detunings", "required for task sweep");
      break;
    case Task::saturation:
      need(doc.contains("drives"), "drives", "required for task saturation");
      break;
    case Task::g2:
    case Task::origin_trace:
    case Task::transient_wigner:
      need(doc.contains("taus"), "taus", "required for this task");
      break;
    default:
      break;
  }
  return c;
}

/// Formats accepted on the command line as a comma-separated list.
inline std::set<std::string> parse_formats(const std::string& list) {
  std::set<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item != "csv" && item != "json" && item != "svg") throw ConfigError("--format", "unknown format " + item);
    out.insert(item);
  }
  if (out.empty()) throw ConfigError("--format", "no formats given");
  return out;
}

/// Reads a configuration file.  A run manifest is accepted too; its
/// embedded configuration is used.
inline Json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("config") && doc.contains("files")) return doc.at("config");
  return doc;
}

}  // namespace jcmp::cli
