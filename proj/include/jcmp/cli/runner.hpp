#pragma once

// Executes one ExperimentConfig and writes its outputs:
//   <task>.csv       long format, one row per (point, quantity)
//   <task>.json      model, task, version, config, seeds and the same rows
//   <task>*.svg      contour plots, for field tasks only
//   manifest.json    effective config, version, seeds, wall time, files, warnings
// Everything except the manifest's wall time is a pure function of the
// config, so re-running from a manifest reproduces the data files.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "jcmp/jcmp.hpp"
#include "jcmp/cli/config.hpp"
#include "jcmp/cli/csv.hpp"
#include "jcmp/cli/svg.hpp"

namespace jcmp::cli {

/// A computation failed; the message names the task.
class TaskError : public Error {
 public:
  using Error::Error;
};

struct RunResult {
  std::filesystem::path out_dir;
  std::vector<std::string> files;  // relative to out_dir
  std::vector<std::string> warnings;
  Json manifest;
};

namespace detail {

struct Sink {
  std::filesystem::path dir;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw TaskError("cannot write " + (dir / name).string());
    out << content;
    files.push_back(name);
  }
};

/// Rows with numeric columns plus one "quantity" column.
struct Table {
  std::vector<std::string> coords;  // numeric coordinate columns
  std::vector<std::vector<double>> points;
  std::vector<std::string> quantities;
  std::vector<double> values;

  void add(std::vector<double> point, const std::string& quantity, double value) {
    points.push_back(std::move(point));
    quantities.push_back(quantity);
    values.push_back(value);
  }

  std::string csv() const {
    std::vector<std::string> header = coords;
    header.push_back("quantity");
    header.push_back("value");
    CsvTable t(header);
    for (std::size_t r = 0; r < values.size(); ++r) {
      std::vector<Cell> row(points[r].begin(), points[r].end());
      row.emplace_back(quantities[r]);
      row.emplace_back(values[r]);
      t.add(std::move(row));
    }
    return t.str();
  }

  Json json() const {
    Json rows = Json::array();
    for (std::size_t r = 0; r < values.size(); ++r) {
      Json row = Json::object();
      for (std::size_t c = 0; c < coords.size(); ++c) row[coords[c]] = json_number(points[r][c]);
      row["quantity"] = quantities[r];
      row["value"] = json_number(values[r]);
      rows.push_back(std::move(row));
    }
    return {{"columns", coords}, {"rows", std::move(rows)}};
  }

  // JSON has no NaN; non-finite values become null.
  static Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
};

inline PhaseSpaceGrid to_grid(const GridConfig& g) { return {g.x_min, g.x_max, g.y_min, g.y_max, g.nx, g.ny}; }

inline SystemParams system_params(const JcParams& jc, double eps_over_g) {
  SystemParams p;
  p.g = jc.g;
  p.kappa = jc.kappa;
  p.gamma = 1.0;
  p.eps_d = eps_over_g * jc.g;
  p.delta_omega_d = jc.detuning ? *jc.detuning * jc.g : resonance_detuning(jc.resonance, p.eps_d, jc.g);
  return p;
}

inline DressedParams dressed_params(const JcParams& jc, double eps_over_g) {
  return DressedParams::make(jc.g, jc.kappa, 1.0, eps_over_g * jc.g);
}

inline KerrParams kerr_params(const KerrConfig& k) {
  KerrParams p;
  p.chi = 1.0;
  p.delta_omega_dK = k.delta;
  p.eps_dK = std::polar(k.eps, k.eps_phase);
  p.kappa_K = k.kappa;
  p.fock_cutoff = k.fock_cutoff;
  return p;
}

inline void add_field(Table& t, const WignerField& f, std::vector<double> prefix = {}) {
  for (int i = 0; i < f.grid.nx; ++i) {
    for (int j = 0; j < f.grid.ny; ++j) {
      std::vector<double> pt = prefix;
      pt.push_back(f.grid.x(i));
      pt.push_back(f.grid.y(j));
      t.add(std::move(pt), "W", f.values(i, j));
    }
  }
}

inline void note_validity(const DressedParams& p, double eps_over_g, std::vector<std::string>& warnings) {
  for (const auto& w : validity_report(p).warnings) {
    warnings.push_back("eps_d/g = " + format_double(eps_over_g) + ": " + w);
  }
}

inline std::vector<double> drives_or_default(const ExperimentConfig& c) {
  return c.drives.empty() ? std::vector<double>{c.jc.eps_d} : c.drives;
}

struct TaskOutput {
  Table table;
  std::vector<std::pair<std::string, WignerField>> fields;  // file stem, field
  std::vector<Table> extra;                                   // written as <task>_<k>
  std::vector<std::string> extra_names;
};

inline TaskOutput run_sweep(const ExperimentConfig& c, std::vector<std::string>& warnings) {
  TaskOutput out;
  out.table.coords = {"eps_d_over_g", "detuning_over_g"};
  std::vector<double> detunings;
  for (double d : c.detunings) detunings.push_back(d * c.jc.g);
  const HilbertSpace space(c.jc.fock_cutoff);
  for (double eps : drives_or_default(c)) {
    SystemParams p = system_params(c.jc, eps);
    const auto pts = sweep_detuning(p, space, detunings, c.threads);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const std::vector<double> at{eps, c.detunings[k]};
      if (pts[k].error) {
        warnings.push_back("eps_d/g = " + format_double(eps) + ", detuning/g = " + format_double(c.detunings[k]) +
                           ": " + *pts[k].error);
      }
      out.table.add(at, "mean_n", pts[k].mean_n);
      out.table.add(at, "g2_zero", pts[k].g2_zero);
      out.table.add(at, "fock_tail", pts[k].fock_tail);
    }
  }
  return out;
}

inline TaskOutput run_steady_wigner(const ExperimentConfig& c, std::vector<std::string>& warnings) {
  TaskOutput out;
  out.table.coords = {"x", "y"};
  const PhaseSpaceGrid grid = to_grid(c.grid);
  WignerField f;
  switch (c.model) {
    case Model::jc_full: {
      const HilbertSpace space(c.jc.fock_cutoff);
      const DensityMatrix rho = steady_state(build_liouvillian(system_params(c.jc, c.jc.eps_d), space));
      f = wigner_numeric(partial_trace_atom(rho), grid, c.threads);
      break;
    }
    case Model::jc_dressed3: {
      double p5 = 0.0;
      if (c.p5) {
        p5 = *c.p5;
      } else {
        const DressedParams p = dressed_params(c.jc, c.jc.eps_d);
        note_validity(p, c.jc.eps_d, warnings);
        p5 = p5_steady(p.Omega3, p.gamma);
      }
      f = wigner_ss_analytic(p5, grid);
      break;
    }
    case Model::kerr:
      f = kerr_steady_wigner(kerr_params(c.kerr), grid, c.threads);
      break;
    default:
      throw TaskError("steady_wigner: unsupported model");
  }
  if (f.warning) warnings.push_back(*f.warning);
  add_field(out.table, f);
  out.fields.emplace_back("steady_wigner", std::move(f));
  return out;
}

inline TaskOutput run_transient_wigner(const ExperimentConfig& c, std::vector<std::string>& warnings) {
  TaskOutput out;
  out.table.coords = {"tau", "x", "y"};
  const DressedParams p = dressed_params(c.jc, c.jc.eps_d);
  note_validity(p, c.jc.eps_d, warnings);
  const auto states = rate_evolve(conditional_state().initial, p, c.taus);
  const PhaseSpaceGrid grid = to_grid(c.grid);
  for (std::size_t k = 0; k < states.size(); ++k) {
    WignerField f = wigner_transient(transient_coeffs(states[k]), grid);
    add_field(out.table, f, {c.taus[k]});
    out.fields.emplace_back("transient_wigner_" + std::to_string(k), std::move(f));
  }
  return out;
}

inline TaskOutput run_g2(const ExperimentConfig& c, std::vector<std::string>& warnings) {
  TaskOutput out;
  out.table.coords = {"tau"};
  std::vector<double> g2;
  switch (c.model) {
    case Model::jc_full:
      g2 = g2_forward(system_params(c.jc, c.jc.eps_d), HilbertSpace(c.jc.fock_cutoff), c.taus);
      break;
    case Model::jc_dressed3: {
      const DressedParams p = dressed_params(c.jc, c.jc.eps_d);
      note_validity(p, c.jc.eps_d, warnings);
      g2 = g2_analytic_3photon(p, c.taus);
      break;
    }
    case Model::jc_dressed2:
      g2 = g2_analytic_2photon(dressed_params(c.jc, c.jc.eps_d), c.taus);
      break;
    default:
      throw TaskError("g2: unsupported model");
  }
  for (std::size_t k = 0; k < g2.size(); ++k) out.table.add({c.taus[k]}, "g2", g2[k]);
  return out;
}

inline TaskOutput run_origin_trace(const ExperimentConfig& c, std::vector<std::string>& warnings) {
  TaskOutput out;
  out.table.coords = {"tau"};
  const DressedParams p = dressed_params(c.jc, c.jc.eps_d);
  std::vector<double> w;
  if (c.model == Model::jc_dressed3) {
    note_validity(p, c.jc.eps_d, warnings);
    w = wigner_origin_3photon(c.taus, p);
  } else {
    w = wigner_origin_2photon(c.taus, p);
  }
  for (std::size_t k = 0; k < w.size(); ++k) out.table.add({c.taus[k]}, "W_origin", w[k]);
  return out;
}

inline TaskOutput run_saturation(const ExperimentConfig& c, std::vector<std::string>& warnings) {
  TaskOutput out;
  out.table.coords = {"eps_d_over_g"};
  const auto drives = drives_or_default(c);
  if (c.model == Model::jc_full) {
    const HilbertSpace space(c.jc.fock_cutoff);
    std::vector<double> mean_n(drives.size()), tail(drives.size());
    parallel_for(drives.size(), c.threads, [&](std::size_t i) {
      const DensityMatrix rho = steady_state(build_liouvillian(system_params(c.jc, drives[i]), space));
      mean_n[i] = expectation(photon_number(space), rho).real();
      tail[i] = rho.fock_tail();
    });
    for (std::size_t i = 0; i < drives.size(); ++i) {
      out.table.add({drives[i]}, "mean_n", mean_n[i]);
      out.table.add({drives[i]}, "fock_tail", tail[i]);
    }
    return out;
  }
  for (double eps : drives) {
    const DressedParams p = dressed_params(c.jc, eps);
    if (c.model == Model::jc_dressed3) {
      note_validity(p, eps, warnings);
      const double p5 = p5_steady(p.Omega3, p.gamma);
      out.table.add({eps}, "rabi_over_gamma", p.Omega3 / p.gamma);
      out.table.add({eps}, "p5", p5);
      out.table.add({eps}, "mean_n", 25.0 / 4.0 * p5);
    } else {
      const double p3 = p3_steady(p.OmegaPrime, p.gamma);
      out.table.add({eps}, "rabi_over_gamma", p.OmegaPrime / p.gamma);
      out.table.add({eps}, "p3", p3);
      out.table.add({eps}, "mean_n", 2.5 * p3);
    }
  }
  return out;
}

inline TaskOutput run_trajectories(const ExperimentConfig& c, std::vector<std::string>& warnings) {
  TaskOutput out;
  out.table.coords = {"seed", "t"};
  TrajectoryConfig base;
  base.params = system_params(c.jc, c.jc.eps_d);
  base.space = HilbertSpace(c.qsd.fock_cutoff);
  base.t_sample_start = c.qsd.t_sample_start;
  base.t_end = c.qsd.t_end;
  base.sample_interval = c.qsd.sample_interval;
  base.noise_step = c.qsd.noise_step;
  base.validate();
  std::vector<TrajectoryRecord> recs(c.seeds.size());
  parallel_for(c.seeds.size(), c.threads, [&](std::size_t i) {
    TrajectoryConfig tc = base;
    tc.seed = c.seeds[i];
    recs[i] = run_trajectory(tc);
  });
  Table hist;
  hist.coords = {"seed", "bin_lo", "bin_hi"};
  Table summary;
  summary.coords = {"seed"};
  for (const auto& r : recs) {
    const double seed = static_cast<double>(r.seed);
    for (std::size_t k = 0; k < r.times.size(); ++k) out.table.add({seed, r.times[k]}, "n", r.n_values[k]);
    const Histogram h = histogram_n(r, c.qsd.bins);
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      hist.add({seed, h.edges[b], h.edges[b + 1]}, "count", static_cast<double>(h.counts[b]));
    }
    summary.add({seed}, "mean_n", h.mean);
    summary.add({seed}, "samples", static_cast<double>(h.samples));
    summary.add({seed}, "max_norm_deviation", r.max_norm_deviation);
    summary.add({seed}, "mean_norm_deviation", r.mean_norm_deviation);
    if (h.samples < 19200) {
      warnings.push_back("seed " + std::to_string(r.seed) + ": only " + std::to_string(h.samples) +
                         " samples in the histogram window");
    }
  }
  out.extra.push_back(std::move(hist));
  out.extra_names.push_back("trajectories_histogram");
  out.extra.push_back(std::move(summary));
  out.extra_names.push_back("trajectories_summary");
  return out;
}

inline TaskOutput dispatch(const ExperimentConfig& c, std::vector<std::string>& warnings) {
  switch (c.task) {
    case Task::sweep: return run_sweep(c, warnings);
    case Task::steady_wigner: return run_steady_wigner(c, warnings);
    case Task::transient_wigner: return run_transient_wigner(c, warnings);
    case Task::g2: return run_g2(c, warnings);
    case Task::origin_trace: return run_origin_trace(c, warnings);
    case Task::saturation: return run_saturation(c, warnings);
    case Task::trajectories: return run_trajectories(c, warnings);
  }
  throw TaskError("unknown task");
}

}  // namespace detail

/// Runs the experiment and writes its files into `c.out_dir`.
inline RunResult run(const ExperimentConfig& c) {
  using namespace detail;
  const auto start = std::chrono::steady_clock::now();
  const std::string task = name_of(task_names(), c.task);
  const std::string model = name_of(model_names(), c.model);

  const std::filesystem::path dir = c.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(c.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw ConfigError("output.dir", "cannot create " + dir.string());

  std::vector<std::string> warnings;
  TaskOutput out;
  try {
    out = dispatch(c, warnings);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw TaskError("task " + task + " on model " + model + ": " + e.what());
  }

  Sink sink{dir, {}};
  const bool csv = c.formats.count("csv") > 0, json = c.formats.count("json") > 0, svg = c.formats.count("svg") > 0;
  if (csv) {
    sink.write(task + ".csv", out.table.csv());
    for (std::size_t k = 0; k < out.extra.size(); ++k) sink.write(out.extra_names[k] + ".csv", out.extra[k].csv());
  }
  if (json) {
    // The output block is left out so the file does not depend on where it was written.
    Json config = c.source;
    config.erase("output");
    Json doc{{"model", model}, {"task", task}, {"version", std::string(kVersion)}, {"config", std::move(config)},
             {"seeds", c.seeds}, {"data", out.table.json()}};
    for (std::size_t k = 0; k < out.extra.size(); ++k) doc[out.extra_names[k]] = out.extra[k].json();
    sink.write(task + ".json", doc.dump(2) + "\n");
  }
  if (svg) {
    if (out.fields.empty()) {
      warnings.push_back("svg output is only produced for phase-space fields; task " + task + " has none");
    }
    for (std::size_t k = 0; k < out.fields.size(); ++k) {
      ContourStyle style;
      style.title = model + " " + task;
      if (c.task == Task::transient_wigner) style.title += ", gamma tau = " + detail::fmt_level(c.taus[k]);
      sink.write(out.fields[k].first + ".svg", render_contour(out.fields[k].second, style));
    }
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json manifest{{"version", std::string(kVersion)}, {"model", model},       {"task", task},
                {"config", c.source},               {"seeds", c.seeds},     {"threads", c.threads},
                {"wall_time_s", wall},              {"files", sink.files},  {"warnings", warnings}};
  std::ofstream mf(dir / "manifest.json", std::ios::binary);
  if (!mf) throw TaskError("cannot write " + (dir / "manifest.json").string());
  mf << manifest.dump(2) << "\n";

  return RunResult{dir, sink.files, warnings, manifest};
}

}  // namespace jcmp::cli
