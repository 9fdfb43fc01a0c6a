#pragma once

// Quantum state diffusion for the driven JC system.  Channels are
// sqrt(2 kappa) a and sqrt(gamma) sigma_minus.  Each noise interval of
// length dw is handled by an adaptive Cash-Karp solve of the nonlinear
// drift followed by one Euler-Maruyama kick with the complex Wiener
// increment of that interval, after which the state is renormalized.
// Increments come from a counter-based generator keyed by
// (seed, channel, interval index), so a trajectory is a pure function of its
// configuration.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "jcmp/error.hpp"
#include "jcmp/hilbert.hpp"
#include "jcmp/liouville.hpp"
#include "jcmp/ode.hpp"
#include "jcmp/parallel.hpp"

namespace jcmp {

/// Philox4x32-10 (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Complex Gaussian with E|z|^2 = variance and E z^2 = 0 for the given
/// (seed, channel, index).
inline Complex wiener_increment(std::uint64_t seed, std::uint32_t channel, std::uint64_t index, double variance) {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), channel,
                                0u};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto r = Philox4x32::generate(ctr, key);
  constexpr double two53 = 9007199254740992.0;
  auto to_unit = [&](std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) / two53;  // open interval (0, 1)
  };
  const double u1 = to_unit(r[0], r[1]);
  const double u2 = to_unit(r[2], r[3]);
  const double radius = std::sqrt(-std::log(u1) * variance);  // Box-Muller, each quadrature variance/2
  const double phase = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(phase), radius * std::sin(phase)};
}

enum class NoiseMode {
  on,
  off,  // drift only, no renormalization: the linear no-jump evolution
};

struct TrajectoryConfig {
  SystemParams params;
  HilbertSpace space{15};
  std::uint64_t seed = 1;
  double t_sample_start = 8.0;
  double t_end = 200.0;
  double sample_interval = 0.01;
  std::string rng_stream = "philox4x32-10";
  double noise_step = 1e-4;       // Wiener interval; rounded so it divides sample_interval
  double max_step = std::numeric_limits<double>::infinity();  // cap on drift substeps
  ode::Tolerances tolerances{};
  NoiseMode noise = NoiseMode::on;
  double noise_phase = 0.0;       // fixed rotation applied to every increment
  std::optional<Vector> initial;  // defaults to |0,->

  void validate() const {
    params.validate();
    if (!(t_sample_start < t_end)) throw DomainError("TrajectoryConfig: t_sample_start must be < t_end");
    if (!(sample_interval > 0.0)) throw DomainError("TrajectoryConfig: sample_interval must be > 0");
    if (!(noise_step > 0.0)) throw DomainError("TrajectoryConfig: noise_step must be > 0");
    if (t_sample_start < 0.0) throw DomainError("TrajectoryConfig: t_sample_start must be >= 0");
    if (rng_stream != "philox4x32-10") throw DomainError("TrajectoryConfig: unknown rng_stream " + rng_stream);
    if (initial && initial->size() != space.dim()) throw DimensionMismatch("TrajectoryConfig: initial state size");
  }
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> n_values;
  std::uint64_t seed = 0;
  double t_sample_start = 0.0;
  // Norm of the state just before each renormalization, as |norm - 1|.
  double max_norm_deviation = 0.0;
  double mean_norm_deviation = 0.0;  // signed mean of norm - 1
  long noise_steps = 0;
  long drift_steps = 0;
};

namespace detail {

struct QsdOperators {
  Eigen::SparseMatrix<Complex> k;  // -i H - (1/2) sum L^dag L
  std::array<Eigen::SparseMatrix<Complex>, 2> l;
  Eigen::SparseMatrix<Complex> n;
};

inline QsdOperators qsd_operators(const SystemParams& p, const HilbertSpace& space) {
  const Matrix h = build_hamiltonian(p, space).matrix();
  const Matrix l0 = std::sqrt(2.0 * p.kappa) * cavity_annihilation(space).matrix();
  const Matrix l1 = std::sqrt(p.gamma) * atom_lowering(space).matrix();
  const Matrix k = Complex(0.0, -1.0) * h - 0.5 * (l0.adjoint() * l0 + l1.adjoint() * l1);
  QsdOperators ops;
  ops.k = to_sparse(k);
  ops.l = {to_sparse(l0), to_sparse(l1)};
  ops.n = to_sparse(photon_number(space).matrix());
  return ops;
}

}  // namespace detail

inline TrajectoryRecord run_trajectory(const TrajectoryConfig& cfg) {
  cfg.validate();
  const detail::QsdOperators ops = detail::qsd_operators(cfg.params, cfg.space);
  const bool noisy = cfg.noise == NoiseMode::on;

  const long per_sample = std::max(1L, std::lround(cfg.sample_interval / cfg.noise_step));
  const double dw = cfg.sample_interval / static_cast<double>(per_sample);
  const long n_samples = static_cast<long>(std::floor(cfg.t_end / cfg.sample_interval + 1e-9));
  const Complex rotation = std::polar(1.0, cfg.noise_phase);

  Vector psi = cfg.initial ? *cfg.initial : StateVector::basis(cfg.space, 0, Atom::lower).amplitudes();
  if (noisy) psi.normalize();

  // Nonlinear drift; expectation values use the state's own norm.
  std::array<Vector, 2> lpsi;
  auto drift = [&](double, const Vector& y, Vector& dy) {
    dy.noalias() = ops.k * y;
    if (!noisy) return;
    const double nrm2 = y.squaredNorm();
    for (int j = 0; j < 2; ++j) {
      lpsi[j].noalias() = ops.l[j] * y;
      const Complex mean = y.dot(lpsi[j]) / nrm2;  // <L>
      dy += std::conj(mean) * lpsi[j] - (0.5 * std::norm(mean)) * y;
    }
  };

  ode::Tolerances tol = cfg.tolerances;
  tol.max_step = std::min(tol.max_step, cfg.max_step);
  ode::EmbeddedRK<Vector> rk(ode::cash_karp45(), tol);

  TrajectoryRecord rec;
  rec.seed = cfg.seed;
  rec.t_sample_start = cfg.t_sample_start;
  rec.times.reserve(static_cast<std::size_t>(n_samples + 1));
  rec.n_values.reserve(static_cast<std::size_t>(n_samples + 1));
  auto record = [&](double t) {
    rec.times.push_back(t);
    const double v = psi.dot(ops.n * psi).real();
    rec.n_values.push_back(noisy ? v / psi.squaredNorm() : v);
  };

  record(0.0);
  double t = 0.0;
  long index = 0;
  double dev_sum = 0.0;
  Vector kick(psi.size());
  for (long s = 1; s <= n_samples; ++s) {
    for (long k = 0; k < per_sample; ++k, ++index) {
      const double t_next = (static_cast<double>(s - 1) + static_cast<double>(k + 1) / per_sample) * cfg.sample_interval;
      rk.advance(drift, t, psi, t_next);
      if (!noisy) continue;
      const double nrm2 = psi.squaredNorm();
      kick.setZero();
      for (int j = 0; j < 2; ++j) {
        lpsi[j].noalias() = ops.l[j] * psi;
        const Complex mean = psi.dot(lpsi[j]) / nrm2;
        const Complex xi = rotation * wiener_increment(cfg.seed, static_cast<std::uint32_t>(j),
                                                       static_cast<std::uint64_t>(index), dw);
        kick += xi * (lpsi[j] - mean * psi);
      }
      psi += kick;
      const double norm = psi.norm();
      if (!(norm >= 1e-3)) throw NormCollapse("state norm fell below 1e-3 before renormalization", t);
      dev_sum += norm - 1.0;
      rec.max_norm_deviation = std::max(rec.max_norm_deviation, std::abs(norm - 1.0));
      psi /= norm;
    }
    t = static_cast<double>(s) * cfg.sample_interval;
    record(t);
  }
  rec.noise_steps = index;
  rec.drift_steps = rk.accepted_steps();
  rec.mean_norm_deviation = index > 0 && noisy ? dev_sum / static_cast<double>(index) : 0.0;
  return rec;
}

struct Histogram {
  std::vector<double> edges;  // n_bins + 1
  std::vector<long> counts;
  double mean = 0.0;
  long samples = 0;
};

/// Histogram and mean of the samples taken at t >= t_start (defaults to the
/// record's t_sample_start).
inline Histogram histogram_n(const TrajectoryRecord& rec, int n_bins, std::optional<double> t_start = std::nullopt) {
  if (n_bins < 1) throw DomainError("histogram_n: need at least one bin");
  const double t0 = t_start.value_or(rec.t_sample_start);
  std::vector<double> kept;
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    if (rec.times[k] >= t0 - 1e-12) kept.push_back(rec.n_values[k]);
  }
  if (kept.empty()) throw DomainError("histogram_n: no samples after t_start");
  const auto [lo_it, hi_it] = std::minmax_element(kept.begin(), kept.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(n_bins) + 1);
  for (int b = 0; b <= n_bins; ++b) h.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / n_bins;
  h.counts.assign(static_cast<std::size_t>(n_bins), 0);
  double sum = 0.0;
  for (double v : kept) {
    int b = static_cast<int>((v - lo) / (hi - lo) * n_bins);
    b = std::clamp(b, 0, n_bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
    sum += v;
  }
  h.samples = static_cast<long>(kept.size());
  h.mean = sum / static_cast<double>(kept.size());
  return h;
}

struct EnsembleResult {
  std::vector<double> times;
  std::vector<double> mean;
  std::optional<std::vector<double>> std_error;  // absent for a single seed
};

/// Pointwise mean of <n>(t) over one trajectory per seed, sampled on the
/// base configuration's grid (0, sample_interval, ..., t_end).
inline EnsembleResult ensemble_average(const TrajectoryConfig& base, const std::vector<std::uint64_t>& seeds,
                                       unsigned threads = 1) {
  if (seeds.empty()) throw DomainError("ensemble_average: no seeds");
  std::vector<TrajectoryRecord> recs(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t i) {
    TrajectoryConfig c = base;
    c.seed = seeds[i];
    recs[i] = run_trajectory(c);
  });
  EnsembleResult out;
  out.times = recs.front().times;
  const std::size_t nt = out.times.size();
  const double m = static_cast<double>(recs.size());
  out.mean.assign(nt, 0.0);
  for (const auto& r : recs) {
    for (std::size_t k = 0; k < nt; ++k) out.mean[k] += r.n_values[k] / m;
  }
  if (recs.size() >= 2) {
    std::vector<double> se(nt, 0.0);
    for (const auto& r : recs) {
      for (std::size_t k = 0; k < nt; ++k) se[k] += std::pow(r.n_values[k] - out.mean[k], 2);
    }
    for (auto& v : se) v = std::sqrt(v / (m - 1.0) / m);
    out.std_error = std::move(se);
  }
  return out;
}

}  // namespace jcmp
