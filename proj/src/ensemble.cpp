#include "suvlab/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

#include "suvlab/errors.hpp"

namespace suvlab {

namespace {

// Fixed aggregation granularity; independent of the worker count.
constexpr std::size_t kChunk = 128;

struct ChunkResult {
  std::size_t pole0 = 0;
  std::size_t pole1 = 0;
  std::size_t unresolved = 0;
  std::vector<double> collapse_times;
  std::vector<double> sum_z;
  std::vector<double> sum_z2;
};

// Trajectories run in interleaved groups of kLanes; their dependency chains
// are independent, so the CPU overlaps the transcendental latencies. Each
// trajectory's arithmetic is unchanged and its +-1 tail and recorded points
// are added per trajectory in index order.
constexpr std::size_t kLanes = 4;

struct Lane {
  std::size_t index = 0;
  NoiseStream noise;
  double theta = 0.0;
  Outcome outcome = Outcome::kUnresolved;
  std::size_t k = 0;
  std::size_t until_record = 0;
  std::vector<double> recorded;
};

void finish_lane(const Lane& lane, const EnsembleConfig& cfg, std::size_t points,
                 ChunkResult& out) {
  for (std::size_t q = 0; q < lane.recorded.size(); ++q) {
    const double z = lane.recorded[q];
    out.sum_z[q] += z;
    out.sum_z2[q] += z * z;
  }
  if (lane.outcome == Outcome::kUnresolved) {
    ++out.unresolved;
    return;
  }
  const double pole = lane.outcome == Outcome::kPole0 ? 1.0 : -1.0;
  for (std::size_t q = lane.recorded.size(); q < points; ++q) {
    out.sum_z[q] += pole;
    out.sum_z2[q] += 1.0;
  }
  out.collapse_times.push_back(static_cast<double>(lane.k) * cfg.integrator.dt);
  if (lane.outcome == Outcome::kPole0) {
    ++out.pole0;
  } else {
    ++out.pole1;
  }
}

void run_chunk(const EnsembleConfig& cfg, const PolarStepper& stepper, std::size_t first,
               std::size_t last, std::size_t steps, std::size_t points, ChunkResult& out) {
  out.sum_z.assign(points, 0.0);
  out.sum_z2.assign(points, 0.0);
  const double z0 = std::cos(cfg.theta0);
  const Outcome start = stepper.classify(cfg.theta0);

  for (std::size_t group = first; group < last; group += kLanes) {
    const std::size_t width = std::min(kLanes, last - group);
    std::vector<Lane> lanes;
    lanes.reserve(width);
    for (std::size_t l = 0; l < width; ++l) {
      const std::size_t i = group + l;
      Lane lane{i, NoiseStream(cfg.noise, cfg.integrator.dt, derive_seed(cfg.seed, i)),
                cfg.theta0, start, 0, cfg.record_every, {}};
      lane.recorded.reserve(points);
      lane.recorded.push_back(z0);
      lanes.push_back(std::move(lane));
    }

    bool running = true;
    while (running) {
      running = false;
      for (Lane& lane : lanes) {
        if (lane.outcome != Outcome::kUnresolved || lane.k >= steps) continue;
        lane.theta = stepper.step(lane.theta, lane.noise.next());
        if (!std::isfinite(lane.theta)) {
          throw NumericBlowup("run_ensemble: trajectory " + std::to_string(lane.index) +
                                  " produced a non-finite theta",
                              lane.k);
        }
        ++lane.k;
        lane.outcome = stepper.classify(lane.theta);
        if (--lane.until_record == 0) {
          lane.recorded.push_back(std::cos(lane.theta));
          lane.until_record = cfg.record_every;
        }
        running = true;
      }
    }
    for (const Lane& lane : lanes) finish_lane(lane, cfg, points, out);
  }
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

double binomial_sigma(double p, std::size_t n) {
  return n == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

double z_score(double observed, double expected, double sigma) {
  if (sigma > 0.0) return (observed - expected) / sigma;
  if (observed == expected) return 0.0;
  return observed > expected ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
}

}  // namespace

void EnsembleConfig::validate() const {
  if (M < 1) throw std::invalid_argument("ensemble.M must be >= 1");
  if (!(theta0 >= 0.0 && theta0 <= kPi)) {
    throw std::invalid_argument("ensemble.theta0 must lie in [0, pi]");
  }
  if (record_every < 1) throw std::invalid_argument("ensemble.record_every must be >= 1");
  params.validate();
  integrator.validate();
}

double EnsembleResult::empirical_p0() const {
  const std::size_t n = resolved();
  return n == 0 ? std::numeric_limits<double>::quiet_NaN()
                : static_cast<double>(count_pole0) / static_cast<double>(n);
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SUVLAB_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

EnsembleResult run_ensemble(const EnsembleConfig& cfg) {
  cfg.validate();
  const PolarStepper stepper(cfg.params, cfg.integrator);
  const std::size_t steps = cfg.integrator.steps();
  const std::size_t points = steps / cfg.record_every + 1;
  const std::size_t chunks = (cfg.M + kChunk - 1) / kChunk;

  std::vector<ChunkResult> partial(chunks);
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      try {
        run_chunk(cfg, stepper, c * kChunk, std::min(cfg.M, (c + 1) * kChunk), steps, points,
                  partial[c]);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_workers(cfg.workers), chunks));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EnsembleResult r;
  r.config_echo = cfg;
  std::vector<double> sum_z(points, 0.0);
  std::vector<double> sum_z2(points, 0.0);
  for (const auto& part : partial) {
    r.count_pole0 += part.pole0;
    r.count_pole1 += part.pole1;
    r.count_unresolved += part.unresolved;
    r.collapse_times.insert(r.collapse_times.end(), part.collapse_times.begin(),
                            part.collapse_times.end());
    for (std::size_t j = 0; j < points; ++j) {
      sum_z[j] += part.sum_z[j];
      sum_z2[j] += part.sum_z2[j];
    }
  }

  const auto m = static_cast<double>(cfg.M);
  r.times.resize(points);
  r.mean_sigma_z_series.resize(points);
  r.stderr_series.resize(points);
  for (std::size_t j = 0; j < points; ++j) {
    r.times[j] = static_cast<double>(j * cfg.record_every) * cfg.integrator.dt;
    const double mean = sum_z[j] / m;
    r.mean_sigma_z_series[j] = std::clamp(mean, -1.0, 1.0);
    const double var = cfg.M > 1 ? std::max(0.0, (sum_z2[j] - m * mean * mean) / (m - 1.0)) : 0.0;
    r.stderr_series[j] = std::sqrt(var / m);
  }
  return r;
}

BornTest born_statistics_test(const EnsembleResult& r, double threshold) {
  const std::size_t total = r.total();
  if (total == 0) throw std::invalid_argument("born_statistics_test: empty ensemble");
  if (static_cast<double>(r.count_unresolved) >= 0.01 * static_cast<double>(total)) {
    throw HorizonTooShort("born_statistics_test: " + std::to_string(r.count_unresolved) + " of " +
                          std::to_string(total) +
                          " trajectories unresolved; increase integrator.max_time");
  }
  BornTest t;
  t.threshold = threshold;
  t.expected_p0 = born_weights({r.config_echo.theta0, 0.0}).p0;
  t.empirical_p0 = r.empirical_p0();
  t.z_score = z_score(t.empirical_p0, t.expected_p0, binomial_sigma(t.expected_p0, r.resolved()));
  t.pass = std::abs(t.z_score) < threshold;
  return t;
}

double martingale_check(const EnsembleResult& r) {
  if (r.mean_sigma_z_series.empty()) {
    throw std::invalid_argument("martingale_check: empty <sigma_z> series");
  }
  const double z0 = std::cos(r.config_echo.theta0);
  double worst = 0.0;
  for (double mean : r.mean_sigma_z_series) worst = std::max(worst, std::abs(mean - z0));
  return worst;
}

ConservationReport statistics_conservation(const EnsembleResult& r, double threshold) {
  ConservationReport rep;
  rep.threshold = threshold;
  rep.max_deviation = martingale_check(r);
  const double z0 = std::cos(r.config_echo.theta0);
  for (std::size_t j = 0; j < r.mean_sigma_z_series.size(); ++j) {
    const double dev = std::abs(r.mean_sigma_z_series[j] - z0);
    const double z = std::abs(z_score(dev, 0.0, r.stderr_series[j]));
    // A deviation at the rounding level with zero spread (t = 0) is not a violation.
    const double effective = dev <= 1e-12 ? 0.0 : z;
    if (effective > rep.max_z) {
      rep.max_z = effective;
      rep.time_of_max_z = r.times[j];
    }
  }
  rep.pass = rep.max_z < threshold;
  return rep;
}

std::vector<RatioRow> gj_ratio_sweep(std::span<const double> ratios, double theta0,
                                     const EnsembleConfig& base) {
  std::vector<RatioRow> rows;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0.0)) throw std::invalid_argument("gj_ratio_sweep: ratios must be > 0");
    EnsembleConfig cfg = base;
    cfg.theta0 = theta0;
    cfg.params.G = ratios[i] * cfg.params.J;
    cfg.seed = derive_seed(base.seed, i);
    const EnsembleResult r = run_ensemble(cfg);
    rows.push_back({ratios[i], r.empirical_p0(), r.count_pole0, r.count_pole1,
                    r.count_unresolved});
  }
  return rows;
}

std::vector<TauRow> tau_sweep(std::span<const double> tau_values, double theta0,
                              const EnsembleConfig& base) {
  std::vector<TauRow> rows;
  const double expected = born_weights({theta0, 0.0}).p0;
  for (std::size_t i = 0; i < tau_values.size(); ++i) {
    if (!(tau_values[i] > 0.0)) throw std::invalid_argument("tau_sweep: tau values must be > 0");
    EnsembleConfig cfg = base;
    cfg.theta0 = theta0;
    cfg.noise = OrnsteinUhlenbeck{tau_values[i]};
    cfg.seed = derive_seed(base.seed, i);
    const EnsembleResult r = run_ensemble(cfg);
    const double p0 = r.empirical_p0();
    rows.push_back(
        {tau_values[i], p0, z_score(p0, expected, binomial_sigma(expected, r.resolved()))});
  }
  return rows;
}

ScalingResult scaling_sweep(std::span<const double> rate_scales, double theta0,
                            const EnsembleConfig& base) {
  if (rate_scales.size() < 2) throw std::invalid_argument("scaling_sweep: need >= 2 scales");
  if (base.params.G == 0.0 && std::abs(theta0 - 0.5 * kPi) < 1e-12) {
    throw std::invalid_argument(
        "scaling_sweep: theta0 = pi/2 never collapses in the deterministic (G = 0) limit");
  }
  ScalingResult out;
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < rate_scales.size(); ++i) {
    if (!(rate_scales[i] > 0.0)) throw std::invalid_argument("scaling_sweep: scales must be > 0");
    EnsembleConfig cfg = base;
    cfg.theta0 = theta0;
    cfg.params.epsilon = base.params.epsilon * rate_scales[i];
    cfg.seed = derive_seed(base.seed, i);
    const EnsembleResult r = run_ensemble(cfg);
    if (r.collapse_times.empty()) {
      throw HorizonTooShort("scaling_sweep: no trajectory collapsed at scale " +
                            std::to_string(rate_scales[i]));
    }
    const double tau_c = median(r.collapse_times);
    out.rows.push_back({rate_scales[i], tau_c});
    lx.push_back(std::log(cfg.params.rate_scale()));
    ly.push_back(std::log(tau_c));
  }
  const auto n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("scaling_sweep: scales must not all be equal");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  return out;
}

}  // namespace suvlab
