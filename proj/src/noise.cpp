#include "suvlab/noise.hpp"

#include <sstream>
#include <stdexcept>

namespace suvlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

std::string describe(const NoiseKind& kind) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, WhiteNoise>) {
          os << "white";
        } else if constexpr (std::is_same_v<K, OrnsteinUhlenbeck>) {
          os << "ou(tau_t=" << k.tau_t << ")";
        } else {
          os << "constant(xi=" << k.xi << ")";
        }
      },
      kind);
  return os.str();
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return splitmix64(splitmix64(root) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double ou_grid_variance(double dt, double tau_t) {
  return std::tanh(dt / (2.0 * tau_t)) / dt;
}

NoiseStream::NoiseStream(const NoiseKind& kind, double dt, std::uint64_t seed)
    : dt_(dt), engine_(seed) {
  require_positive(dt, "noise dt");
  if (std::holds_alternative<WhiteNoise>(kind)) {
    mode_ = Mode::kWhite;
    scale_ = 1.0 / std::sqrt(dt);
  } else if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&kind)) {
    require_positive(ou->tau_t, "tau_t");
    mode_ = Mode::kOrnsteinUhlenbeck;
    const double var = ou_grid_variance(dt, ou->tau_t);
    decay_ = std::exp(-dt / ou->tau_t);
    scale_ = std::sqrt(var);
    // -expm1 keeps 1 - decay^2 accurate when dt << tau_t.
    kick_ = std::sqrt(var * -std::expm1(-2.0 * dt / ou->tau_t));
  } else {
    mode_ = Mode::kConstant;
    state_ = std::get<ConstantField>(kind).xi;
  }
}

NoisePath sample(const NoiseKind& kind, double dt, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("noise path length must be >= 1");
  NoiseStream stream(kind, dt, seed);
  NoisePath path;
  path.dt = dt;
  path.seed = seed;
  path.values.resize(n);
  for (auto& v : path.values) v = stream.next();
  return path;
}

NoisePath sample_white(double dt, std::size_t n, std::uint64_t seed) {
  return sample(WhiteNoise{}, dt, n, seed);
}

NoisePath sample_ou(double dt, std::size_t n, double tau_t, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("OU path length must be >= 2");
  NoisePath path = sample(OrnsteinUhlenbeck{tau_t}, dt, n, seed);
  if (dt > tau_t) {
    std::ostringstream os;
    os << "under-resolved noise: dt=" << dt << " exceeds tau_t=" << tau_t;
    path.warnings.push_back(os.str());
  }
  return path;
}

NoisePath sample_constant(double xi, std::size_t n, double dt) {
  if (!std::isfinite(xi)) throw std::invalid_argument("constant field must be finite");
  return sample(ConstantField{xi}, dt, n, 0);
}

double autocorrelation(const NoisePath& path, std::size_t lag) {
  const std::size_t n = path.values.size();
  if (lag >= n) throw std::invalid_argument("autocorrelation: lag must be < path length");
  double mean = 0.0;
  for (double v : path.values) mean += v;
  mean /= static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t k = 0; k + lag < n; ++k) {
    acc += (path.values[k] - mean) * (path.values[k + lag] - mean);
  }
  const std::size_t pairs = n - lag;
  return acc / static_cast<double>(pairs > 1 ? pairs - 1 : 1);
}

NoisePath negated(const NoisePath& path) {
  NoisePath out = path;
  for (auto& v : out.values) v = -v;
  return out;
}

}  // namespace suvlab
