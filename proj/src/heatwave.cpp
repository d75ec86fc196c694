#include "mag/heatwave.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "mag/errors.hpp"
#include "mag/potential.hpp"

namespace mag {

namespace {

void check(double t, const Cloud& x, double eps, const Lattice& a, const char* what) {
  if (!(t > 0)) throw ValidationError(std::string(what) + ": heat kernel requires t>0");
  if (!(eps > 0)) throw ValidationError(std::string(what) + ": eps must be positive");
  if (x.count() != a.count() || x.dim() != a.dim()) throw ValidationError(std::string(what) + ": shape mismatch");
  require_enumerable(x.count(), what);
}

// exponents -|X - A^s|^2 / (2 eps t) over all s, and their maximum
struct Kernel {
  std::vector<Perm> perms;
  std::vector<double> expo;
  double max = -INFINITY;
};

Kernel kernel(double t, const Cloud& x, double eps, const Lattice& a) {
  Kernel k;
  k.perms = all_permutations(x.count());
  for (const Perm& s : k.perms) {
    double e = -(x - permute(a.points(), s)).squared_norm() / (2 * eps * t);
    k.expo.push_back(e);
    k.max = std::max(k.max, e);
  }
  return k;
}

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_open(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace

double log_rho_eps(double t, const Cloud& x, double eps, const Lattice& a) {
  check(t, x, eps, a, "rho_eps");
  Kernel k = kernel(t, x, eps, a);
  double sum = 0;
  for (double e : k.expo) sum += std::exp(e - k.max);
  const double nd = static_cast<double>(x.count() * x.dim());
  return k.max + std::log(sum) - std::log(static_cast<double>(k.perms.size())) -
         0.5 * nd * std::log(2 * std::numbers::pi * eps * t);
}

double rho_eps(double t, const Cloud& x, double eps, const Lattice& a) { return std::exp(log_rho_eps(t, x, eps, a)); }

Cloud v_eps(double t, const Cloud& x, double eps, const Lattice& a) {
  check(t, x, eps, a, "v_eps");
  Kernel k = kernel(t, x, eps, a);
  Cloud mean(x.count(), x.dim());
  double total = 0;
  for (std::size_t i = 0; i < k.perms.size(); ++i) {
    double w = std::exp(k.expo[i] - k.max);
    total += w;
    mean += w * permute(a.points(), k.perms[i]);
  }
  return (1 / (2 * t)) * (x - (1 / total) * mean);
}

Trajectory integrate_companion(const Cloud& x0, double t0, double t1, std::size_t steps, double eps,
                               const Lattice& a) {
  if (!(t0 > 0)) throw ValidationError("integrate_companion: heat kernel requires t>0");
  if (!(t1 > t0)) throw ValidationError("integrate_companion: need t1 > t0");
  if (steps < 1) throw ValidationError("integrate_companion: need at least one step");
  Trajectory tr(Gauge::Time, t0, t1, steps, x0.count(), x0.dim());
  const double h = tr.step();
  Cloud x = x0;
  tr.set_state(0, x);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = tr.time(k);
    Cloud k1 = v_eps(t, x, eps, a);
    Cloud k2 = v_eps(t + h / 2, x + (h / 2) * k1, eps, a);
    Cloud k3 = v_eps(t + h / 2, x + (h / 2) * k2, eps, a);
    Cloud k4 = v_eps(t + h, x + h * k3, eps, a);
    x += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.is_finite()) throw NumericalError("integrate_companion: non-finite state at step " + std::to_string(k + 1));
    tr.set_state(k + 1, x);
  }
  tr.sync_endpoints();
  return tr;
}

double noise_alpha(NoiseProfile p, double t) { return p == NoiseProfile::InvSqrt ? 1 / std::sqrt(t) : 1.0; }

double counter_normal(std::uint64_t seed, std::uint64_t sample, std::uint64_t step, std::uint64_t coord) {
  std::uint64_t key = mix(mix(mix(mix(seed) ^ sample) ^ step) ^ coord);
  double u1 = unit_open(mix(key)), u2 = unit_open(mix(key ^ 0xd1b54a32d192ed03ULL));
  return std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
}

Trajectory sample_sde(const Cloud& x0, double t0, double t1, const NoiseSpec& noise, double eps, const Lattice& a,
                      std::uint64_t sample) {
  if (!(t0 > 0)) throw ValidationError("sample_sde: heat kernel requires t>0");
  if (!(t1 > t0)) throw ValidationError("sample_sde: need t1 > t0");
  if (!(noise.eta >= 0)) throw ValidationError("sample_sde: eta must be non-negative");
  if (noise.steps < 1) throw ValidationError("sample_sde: need at least one step");
  Trajectory tr(Gauge::Time, t0, t1, noise.steps, x0.count(), x0.dim());
  const double h = tr.step(), root_eta = std::sqrt(noise.eta);
  Cloud x = x0;
  tr.set_state(0, x);
  for (std::size_t k = 0; k < noise.steps; ++k) {
    const double t = tr.time(k);
    Cloud next = x + h * v_eps(t, x, eps, a);
    const double amp = root_eta * noise_alpha(noise.alpha, t) * std::sqrt(h);
    for (Eigen::Index c = 0; c < next.flat().size(); ++c)
      next.flat()[c] += amp * counter_normal(noise.seed, sample, k, static_cast<std::uint64_t>(c));
    x = std::move(next);
    tr.set_state(k + 1, x);
  }
  tr.sync_endpoints();
  return tr;
}

}  // namespace mag
