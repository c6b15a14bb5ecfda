#include "sefm/potentials.hpp"

#include <cmath>

namespace sefm {

namespace {

// exp underflows well past 40 sigma-squared units; skip the call entirely.
constexpr double kExponentCutoff = 40.0;

}  // namespace

double gaussian2(const Vec2& x, const Vec2& mu, double sigma) {
  const Vec2 d = x - mu;
  const double e = d.norm2() / (2.0 * sigma * sigma);
  if (e > kExponentCutoff) return 0.0;
  return std::exp(-e) / (2.0 * kPi * sigma * sigma);
}

double measurement_factor(const Vec2& frame_particle, const ParticleSet& object_set,
                          const RelationDistribution& rel, const PotentialParams& params) {
  const double coupling = rel.core + rel.other;
  if (coupling <= 0.0) return 0.0;
  double density = 0.0;
  for (std::size_t s = 0; s < object_set.size(); ++s)
    density += object_set.weights[s] *
               gaussian2(frame_particle, object_set.positions[s], params.sigma_m);
  return coupling * density;
}

double context_factor(const Vec2& frame_particle, const ParticleSet& precond_set,
                      const RelationDistribution& rel, const PotentialParams& params) {
  if (rel.precondition <= 0.0) return 0.0;
  double density = 0.0;
  for (std::size_t s = 0; s < precond_set.size(); ++s)
    density += precond_set.weights[s] *
               gaussian2(frame_particle, precond_set.positions[s], params.sigma_c);
  return rel.precondition * density;
}

double ring_measurement_factor(const Vec2& frame_particle, const ParticleSet& object_set,
                               const RelationDistribution& rel, double ring_radius,
                               const PotentialParams& params) {
  const double coupling = rel.core + rel.other;
  if (coupling <= 0.0) return 0.0;
  const double inv = 1.0 / (2.0 * params.sigma_m * params.sigma_m);
  double density = 0.0;
  for (std::size_t s = 0; s < object_set.size(); ++s) {
    const double d = distance(frame_particle, object_set.positions[s]);
    const double e = (d - ring_radius) * (d - ring_radius) * inv;
    if (e > kExponentCutoff) continue;
    // radial Gaussian spread over the circumference at the ring radius
    density += object_set.weights[s] * std::exp(-e) /
               (2.0 * kPi * ring_radius * std::sqrt(2.0 * kPi) * params.sigma_m);
  }
  return coupling * density;
}

}  // namespace sefm
