#pragma once

#include "sefm/frames.hpp"
#include "sefm/geometry.hpp"
#include "sefm/particles.hpp"

namespace sefm {

// Scales of the three potentials. The measurement and context scales are
// shared across all frame-object pairs; only the prediction scale depends on
// the frame's permanence category.
struct PotentialParams {
  double sigma_m = 0.5;
  double sigma_c = 0.5;
  double sigma_p_movable = 0.05;
  double ess_threshold = 0.5;
  double reinvigoration_fraction = 0.05;
};

// Isotropic bivariate normal density.
double gaussian2(const Vec2& x, const Vec2& mu, double sigma);

// Measurement potential: sum over the coupling roles {Core, Other} of the
// relation mass times the object set's Gaussian mixture density at the frame
// particle. All-Disjoint belief yields 0.
double measurement_factor(const Vec2& frame_particle, const ParticleSet& object_set,
                          const RelationDistribution& rel, const PotentialParams& params);

// Same structure over the frame-frame roles {Precondition, Disjoint}, reading
// the pending precondition frame's particle set.
double context_factor(const Vec2& frame_particle, const ParticleSet& precond_set,
                      const RelationDistribution& rel, const PotentialParams& params);

// Pose-level measurement variant: the object density convolved with a ring
// kernel of the given radius, so mass concentrates at poses from which the
// object can be reached rather than on the object itself.
double ring_measurement_factor(const Vec2& frame_particle, const ParticleSet& object_set,
                               const RelationDistribution& rel, double ring_radius,
                               const PotentialParams& params);

}  // namespace sefm
