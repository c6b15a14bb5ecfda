#pragma once

#include <cstdint>
#include <vector>

#include "sefm/geometry.hpp"
#include "sefm/particles.hpp"
#include "sefm/world.hpp"

namespace sefm {

// Symmetric 2x2 covariance.
struct Cov2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
};

struct MixtureComponent {
  Vec2 mean;
  Cov2 covariance;
  double weight = 0.0;
};

struct GaussianMixture {
  std::vector<MixtureComponent> components;
  // Set when any covariance had to be floored during fitting.
  bool degenerate_cluster = false;

  std::size_t size() const { return components.size(); }
};

double mixture_density(const GaussianMixture& mixture, const Vec2& x);

// Weighted EM fit for K = 1..k_max with seeded k-means++ initialization and
// penalized-likelihood model selection. Deterministic given the seed.
GaussianMixture fit_mixture(const ParticleSet& set, int k_max, std::uint64_t seed);

// A reachable, collision-free pose with unoccluded sight of the
// highest-weight component's mean, at most 0.8 * sensor range away from it
// and facing it. Weight ties break toward the component mean nearest the
// robot. Returns the robot's own pose when the mean is already in view.
Pose select_navigation_goal(const GaussianMixture& mixture, const WorldMap& map,
                            const Pose& robot_pose, const SensorModel& sensor);

}  // namespace sefm
