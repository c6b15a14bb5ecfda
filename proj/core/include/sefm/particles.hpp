#pragma once

#include <string>
#include <vector>

#include "sefm/geometry.hpp"
#include "sefm/random.hpp"
#include "sefm/world.hpp"

namespace sefm {

// Weighted particle approximation of one belief, owned either by an object
// class or by a frame id.
struct ParticleSet {
  std::string owner;
  std::vector<Vec2> positions;
  std::vector<double> weights;

  std::size_t size() const { return positions.size(); }

  // Scales weights to sum to 1; an all-zero set becomes uniform.
  void normalize();
};

// Draws particles from the class's room prior: each room receives its prior
// mass, the remainder goes uniformly over free space. Classes without a prior
// (frames included) come out fully uniform. Weights are 1/P.
ParticleSet init_particles_from_prior(const WorldMap& map, const std::string& object_class,
                                      int count, Rng& rng);

// Low-variance systematic resampling; output weights are uniform.
ParticleSet resample(const ParticleSet& set, Rng& rng);

double effective_sample_size(const ParticleSet& set);

// Replaces ceil(fraction * P) lowest-weight particles with uniform free-space
// draws at weight 1/P, then renormalizes.
ParticleSet reinvigorate(const ParticleSet& set, const WorldMap& map, double fraction,
                         Rng& rng);

double mass_within(const ParticleSet& set, const Vec2& center, double radius);
double mass_in_rect(const ParticleSet& set, const Rect& rect);

Vec2 weighted_mean(const ParticleSet& set);

// Position of the particle with the highest kernel density estimate under an
// isotropic Gaussian kernel; ties resolve to the lowest index.
Vec2 kde_mode(const ParticleSet& set, double bandwidth);

}  // namespace sefm
