#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sefm/particles.hpp"
#include "sefm/world.hpp"

namespace sefm {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel
};

// Binary PPM (P6); lossless and dependency-free.
void write_ppm(const Image& image, std::ostream& out);

// Top-down map view: prior rooms tinted, obstacles dark, particles drawn per
// owner with opacity proportional to weight, ground-truth markers as crosses,
// robot as a filled circle with a heading tick. Pixels are a pure function of
// the inputs.
Image render_snapshot(const WorldMap& map, const std::vector<const ParticleSet*>& sets,
                      const std::vector<GroundTruthObject>& truth, const Pose* robot,
                      double meters_per_pixel = 0.02);

}  // namespace sefm
