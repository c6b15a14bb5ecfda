#include "sefm/render.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace sefm {

namespace {

struct Color {
  std::uint8_t r, g, b;
};

const Color kBackground{245, 245, 242};
const Color kRoomTint{224, 233, 241};
const Color kRoomEdge{180, 188, 196};
const Color kObstacle{72, 72, 76};
const Color kTruth{20, 20, 20};
const Color kRobot{30, 90, 200};

// Owner palette, cycled in set order.
const Color kPalette[] = {
    {46, 139, 87},   // green
    {205, 92, 92},   // red
    {70, 130, 180},  // blue
    {218, 165, 32},  // gold
    {138, 102, 204}, // violet
    {64, 158, 160},  // teal
};

class Canvas {
 public:
  Canvas(int width, int height) {
    image_.width = width;
    image_.height = height;
    image_.rgb.assign(static_cast<std::size_t>(width) * height * 3, 0);
  }

  void fill(Color c) {
    for (int y = 0; y < image_.height; ++y)
      for (int x = 0; x < image_.width; ++x) set(x, y, c);
  }

  void set(int x, int y, Color c) {
    if (x < 0 || y < 0 || x >= image_.width || y >= image_.height) return;
    const std::size_t i = (static_cast<std::size_t>(y) * image_.width + x) * 3;
    image_.rgb[i] = c.r;
    image_.rgb[i + 1] = c.g;
    image_.rgb[i + 2] = c.b;
  }

  void blend(int x, int y, Color c, double alpha) {
    if (x < 0 || y < 0 || x >= image_.width || y >= image_.height) return;
    alpha = std::clamp(alpha, 0.0, 1.0);
    const std::size_t i = (static_cast<std::size_t>(y) * image_.width + x) * 3;
    auto mix = [&](std::uint8_t base, std::uint8_t over) {
      return static_cast<std::uint8_t>(std::lround(base * (1.0 - alpha) + over * alpha));
    };
    image_.rgb[i] = mix(image_.rgb[i], c.r);
    image_.rgb[i + 1] = mix(image_.rgb[i + 1], c.g);
    image_.rgb[i + 2] = mix(image_.rgb[i + 2], c.b);
  }

  Image take() { return std::move(image_); }

 private:
  Image image_;
};

}  // namespace

void write_ppm(const Image& image, std::ostream& out) {
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()),
            static_cast<std::streamsize>(image.rgb.size()));
}

Image render_snapshot(const WorldMap& map, const std::vector<const ParticleSet*>& sets,
                      const std::vector<GroundTruthObject>& truth, const Pose* robot,
                      double meters_per_pixel) {
  const int width =
      std::max(1, static_cast<int>(std::ceil(map.bounds.width() / meters_per_pixel)));
  const int height =
      std::max(1, static_cast<int>(std::ceil(map.bounds.height() / meters_per_pixel)));
  Canvas canvas(width, height);
  canvas.fill(kBackground);

  // y grows upward in the map, downward in the image
  auto px = [&](const Vec2& p) {
    return std::pair<int, int>{
        static_cast<int>((p.x - map.bounds.lo.x) / meters_per_pixel),
        height - 1 - static_cast<int>((p.y - map.bounds.lo.y) / meters_per_pixel)};
  };
  auto fill_rect = [&](const Rect& r, Color c) {
    const auto [x0, y1] = px(r.lo);
    const auto [x1, y0] = px(r.hi);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) canvas.set(x, y, c);
  };
  auto outline_rect = [&](const Rect& r, Color c) {
    const auto [x0, y1] = px(r.lo);
    const auto [x1, y0] = px(r.hi);
    for (int x = x0; x <= x1; ++x) {
      canvas.set(x, y0, c);
      canvas.set(x, y1, c);
    }
    for (int y = y0; y <= y1; ++y) {
      canvas.set(x0, y, c);
      canvas.set(x1, y, c);
    }
  };

  for (const auto& room : map.rooms) fill_rect(room.rect, kRoomTint);
  for (const auto& room : map.rooms) outline_rect(room.rect, kRoomEdge);
  for (const auto& ob : map.obstacles) fill_rect(ob, kObstacle);

  for (std::size_t s = 0; s < sets.size(); ++s) {
    const ParticleSet* set = sets[s];
    if (set == nullptr) continue;
    const Color color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    const double n = static_cast<double>(std::max<std::size_t>(1, set->size()));
    for (std::size_t i = 0; i < set->size(); ++i) {
      const auto [x, y] = px(set->positions[i]);
      const double alpha = std::min(1.0, set->weights[i] * n * 0.6 + 0.08);
      canvas.blend(x, y, color, alpha);
      canvas.blend(x + 1, y, color, alpha * 0.5);
      canvas.blend(x, y + 1, color, alpha * 0.5);
    }
  }

  for (const auto& obj : truth) {
    const auto [x, y] = px(obj.position);
    for (int d = -4; d <= 4; ++d) {
      canvas.set(x + d, y, kTruth);
      canvas.set(x, y + d, kTruth);
    }
  }

  if (robot != nullptr) {
    const auto [cx, cy] = px(robot->position());
    for (int dy = -3; dy <= 3; ++dy)
      for (int dx = -3; dx <= 3; ++dx)
        if (dx * dx + dy * dy <= 9) canvas.set(cx + dx, cy + dy, kRobot);
    for (int t = 0; t <= 6; ++t) {
      const int hx = cx + static_cast<int>(std::lround(t * std::cos(robot->heading)));
      const int hy = cy - static_cast<int>(std::lround(t * std::sin(robot->heading)));
      canvas.set(hx, hy, kRobot);
    }
  }

  return canvas.take();
}

}  // namespace sefm
