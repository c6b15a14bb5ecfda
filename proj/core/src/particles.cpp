#include "sefm/particles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sefm/error.hpp"

namespace sefm {

void ParticleSet::normalize() {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) {
    const double u = weights.empty() ? 0.0 : 1.0 / static_cast<double>(weights.size());
    std::fill(weights.begin(), weights.end(), u);
    return;
  }
  for (double& w : weights) w /= total;
}

ParticleSet init_particles_from_prior(const WorldMap& map, const std::string& object_class,
                                      int count, Rng& rng) {
  ParticleSet set;
  set.owner = object_class;
  set.positions.reserve(count);
  set.weights.assign(count, 1.0 / static_cast<double>(count));

  std::vector<std::pair<const Rect*, double>> cumulative;
  double cum = 0.0;
  auto it = map.priors.find(object_class);
  if (it != map.priors.end()) {
    for (const auto& rp : it->second) {
      const Room* room = map.find_room(rp.room);
      if (room == nullptr || rp.mass <= 0.0) continue;
      cum += rp.mass;
      cumulative.emplace_back(&room->rect, cum);
    }
  }
  for (int k = 0; k < count; ++k) {
    const double u = rng.uniform();
    const Rect* room = nullptr;
    for (const auto& [rect, edge] : cumulative) {
      if (u < edge) {
        room = rect;
        break;
      }
    }
    set.positions.push_back(room != nullptr ? sample_room_point(map, *room, rng)
                                            : sample_free_point(map, rng));
  }
  return set;
}

ParticleSet resample(const ParticleSet& set, Rng& rng) {
  const std::size_t n = set.size();
  ParticleSet out;
  out.owner = set.owner;
  out.positions.reserve(n);
  out.weights.assign(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
  if (n == 0) return out;

  const double step = 1.0 / static_cast<double>(n);
  double target = rng.uniform() * step;
  double cum = set.weights[0];
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (cum < target && i + 1 < n) {
      ++i;
      cum += set.weights[i];
    }
    out.positions.push_back(set.positions[i]);
    target += step;
  }
  return out;
}

double effective_sample_size(const ParticleSet& set) {
  double sum = 0.0, sum_sq = 0.0;
  for (double w : set.weights) {
    sum += w;
    sum_sq += w * w;
  }
  if (sum_sq <= 0.0) return 0.0;
  return (sum * sum) / sum_sq;
}

ParticleSet reinvigorate(const ParticleSet& set, const WorldMap& map, double fraction,
                         Rng& rng) {
  ParticleSet out = set;
  const std::size_t n = out.size();
  const std::size_t replace =
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  if (replace == 0 || n == 0) return out;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.weights[a] < out.weights[b];
  });
  const double u = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < std::min(replace, n); ++k) {
    const std::size_t idx = order[k];
    out.positions[idx] = sample_free_point(map, rng);
    out.weights[idx] = u;
  }
  out.normalize();
  return out;
}

double mass_within(const ParticleSet& set, const Vec2& center, double radius) {
  double mass = 0.0;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vec2 d = set.positions[i] - center;
    if (d.norm2() <= r2) mass += set.weights[i];
  }
  return mass;
}

double mass_in_rect(const ParticleSet& set, const Rect& rect) {
  double mass = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (rect.contains(set.positions[i])) mass += set.weights[i];
  return mass;
}

Vec2 weighted_mean(const ParticleSet& set) {
  Vec2 mean{0.0, 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    mean = mean + set.positions[i] * set.weights[i];
    total += set.weights[i];
  }
  if (total > 0.0) mean = mean * (1.0 / total);
  return mean;
}

Vec2 kde_mode(const ParticleSet& set, double bandwidth) {
  if (set.size() == 0) throw Error(errkind::kEmptyFreeSpace, "kde_mode of empty set");
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    double score = 0.0;
    for (std::size_t j = 0; j < set.size(); ++j) {
      const Vec2 d = set.positions[i] - set.positions[j];
      const double e = d.norm2() * inv;
      if (e < 40.0) score += set.weights[j] * std::exp(-e);
    }
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return set.positions[best];
}

}  // namespace sefm
