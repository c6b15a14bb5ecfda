#include "sefm/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sefm/error.hpp"
#include "sefm/random.hpp"

namespace sefm {

namespace {

constexpr double kCovarianceFloor = 1e-4;  // m^2, 1 cm standard deviation
constexpr int kMaxIterations = 100;
constexpr double kTolerance = 1e-6;

double component_density(const MixtureComponent& c, const Vec2& x) {
  const double det = c.covariance.det();
  if (det <= 0.0) return 0.0;
  const double inv_xx = c.covariance.yy / det;
  const double inv_xy = -c.covariance.xy / det;
  const double inv_yy = c.covariance.xx / det;
  const Vec2 d = x - c.mean;
  const double q = d.x * d.x * inv_xx + 2.0 * d.x * d.y * inv_xy + d.y * d.y * inv_yy;
  if (q > 80.0) return 0.0;
  return std::exp(-0.5 * q) / (2.0 * kPi * std::sqrt(det));
}

// Floors the covariance's eigenvalues; returns true if anything changed.
bool floor_covariance(Cov2& cov) {
  const double tr = cov.xx + cov.yy;
  const double det = cov.det();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double lo = tr / 2.0 - disc;
  if (lo >= kCovarianceFloor) return false;
  const double bump = kCovarianceFloor - lo;
  cov.xx += bump;
  cov.yy += bump;
  return true;
}

struct FitResult {
  GaussianMixture mixture;
  double score = std::numeric_limits<double>::max();
};

FitResult fit_k(const std::vector<Vec2>& points, const std::vector<double>& weights,
                int k, Rng& rng) {
  const std::size_t n = points.size();

  // k-means++ style seeding: first center by weight, the rest by weighted
  // squared distance to the nearest chosen center.
  std::vector<Vec2> centers;
  {
    double u = rng.uniform();
    std::size_t first = n - 1;
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cum += weights[i];
      if (u < cum) {
        first = i;
        break;
      }
    }
    centers.push_back(points[first]);
  }
  std::vector<double> dist2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (const auto& c : centers) best = std::min(best, (points[i] - c).norm2());
      dist2[i] = weights[i] * best;
      total += dist2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += dist2[i];
        if (u < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_index(n);
    }
    centers.push_back(points[pick]);
  }

  GaussianMixture mix;
  for (const auto& c : centers)
    mix.components.push_back(
        MixtureComponent{c, Cov2{0.25, 0.0, 0.25}, 1.0 / static_cast<double>(k)});

  std::vector<double> resp(n * k);
  double prev_ll = -std::numeric_limits<double>::max();
  double ll = prev_ll;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // E step
    ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      for (int j = 0; j < k; ++j) {
        const double d =
            mix.components[j].weight * component_density(mix.components[j], points[i]);
        resp[i * k + j] = d;
        total += d;
      }
      if (total <= 0.0) {
        for (int j = 0; j < k; ++j) resp[i * k + j] = 1.0 / static_cast<double>(k);
        total = 1e-300;
      } else {
        for (int j = 0; j < k; ++j) resp[i * k + j] /= total;
      }
      ll += weights[i] * std::log(total);
    }
    // M step
    for (int j = 0; j < k; ++j) {
      double mass = 0.0;
      Vec2 mean{0.0, 0.0};
      for (std::size_t i = 0; i < n; ++i) {
        const double r = weights[i] * resp[i * k + j];
        mass += r;
        mean = mean + points[i] * r;
      }
      if (mass <= 1e-12) {
        // empty component: park it on the heaviest point with floor spread
        std::size_t heaviest = 0;
        for (std::size_t i = 1; i < n; ++i)
          if (weights[i] > weights[heaviest]) heaviest = i;
        mix.components[j] =
            MixtureComponent{points[heaviest], Cov2{kCovarianceFloor, 0.0, kCovarianceFloor},
                             1e-12};
        mix.degenerate_cluster = true;
        continue;
      }
      mean = mean * (1.0 / mass);
      Cov2 cov;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = weights[i] * resp[i * k + j];
        const Vec2 d = points[i] - mean;
        cov.xx += r * d.x * d.x;
        cov.xy += r * d.x * d.y;
        cov.yy += r * d.y * d.y;
      }
      cov.xx /= mass;
      cov.xy /= mass;
      cov.yy /= mass;
      if (floor_covariance(cov)) mix.degenerate_cluster = true;
      mix.components[j] = MixtureComponent{mean, cov, mass};
    }
    double wsum = 0.0;
    for (const auto& c : mix.components) wsum += c.weight;
    for (auto& c : mix.components) c.weight /= wsum;

    if (std::abs(ll - prev_ll) < kTolerance) break;
    prev_ll = ll;
  }

  // penalized likelihood: 6 parameters per component (weight, mean, cov),
  // minus the one weight constraint
  const double effective_n = static_cast<double>(n);
  const double penalty = (6.0 * k - 1.0) * std::log(effective_n);
  FitResult result;
  result.mixture = std::move(mix);
  result.score = -2.0 * ll * effective_n + penalty;
  return result;
}

}  // namespace

double mixture_density(const GaussianMixture& mixture, const Vec2& x) {
  double d = 0.0;
  for (const auto& c : mixture.components) d += c.weight * component_density(c, x);
  return d;
}

GaussianMixture fit_mixture(const ParticleSet& set, int k_max, std::uint64_t seed) {
  const std::size_t n = set.size();
  if (n == 0) throw Error(errkind::kConfig, "cannot fit a mixture to an empty set");
  if (k_max < 1 || static_cast<std::size_t>(k_max) > n)
    throw Error(errkind::kConfig, "k_max must be in [1, P]");

  std::vector<double> weights = set.weights;
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) {
    std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(n));
  } else {
    for (double& w : weights) w /= total;
  }

  FitResult best;
  for (int k = 1; k <= k_max; ++k) {
    Rng rng(derive_seed(seed, "kmeans", static_cast<std::uint64_t>(k)));
    FitResult candidate = fit_k(set.positions, weights, k, rng);
    if (candidate.score < best.score) best = std::move(candidate);
  }

  auto& comps = best.mixture.components;
  std::stable_sort(comps.begin(), comps.end(),
                   [](const MixtureComponent& a, const MixtureComponent& b) {
                     if (a.weight != b.weight) return a.weight > b.weight;
                     if (a.mean.x != b.mean.x) return a.mean.x < b.mean.x;
                     return a.mean.y < b.mean.y;
                   });
  double wsum = 0.0;
  for (const auto& c : comps) wsum += c.weight;
  if (wsum > 0.0)
    for (auto& c : comps) c.weight /= wsum;
  return best.mixture;
}

Pose select_navigation_goal(const GaussianMixture& mixture, const WorldMap& map,
                            const Pose& robot_pose, const SensorModel& sensor) {
  if (mixture.components.empty())
    throw Error(errkind::kConfig, "cannot select a goal from an empty mixture");

  const MixtureComponent* chosen = &mixture.components.front();
  for (const auto& c : mixture.components) {
    if (c.weight > chosen->weight + 1e-9) {
      chosen = &c;
    } else if (std::abs(c.weight - chosen->weight) <= 1e-9 &&
               distance(c.mean, robot_pose.position()) <
                   distance(chosen->mean, robot_pose.position())) {
      chosen = &c;
    }
  }
  const Vec2 mean = chosen->mean;
  const double reach = 0.8 * sensor.range;

  SensorModel probe = sensor;
  probe.range = reach;
  if (visible_from(map, probe, robot_pose, mean)) return robot_pose;

  Vec2 dir = robot_pose.position() - mean;
  double base = std::atan2(dir.y, dir.x);
  if (dir.norm() < 1e-9) base = 0.0;
  const double fractions[] = {1.0, 0.75, 0.5, 0.25};
  for (double fraction : fractions) {
    const double radius = fraction * reach;
    for (int k = 0; k < 16; ++k) {
      const int half = (k + 1) / 2;
      const double angle = base + (k % 2 == 1 ? half : -half) * (kPi / 8.0);
      const Vec2 candidate{mean.x + radius * std::cos(angle),
                           mean.y + radius * std::sin(angle)};
      if (!map.in_free_space(candidate)) continue;
      const double heading = std::atan2(mean.y - candidate.y, mean.x - candidate.x);
      const Pose pose{candidate.x, candidate.y, heading};
      if (!visible_from(map, sensor, pose, mean)) continue;
      if (!path_exists(map, robot_pose.position(), candidate)) continue;
      return pose;
    }
  }
  throw Error(errkind::kNoReachableViewpoint,
              "no reachable pose can observe the component mean");
}

}  // namespace sefm
