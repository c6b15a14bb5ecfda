#include "sefm/mixture.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "sefm/error.hpp"
#include "sefm/particles.hpp"
#include "sefm/random.hpp"
#include "sefm/world.hpp"
#include "test_support.hpp"

using namespace sefm;

namespace {

ParticleSet gaussian_cloud(const Vec2& center, double sigma, int count,
                           std::uint64_t seed) {
  Rng rng(seed);
  ParticleSet set;
  set.owner = "cloud";
  for (int i = 0; i < count; ++i) {
    set.positions.push_back(rng.normal2(center, sigma));
    set.weights.push_back(1.0 / count);
  }
  return set;
}

Vec2 sample_mean(const ParticleSet& set) {
  Vec2 m{0.0, 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    m = m + set.positions[i] * set.weights[i];
    total += set.weights[i];
  }
  return m * (1.0 / total);
}

Vec2 mixture_mean(const GaussianMixture& mix) {
  Vec2 m{0.0, 0.0};
  for (const auto& c : mix.components) m = m + c.mean * c.weight;
  return m;
}

WorldMap walled_map() {
  WorldMap map;
  map.bounds = Rect{{0.0, 0.0}, {12.0, 9.0}};
  map.obstacles.push_back(Rect{{5.8, 0.0}, {6.2, 4.6}});
  return map;
}

}  // namespace

TEST_CASE("fit: a single tight cloud keeps the sample mean") {
  const ParticleSet set = gaussian_cloud({5.0, 5.0}, 0.2, 300, 21);
  const GaussianMixture mix = fit_mixture(set, 3, 17);

  REQUIRE(mix.size() >= 1);
  double wsum = 0.0;
  for (const auto& c : mix.components) wsum += c.weight;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-6));

  // EM's M step preserves the global weighted mean exactly, whatever K the
  // model selection lands on.
  const Vec2 sm = sample_mean(set);
  const Vec2 mm = mixture_mean(mix);
  CHECK(mm.x == doctest::Approx(sm.x).epsilon(1e-6));
  CHECK(mm.y == doctest::Approx(sm.y).epsilon(1e-6));
  CHECK(std::hypot(mix.components[0].mean.x - 5.0, mix.components[0].mean.y - 5.0) < 0.1);
}

TEST_CASE("fit: two separated clusters come out as two half-weight components") {
  ParticleSet set = gaussian_cloud({2.0, 2.0}, 0.3, 200, 31);
  const ParticleSet other = gaussian_cloud({8.0, 8.0}, 0.3, 200, 32);
  for (std::size_t i = 0; i < other.size(); ++i) {
    set.positions.push_back(other.positions[i]);
    set.weights.push_back(other.weights[i]);
  }
  for (double& w : set.weights) w = 1.0 / set.size();

  const GaussianMixture mix = fit_mixture(set, 3, 5);
  REQUIRE(mix.size() == 2);
  CHECK(mix.components[0].weight == doctest::Approx(0.5).epsilon(0.2));
  CHECK(mix.components[1].weight == doctest::Approx(0.5).epsilon(0.2));

  const bool first_low = mix.components[0].mean.x < 5.0;
  const Vec2 low = first_low ? mix.components[0].mean : mix.components[1].mean;
  const Vec2 high = first_low ? mix.components[1].mean : mix.components[0].mean;
  CHECK(std::hypot(low.x - 2.0, low.y - 2.0) < 0.15);
  CHECK(std::hypot(high.x - 8.0, high.y - 8.0) < 0.15);
}

TEST_CASE("fit: identical points floor the covariance and flag the degeneracy") {
  ParticleSet set;
  set.owner = "spot";
  for (int i = 0; i < 50; ++i) {
    set.positions.push_back({3.0, 4.0});
    set.weights.push_back(1.0 / 50.0);
  }
  const GaussianMixture mix = fit_mixture(set, 3, 9);

  REQUIRE(mix.size() == 1);
  CHECK(mix.degenerate_cluster);
  CHECK(mix.components[0].mean.x == doctest::Approx(3.0));
  CHECK(mix.components[0].mean.y == doctest::Approx(4.0));
  CHECK(mix.components[0].covariance.xx == doctest::Approx(1e-4));
  CHECK(mix.components[0].covariance.yy == doctest::Approx(1e-4));
  CHECK(mix.components[0].weight == doctest::Approx(1.0));
}

TEST_CASE("fit: weight scaling does not move the fit") {
  const ParticleSet base = gaussian_cloud({4.0, 3.0}, 0.5, 150, 41);
  const GaussianMixture ref = fit_mixture(base, 3, 23);

  ParticleSet scaled4 = base;
  for (double& w : scaled4.weights) w *= 4.0;
  const GaussianMixture m4 = fit_mixture(scaled4, 3, 23);
  REQUIRE(m4.size() == ref.size());
  for (std::size_t j = 0; j < ref.size(); ++j) {
    CHECK(m4.components[j].mean.x == ref.components[j].mean.x);
    CHECK(m4.components[j].mean.y == ref.components[j].mean.y);
    CHECK(m4.components[j].weight == ref.components[j].weight);
  }

  ParticleSet scaled37 = base;
  for (double& w : scaled37.weights) w *= 3.7;
  const GaussianMixture m37 = fit_mixture(scaled37, 3, 23);
  REQUIRE(m37.size() == ref.size());
  for (std::size_t j = 0; j < ref.size(); ++j) {
    CHECK(m37.components[j].mean.x == doctest::Approx(ref.components[j].mean.x).epsilon(1e-6));
    CHECK(m37.components[j].mean.y == doctest::Approx(ref.components[j].mean.y).epsilon(1e-6));
  }
}

TEST_CASE("fit: rejects empty input and bad K") {
  ParticleSet empty;
  empty.owner = "none";
  CHECK_THROWS_AS(fit_mixture(empty, 3, 1), Error);

  const ParticleSet set = gaussian_cloud({1.0, 1.0}, 0.1, 10, 3);
  try {
    fit_mixture(set, 0, 1);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == errkind::kConfig);
  }
}

TEST_CASE("density: a single isotropic component matches the closed form") {
  GaussianMixture mix;
  mix.components.push_back(MixtureComponent{{2.0, 3.0}, Cov2{0.25, 0.0, 0.25}, 1.0});
  CHECK(mixture_density(mix, {2.0, 3.0}) == doctest::Approx(0.6366197723675814).epsilon(1e-12));
  CHECK(mixture_density(mix, {2.5, 3.0}) ==
        doctest::Approx(0.6366197723675814 * std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("goal: open space places the viewpoint at 0.8 range on the robot side") {
  WorldMap map;
  map.bounds = Rect{{0.0, 0.0}, {12.0, 12.0}};
  const SensorModel sensor;

  GaussianMixture mix;
  mix.components.push_back(MixtureComponent{{8.0, 8.0}, Cov2{0.25, 0.0, 0.25}, 1.0});

  const Pose robot{1.0, 1.0, 0.0};
  const Pose goal = select_navigation_goal(mix, map, robot, sensor);

  const double reach = 0.8 * sensor.range;
  const double inv = 1.0 / std::sqrt(2.0);
  CHECK(goal.x == doctest::Approx(8.0 - reach * inv).epsilon(1e-9));
  CHECK(goal.y == doctest::Approx(8.0 - reach * inv).epsilon(1e-9));
  CHECK(goal.heading == doctest::Approx(std::atan2(8.0 - goal.y, 8.0 - goal.x)).epsilon(1e-9));
}

TEST_CASE("goal: equal weights break toward the nearest mean") {
  WorldMap map;
  map.bounds = Rect{{0.0, 0.0}, {12.0, 12.0}};
  const SensorModel sensor;

  GaussianMixture mix;
  mix.components.push_back(MixtureComponent{{9.0, 2.0}, Cov2{0.25, 0.0, 0.25}, 0.5});
  mix.components.push_back(MixtureComponent{{3.0, 3.0}, Cov2{0.25, 0.0, 0.25}, 0.5});

  const Pose robot{2.0, 2.0, kPi};
  const Pose goal = select_navigation_goal(mix, map, robot, sensor);
  CHECK(distance(goal.position(), Vec2{3.0, 3.0}) == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(distance(goal.position(), Vec2{9.0, 2.0}) > 4.5);
}

TEST_CASE("goal: a mean already in view keeps the current pose") {
  WorldMap map;
  map.bounds = Rect{{0.0, 0.0}, {12.0, 12.0}};
  const SensorModel sensor;

  GaussianMixture mix;
  mix.components.push_back(MixtureComponent{{3.0, 3.0}, Cov2{0.25, 0.0, 0.25}, 1.0});

  const Pose robot{2.0, 2.0, kPi / 4.0};
  const Pose goal = select_navigation_goal(mix, map, robot, sensor);
  CHECK(goal.x == robot.x);
  CHECK(goal.y == robot.y);
  CHECK(goal.heading == robot.heading);
}

TEST_CASE("goal: a mean behind a wall gets an unoccluded reachable viewpoint") {
  const WorldMap map = walled_map();
  const SensorModel sensor;

  GaussianMixture mix;
  mix.components.push_back(MixtureComponent{{9.0, 2.0}, Cov2{0.25, 0.0, 0.25}, 1.0});

  const Pose robot{2.0, 2.0, 0.0};
  const Pose goal = select_navigation_goal(mix, map, robot, sensor);

  CHECK(map.in_free_space(goal.position()));
  CHECK(distance(goal.position(), Vec2{9.0, 2.0}) <= 0.8 * sensor.range + 1e-9);
  CHECK(goal.heading ==
        doctest::Approx(std::atan2(2.0 - goal.y, 9.0 - goal.x)).epsilon(1e-9));
  CHECK(visible_from(map, sensor, goal, {9.0, 2.0}));
  CHECK(path_exists(map, robot.position(), goal.position()));
  CHECK((goal.x != robot.x || goal.y != robot.y));
}

TEST_CASE("goal: an enclosed mean raises the no-viewpoint error") {
  WorldMap map;
  map.bounds = Rect{{0.0, 0.0}, {1.0, 1.0}};
  const SensorModel sensor;

  GaussianMixture mix;
  mix.components.push_back(MixtureComponent{{0.5, 0.5}, Cov2{0.25, 0.0, 0.25}, 1.0});

  const Pose robot{0.2, 0.2, kPi};
  try {
    select_navigation_goal(mix, map, robot, sensor);
    FAIL("expected no reachable viewpoint");
  } catch (const Error& e) {
    CHECK(e.kind() == errkind::kNoReachableViewpoint);
  }
}
