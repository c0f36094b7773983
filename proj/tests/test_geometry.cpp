#include <doctest.h>

#include <stdexcept>

#include <random>

#include "icas/geometry.hpp"
#include "icas/parallel.hpp"

using namespace icas;

namespace {

constexpr double kLambda = kSpeedOfLight / 3.7e9;
constexpr double kOmega = 2.0 * kPi * 25.0;
constexpr double kBlade = 0.1655;

double range_rate_doppler(const BistaticGeometry &g, const Vec3 &v, double lambda) {
  constexpr double dt = 1e-6;
  auto path = [&](double t) {
    const Vec3 p = g.target + v * t;
    return norm(p - g.tx) + norm(p - g.rx);
  };
  return -(path(dt) - path(-dt)) / (2.0 * dt) / lambda;
}

} // namespace

TEST_CASE("bistatic angle of canonical placements") {
  CHECK(bistatic_angle({{-1, 0, 0}, {1, 0, 0}, {0, 0, 0}}) == doctest::Approx(kPi));
  CHECK(bistatic_angle({{0, 0, 3}, {0, 0, 3}, {0, 0, 0}}) == doctest::Approx(0.0));
  CHECK(bistatic_angle({{0, 3, 0}, {3, 0, 0}, {0, 0, 0}}) == doctest::Approx(kPi / 2));

  const BistaticGeometry g{{1, 2, 3}, {-4, 0.5, 2}, {0.3, -0.2, 0.1}};
  const BistaticGeometry swapped{g.rx, g.tx, g.target};
  CHECK(bistatic_angle(g) == doctest::Approx(bistatic_angle(swapped)).epsilon(1e-15));
}

TEST_CASE("geometry rejects coincident points") {
  CHECK_THROWS_AS(bistatic_angle({{0, 0, 0}, {1, 0, 0}, {0, 0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(BistaticGeometry({{0, 0, 1}, {0, 0, 0}, {0, 0, 0}}).validate(), std::invalid_argument);
}

TEST_CASE("bisector") {
  SUBCASE("monostatic points at the sensor") {
    const Vec3 b = bistatic_bisector({{0, 0, 3}, {0, 0, 3}, {0, 0, 0}});
    CHECK(b.z == doctest::Approx(1.0));
  }
  SUBCASE("symmetric legs about z") {
    const Vec3 b = bistatic_bisector({{-2, 0, 5}, {2, 0, 5}, {0, 0, 0}});
    CHECK(b.x == doctest::Approx(0.0));
    CHECK(b.z == doctest::Approx(1.0));
  }
  SUBCASE("equal angles to both legs") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 200; ++i) {
      const BistaticGeometry g{{u(gen), u(gen), u(gen)}, {u(gen), u(gen), u(gen)}, {0, 0, 0}};
      const Vec3 b = bistatic_bisector(g);
      CHECK(angle_between(b, g.tx) == doctest::Approx(angle_between(b, g.rx)).epsilon(1e-9));
    }
  }
  SUBCASE("forward scatter has no bisector") {
    CHECK_THROWS_AS(bistatic_bisector({{-1, 0, 0}, {1, 0, 0}, {0, 0, 0}}), std::domain_error);
  }
}

TEST_CASE("point Doppler") {
  const BistaticGeometry g{{-30, 5, -40}, {25, -3, -42}, {0.5, 0.2, 0.1}};
  CHECK(point_doppler(g, {0, 0, 0}, kLambda) == 0.0);
  CHECK(point_doppler({{-3, 0, 0}, {3, 0, 0}, {0, 0, 0}}, {4, -7, 2}, kLambda) == 0.0);

  SUBCASE("matches the range-rate oracle") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
      const BistaticGeometry gi{{40 * u(gen), 40 * u(gen), 40 * u(gen) - 60},
                                {40 * u(gen), 40 * u(gen), 40 * u(gen) - 60},
                                {u(gen), u(gen), u(gen)}};
      const Vec3 v{20 * u(gen), 20 * u(gen), 20 * u(gen)};
      const double oracle = range_rate_doppler(gi, v, kLambda);
      CHECK(point_doppler(gi, v, kLambda) == doctest::Approx(oracle).epsilon(1e-3));
    }
  }

  SUBCASE("monostatic reduces to -2|v| cos(phi) sin(theta) / lambda") {
    const BistaticGeometry mono{{0, 0, -50}, {0, 0, -50}, {0, 0, 0}};
    const Vec3 v{3, 4, 12};
    const auto a = aspect_angles(mono, v);
    const double expect = -2.0 * norm(v) * std::cos(a.phi) * std::sin(a.theta) / kLambda;
    CHECK(point_doppler(mono, v, kLambda) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(point_doppler(mono, {0, 0, 1}, kLambda) == doctest::Approx(-2.0 / kLambda).epsilon(1e-12));
  }
}

TEST_CASE("bisector frame is right-handed and orthonormal") {
  const BistaticGeometry g{{-30, 5, -40}, {25, -3, -42}, {0.5, 0.2, 0.1}};
  const auto f = bisector_frame(g);
  CHECK(dot(f.outward, f.in_plane) == doctest::Approx(0.0));
  CHECK(dot(f.outward, f.normal) == doctest::Approx(0.0));
  CHECK(norm(cross(f.normal, f.outward) - f.in_plane) == doctest::Approx(0.0));
  // Outward points away from the sensors.
  CHECK(dot(f.outward, g.tx - g.target) < 0.0);
}

TEST_CASE("propeller point Doppler") {
  CHECK(propeller_point_doppler(kOmega, 0.0, 0.3, 0.01, 1.0, 1.0, kLambda) == 0.0);
  const double fd = propeller_point_doppler(kOmega, kBlade, 0.0, 0.0, deg_to_rad(60.0), kPi / 2, kLambda);
  CHECK(fd < 0.0);
  CHECK(std::abs(fd) == doctest::Approx(555.4).epsilon(0.002));

  double peak = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double t = 0.04 * i / 20000.0;
    peak = std::max(peak, std::abs(propeller_point_doppler(kOmega, kBlade, 0.2, t, 1.1, 1.3, kLambda)));
  }
  const double expect = 2.0 * kOmega * kBlade * std::cos(0.55) * std::sin(1.3) / kLambda;
  CHECK(peak == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("micro-Doppler spread") {
  const double lambda = 0.08108;
  CHECK(micro_doppler_spread(kOmega, kBlade, deg_to_rad(60.0), kPi / 2, lambda) ==
        doctest::Approx(1110.8).epsilon(5e-4));
  CHECK(micro_doppler_spread(kOmega, kBlade, 0.0, kPi / 2, lambda) == doctest::Approx(1282.6).epsilon(5e-4));
  CHECK(micro_doppler_spread(kOmega, kBlade, kPi, kPi / 2, lambda) == doctest::Approx(0.0));
  double prev = INFINITY;
  for (int i = 0; i <= 180; ++i) {
    const double b = micro_doppler_spread(kOmega, kBlade, deg_to_rad(i), kPi / 2, kLambda);
    CHECK(b <= prev);
    prev = b;
  }
}

TEST_CASE("far-field distance") {
  CHECK(far_field_distance(4.0, 5.9e9) == doctest::Approx(629.77).epsilon(1e-4));
  CHECK(far_field_distance(0.0, 5.9e9) == 0.0);
  CHECK(far_field_distance(0.35, 3.7e9) == doctest::Approx(3.02).epsilon(2e-3));
  CHECK(far_field_distance(0.35, 7.4e9) == doctest::Approx(2.0 * far_field_distance(0.35, 3.7e9)));
  CHECK(far_field_distance(0.7, 3.7e9) == doctest::Approx(4.0 * far_field_distance(0.35, 3.7e9)));
}

TEST_CASE("mix_seed separates streams") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(5, 9) == mix_seed(5, 9));
}
