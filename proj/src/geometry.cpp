#include "icas/geometry.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace icas {

namespace {

// Below this the two legs are treated as exactly antiparallel.
constexpr double kDegenerateSum = 1e-12;

struct Legs {
  Vec3 to_tx;
  Vec3 to_rx;
};

Legs unit_legs(const BistaticGeometry &geom) {
  geom.validate();
  return {normalized(geom.tx - geom.target), normalized(geom.rx - geom.target)};
}

void require_positive(double value, const char *what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be finite and > 0");
  }
}

} // namespace

Vec3 normalized(const Vec3 &v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("cannot normalize a zero or non-finite vector");
  }
  return v / n;
}

double angle_between(const Vec3 &a, const Vec3 &b) {
  // atan2 form stays accurate near 0 and pi where acos loses digits.
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

void BistaticGeometry::validate() const {
  if (!is_finite(tx) || !is_finite(rx) || !is_finite(target)) {
    throw std::invalid_argument("geometry positions must be finite");
  }
  if (!(range_tx() > 0.0)) {
    throw std::invalid_argument("degenerate geometry: target coincides with transmitter");
  }
  if (!(range_rx() > 0.0)) {
    throw std::invalid_argument("degenerate geometry: target coincides with receiver");
  }
}

double bistatic_angle(const BistaticGeometry &geom) {
  const auto legs = unit_legs(geom);
  return std::clamp(angle_between(legs.to_tx, legs.to_rx), 0.0, kPi);
}

Vec3 bistatic_bisector(const BistaticGeometry &geom) {
  const auto legs = unit_legs(geom);
  const Vec3 sum = legs.to_tx + legs.to_rx;
  if (norm(sum) < kDegenerateSum) {
    throw std::domain_error("bisector undefined for forward scattering (beta = pi)");
  }
  return normalized(sum);
}

BisectorFrame bisector_frame(const BistaticGeometry &geom) {
  const auto legs = unit_legs(geom);
  const Vec3 bisector = bistatic_bisector(geom);
  const Vec3 outward = -bisector;

  Vec3 normal = cross(legs.to_tx, legs.to_rx);
  if (norm(normal) < 1e-9) {
    // Monostatic: any normal works, pick the axis least aligned with the bisector.
    const double ax = std::abs(bisector.x), ay = std::abs(bisector.y), az = std::abs(bisector.z);
    Vec3 helper{0.0, 0.0, 1.0};
    if (ax <= ay && ax <= az) {
      helper = {1.0, 0.0, 0.0};
    } else if (ay <= az) {
      helper = {0.0, 1.0, 0.0};
    }
    normal = helper - outward * dot(helper, outward);
  }
  normal = normalized(normal);
  return {outward, cross(normal, outward), normal};
}

AspectAngles aspect_angles(const BistaticGeometry &geom, const Vec3 &velocity) {
  const auto frame = bisector_frame(geom);
  const double speed = norm(velocity);
  if (speed == 0.0) {
    return {};
  }
  const Vec3 dir = velocity / speed;
  const double theta = std::acos(std::clamp(dot(dir, frame.normal), -1.0, 1.0));
  const double phi = std::atan2(dot(dir, frame.in_plane), dot(dir, frame.outward));
  return {phi, theta};
}

double point_doppler(const BistaticGeometry &geom, const Vec3 &velocity, double wavelength) {
  require_positive(wavelength, "wavelength");
  if (!is_finite(velocity)) {
    throw std::invalid_argument("velocity must be finite");
  }
  const auto legs = unit_legs(geom);
  if (norm(legs.to_tx + legs.to_rx) < kDegenerateSum) {
    return 0.0;
  }
  const double beta = bistatic_angle(geom);
  const auto angles = aspect_angles(geom, velocity);
  return -2.0 * norm(velocity) * std::cos(beta / 2.0) * std::cos(angles.phi) *
         std::sin(angles.theta) / wavelength;
}

double propeller_point_doppler(double omega, double l, double phi0, double t, double beta,
                               double theta, double wavelength) {
  require_positive(wavelength, "wavelength");
  if (l < 0.0) {
    throw std::invalid_argument("blade radius must be >= 0");
  }
  return -2.0 * omega * l * std::cos(beta / 2.0) * std::cos(phi0 + omega * t) * std::sin(theta) /
         wavelength;
}

double micro_doppler_spread(double omega, double blade_length, double beta, double theta,
                            double wavelength) {
  require_positive(wavelength, "wavelength");
  if (blade_length < 0.0) {
    throw std::invalid_argument("blade length must be >= 0");
  }
  return 4.0 * omega * blade_length * std::cos(beta / 2.0) * std::sin(theta) / wavelength;
}

double wavelength_of(double frequency) {
  require_positive(frequency, "frequency");
  return kSpeedOfLight / frequency;
}

double far_field_distance(double aperture, double frequency) {
  if (aperture < 0.0 || !std::isfinite(aperture)) {
    throw std::invalid_argument("aperture must be finite and >= 0");
  }
  return 2.0 * aperture * aperture / wavelength_of(frequency);
}

} // namespace icas
