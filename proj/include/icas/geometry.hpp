#pragma once

#include <cmath>

namespace icas {

/// Speed of light in vacuum [m/s], SI exact.
inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Cartesian 3-vector. Positions in m, velocities in m/s.
struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  constexpr Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr bool operator==(const Vec3 &) const = default;
};

constexpr Vec3 operator*(double s, const Vec3 &v) { return v * s; }

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3 &v) { return std::sqrt(dot(v, v)); }

inline bool is_finite(const Vec3 &v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Unit vector along v. Throws std::invalid_argument for a zero or non-finite vector.
Vec3 normalized(const Vec3 &v);

/// Angle between two non-zero vectors, in [0, pi].
double angle_between(const Vec3 &a, const Vec3 &b);

/// Transmitter, receiver and target reference positions [m].
struct BistaticGeometry {
  Vec3 tx;
  Vec3 rx;
  Vec3 target;

  double range_tx() const { return norm(target - tx); }
  double range_rx() const { return norm(target - rx); }

  /// Throws std::invalid_argument if the target coincides with Tx or Rx or a
  /// coordinate is not finite.
  void validate() const;
};

/// Azimuth (phi) and elevation (theta) of a velocity in the bisector frame.
///
/// The frame is right-handed: e1 points along the outward bisector (away from
/// Tx and Rx), e3 is the normal of the bistatic plane (u_tx x u_rx), and
/// e2 = e3 x e1. theta is the polar angle from e3, phi the azimuth from e1 in
/// the e1-e2 plane. A velocity in the bistatic plane therefore has
/// theta = pi/2, and one moving straight away from the sensors has phi = 0.
/// With this frame the bistatic Doppler -2|v|cos(beta/2)cos(phi)sin(theta)/lambda
/// equals -(1/lambda) d(d_tx + d_rx)/dt.
struct AspectAngles {
  double phi{0.0};
  double theta{0.0};
};

struct BisectorFrame {
  Vec3 outward;  // e1
  Vec3 in_plane; // e2
  Vec3 normal;   // e3
};

/// Bistatic angle at the target between the target->Tx and target->Rx legs.
double bistatic_angle(const BistaticGeometry &geom);

/// Unit vector bisecting the target->Tx and target->Rx directions. Throws
/// std::domain_error when the legs are antiparallel (beta = pi).
Vec3 bistatic_bisector(const BistaticGeometry &geom);

/// Throws std::domain_error at beta = pi. For monostatic geometries the plane
/// normal is completed from the coordinate axis least aligned with the bisector.
BisectorFrame bisector_frame(const BistaticGeometry &geom);

AspectAngles aspect_angles(const BistaticGeometry &geom, const Vec3 &velocity);

/// Signed bistatic Doppler of a point moving with `velocity` [Hz]. Positive for
/// a closing bistatic range. Returns exactly 0 in the forward-scatter case.
double point_doppler(const BistaticGeometry &geom, const Vec3 &velocity, double wavelength);

/// Instantaneous Doppler [Hz] of a blade element at radius l on a propeller
/// turning at omega [rad/s].
double propeller_point_doppler(double omega, double l, double phi0, double t, double beta,
                               double theta, double wavelength);

/// Two-sided micro-Doppler spread [Hz] of a blade of length L.
double micro_doppler_spread(double omega, double blade_length, double beta, double theta,
                            double wavelength);

/// Far-field distance 2 D^2 / lambda [m].
double far_field_distance(double aperture, double frequency);

double wavelength_of(double frequency);

} // namespace icas
