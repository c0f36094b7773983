#pragma once

#include <array>
#include <complex>
#include <string_view>
#include <vector>

#include "icas/geometry.hpp"

namespace icas {

using cd = std::complex<double>;

/// Polarization channel, transmit letter first then receive (HV = H tx, V rx).
enum class Pol { HH = 0, HV = 1, VH = 2, VV = 3 };

inline constexpr std::array<Pol, 4> kAllPols{Pol::HH, Pol::HV, Pol::VH, Pol::VV};

std::string_view to_string(Pol pol);
/// Accepts "HH", "hh", ... Throws std::invalid_argument otherwise.
Pol parse_pol(std::string_view text);

/// 2x2 scattering amplitudes indexed by polarization channel.
struct PolarimetricCoeff {
  std::array<cd, 4> m{};

  static PolarimetricCoeff scalar(cd value) { return {{value, 0.0, 0.0, value}}; }

  cd &operator[](Pol p) { return m[static_cast<std::size_t>(p)]; }
  const cd &operator[](Pol p) const { return m[static_cast<std::size_t>(p)]; }

  bool is_finite() const;
  bool is_reciprocal(double tol = 0.0) const { return std::abs(m[1] - m[2]) <= tol; }
  bool operator==(const PolarimetricCoeff &) const = default;
};

struct PointScatterer {
  Vec3 position;
  Vec3 velocity;
  PolarimetricCoeff coeff = PolarimetricCoeff::scalar(1.0);
};

/// Rigid rotor with n_blades straight blades discretized into points_per_blade
/// elements each. Element k sits at radius (k + 1/2) L / points_per_blade.
struct Propeller {
  Vec3 center;
  Vec3 axis{0.0, 0.0, 1.0};
  int n_blades{2};
  double radius_m{0.1655};
  double f_rot_hz{25.0};
  double phase0_rad{0.0};
  int points_per_blade{16};
  PolarimetricCoeff coeff = PolarimetricCoeff::scalar(1.0 / 16.0);

  double omega() const { return 2.0 * kPi * f_rot_hz; }
  double element_radius(int k) const { return (k + 0.5) * radius_m / points_per_blade; }
  void validate() const;
};

struct Scene {
  std::vector<PointScatterer> static_scatterers;
  std::vector<Propeller> propellers;
  /// Chamber clutter and coupling surrogates; never part of the target.
  std::vector<PointScatterer> background_scatterers;
  /// When set, every coefficient must satisfy HV == VH.
  bool reciprocal{false};

  bool empty() const {
    return static_scatterers.empty() && propellers.empty() && background_scatterers.empty();
  }
  void validate() const;
};

/// In-plane basis (e1, e2) of a rotor, with e2 = axis x e1.
std::array<Vec3, 2> rotor_basis(const Vec3 &axis);

/// Blade elements at time t. Blade b, element at radius l, sits at angle
/// phase0 + 2 pi b / n_blades + omega t from e1 and moves with velocity
/// omega * axis x r.
std::vector<PointScatterer> propeller_point_cloud(const Propeller &prop, double t);

/// Static scatterers (advanced along their velocity) plus all propeller clouds
/// at time t. Background scatterers are not included.
std::vector<PointScatterer> target_scatterers(const Scene &scene, double t);

/// Rotates target scatterers and propellers about the vertical axis through
/// `pivot` (turntable). Background scatterers stay fixed.
Scene rotate_target(const Scene &scene, double angle_rad, const Vec3 &pivot = {});

/// Two-sided micro-Doppler spread of one propeller seen from `geom` [Hz],
/// using sin(theta) = |axis x bisector|. Zero in the forward-scatter case.
double predicted_spread_hz(const Propeller &prop, const BistaticGeometry &geom, double wavelength);

/// |E_scat|^2 / |E_inc|^2.
double reflectivity(double e_scat_mag, double e_inc_mag);

/// 4 pi d_rx^2 |E_scat|^2 / |E_inc|^2 [m^2]. Valid only beyond the far-field distance.
double rcs_from_fields(double e_scat_mag, double e_inc_mag, double d_rx);

} // namespace icas
