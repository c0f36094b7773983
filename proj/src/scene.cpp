#include "icas/scene.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace icas {

std::string_view to_string(Pol pol) {
  switch (pol) {
  case Pol::HH: return "HH";
  case Pol::HV: return "HV";
  case Pol::VH: return "VH";
  case Pol::VV: return "VV";
  }
  return "??";
}

Pol parse_pol(std::string_view text) {
  std::string up(text);
  for (auto &c : up) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  for (Pol p : kAllPols) {
    if (up == to_string(p)) {
      return p;
    }
  }
  throw std::invalid_argument("unknown polarization '" + std::string(text) + "'");
}

bool PolarimetricCoeff::is_finite() const {
  for (const auto &v : m) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      return false;
    }
  }
  return true;
}

void Propeller::validate() const {
  if (!icas::is_finite(center)) {
    throw std::invalid_argument("propeller center must be finite");
  }
  if (std::abs(norm(axis) - 1.0) > 1e-9) {
    throw std::invalid_argument("propeller axis must be a unit vector");
  }
  if (n_blades < 1) {
    throw std::invalid_argument("propeller needs at least one blade");
  }
  if (!(radius_m > 0.0) || !std::isfinite(radius_m)) {
    throw std::invalid_argument("propeller radius must be > 0");
  }
  if (!(f_rot_hz >= 0.0) || !std::isfinite(f_rot_hz)) {
    throw std::invalid_argument("propeller rotation rate must be >= 0");
  }
  if (!std::isfinite(phase0_rad)) {
    throw std::invalid_argument("propeller phase must be finite");
  }
  if (points_per_blade < 1) {
    throw std::invalid_argument("propeller needs at least one point per blade");
  }
  if (!coeff.is_finite()) {
    throw std::invalid_argument("propeller coefficients must be finite");
  }
}

namespace {

void validate_points(const std::vector<PointScatterer> &points, bool reciprocal,
                     const char *what) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto &p = points[i];
    if (!is_finite(p.position) || !is_finite(p.velocity) || !p.coeff.is_finite()) {
      throw std::invalid_argument(std::string(what) + "[" + std::to_string(i) +
                                  "] has non-finite fields");
    }
    if (reciprocal && !p.coeff.is_reciprocal()) {
      throw std::invalid_argument(std::string(what) + "[" + std::to_string(i) +
                                  "] violates reciprocity (HV != VH)");
    }
  }
}

} // namespace

void Scene::validate() const {
  validate_points(static_scatterers, reciprocal, "static_scatterers");
  validate_points(background_scatterers, reciprocal, "background_scatterers");
  for (std::size_t i = 0; i < propellers.size(); ++i) {
    try {
      propellers[i].validate();
    } catch (const std::invalid_argument &e) {
      throw std::invalid_argument("propellers[" + std::to_string(i) + "]: " + e.what());
    }
    if (reciprocal && !propellers[i].coeff.is_reciprocal()) {
      throw std::invalid_argument("propellers[" + std::to_string(i) +
                                  "] violates reciprocity (HV != VH)");
    }
  }
}

std::array<Vec3, 2> rotor_basis(const Vec3 &axis) {
  const Vec3 a = normalized(axis);
  const Vec3 ref = std::abs(a.x) > 0.9 ? Vec3{0.0, 1.0, 0.0} : Vec3{1.0, 0.0, 0.0};
  const Vec3 e1 = normalized(ref - a * dot(ref, a));
  return {e1, cross(a, e1)};
}

std::vector<PointScatterer> propeller_point_cloud(const Propeller &prop, double t) {
  const auto [e1, e2] = rotor_basis(prop.axis);
  const double omega = prop.omega();
  std::vector<PointScatterer> cloud;
  cloud.reserve(static_cast<std::size_t>(prop.n_blades * prop.points_per_blade));
  for (int b = 0; b < prop.n_blades; ++b) {
    // Reduce the rotation angle modulo one turn so that t and t + 1/f_rot give
    // the same cloud to rounding.
    double turns = prop.f_rot_hz * t;
    turns -= std::floor(turns);
    const double angle = prop.phase0_rad + 2.0 * kPi * b / prop.n_blades + 2.0 * kPi * turns;
    const double c = std::cos(angle), s = std::sin(angle);
    const Vec3 radial = e1 * c + e2 * s;
    const Vec3 tangential = e2 * c - e1 * s;
    for (int k = 0; k < prop.points_per_blade; ++k) {
      const double l = prop.element_radius(k);
      cloud.push_back({prop.center + radial * l, tangential * (omega * l), prop.coeff});
    }
  }
  return cloud;
}

std::vector<PointScatterer> target_scatterers(const Scene &scene, double t) {
  std::vector<PointScatterer> out = scene.static_scatterers;
  for (auto &p : out) {
    p.position = p.position + p.velocity * t;
  }
  for (const auto &prop : scene.propellers) {
    auto cloud = propeller_point_cloud(prop, t);
    out.insert(out.end(), cloud.begin(), cloud.end());
  }
  return out;
}

Scene rotate_target(const Scene &scene, double angle_rad, const Vec3 &pivot) {
  const double c = std::cos(angle_rad), s = std::sin(angle_rad);
  auto rot = [&](const Vec3 &v) { return Vec3{c * v.x - s * v.y, s * v.x + c * v.y, v.z}; };
  Scene out = scene;
  for (auto &p : out.static_scatterers) {
    p.position = pivot + rot(p.position - pivot);
    p.velocity = rot(p.velocity);
  }
  for (auto &prop : out.propellers) {
    prop.center = pivot + rot(prop.center - pivot);
    // Keep the blade reference direction attached to the body.
    const auto before = rotor_basis(prop.axis);
    prop.axis = rot(prop.axis);
    const auto after = rotor_basis(prop.axis);
    const Vec3 turned = rot(before[0]);
    prop.phase0_rad += std::atan2(dot(turned, after[1]), dot(turned, after[0]));
  }
  return out;
}

double predicted_spread_hz(const Propeller &prop, const BistaticGeometry &geom, double wavelength) {
  const double beta = bistatic_angle(geom);
  if (beta >= kPi) {
    return 0.0;
  }
  const double sin_theta = std::min(1.0, norm(cross(normalized(prop.axis), bistatic_bisector(geom))));
  return micro_doppler_spread(prop.omega(), prop.radius_m, beta, std::asin(sin_theta), wavelength);
}

double reflectivity(double e_scat_mag, double e_inc_mag) {
  if (!(e_inc_mag > 0.0)) {
    throw std::invalid_argument("incident field magnitude must be > 0");
  }
  const double ratio = e_scat_mag / e_inc_mag;
  return ratio * ratio;
}

double rcs_from_fields(double e_scat_mag, double e_inc_mag, double d_rx) {
  if (!(d_rx > 0.0)) {
    throw std::invalid_argument("receive distance must be > 0");
  }
  return 4.0 * kPi * d_rx * d_rx * reflectivity(e_scat_mag, e_inc_mag);
}

} // namespace icas
