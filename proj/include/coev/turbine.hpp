#pragma once

// Compiles a turbine genome into printable geometry: three plates, a hollow
// shaft, and two stages of two blades. Each blade is the genome's profile
// curve thickened into a 1 mm ribbon and swept upwards while drifting by the
// z-offset curves and twisting linearly to r1; stage two repeats stage one
// rotated 90 degrees, and the second blade of a stage is the first rotated
// 180. Every shell is a closed, consistently wound triangle mesh, so
// watertightness and enclosed volume are well-defined.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "coev/mesh.hpp"
#include "coev/vawt.hpp"

namespace coev {

struct MeshResolution {
  int profile_samples = 24;  // per Bezier segment
  int height_steps = 16;     // sweep slices per blade
  int circle_segments = 96;  // plate/shaft discretisation

  static MeshResolution from_scalar(int r) {
    if (r < 2) throw std::invalid_argument("resolution scalar must be >= 2");
    MeshResolution res;
    res.profile_samples = r;
    res.height_steps = std::max(2, (2 * r) / 3);
    res.circle_segments = std::max(8, 4 * r);
    return res;
  }

  void validate() const {
    if (profile_samples < 1) throw std::invalid_argument("resolution: profile_samples >= 1");
    if (height_steps < 1) throw std::invalid_argument("resolution: height_steps >= 1");
    if (circle_segments < 3) throw std::invalid_argument("resolution: circle_segments >= 3");
  }
};

namespace mesh_detail {

inline constexpr double kPi = 3.14159265358979323846;

inline void orient_outward(Shell& shell) {
  if (signed_volume(shell) < 0.0) shell.flip();
}

// Closed prism over a simple polygon ring with fan caps (convex rings only).
inline Shell build_disc(const std::string& name, double radius, double z0, double z1,
                        int segments) {
  Shell s;
  s.name = name;
  const auto M = static_cast<std::uint32_t>(segments);
  for (int level = 0; level < 2; ++level) {
    const double z = level == 0 ? z0 : z1;
    for (std::uint32_t j = 0; j < M; ++j) {
      const double a = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(M);
      s.add_vertex({radius * std::cos(a), radius * std::sin(a), z});
    }
  }
  const auto v = [M](int level, std::uint32_t j) {
    return static_cast<std::uint32_t>(level) * M + (j % M);
  };
  for (std::uint32_t j = 0; j < M; ++j) {
    s.add_quad(v(0, j), v(0, j + 1), v(1, j + 1), v(1, j));
  }
  for (std::uint32_t j = 1; j + 1 < M; ++j) {
    s.add_face(v(0, 0), v(0, j + 1), v(0, j));  // bottom, facing -z
    s.add_face(v(1, 0), v(1, j), v(1, j + 1));  // top, facing +z
  }
  orient_outward(s);
  return s;
}

// Closed tube wall: annulus cross-section extruded from z0 to z1.
inline Shell build_tube(const std::string& name, double r_outer, double r_inner, double z0,
                        double z1, int segments) {
  if (r_inner <= 0.0 || r_inner >= r_outer) {
    throw std::invalid_argument("tube: need 0 < inner radius < outer radius");
  }
  Shell s;
  s.name = name;
  const auto M = static_cast<std::uint32_t>(segments);
  for (int level = 0; level < 2; ++level) {
    const double z = level == 0 ? z0 : z1;
    for (std::uint32_t j = 0; j < M; ++j) {
      const double a = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(M);
      s.add_vertex({r_outer * std::cos(a), r_outer * std::sin(a), z});
    }
    for (std::uint32_t j = 0; j < M; ++j) {
      const double a = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(M);
      s.add_vertex({r_inner * std::cos(a), r_inner * std::sin(a), z});
    }
  }
  const auto out = [M](int level, std::uint32_t j) {
    return static_cast<std::uint32_t>(level) * 2 * M + (j % M);
  };
  const auto in = [M](int level, std::uint32_t j) {
    return static_cast<std::uint32_t>(level) * 2 * M + M + (j % M);
  };
  for (std::uint32_t j = 0; j < M; ++j) {
    s.add_quad(out(0, j), out(0, j + 1), out(1, j + 1), out(1, j));  // outer wall
    s.add_quad(in(0, j + 1), in(0, j), in(1, j), in(1, j + 1));      // inner wall
    s.add_quad(out(0, j + 1), out(0, j), in(0, j), in(0, j + 1));    // bottom ring
    s.add_quad(out(1, j), out(1, j + 1), in(1, j + 1), in(1, j));    // top ring
  }
  orient_outward(s);
  return s;
}

// Thickens the centreline into a closed ribbon outline: left side seam-to-tip,
// then right side back. Throws on degenerate (zero-tangent) profiles.
inline std::vector<Vec2> ribbon_outline(const std::vector<Vec2>& centre, double thickness) {
  const std::size_t m = centre.size();
  if (m < 2) throw std::invalid_argument("blade profile needs at least two points");
  std::vector<Vec2> left(m), right(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = centre[i == 0 ? 0 : i - 1];
    const Vec2& b = centre[i + 1 == m ? m - 1 : i + 1];
    const double tx = b.x - a.x;
    const double ty = b.y - a.y;
    const double len = std::hypot(tx, ty);
    if (len < 1e-9) {
      throw std::invalid_argument("degenerate blade profile: coincident control points");
    }
    const double nx = -ty / len;
    const double ny = tx / len;
    const double h = 0.5 * thickness;
    left[i] = {centre[i].x + nx * h, centre[i].y + ny * h};
    right[i] = {centre[i].x - nx * h, centre[i].y - ny * h};
  }
  std::vector<Vec2> ring;
  ring.reserve(2 * m);
  for (std::size_t i = 0; i < m; ++i) ring.push_back(left[i]);
  for (std::size_t i = m; i-- > 0;) ring.push_back(right[i]);
  return ring;
}

// Sweeps the ribbon from z_bottom to z_top with drift and twist. The drift is
// applied to the profile first and the rotation second, so the validity check
// (centreline + drift inside the plate disc) is rotation-invariant.
inline Shell build_blade(const std::string& name, const VawtGenome& g, const MeshResolution& res,
                         double z_bottom, double z_top, double base_angle_deg) {
  const std::vector<Vec2> centre = sample_profile(g, res.profile_samples);
  const std::vector<Vec2> ring = ribbon_outline(centre, kBladeThickness);
  const std::size_t m = centre.size();        // centreline points
  const std::size_t R = ring.size();          // ring points = 2m
  const int H = res.height_steps;

  Shell s;
  s.name = name;
  for (int level = 0; level <= H; ++level) {
    const double t = static_cast<double>(level) / static_cast<double>(H);
    const Vec2 off = z_offset(g, t);
    for (std::size_t i = 0; i < m; ++i) {
      const double cx = centre[i].x + off.x;
      const double cy = centre[i].y + off.y;
      if (std::hypot(cx, cy) > kPlateRadius + 1e-9) {
        throw std::invalid_argument("blade centreline leaves the plate disc at height fraction " +
                                    std::to_string(t));
      }
    }
    const double ang = (base_angle_deg + twist_deg(g, t)) * kPi / 180.0;
    const double ca = std::cos(ang);
    const double sa = std::sin(ang);
    const double z = z_bottom + t * (z_top - z_bottom);
    for (std::size_t j = 0; j < R; ++j) {
      const double x = ring[j].x + off.x;
      const double y = ring[j].y + off.y;
      s.add_vertex({ca * x - sa * y, sa * x + ca * y, z});
    }
  }

  const auto v = [R](int level, std::size_t j) {
    return static_cast<std::uint32_t>(static_cast<std::size_t>(level) * R + (j % R));
  };
  for (int level = 0; level < H; ++level) {
    for (std::size_t j = 0; j < R; ++j) {
      s.add_quad(v(level, j), v(level, j + 1), v(level + 1, j + 1), v(level + 1, j));
    }
  }
  // caps: strip quads between the left chain (index i) and the right chain
  // (index 2m-1-i), valid for the non-convex ribbon outline
  const auto left = [](std::size_t i) { return i; };
  const auto right = [m](std::size_t i) { return 2 * m - 1 - i; };
  for (std::size_t i = 0; i + 1 < m; ++i) {
    s.add_quad(v(0, left(i + 1)), v(0, left(i)), v(0, right(i)), v(0, right(i + 1)));
    s.add_quad(v(H, left(i)), v(H, left(i + 1)), v(H, right(i + 1)), v(H, right(i)));
  }
  orient_outward(s);
  return s;
}

}  // namespace mesh_detail

struct Turbine {
  std::vector<Shell> shells;  // 3 plates, shaft, 4 blades
};

inline Turbine build_turbine(const VawtGenome& g, const MeshResolution& res = {}) {
  res.validate();
  validate_vawt(g);
  Turbine t;
  const double mid_lo = kTowerHeight / 2.0 - kPlateThickness / 2.0;
  const double mid_hi = kTowerHeight / 2.0 + kPlateThickness / 2.0;
  t.shells.push_back(mesh_detail::build_disc("plate_bottom", kPlateRadius, 0.0, kPlateThickness,
                                             res.circle_segments));
  t.shells.push_back(
      mesh_detail::build_disc("plate_mid", kPlateRadius, mid_lo, mid_hi, res.circle_segments));
  t.shells.push_back(mesh_detail::build_disc("plate_top", kPlateRadius,
                                             kTowerHeight - kPlateThickness, kTowerHeight,
                                             res.circle_segments));
  t.shells.push_back(mesh_detail::build_tube("shaft", kShaftOuterRadius, kShaftInnerRadius, 0.0,
                                             kTowerHeight, res.circle_segments));
  for (int stage = 0; stage < kStageCount; ++stage) {
    const double z0 = stage == 0 ? kPlateThickness : mid_hi;
    const double z1 = stage == 0 ? mid_lo : kTowerHeight - kPlateThickness;
    for (int blade = 0; blade < kBladesPerStage; ++blade) {
      const double angle = kStageRotationDeg * stage + 180.0 * blade;
      const std::string name =
          "blade_s" + std::to_string(stage + 1) + "_" + std::to_string(blade + 1);
      t.shells.push_back(mesh_detail::build_blade(name, g, res, z0, z1, angle));
    }
  }
  return t;
}

inline double turbine_volume_mm3(const Turbine& t) {
  double v = 0.0;
  for (const auto& s : t.shells) v += shell_volume(s);
  return v;
}

inline bool turbine_watertight(const Turbine& t) {
  for (const auto& s : t.shells) {
    if (!is_watertight(s)) return false;
  }
  return true;
}

}  // namespace coev
