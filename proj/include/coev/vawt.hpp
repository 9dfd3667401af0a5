#pragma once

// Vertical-axis wind turbine genome and its derived quantities.
//
// 17 real genes (see kVawtGeneNames): x1..y5 are five 2D blade profile
// control points (two joined quadratic Bezier segments in the plate plane,
// plate-centred coordinates); zx1/zx2/zy1/zy2 steer the lateral drift of the
// profile with height (cubic Bernstein bumps that vanish at both plate ends);
// z1/z2 are carried and mutated but not consumed by the current geometry;
// r1 is the per-stage twist in degrees.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coev/rng.hpp"

namespace coev {

// Fixed turbine construction constants (millimetres unless noted).
inline constexpr double kPlateRadius = 17.5;
inline constexpr double kPlateThickness = 1.0;
inline constexpr double kTowerHeight = 70.0;
inline constexpr double kBladeThickness = 1.0;
inline constexpr double kShaftInnerRadius = 0.5;   // 1 mm hollow diameter
inline constexpr double kShaftOuterRadius = 1.5;   // 1 mm wall around the hollow
inline constexpr int kStageCount = 2;
inline constexpr int kBladesPerStage = 2;
inline constexpr double kStageRotationDeg = 90.0;
inline constexpr double kMaxTwistDeg = 180.0;

inline constexpr int kVawtGeneCount = 17;
inline constexpr const char* kVawtGeneNames[kVawtGeneCount] = {
    "x1", "y1", "x2", "y2", "x3", "y3", "x4", "y4", "x5", "y5",
    "zx1", "zx2", "zy1", "zy2", "z1", "z2", "r1"};

struct VawtGenome {
  std::array<double, kVawtGeneCount> genes{};

  double px(int i) const { return genes[static_cast<std::size_t>(2 * i)]; }
  double py(int i) const { return genes[static_cast<std::size_t>(2 * i + 1)]; }
  double zx1() const { return genes[10]; }
  double zx2() const { return genes[11]; }
  double zy1() const { return genes[12]; }
  double zy2() const { return genes[13]; }
  double z1() const { return genes[14]; }
  double z2() const { return genes[15]; }
  double r1() const { return genes[16]; }
};

// The hand-designed starting turbine, in plate-centred coordinates.
inline VawtGenome seed_genome() {
  VawtGenome g;
  g.genes = {-2.4, -2.4, 4.6, -2.4, 8.2, -1.6, 14.6, -1.4, 14.6, 9.6,
             0.0,  0.0,  0.0, 0.0,  20.0, 27.2, 0.0};
  return g;
}

// Profile points must sit inside the plate disc; twist must be in [0, 180].
inline void validate_vawt(const VawtGenome& g, double eps = 1e-9) {
  for (int i = 0; i < 5; ++i) {
    const double r2 = g.px(i) * g.px(i) + g.py(i) * g.py(i);
    if (r2 > kPlateRadius * kPlateRadius + eps) {
      throw std::invalid_argument("vawt: profile point " + std::to_string(i + 1) +
                                  " lies outside the plate disc");
    }
  }
  if (g.r1() < -eps || g.r1() > kMaxTwistDeg + eps) {
    throw std::invalid_argument("vawt: twist r1 outside [0, 180] degrees");
  }
  for (const double v : g.genes) {
    if (!std::isfinite(v)) throw std::invalid_argument("vawt: non-finite gene");
  }
}

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline Vec2 quad_bezier(const Vec2& a, const Vec2& b, const Vec2& c, double t) {
  const double u = 1.0 - t;
  return {u * u * a.x + 2.0 * u * t * b.x + t * t * c.x,
          u * u * a.y + 2.0 * u * t * b.y + t * t * c.y};
}

inline Vec2 profile_control(const VawtGenome& g, int i) { return {g.px(i), g.py(i)}; }

// Blade centreline: segment 1 spans control points 1-2-3, segment 2 spans
// 3-4-5, sampled seam-to-tip as one polyline of 2*per_segment+1 points.
inline std::vector<Vec2> sample_profile(const VawtGenome& g, int per_segment) {
  if (per_segment < 1) throw std::invalid_argument("vawt: need at least one sample per segment");
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(2 * per_segment + 1));
  const Vec2 p1 = profile_control(g, 0), p2 = profile_control(g, 1), p3 = profile_control(g, 2),
             p4 = profile_control(g, 3), p5 = profile_control(g, 4);
  for (int i = 0; i <= per_segment; ++i) {
    pts.push_back(quad_bezier(p1, p2, p3, static_cast<double>(i) / per_segment));
  }
  for (int i = 1; i <= per_segment; ++i) {
    pts.push_back(quad_bezier(p3, p4, p5, static_cast<double>(i) / per_segment));
  }
  return pts;
}

// Lateral drift of the whole profile at stage-height fraction t in [0,1]:
// a cubic Bernstein bump per axis that is exactly zero at both plate ends.
inline Vec2 z_offset(const VawtGenome& g, double t) {
  const double u = 1.0 - t;
  const double b1 = 3.0 * u * u * t;
  const double b2 = 3.0 * u * t * t;
  return {b1 * g.zx1() + b2 * g.zx2(), b1 * g.zy1() + b2 * g.zy2()};
}

inline double twist_deg(const VawtGenome& g, double t) { return g.r1() * t; }

// Gaussian creep mutation: each gene perturbed with probability mu; profile
// and offset genes use sigma_coord (mm), the twist gene uses sigma_twist
// (degrees). Afterwards profile points are radially projected back into the
// plate disc, offsets are clamped to +-plate radius, the unused heights to
// [0, tower height], and the twist to [0, 180].
inline VawtGenome mutate_vawt(const VawtGenome& genome, double mu, double sigma_coord,
                              double sigma_twist, Rng& rng) {
  VawtGenome g = genome;
  for (int i = 0; i < kVawtGeneCount; ++i) {
    if (!rng.bernoulli(mu)) continue;
    const double sigma = (i == 16) ? sigma_twist : sigma_coord;
    g.genes[static_cast<std::size_t>(i)] += rng.gaussian() * sigma;
  }
  for (int p = 0; p < 5; ++p) {
    double& x = g.genes[static_cast<std::size_t>(2 * p)];
    double& y = g.genes[static_cast<std::size_t>(2 * p + 1)];
    const double r = std::hypot(x, y);
    if (r > kPlateRadius) {
      const double scale = kPlateRadius / r;
      x *= scale;
      y *= scale;
    }
  }
  for (int i = 10; i < 14; ++i) {
    double& v = g.genes[static_cast<std::size_t>(i)];
    v = std::min(kPlateRadius, std::max(-kPlateRadius, v));
  }
  for (int i = 14; i < 16; ++i) {
    double& v = g.genes[static_cast<std::size_t>(i)];
    v = std::min(kTowerHeight, std::max(0.0, v));
  }
  g.genes[16] = std::min(kMaxTwistDeg, std::max(0.0, g.genes[16]));
  return g;
}

inline VawtGenome crossover_vawt(const VawtGenome& a, const VawtGenome& b, Rng& rng) {
  VawtGenome child;
  for (int i = 0; i < kVawtGeneCount; ++i) {
    child.genes[static_cast<std::size_t>(i)] =
        rng.bernoulli(0.5) ? a.genes[static_cast<std::size_t>(i)]
                           : b.genes[static_cast<std::size_t>(i)];
  }
  return child;
}

// Bounds-normalised encoding onto [0,1]^17 for the surrogate inputs.
inline void encode_vawt(const VawtGenome& g, std::span<double> out) {
  if (out.size() < static_cast<std::size_t>(kVawtGeneCount)) {
    throw std::invalid_argument("encode_vawt: output too small");
  }
  for (int i = 0; i < 14; ++i) {
    out[static_cast<std::size_t>(i)] =
        (g.genes[static_cast<std::size_t>(i)] + kPlateRadius) / (2.0 * kPlateRadius);
  }
  out[14] = g.genes[14] / kTowerHeight;
  out[15] = g.genes[15] / kTowerHeight;
  out[16] = g.genes[16] / kMaxTwistDeg;
}

// -- genome CSV ---------------------------------------------------------------

inline std::string genomes_csv(std::span<const VawtGenome> genomes) {
  std::string out;
  for (int i = 0; i < kVawtGeneCount; ++i) {
    if (i) out += ',';
    out += kVawtGeneNames[i];
  }
  out += '\n';
  char buf[40];
  for (const auto& g : genomes) {
    for (int i = 0; i < kVawtGeneCount; ++i) {
      if (i) out += ',';
      std::snprintf(buf, sizeof(buf), "%.17g", g.genes[static_cast<std::size_t>(i)]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline std::vector<VawtGenome> parse_genomes_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("genome csv: empty input");
  {
    std::string expected;
    for (int i = 0; i < kVawtGeneCount; ++i) {
      if (i) expected += ',';
      expected += kVawtGeneNames[i];
    }
    std::string got = line;
    if (!got.empty() && got.back() == '\r') got.pop_back();
    if (got != expected) {
      throw std::runtime_error("genome csv: bad header, expected '" + expected + "'");
    }
  }
  std::vector<VawtGenome> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    VawtGenome g;
    for (int i = 0; i < kVawtGeneCount; ++i) {
      if (!std::getline(row, field, ',')) {
        throw std::runtime_error("genome csv line " + std::to_string(line_no) +
                                 ": expected 17 fields");
      }
      try {
        std::size_t pos = 0;
        g.genes[static_cast<std::size_t>(i)] = std::stod(field, &pos);
        if (pos != field.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw std::runtime_error("genome csv line " + std::to_string(line_no) + ": field '" +
                                 kVawtGeneNames[i] + "' is not a number: '" + field + "'");
      }
    }
    if (std::getline(row, field, ',')) {
      throw std::runtime_error("genome csv line " + std::to_string(line_no) +
                               ": too many fields");
    }
    out.push_back(g);
  }
  return out;
}

// -- measurements and fitness ---------------------------------------------------

struct Measurement {
  int species = 0;             // 1-based
  long long individual = 0;
  double rpm = 0.0;
  double mass_kg = 0.0;
  double radius_m = kPlateRadius / 1000.0;
};

// Solid-cylinder model: I = m r^2 / 2, omega = rpm * 2*pi / 60, E = I omega^2 / 2.
inline double kinetic_energy_j(const Measurement& m) {
  if (!std::isfinite(m.rpm) || m.rpm < 0.0) {
    throw std::invalid_argument("measurement: rpm must be finite and >= 0");
  }
  if (!std::isfinite(m.mass_kg) || m.mass_kg <= 0.0) {
    throw std::invalid_argument("measurement: mass must be > 0");
  }
  if (!std::isfinite(m.radius_m) || m.radius_m <= 0.0) {
    throw std::invalid_argument("measurement: radius must be > 0");
  }
  const double omega = m.rpm * 2.0 * 3.14159265358979323846 / 60.0;
  const double inertia = 0.5 * m.mass_kg * m.radius_m * m.radius_m;
  return 0.5 * inertia * omega * omega;
}

// Team fitness of one evaluation round: the summed kinetic energy of the
// S turbines, one measurement per species (species 1..S all present).
inline double array_fitness(std::span<const Measurement> ms, int species_count) {
  std::vector<bool> seen(static_cast<std::size_t>(species_count), false);
  double total = 0.0;
  for (const auto& m : ms) {
    if (m.species < 1 || m.species > species_count) {
      throw std::invalid_argument("measurement: species " + std::to_string(m.species) +
                                  " outside 1.." + std::to_string(species_count));
    }
    if (seen[static_cast<std::size_t>(m.species - 1)]) {
      throw std::invalid_argument("measurement: duplicate species " + std::to_string(m.species));
    }
    seen[static_cast<std::size_t>(m.species - 1)] = true;
    total += kinetic_energy_j(m);
  }
  for (int s = 0; s < species_count; ++s) {
    if (!seen[static_cast<std::size_t>(s)]) {
      throw std::invalid_argument("measurement: missing species " + std::to_string(s + 1));
    }
  }
  return total;
}

// Domain plugged into the coevolution engine; seeded initialisation.
struct VawtDomain {
  using Genome = VawtGenome;

  double sigma_coord = 3.6;
  double sigma_twist = 18.0;
  std::optional<Genome> seed = seed_genome();

  Genome random(Rng& rng) const {
    Genome base = seed.has_value() ? *seed : seed_genome();
    return mutate_vawt(base, 1.0, sigma_coord, sigma_twist, rng);
  }
  void mutate(Genome& g, double mu, Rng& rng) const {
    g = mutate_vawt(g, mu, sigma_coord, sigma_twist, rng);
  }
  Genome crossover(const Genome& a, const Genome& b, Rng& rng) const {
    return crossover_vawt(a, b, rng);
  }
  void encode(const Genome& g, std::span<double> out) const { encode_vawt(g, out); }
  int width() const { return kVawtGeneCount; }
};

}  // namespace coev
