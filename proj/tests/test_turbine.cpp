#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include <coev/turbine.hpp>

using namespace coev;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Shell unit_cube() {
  Shell s;
  s.name = "cube";
  s.add_vertex({0, 0, 0});
  s.add_vertex({1, 0, 0});
  s.add_vertex({1, 1, 0});
  s.add_vertex({0, 1, 0});
  s.add_vertex({0, 0, 1});
  s.add_vertex({1, 0, 1});
  s.add_vertex({1, 1, 1});
  s.add_vertex({0, 1, 1});
  s.add_quad(0, 3, 2, 1);  // bottom
  s.add_quad(4, 5, 6, 7);  // top
  s.add_quad(0, 1, 5, 4);  // front
  s.add_quad(1, 2, 6, 5);  // right
  s.add_quad(2, 3, 7, 6);  // back
  s.add_quad(3, 0, 4, 7);  // left
  return s;
}

const Shell& shell_named(const Turbine& t, const std::string& name) {
  for (const auto& s : t.shells) {
    if (s.name == name) return s;
  }
  FAIL("no shell named " + name);
  return t.shells.front();
}

std::string temp_path(const char* stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

}  // namespace

TEST_CASE("watertightness pairs every directed edge exactly once") {
  Shell cube = unit_cube();
  CHECK(is_watertight(cube));
  CHECK_THAT(signed_volume(cube), WithinAbs(1.0, 1e-15));
  cube.flip();
  CHECK(is_watertight(cube));
  CHECK_THAT(signed_volume(cube), WithinAbs(-1.0, 1e-15));
  CHECK_THAT(shell_volume(cube), WithinAbs(1.0, 1e-15));

  Shell open = unit_cube();
  open.faces.pop_back();  // puncture
  CHECK_FALSE(is_watertight(open));

  Shell doubled = unit_cube();
  doubled.faces.push_back(doubled.faces.front());  // reused directed edges
  CHECK_FALSE(is_watertight(doubled));

  Shell lone;
  lone.add_vertex({0, 0, 0});
  lone.add_vertex({1, 0, 0});
  lone.add_vertex({0, 1, 0});
  lone.add_face(0, 1, 2);
  CHECK_FALSE(is_watertight(lone));
  Shell empty;
  CHECK_FALSE(is_watertight(empty));
}

TEST_CASE("resolution scaling derives sweep and circle density from one knob") {
  const MeshResolution r = MeshResolution::from_scalar(24);
  CHECK(r.profile_samples == 24);
  CHECK(r.height_steps == 16);
  CHECK(r.circle_segments == 96);
  const MeshResolution tiny = MeshResolution::from_scalar(2);
  CHECK(tiny.profile_samples == 2);
  CHECK(tiny.height_steps == 2);
  CHECK(tiny.circle_segments == 8);
  CHECK_THROWS_AS(MeshResolution::from_scalar(1), std::invalid_argument);
  MeshResolution bad;
  bad.circle_segments = 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("the seed genome compiles to eight watertight shells in the envelope") {
  const Turbine t = build_turbine(seed_genome(), MeshResolution::from_scalar(8));
  REQUIRE(t.shells.size() == 8);
  CHECK(t.shells[0].name == "plate_bottom");
  CHECK(t.shells[1].name == "plate_mid");
  CHECK(t.shells[2].name == "plate_top");
  CHECK(t.shells[3].name == "shaft");
  CHECK(t.shells[4].name == "blade_s1_1");
  CHECK(t.shells[5].name == "blade_s1_2");
  CHECK(t.shells[6].name == "blade_s2_1");
  CHECK(t.shells[7].name == "blade_s2_2");
  CHECK(turbine_watertight(t));
  for (const auto& s : t.shells) {
    CHECK(is_watertight(s));
    CHECK(shell_volume(s) > 0.0);
    const auto [lo, hi] = z_extent(s);
    CHECK(lo >= -1e-9);
    CHECK(hi <= kTowerHeight + 1e-9);
    // a 1 mm ribbon can overhang the disc rim by at most half its width
    CHECK(max_planar_radius(s) <= 18.0);
  }
  const auto [b_lo, b_hi] = z_extent(t.shells[0]);
  CHECK_THAT(b_lo, WithinAbs(0.0, 1e-12));
  CHECK_THAT(b_hi, WithinAbs(kPlateThickness, 1e-12));
  const auto [t_lo, t_hi] = z_extent(t.shells[2]);
  CHECK_THAT(t_lo, WithinAbs(kTowerHeight - kPlateThickness, 1e-12));
  CHECK_THAT(t_hi, WithinAbs(kTowerHeight, 1e-12));
  const auto [s_lo, s_hi] = z_extent(t.shells[3]);
  CHECK_THAT(s_lo, WithinAbs(0.0, 1e-12));
  CHECK_THAT(s_hi, WithinAbs(kTowerHeight, 1e-12));
  const auto [b1_lo, b1_hi] = z_extent(t.shells[4]);
  CHECK_THAT(b1_lo, WithinAbs(kPlateThickness, 1e-12));
  CHECK_THAT(b1_hi, WithinAbs(kTowerHeight / 2.0 - kPlateThickness / 2.0, 1e-12));
  const auto [b3_lo, b3_hi] = z_extent(t.shells[6]);
  CHECK_THAT(b3_lo, WithinAbs(kTowerHeight / 2.0 + kPlateThickness / 2.0, 1e-12));
  CHECK_THAT(b3_hi, WithinAbs(kTowerHeight - kPlateThickness, 1e-12));
  CHECK_THAT(max_planar_radius(t.shells[0]), WithinAbs(kPlateRadius, 1e-12));
  CHECK(turbine_volume_mm3(t) > 0.0);
}

TEST_CASE("plate and shaft volumes match the closed-form prism formulas") {
  MeshResolution res;
  res.profile_samples = 4;
  res.height_steps = 2;
  res.circle_segments = 24;
  const Turbine t = build_turbine(seed_genome(), res);
  // inscribed 24-gon prism: A = M/2 sin(2 pi / M) r^2, height 1 mm
  CHECK_THAT(shell_volume(shell_named(t, "plate_mid")), WithinRel(951.15999075176364, 1e-9));
  // annular prism between outer 1.5 mm and inner 0.5 mm rings, height 70 mm
  CHECK_THAT(shell_volume(shell_named(t, "shaft")), WithinRel(434.81599577223483, 1e-9));
}

TEST_CASE("a straight untwisted blade is a rectangular slab of exact volume") {
  VawtGenome g = seed_genome();
  const double xs[5] = {0.0, 2.0, 4.0, 6.0, 8.0};
  for (int p = 0; p < 5; ++p) {
    g.genes[static_cast<std::size_t>(2 * p)] = xs[p];
    g.genes[static_cast<std::size_t>(2 * p + 1)] = 0.0;
  }
  g.genes[16] = 0.0;
  MeshResolution res;
  res.profile_samples = 4;
  res.height_steps = 4;
  res.circle_segments = 8;
  const Turbine t = build_turbine(g, res);
  // collinear control points sample to a straight 8 mm centreline; the 1 mm
  // ribbon swept over the 33.5 mm stage is an 8 x 1 x 33.5 box
  CHECK_THAT(shell_volume(shell_named(t, "blade_s1_1")), WithinRel(268.0, 1e-12));
  CHECK_THAT(shell_volume(shell_named(t, "blade_s2_2")), WithinRel(268.0, 1e-12));

  // twisting the sweep barely changes the enclosed volume at fine slicing
  g.genes[16] = 45.0;
  res.height_steps = 32;
  const Turbine tw = build_turbine(g, res);
  CHECK_THAT(shell_volume(shell_named(tw, "blade_s1_1")), WithinRel(268.0, 0.01));
}

TEST_CASE("blades are rotated copies of each other") {
  const Turbine t = build_turbine(seed_genome(), MeshResolution::from_scalar(6));
  const Shell& b11 = shell_named(t, "blade_s1_1");
  const Shell& b12 = shell_named(t, "blade_s1_2");
  const Shell& b21 = shell_named(t, "blade_s2_1");
  REQUIRE(b12.vertices.size() == b11.vertices.size());
  REQUIRE(b21.vertices.size() == b11.vertices.size());
  CHECK(b12.faces == b11.faces);
  CHECK(b21.faces == b11.faces);
  for (std::size_t i = 0; i < b11.vertices.size(); ++i) {
    // second blade of the stage: half-turn about the tower axis
    CHECK_THAT(b12.vertices[i].x, WithinAbs(-b11.vertices[i].x, 1e-12));
    CHECK_THAT(b12.vertices[i].y, WithinAbs(-b11.vertices[i].y, 1e-12));
    CHECK(b12.vertices[i].z == b11.vertices[i].z);
    // second stage: quarter turn and one stage higher
    CHECK_THAT(b21.vertices[i].x, WithinAbs(-b11.vertices[i].y, 1e-12));
    CHECK_THAT(b21.vertices[i].y, WithinAbs(b11.vertices[i].x, 1e-12));
    CHECK_THAT(b21.vertices[i].z, WithinAbs(b11.vertices[i].z + 34.5, 1e-12));
  }
}

TEST_CASE("degenerate and escaping blade profiles are rejected with diagnostics") {
  VawtGenome flat = seed_genome();
  for (int p = 0; p < 5; ++p) {
    flat.genes[static_cast<std::size_t>(2 * p)] = 1.0;
    flat.genes[static_cast<std::size_t>(2 * p + 1)] = 0.0;
  }
  CHECK_THROWS_MATCHES(build_turbine(flat, MeshResolution::from_scalar(4)), std::invalid_argument,
                       Catch::Matchers::MessageMatches(ContainsSubstring("coincident control points")));

  VawtGenome drift = seed_genome();
  drift.genes[10] = 17.0;  // zx1: mid-height drift pushes the rim point outside
  CHECK_THROWS_MATCHES(build_turbine(drift, MeshResolution::from_scalar(8)), std::invalid_argument,
                       Catch::Matchers::MessageMatches(ContainsSubstring("leaves the plate disc")));
}

TEST_CASE("binary stl files round-trip the triangle soup") {
  Shell tri;
  tri.name = "tri";
  tri.add_vertex({0.0, 0.0, 0.0});
  tri.add_vertex({1.0, 0.0, 0.0});
  tri.add_vertex({0.0, 1.0, 0.0});
  tri.add_face(0, 1, 2);
  const std::string path = temp_path("coev_test_tri.stl");
  write_stl(path, tri);
  CHECK(std::filesystem::file_size(path) == 84 + 50);
  const auto tris = read_stl(path);
  REQUIRE(tris.size() == 1);
  CHECK(tris[0].v[0][0] == 0.0f);
  CHECK(tris[0].v[1][0] == 1.0f);
  CHECK(tris[0].v[2][1] == 1.0f);
  CHECK_THAT(tris[0].normal[2], WithinAbs(1.0f, 1e-6f));
  std::remove(path.c_str());

  const Turbine t = build_turbine(seed_genome(), MeshResolution::from_scalar(4));
  std::size_t total = 0;
  for (const auto& s : t.shells) total += s.faces.size();
  const std::string tp = temp_path("coev_test_turbine.stl");
  write_stl(tp, t.shells, "turbine");
  CHECK(std::filesystem::file_size(tp) == 84 + 50 * total);
  CHECK(read_stl(tp).size() == total);
  std::remove(tp.c_str());

  CHECK_THROWS_AS(read_stl(temp_path("coev_missing.stl")), std::runtime_error);
}
