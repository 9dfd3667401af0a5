#pragma once

// Indexed triangle shells and binary STL io. Shells are closed, consistently
// oriented surfaces; watertightness is checked by pairing directed edges.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace coev {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

struct Shell {
  std::string name;
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;  // outward CCW

  void add_vertex(const Vec3& v) { vertices.push_back(v); }
  void add_face(std::uint32_t a, std::uint32_t b, std::uint32_t c) { faces.push_back({a, b, c}); }
  void add_quad(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
    add_face(a, b, c);
    add_face(a, c, d);
  }
  void flip() {
    for (auto& f : faces) std::swap(f[1], f[2]);
  }
};

// A closed orientable surface uses every directed edge exactly once and
// contains the opposite of each. Degenerate faces fail the check.
inline bool is_watertight(const Shell& shell) {
  if (shell.faces.empty()) return false;
  std::unordered_map<std::uint64_t, int> edges;
  edges.reserve(shell.faces.size() * 3);
  const auto key = [](std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  };
  for (const auto& f : shell.faces) {
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) return false;
    for (int i = 0; i < 3; ++i) {
      if (f[static_cast<std::size_t>(i)] >= shell.vertices.size()) return false;
      const std::uint32_t a = f[static_cast<std::size_t>(i)];
      const std::uint32_t b = f[static_cast<std::size_t>((i + 1) % 3)];
      if (++edges[key(a, b)] > 1) return false;  // directed edge reused
    }
  }
  for (const auto& [k, count] : edges) {
    const auto a = static_cast<std::uint32_t>(k >> 32);
    const auto b = static_cast<std::uint32_t>(k & 0xFFFFFFFFu);
    const auto rev = edges.find(key(b, a));
    if (rev == edges.end() || rev->second != 1 || count != 1) return false;
  }
  return true;
}

// Signed enclosed volume via the divergence theorem; positive for outward
// orientation.
inline double signed_volume(const Shell& shell) {
  double six_v = 0.0;
  for (const auto& f : shell.faces) {
    const Vec3& a = shell.vertices[f[0]];
    const Vec3& b = shell.vertices[f[1]];
    const Vec3& c = shell.vertices[f[2]];
    six_v += dot(a, cross(b, c));
  }
  return six_v / 6.0;
}

inline double shell_volume(const Shell& shell) { return std::abs(signed_volume(shell)); }

inline double max_planar_radius(const Shell& shell) {
  double r = 0.0;
  for (const auto& v : shell.vertices) r = std::max(r, std::hypot(v.x, v.y));
  return r;
}

inline std::pair<double, double> z_extent(const Shell& shell) {
  if (shell.vertices.empty()) throw std::invalid_argument("z_extent of empty shell");
  double lo = shell.vertices.front().z, hi = lo;
  for (const auto& v : shell.vertices) {
    lo = std::min(lo, v.z);
    hi = std::max(hi, v.z);
  }
  return {lo, hi};
}

// -- binary STL ---------------------------------------------------------------

struct StlTriangle {
  std::array<float, 3> normal;
  std::array<std::array<float, 3>, 3> v;
};

// 80-byte header, uint32 triangle count, 50 bytes per triangle.
inline void write_stl(const std::string& path, const std::vector<Shell>& shells,
                      const std::string& label = "mesh") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write STL file: " + path);
  char header[80] = {};
  std::snprintf(header, sizeof(header), "%s", label.c_str());
  out.write(header, sizeof(header));
  std::uint64_t count = 0;
  for (const auto& s : shells) count += s.faces.size();
  if (count > 0xFFFFFFFFull) throw std::runtime_error("STL: too many triangles");
  const auto count32 = static_cast<std::uint32_t>(count);
  out.write(reinterpret_cast<const char*>(&count32), 4);
  const auto put_f32 = [&out](double v) {
    const float f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), 4);
  };
  for (const auto& s : shells) {
    for (const auto& f : s.faces) {
      const Vec3& a = s.vertices[f[0]];
      const Vec3& b = s.vertices[f[1]];
      const Vec3& c = s.vertices[f[2]];
      Vec3 n = cross(b - a, c - a);
      const double len = norm(n);
      if (len > 0.0) n = {n.x / len, n.y / len, n.z / len};
      put_f32(n.x);
      put_f32(n.y);
      put_f32(n.z);
      for (const Vec3* p : {&a, &b, &c}) {
        put_f32(p->x);
        put_f32(p->y);
        put_f32(p->z);
      }
      const std::uint16_t attr = 0;
      out.write(reinterpret_cast<const char*>(&attr), 2);
    }
  }
  if (!out) throw std::runtime_error("short write on STL file: " + path);
}

inline void write_stl(const std::string& path, const Shell& shell) {
  write_stl(path, std::vector<Shell>{shell}, shell.name);
}

inline std::vector<StlTriangle> read_stl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open STL file: " + path);
  char header[80];
  in.read(header, sizeof(header));
  std::uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in) throw std::runtime_error("truncated STL header: " + path);
  std::vector<StlTriangle> tris(count);
  for (auto& t : tris) {
    float buf[12];
    in.read(reinterpret_cast<char*>(buf), sizeof(buf));
    std::uint16_t attr;
    in.read(reinterpret_cast<char*>(&attr), 2);
    if (!in) throw std::runtime_error("truncated STL body: " + path);
    t.normal = {buf[0], buf[1], buf[2]};
    for (int v = 0; v < 3; ++v) {
      t.v[static_cast<std::size_t>(v)] = {buf[3 + 3 * v], buf[4 + 3 * v], buf[5 + 3 * v]};
    }
  }
  return tris;
}

}  // namespace coev
