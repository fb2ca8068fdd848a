#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <unordered_map>
#include <vector>

#include "planerecon/mask_ops.hpp"
#include "planerecon/sampling.hpp"
#include "planerecon/sdf.hpp"

namespace planerecon {

/// Closed triangle surface with an optional per-vertex scalar channel.
struct SurfaceMesh {
  std::vector<Vec3d> vertices;                 // world mm
  std::vector<std::array<int, 3>> triangles;   // outward-oriented
  std::vector<double> quality;                 // per-vertex channel, may be empty

  /// Enclosed volume via the divergence theorem; positive for outward
  /// orientation.
  double volume() const {
    double v = 0;
    for (const auto& t : triangles)
      v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]]));
    return v / 6.0;
  }

  int euler_characteristic() const {
    std::set<std::pair<int, int>> edges;
    for (const auto& t : triangles)
      for (int e = 0; e < 3; ++e) {
        int a = t[e], b = t[(e + 1) % 3];
        edges.insert({std::min(a, b), std::max(a, b)});
      }
    return int(vertices.size()) - int(edges.size()) + int(triangles.size());
  }
};

namespace detail {

/// Isosurface of a scalar grid by marching tetrahedra on the 6-tet cube
/// split sharing the main diagonal; the split matches across neighboring
/// cubes, so the surface is watertight. Triangles are oriented along the
/// local field gradient (toward larger values).
inline SurfaceMesh marching_tetrahedra(const Grid3<float>& field, float iso) {
  SurfaceMesh mesh;
  std::unordered_map<std::uint64_t, int> edge_vertex;

  auto corner_id = [&](int i, int j, int k) -> std::uint64_t {
    return std::uint64_t(i) + std::uint64_t(field.nx) * (std::uint64_t(j) + std::uint64_t(field.ny) * std::uint64_t(k));
  };

  const int cube[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                          {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  const int tets[6][4] = {{0, 1, 2, 6}, {0, 2, 3, 6}, {0, 3, 7, 6},
                          {0, 7, 4, 6}, {0, 4, 5, 6}, {0, 5, 1, 6}};

  // canonical cut: always interpolate from the lower corner id so shared
  // edges yield one identical vertex
  auto cut = [&](std::uint64_t ida, const Vec3d& pa, double da, std::uint64_t idb,
                 const Vec3d& pb, double db) -> int {
    const Vec3d *p0 = &pa, *p1 = &pb;
    double d0 = da, d1 = db;
    std::uint64_t k0 = ida, k1 = idb;
    if (k0 > k1) {
      std::swap(k0, k1);
      std::swap(p0, p1);
      std::swap(d0, d1);
    }
    std::uint64_t key = (k0 << 32) | k1;  // corner ids stay far below 2^32
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    double t = d0 / (d0 - d1);
    int idx = int(mesh.vertices.size());
    mesh.vertices.push_back(*p0 + (*p1 - *p0) * t);
    edge_vertex.emplace(key, idx);
    return idx;
  };

  for (int k = 0; k + 1 < field.nz; ++k)
    for (int j = 0; j + 1 < field.ny; ++j)
      for (int i = 0; i + 1 < field.nx; ++i) {
        double val[8];
        Vec3d pos[8];
        std::uint64_t id[8];
        bool any_in = false, any_out = false;
        for (int c = 0; c < 8; ++c) {
          int ci = i + cube[c][0], cj = j + cube[c][1], ck = k + cube[c][2];
          val[c] = double(field.at(ci, cj, ck)) - iso;
          pos[c] = field.voxel_to_world(ci, cj, ck);
          id[c] = corner_id(ci, cj, ck);
          (val[c] < 0 ? any_in : any_out) = true;
        }
        if (!any_in || !any_out) continue;

        for (const auto& tet : tets) {
          int a = tet[0], b = tet[1], c = tet[2], d = tet[3];
          bool ia = val[a] < 0, ib = val[b] < 0, ic = val[c] < 0, idn = val[d] < 0;
          int n_in = ia + ib + ic + idn;
          if (n_in == 0 || n_in == 4) continue;

          // linear gradient over the tet for outward orientation
          Vec3d e1 = pos[b] - pos[a], e2 = pos[c] - pos[a], e3 = pos[d] - pos[a];
          double det = det3(e1, e2, e3);
          Vec3d grad{0, 0, 0};
          if (std::abs(det) > 1e-18) {
            Vec3d rhs{val[b] - val[a], val[c] - val[a], val[d] - val[a]};
            grad = (e2.cross(e3) * rhs.x + e3.cross(e1) * rhs.y + e1.cross(e2) * rhs.z) / det;
          }

          auto emit = [&](int v0, int v1, int v2) {
            Vec3d n = (mesh.vertices[v1] - mesh.vertices[v0])
                          .cross(mesh.vertices[v2] - mesh.vertices[v0]);
            if (n.dot(grad) < 0) std::swap(v1, v2);
            mesh.triangles.push_back({v0, v1, v2});
          };

          int vin[4], vout[4], ni = 0, no = 0;
          int corners[4] = {a, b, c, d};
          for (int cc : corners) (val[cc] < 0 ? vin[ni++] : vout[no++]) = cc;

          if (n_in == 1) {
            int p = vin[0];
            int u0 = cut(id[p], pos[p], val[p], id[vout[0]], pos[vout[0]], val[vout[0]]);
            int u1 = cut(id[p], pos[p], val[p], id[vout[1]], pos[vout[1]], val[vout[1]]);
            int u2 = cut(id[p], pos[p], val[p], id[vout[2]], pos[vout[2]], val[vout[2]]);
            emit(u0, u1, u2);
          } else if (n_in == 3) {
            int p = vout[0];
            int u0 = cut(id[p], pos[p], val[p], id[vin[0]], pos[vin[0]], val[vin[0]]);
            int u1 = cut(id[p], pos[p], val[p], id[vin[1]], pos[vin[1]], val[vin[1]]);
            int u2 = cut(id[p], pos[p], val[p], id[vin[2]], pos[vin[2]], val[vin[2]]);
            emit(u0, u1, u2);
          } else {  // two in, two out: a quad from the four cut edges
            int p0 = vin[0], p1 = vin[1], q0 = vout[0], q1 = vout[1];
            int u00 = cut(id[p0], pos[p0], val[p0], id[q0], pos[q0], val[q0]);
            int u01 = cut(id[p0], pos[p0], val[p0], id[q1], pos[q1], val[q1]);
            int u10 = cut(id[p1], pos[p1], val[p1], id[q0], pos[q0], val[q0]);
            int u11 = cut(id[p1], pos[p1], val[p1], id[q1], pos[q1], val[q1]);
            emit(u00, u01, u11);
            emit(u00, u11, u10);
          }
        }
      }
  return mesh;
}

}  // namespace detail

/// Isosurface of the label volume through its signed distance field.
/// Multiple components are reduced to the largest one with a note.
inline SurfaceMesh extract_mesh(const LabelVolume& labels_in) {
  LabelVolume labels = labels_in;
  size_t dropped = keep_largest_component(labels);
  if (dropped > 0)
    std::cerr << "[planerecon] note: extract_mesh kept the largest of multiple components ("
              << dropped << " voxels dropped)\n";
  if (count_foreground(labels) == 0) throw EmptyShapeError("extract_mesh: empty labels");
  Sdf3D sdf = mask_to_sdf(labels);
  SurfaceMesh mesh = detail::marching_tetrahedra(sdf, 0.0f);
  if (mesh.volume() < 0)
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
  return mesh;
}

/// Per-vertex mean of the map over a sphere of the given radius; vertices
/// whose sphere catches no voxel centers fall back to a trilinear sample.
/// Returns the number of fallback vertices.
inline int project_to_mesh(const ScalarVolume& map, SurfaceMesh& mesh, double radius_mm = 4.0) {
  if (radius_mm <= 0) throw ConfigError("project_to_mesh: radius must be positive");
  mesh.quality.assign(mesh.vertices.size(), 0.0);
  int r_vox = int(std::floor(radius_mm / map.spacing));
  double r2 = radius_mm * radius_mm;
  int fallbacks = 0;
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    Vec3d c = map.world_to_voxel(mesh.vertices[v]);
    int ci = int(std::lround(c.x)), cj = int(std::lround(c.y)), ck = int(std::lround(c.z));
    double sum = 0;
    int n = 0;
    for (int dk = -r_vox; dk <= r_vox; ++dk)
      for (int dj = -r_vox; dj <= r_vox; ++dj)
        for (int di = -r_vox; di <= r_vox; ++di) {
          int i = ci + di, j = cj + dj, k = ck + dk;
          if (!map.contains(i, j, k)) continue;
          Vec3d delta = map.voxel_to_world(i, j, k) - mesh.vertices[v];
          if (delta.norm2() > r2) continue;
          sum += double(map.at(i, j, k));
          ++n;
        }
    if (n > 0) {
      mesh.quality[v] = sum / n;
    } else {
      mesh.quality[v] = sample_trilinear(map, c.x, c.y, c.z);
      ++fallbacks;
    }
  }
  return fallbacks;
}

/// ASCII PLY with the per-vertex channel stored as `quality`.
inline void write_mesh_ply(const std::filesystem::path& path, const SurfaceMesh& mesh) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open mesh for writing: " + path.string());
  bool with_quality = mesh.quality.size() == mesh.vertices.size();
  f << "ply\nformat ascii 1.0\n";
  f << "element vertex " << mesh.vertices.size() << "\n";
  f << "property float x\nproperty float y\nproperty float z\n";
  if (with_quality) f << "property float quality\n";
  f << "element face " << mesh.triangles.size() << "\n";
  f << "property list uchar int vertex_indices\nend_header\n";
  f << std::setprecision(9);
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    f << float(mesh.vertices[v].x) << " " << float(mesh.vertices[v].y) << " "
      << float(mesh.vertices[v].z);
    if (with_quality) f << " " << float(mesh.quality[v]);
    f << "\n";
  }
  for (const auto& t : mesh.triangles) f << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

}  // namespace planerecon
