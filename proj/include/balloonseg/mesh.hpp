#pragma once

#include "balloonseg/geometry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace balloonseg {

using Triangle = std::array<std::uint32_t, 3>;

/// Closed genus-0 triangle mesh in physical (mm) space. Triangles are wound
/// counter-clockwise seen from outside. `max_seen` holds, per vertex, the
/// largest intensity that vertex has been moved onto.
struct SurfaceMesh
{
    std::vector<Vec3> positions;
    std::vector<Triangle> triangles;
    std::vector<double> max_seen;

    std::size_t vertex_count() const { return positions.size(); }
    std::size_t face_count() const { return triangles.size(); }
};

/// Result of the full invariant suite. `violations` is empty iff the mesh is a
/// closed, consistently outward-oriented, non-degenerate genus-0 surface.
struct MeshCheck
{
    std::size_t vertices = 0;
    std::size_t edges = 0;
    std::size_t faces = 0;
    double signed_volume = 0.0;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    long euler_characteristic() const
    {
        return static_cast<long>(vertices) - static_cast<long>(edges) + static_cast<long>(faces);
    }
};

MeshCheck check_mesh(const SurfaceMesh& mesh);

std::size_t edge_count(const SurfaceMesh& mesh);

/// Regular icosahedron subdivided `subdivisions` times (1:4 midpoint split),
/// every vertex projected onto the sphere. max_seen starts at 0.
SurfaceMesh make_icosphere(const Vec3& center, double radius, int subdivisions);

/// Area-weighted, normalized vertex normals. Throws MeshError naming the
/// vertex when the accumulated normal vanishes.
std::vector<Vec3> vertex_normals(const SurfaceMesh& mesh);

/// Mean-curvature magnitude per vertex from the cotangent Laplacian with
/// mixed-area normalization (mm^-1, >= 0).
std::vector<double> mean_curvature(const SurfaceMesh& mesh);

/// Splits, in one longest-first pass, every edge longer than `threshold_mm`
/// at call time. Returns the number of splits.
std::size_t split_long_edges(SurfaceMesh& mesh, double threshold_mm);

/// One pass of uniform umbrella smoothing, v += lambda * (mean(1-ring) - v).
void laplacian_smooth(SurfaceMesh& mesh, double lambda);

/// Enclosed volume by the divergence theorem; positive for outward winding.
double mesh_volume(const SurfaceMesh& mesh);

double avg_center_distance(const SurfaceMesh& mesh, const Vec3& center);

/// Fraction of `directions` (Fibonacci-sphere sampled) whose ray from `center`
/// crosses the mesh exactly once. Diagnostic only.
double star_shape_score(const SurfaceMesh& mesh, const Vec3& center, int directions = 512);

enum class MeshFormat : std::uint8_t { obj, stl };

void export_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path, MeshFormat format);
/// Reads `v` and `f` records of an ASCII OBJ (polygons fan-triangulated).
SurfaceMesh import_obj(const std::filesystem::path& path);

} // namespace balloonseg
