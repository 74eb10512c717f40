#include "balloonseg/metrics.hpp"

#include "balloonseg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace balloonseg {

namespace {

constexpr double ray_offset = 1e-7;
// Irrational-ish ratio so the z offset is never a multiple of the y offset.
constexpr double ray_offset_ratio = 0.6180339887498949;

struct Point2d
{
    double y;
    double z;
};

double edge_fn(const Point2d& a, const Point2d& b, const Point2d& q)
{
    return (b.y - a.y) * (q.z - a.z) - (b.z - a.z) * (q.y - a.y);
}

// Top-left style tie rule so a ray through a shared edge is counted once.
bool owns_edge(const Point2d& a, const Point2d& b)
{
    const double dy = b.y - a.y;
    const double dz = b.z - a.z;
    return dz < 0.0 || (dz == 0.0 && dy > 0.0);
}

void require_closed(const SurfaceMesh& mesh)
{
    std::unordered_map<std::uint64_t, int> uses;
    for (const Triangle& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            std::uint32_t a = t[e];
            std::uint32_t b = t[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            ++uses[(static_cast<std::uint64_t>(a) << 32) | b];
        }
    }
    for (const auto& [key, n] : uses) {
        if (n != 2) throw MeshError("voxelize: mesh is not closed");
    }
}

} // namespace

Mask3D voxelize(const SurfaceMesh& mesh, const Dims& dims, const Vec3& spacing)
{
    require_closed(mesh);
    Mask3D mask(dims, spacing);
    const double off_y = ray_offset * spacing.y;
    const double off_z = ray_offset * ray_offset_ratio * spacing.z;

    // crossings[row] holds x positions (mm) where the row's ray meets the surface.
    std::vector<std::vector<double>> crossings(static_cast<std::size_t>(dims.ny * dims.nz));

    for (const Triangle& t : mesh.triangles) {
        const Vec3& p0 = mesh.positions[t[0]];
        const Vec3& p1 = mesh.positions[t[1]];
        const Vec3& p2 = mesh.positions[t[2]];
        Point2d a{p0.y, p0.z};
        Point2d b{p1.y, p1.z};
        Point2d c{p2.y, p2.z};
        double area = edge_fn(a, b, c);
        if (area == 0.0) continue; // parallel to the rays
        Vec3 q0 = p0;
        Vec3 q1 = p1;
        Vec3 q2 = p2;
        if (area < 0.0) {
            std::swap(b, c);
            std::swap(q1, q2);
            area = -area;
        }

        const double ymin = std::min({a.y, b.y, c.y}) - off_y;
        const double ymax = std::max({a.y, b.y, c.y}) - off_y;
        const double zmin = std::min({a.z, b.z, c.z}) - off_z;
        const double zmax = std::max({a.z, b.z, c.z}) - off_z;
        const auto j0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(ymin / spacing.y)));
        const auto j1 = std::min<std::int64_t>(dims.ny - 1, static_cast<std::int64_t>(std::floor(ymax / spacing.y)));
        const auto k0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(zmin / spacing.z)));
        const auto k1 = std::min<std::int64_t>(dims.nz - 1, static_cast<std::int64_t>(std::floor(zmax / spacing.z)));

        for (std::int64_t k = k0; k <= k1; ++k) {
            for (std::int64_t j = j0; j <= j1; ++j) {
                const Point2d q{static_cast<double>(j) * spacing.y + off_y, static_cast<double>(k) * spacing.z + off_z};
                const double w0 = edge_fn(b, c, q);
                const double w1 = edge_fn(c, a, q);
                const double w2 = edge_fn(a, b, q);
                if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
                if ((w0 == 0.0 && !owns_edge(b, c)) || (w1 == 0.0 && !owns_edge(c, a)) ||
                    (w2 == 0.0 && !owns_edge(a, b)))
                    continue;
                const double x = (w0 * q0.x + w1 * q1.x + w2 * q2.x) / area;
                crossings[static_cast<std::size_t>(j + k * dims.ny)].push_back(x);
            }
        }
    }

    for (std::int64_t k = 0; k < dims.nz; ++k) {
        for (std::int64_t j = 0; j < dims.ny; ++j) {
            auto& xs = crossings[static_cast<std::size_t>(j + k * dims.ny)];
            if (xs.empty()) continue;
            std::sort(xs.begin(), xs.end());
            std::size_t passed = 0;
            for (std::int64_t i = 0; i < dims.nx; ++i) {
                const double x = static_cast<double>(i) * spacing.x;
                while (passed < xs.size() && xs[passed] < x) ++passed;
                if (passed % 2 == 1) mask.set(i, j, k, true);
            }
        }
    }
    return mask;
}

double dice_from_counts(std::size_t a, std::size_t b, std::size_t intersection)
{
    if (a + b == 0) return 100.0;
    return 200.0 * static_cast<double>(intersection) / static_cast<double>(a + b);
}

EvalReport evaluate(const Mask3D& a, const Mask3D& b)
{
    if (!a.same_lattice(b))
        throw ValidationError("mask dims differ: (" + std::to_string(a.dims().nx) + "," +
                              std::to_string(a.dims().ny) + "," + std::to_string(a.dims().nz) + ") vs (" +
                              std::to_string(b.dims().nx) + "," + std::to_string(b.dims().ny) + "," +
                              std::to_string(b.dims().nz) + ")");
    EvalReport r;
    const auto bits_a = a.bits();
    const auto bits_b = b.bits();
    for (std::size_t i = 0; i < bits_a.size(); ++i) {
        r.voxels_a += bits_a[i];
        r.voxels_b += bits_b[i];
        r.voxels_intersection += bits_a[i] & bits_b[i];
    }
    r.dsc_percent = dice_from_counts(r.voxels_a, r.voxels_b, r.voxels_intersection);
    r.volume_a_mm3 = static_cast<double>(r.voxels_a) * a.spacing().x * a.spacing().y * a.spacing().z;
    r.volume_b_mm3 = static_cast<double>(r.voxels_b) * b.spacing().x * b.spacing().y * b.spacing().z;
    return r;
}

double dice(const Mask3D& a, const Mask3D& b)
{
    return evaluate(a, b).dsc_percent;
}

MaskVolume volume_from_mask(const Mask3D& mask)
{
    const std::size_t n = mask.count();
    const Vec3& s = mask.spacing();
    return {n, static_cast<double>(n) * s.x * s.y * s.z};
}

double sphere_model_volume(double d)
{
    if (!(d > 0.0) || !std::isfinite(d))
        throw ValidationError("sphere model diameter must be > 0");
    return std::numbers::pi * d * d * d / 6.0;
}

double ellipsoid_model_volume(double a, double b, double c)
{
    if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0) || !std::isfinite(a * b * c))
        throw ValidationError("ellipsoid model diameters must be > 0");
    return std::numbers::pi * a * b * c / 6.0;
}

} // namespace balloonseg
