#pragma once

#include "balloonseg/mesh.hpp"
#include "balloonseg/volume.hpp"

#include <cstddef>

namespace balloonseg {

/// Overlap summary of two masks on one lattice.
struct EvalReport
{
    double dsc_percent = 0.0;
    double volume_a_mm3 = 0.0;
    double volume_b_mm3 = 0.0;
    std::size_t voxels_a = 0;
    std::size_t voxels_b = 0;
    std::size_t voxels_intersection = 0;
};

/// A voxel is set iff its center is inside the closed mesh, decided by parity
/// ray casting along +x. Rays are offset by a fixed 1e-7 of the spacing so
/// they never graze vertices or edges exactly.
Mask3D voxelize(const SurfaceMesh& mesh, const Dims& dims, const Vec3& spacing_mm);

/// 200 |A n B| / (|A| + |B|); 100 when both masks are empty.
double dice(const Mask3D& a, const Mask3D& b);

/// Dice from cardinalities alone.
double dice_from_counts(std::size_t a, std::size_t b, std::size_t intersection);

EvalReport evaluate(const Mask3D& a, const Mask3D& b);

struct MaskVolume
{
    std::size_t voxel_count = 0;
    double volume_mm3 = 0.0;
};

MaskVolume volume_from_mask(const Mask3D& mask);

/// Sphere model from the maximal cross-sectional diameter d (cm): pi d^3 / 6.
double sphere_model_volume(double diameter_cm);

/// Ellipsoid model from three diameters (cm): pi a b c / 6.
double ellipsoid_model_volume(double a_cm, double b_cm, double c_cm);

inline constexpr double mm3_per_cm3 = 1000.0;

} // namespace balloonseg
