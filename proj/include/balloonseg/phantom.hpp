#pragma once

#include "balloonseg/init.hpp"
#include "balloonseg/volume.hpp"

#include <cstdint>
#include <string>

namespace balloonseg {

enum class PhantomShape : std::uint8_t { sphere, ellipsoid, lobed };

std::string phantom_shape_name(PhantomShape s);
PhantomShape parse_phantom_shape(const std::string& name);

/// Synthetic ring-enhancing lesion: bright shell just outside an object with a
/// moderately bright interior, on a darker background.
struct PhantomSpec
{
    Dims dims{128, 128, 128};
    Vec3 spacing_mm{1.0, 1.0, 1.0};
    PhantomShape shape = PhantomShape::sphere;
    Vec3 center_vox{64.0, 64.0, 64.0};
    /// Semi-axes for ellipsoids; sphere and lobed use radii_mm.x as the radius.
    Vec3 radii_mm{15.0, 15.0, 15.0};
    double lobe_amplitude = 0.0;
    double intensity_background = 100.0;
    double intensity_interior = 160.0;
    double intensity_shell = 300.0;
    double shell_thickness_mm = 2.0;
    double noise_sigma = 10.0;
    std::uint64_t rng_seed = 1;
};

/// Throws ValidationError naming the offending field.
void validate_phantom_spec(const PhantomSpec& spec);

/// Signed radial test: <= 1 inside the analytic surface. `offset_mm` is the
/// displacement from the center in millimetres.
double phantom_radial_ratio(const PhantomSpec& spec, const Vec3& offset_mm);

/// Distance from the center to the analytic surface along `offset_mm`.
double phantom_surface_radius(const PhantomSpec& spec, const Vec3& offset_mm);

struct Phantom
{
    Volume3D volume;
    Mask3D truth;
    ContourInit suggested_contour;
};

inline constexpr std::size_t suggested_contour_points = 64;

Phantom generate_phantom(const PhantomSpec& spec);

struct TracedContour
{
    ContourInit contour;
    /// Number of 8-connected foreground components on the slice; > 1 means
    /// only the largest was traced.
    std::size_t component_count = 0;
};

/// Traces the outer boundary (pixel-edge outline) of the largest 8-connected
/// component on a slice and resamples it by arc length.
TracedContour contour_from_mask(const Mask3D& mask, Axis axis, std::int64_t index, std::size_t n_points);

} // namespace balloonseg
