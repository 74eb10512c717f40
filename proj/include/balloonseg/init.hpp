#pragma once

#include "balloonseg/geometry.hpp"
#include "balloonseg/volume.hpp"

#include <utility>
#include <vector>

namespace balloonseg {

struct Point2
{
    double u = 0.0;
    double v = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

/// A closed polygon drawn on one axis-aligned slice, in voxel coordinates of
/// that slice: u runs along the fast in-plane axis, v along the slow one.
struct ContourInit
{
    Axis axis = Axis::z;
    std::int64_t slice_index = 0;
    std::vector<Point2> points;
};

/// The three quantities the inflation engine needs from a user contour.
struct InitParams
{
    Vec3 center_vox;
    double intensity_lo = 0.0;
    double intensity_hi = 0.0;
    double avg_radius_mm = 0.0;
};

inline constexpr double default_trim_percent = 2.0;

/// Throws ContourError unless the contour has >= 3 points, nonzero area and
/// no self-intersections.
void validate_contour(const ContourInit& contour);

double polygon_signed_area(const std::vector<Point2>& pts);

/// `count` points spaced equally by arc length along the closed polyline,
/// starting at its first vertex.
std::vector<Point2> resample_closed(const std::vector<Point2>& pts, std::size_t count);

/// Even-odd test at a point (used at pixel centers).
bool point_in_polygon(const std::vector<Point2>& pts, const Point2& q);

/// Embeds a slice coordinate (u, v) into volume voxel coordinates.
Vec3 slice_to_voxel(Axis axis, std::int64_t slice_index, const Point2& p);

/// Area centroid of the polygon, lifted into voxel space.
Vec3 contour_centroid(const ContourInit& contour);

double contour_avg_radius(const ContourInit& contour, const Vec3& spacing_mm);

/// Nearest-rank percentile: the ceil(p/100 * N)-th smallest value (1-based,
/// clamped to [1, N]).
double nearest_rank(std::vector<double> values, double percent);

std::pair<double, double> contour_intensity_range(const Volume3D& vol, const ContourInit& contour,
                                                  double trim_percent = default_trim_percent);

InitParams process_contour(const Volume3D& vol, const ContourInit& contour,
                           double trim_percent = default_trim_percent);

} // namespace balloonseg
