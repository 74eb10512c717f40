#include "balloonseg/init.hpp"

#include "balloonseg/error.hpp"

#include <algorithm>
#include <cmath>

namespace balloonseg {

namespace {

constexpr std::size_t radius_samples = 256;

double orient(const Point2& a, const Point2& b, const Point2& c)
{
    return (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p)
{
    return std::min(a.u, b.u) <= p.u && p.u <= std::max(a.u, b.u) && std::min(a.v, b.v) <= p.v &&
           p.v <= std::max(a.v, b.v);
}

bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2)
{
    const double d1 = orient(q1, q2, p1);
    const double d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1);
    const double d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

} // namespace

double polygon_signed_area(const std::vector<Point2>& pts)
{
    double a = 0.0;
    for (std::size_t i = 0, n = pts.size(); i < n; ++i) {
        const Point2& p = pts[i];
        const Point2& q = pts[(i + 1) % n];
        a += p.u * q.v - q.u * p.v;
    }
    return a / 2.0;
}

void validate_contour(const ContourInit& contour)
{
    const auto& pts = contour.points;
    if (pts.size() < 3)
        throw ContourError("contour needs at least 3 points, got " + std::to_string(pts.size()));
    for (const Point2& p : pts) {
        if (!std::isfinite(p.u) || !std::isfinite(p.v))
            throw ContourError("contour has a non-finite point");
    }
    if (!(std::abs(polygon_signed_area(pts)) > 1e-12))
        throw ContourError("contour polygon has zero area");
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // adjacent edges share an endpoint by construction
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]))
                throw ContourError("contour self-intersects (edges " + std::to_string(i) + " and " +
                                   std::to_string(j) + ")");
        }
    }
}

std::vector<Point2> resample_closed(const std::vector<Point2>& pts, std::size_t count)
{
    const std::size_t n = pts.size();
    std::vector<double> cumulative(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = pts[i];
        const Point2& b = pts[(i + 1) % n];
        cumulative[i + 1] = cumulative[i] + std::hypot(b.u - a.u, b.v - a.v);
    }
    const double total = cumulative[n];
    std::vector<Point2> out;
    out.reserve(count);
    if (!(total > 0.0)) {
        out.assign(count, pts.empty() ? Point2{} : pts.front());
        return out;
    }
    std::size_t seg = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double s = total * static_cast<double>(k) / static_cast<double>(count);
        while (seg + 1 < n && cumulative[seg + 1] <= s) ++seg;
        const double len = cumulative[seg + 1] - cumulative[seg];
        const double t = len > 0.0 ? (s - cumulative[seg]) / len : 0.0;
        const Point2& a = pts[seg];
        const Point2& b = pts[(seg + 1) % n];
        out.push_back({a.u + t * (b.u - a.u), a.v + t * (b.v - a.v)});
    }
    return out;
}

bool point_in_polygon(const std::vector<Point2>& pts, const Point2& q)
{
    bool inside = false;
    for (std::size_t i = 0, n = pts.size(), j = n - 1; i < n; j = i++) {
        const Point2& a = pts[i];
        const Point2& b = pts[j];
        if ((a.v > q.v) != (b.v > q.v)) {
            const double x = a.u + (q.v - a.v) * (b.u - a.u) / (b.v - a.v);
            if (q.u < x) inside = !inside;
        }
    }
    return inside;
}

Vec3 slice_to_voxel(Axis axis, std::int64_t slice_index, const Point2& p)
{
    const auto [fast, slow] = in_plane_axes(axis);
    Vec3 out;
    out[axis_index(axis)] = static_cast<double>(slice_index);
    out[fast] = p.u;
    out[slow] = p.v;
    return out;
}

Vec3 contour_centroid(const ContourInit& contour)
{
    validate_contour(contour);
    const auto& pts = contour.points;
    double a = 0.0;
    double cu = 0.0;
    double cv = 0.0;
    // Shoelace terms taken relative to the first vertex to limit cancellation.
    const Point2 o = pts.front();
    for (std::size_t i = 0, n = pts.size(); i < n; ++i) {
        const Point2 p{pts[i].u - o.u, pts[i].v - o.v};
        const Point2 q{pts[(i + 1) % n].u - o.u, pts[(i + 1) % n].v - o.v};
        const double w = p.u * q.v - q.u * p.v;
        a += w;
        cu += (p.u + q.u) * w;
        cv += (p.v + q.v) * w;
    }
    a /= 2.0;
    return slice_to_voxel(contour.axis, contour.slice_index, {o.u + cu / (6.0 * a), o.v + cv / (6.0 * a)});
}

double contour_avg_radius(const ContourInit& contour, const Vec3& spacing_mm)
{
    const Vec3 c = contour_centroid(contour);
    const auto [fast, slow] = in_plane_axes(contour.axis);
    const double su = spacing_mm[fast];
    const double sv = spacing_mm[slow];
    const double cu = c[fast];
    const double cv = c[slow];
    double sum = 0.0;
    for (const Point2& p : resample_closed(contour.points, radius_samples))
        sum += std::hypot((p.u - cu) * su, (p.v - cv) * sv);
    return sum / static_cast<double>(radius_samples);
}

double nearest_rank(std::vector<double> values, double percent)
{
    if (values.empty())
        throw ValidationError("nearest_rank of an empty sample");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    auto rank = static_cast<std::int64_t>(std::ceil(percent * n / 100.0 - 1e-9));
    rank = std::clamp<std::int64_t>(rank, 1, static_cast<std::int64_t>(values.size()));
    return values[static_cast<std::size_t>(rank - 1)];
}

std::pair<double, double> contour_intensity_range(const Volume3D& vol, const ContourInit& contour,
                                                  double trim_percent)
{
    validate_contour(contour);
    if (!(trim_percent >= 0.0) || !(trim_percent < 50.0))
        throw ValidationError("trim_percent must lie in [0, 50)");
    const Slice2D slice = vol.extract_slice(contour.axis, contour.slice_index);

    double umin = contour.points.front().u;
    double umax = umin;
    double vmin = contour.points.front().v;
    double vmax = vmin;
    for (const Point2& p : contour.points) {
        umin = std::min(umin, p.u);
        umax = std::max(umax, p.u);
        vmin = std::min(vmin, p.v);
        vmax = std::max(vmax, p.v);
    }
    const auto i0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(umin)));
    const auto i1 = std::min<std::int64_t>(slice.width - 1, static_cast<std::int64_t>(std::ceil(umax)));
    const auto j0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(vmin)));
    const auto j1 = std::min<std::int64_t>(slice.height - 1, static_cast<std::int64_t>(std::ceil(vmax)));

    std::vector<double> values;
    for (std::int64_t j = j0; j <= j1; ++j) {
        for (std::int64_t i = i0; i <= i1; ++i) {
            if (point_in_polygon(contour.points, {static_cast<double>(i), static_cast<double>(j)}))
                values.push_back(slice.at(i, j));
        }
    }
    if (values.empty())
        throw ContourError("contour encloses no pixel centers on slice " + std::to_string(contour.slice_index));
    return {nearest_rank(values, trim_percent), nearest_rank(values, 100.0 - trim_percent)};
}

InitParams process_contour(const Volume3D& vol, const ContourInit& contour, double trim_percent)
{
    const std::size_t a = axis_index(contour.axis);
    if (contour.slice_index < 0 || contour.slice_index >= vol.dims()[a])
        throw ContourError("slice index " + std::to_string(contour.slice_index) + " outside volume on axis " +
                           axis_name(contour.axis));
    InitParams p;
    p.center_vox = contour_centroid(contour);
    for (std::size_t k = 0; k < 3; ++k) {
        if (p.center_vox[k] < 0.0 || p.center_vox[k] > static_cast<double>(vol.dims()[k] - 1))
            throw ContourError("contour center lies outside the volume");
    }
    std::tie(p.intensity_lo, p.intensity_hi) = contour_intensity_range(vol, contour, trim_percent);
    p.avg_radius_mm = contour_avg_radius(contour, vol.spacing());
    if (!(p.avg_radius_mm > 0.0))
        throw ContourError("contour average radius is zero");
    return p;
}

} // namespace balloonseg
