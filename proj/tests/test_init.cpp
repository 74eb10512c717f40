#include <doctest.h>

#include "balloonseg/error.hpp"
#include "balloonseg/init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace balloonseg;

namespace {

ContourInit square(double cu, double cv, double half, std::int64_t slice = 0)
{
    return {Axis::z, slice, {{cu - half, cv - half}, {cu + half, cv - half}, {cu + half, cv + half}, {cu - half, cv + half}}};
}

} // namespace

TEST_CASE("validate_contour rejects degenerate polygons")
{
    CHECK_THROWS_AS(validate_contour({Axis::z, 0, {{0, 0}, {1, 1}}}), ContourError);
    CHECK_THROWS_AS(validate_contour({Axis::z, 0, {{0, 0}, {1, 1}, {2, 2}}}), ContourError);
    // bow tie
    CHECK_THROWS_AS(validate_contour({Axis::z, 0, {{0, 0}, {2, 2}, {2, 0}, {0, 2}}}), ContourError);
    CHECK_THROWS_AS(validate_contour({Axis::z, 0, {{0, 0}, {NAN, 1}, {2, 0}}}), ContourError);
    CHECK_NOTHROW(validate_contour(square(5, 5, 2)));
}

TEST_CASE("signed area follows orientation")
{
    auto s = square(0, 0, 1).points;
    CHECK(polygon_signed_area(s) == doctest::Approx(4.0));
    std::reverse(s.begin(), s.end());
    CHECK(polygon_signed_area(s) == doctest::Approx(-4.0));
}

TEST_CASE("resample_closed spaces points evenly by arc length")
{
    const auto pts = resample_closed(square(0, 0, 1).points, 16);
    REQUIRE(pts.size() == 16);
    CHECK(pts.front() == Point2{-1, -1});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Point2& a = pts[i];
        const Point2& b = pts[(i + 1) % pts.size()];
        // every gap is 0.5 along the perimeter; corners shorten the chord
        const double chord = std::hypot(b.u - a.u, b.v - a.v);
        CHECK(chord <= 0.5 + 1e-12);
        CHECK(chord >= 0.5 / std::sqrt(2.0) - 1e-12);
    }
}

TEST_CASE("average radius of a square matches the closed form")
{
    // mean distance from the center of a square of half-side 1 to its perimeter
    const double expected = (std::sqrt(2.0) + std::asinh(1.0)) / 2.0;
    CHECK(expected == doctest::Approx(1.14779).epsilon(1e-5));
    CHECK(contour_avg_radius(square(7, 3, 1), {1, 1, 1}) == doctest::Approx(expected).epsilon(1e-3));
    // radius is measured in millimetres
    CHECK(contour_avg_radius(square(7, 3, 1), {2, 2, 5}) == doctest::Approx(2 * expected).epsilon(1e-3));
}

TEST_CASE("centroid lifts into the slice axis")
{
    ContourInit c = square(4, 6, 2, 9);
    c.axis = Axis::y;
    const Vec3 ctr = contour_centroid(c);
    CHECK(ctr.x == doctest::Approx(4));
    CHECK(ctr.y == doctest::Approx(9));
    CHECK(ctr.z == doctest::Approx(6));
}

TEST_CASE("nearest-rank percentile matches a sort oracle")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> dist(0, 50);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(1 + rng() % 300);
        for (double& x : v) x = dist(rng);
        const double p = static_cast<double>(rng() % 1001) / 10.0;
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        std::size_t rank = 1;
        while (static_cast<double>(rank) * 100.0 < p * static_cast<double>(v.size()) - 1e-9) ++rank;
        CHECK(nearest_rank(v, p) == sorted[rank - 1]);
    }
}

TEST_CASE("intensity range over a 10x10 patch valued 1..100")
{
    std::vector<double> s(20 * 20 * 1, 0.0);
    std::vector<double> values(100);
    std::iota(values.begin(), values.end(), 1.0);
    std::shuffle(values.begin(), values.end(), std::mt19937_64(2));
    for (int j = 0; j < 10; ++j)
        for (int i = 0; i < 10; ++i) s[static_cast<std::size_t>((i + 5) + 20 * (j + 5))] = values[static_cast<std::size_t>(i + 10 * j)];
    const Volume3D vol({20, 20, 1}, {1, 1, 1}, s);
    // covers pixel centers 5..14 on both axes
    const ContourInit c = square(9.5, 9.5, 5);
    const auto [lo, hi] = contour_intensity_range(vol, c, 2.0);
    CHECK(lo == 2.0);
    CHECK(hi == 98.0);
    const auto [mn, mx] = contour_intensity_range(vol, c, 0.0);
    CHECK(mn == 1.0);
    CHECK(mx == 100.0);

    // rotating the vertex list leaves the polygon, and so the range, unchanged
    ContourInit rotated = c;
    std::rotate(rotated.points.begin(), rotated.points.begin() + 2, rotated.points.end());
    CHECK(contour_intensity_range(vol, rotated, 2.0) == std::make_pair(lo, hi));
    CHECK_THROWS_AS(contour_intensity_range(vol, c, 50.0), ValidationError);
}

TEST_CASE("a single spike is trimmed away")
{
    std::vector<double> s(40 * 40, 0.0);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> near150(145, 155);
    std::size_t placed = 0;
    for (int j = 0; j < 40 && placed < 1000; ++j)
        for (int i = 0; i < 25 && placed < 1000; ++i, ++placed) s[static_cast<std::size_t>(i + 40 * j)] = near150(rng);
    s[0] = 1e6;
    const Volume3D vol({40, 40, 1}, {1, 1, 1}, s);
    const ContourInit c = square(12, 19.5, 12.5);
    const auto [lo, hi] = contour_intensity_range(vol, c, 2.0);
    CHECK(hi < 1e6);
    CHECK(lo >= 145.0);
}

TEST_CASE("process_contour bundles center, range and radius")
{
    const Volume3D vol({32, 32, 8}, {1, 1, 1}, std::vector<double>(32 * 32 * 8, 50.0));
    const InitParams p = process_contour(vol, square(16, 16, 6, 4));
    CHECK(p.center_vox.x == doctest::Approx(16));
    CHECK(p.center_vox.z == doctest::Approx(4));
    CHECK(p.intensity_lo == 50.0);
    CHECK(p.intensity_hi == 50.0);
    CHECK(p.avg_radius_mm == doctest::Approx(6 * (std::sqrt(2.0) + std::asinh(1.0)) / 2).epsilon(1e-3));
    CHECK_THROWS_AS(process_contour(vol, square(16, 16, 6, 8)), ValidationError);
    CHECK_THROWS_AS(process_contour(vol, square(40, 16, 3, 2)), ValidationError);
}
