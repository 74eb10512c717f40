#include <doctest.h>

#include "balloonseg/error.hpp"
#include "balloonseg/metrics.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace balloonseg;

namespace {

// Inside test for a convex, outward-wound mesh: behind every face plane.
bool inside_convex(const SurfaceMesh& m, const Vec3& p)
{
    for (const Triangle& t : m.triangles) {
        const Vec3& a = m.positions[t[0]];
        const Vec3 n = cross(m.positions[t[1]] - a, m.positions[t[2]] - a);
        if (dot(n, p - a) > 0) return false;
    }
    return true;
}

} // namespace

TEST_CASE("dice on masks with reference cardinalities")
{
    const std::size_t a = 139670, b = 158414, both = 129279;
    const std::size_t total = a + b - both;
    Mask3D ma({static_cast<std::int64_t>(total), 1, 1}, {1, 1, 1});
    Mask3D mb = ma;
    for (std::size_t i = 0; i < a; ++i) ma.set_index(i, true);
    for (std::size_t i = a - both; i < total; ++i) mb.set_index(i, true);
    REQUIRE(ma.count() == a);
    REQUIRE(mb.count() == b);
    const EvalReport r = evaluate(ma, mb);
    CHECK(r.voxels_intersection == both);
    CHECK(r.dsc_percent == doctest::Approx(86.74).epsilon(0.01 / 86.74));
    CHECK(dice_from_counts(a, b, both) == doctest::Approx(200.0 * 129279.0 / 298084.0));
}

TEST_CASE("voxel counts convert to millimetres with the voxel volume")
{
    Mask3D m({139670, 1, 1}, {0.11641, 1, 1});
    for (std::size_t i = 0; i < 139670; ++i) m.set_index(i, true);
    const MaskVolume v = volume_from_mask(m);
    CHECK(v.voxel_count == 139670);
    CHECK(std::abs(v.volume_mm3 - 16259.7) / 16259.7 < 1e-3);
    CHECK(std::abs(158414 * 0.11641 - 18441.8) / 18441.8 < 1e-3);
}

TEST_CASE("dice edge cases")
{
    Mask3D empty({4, 4, 4}, {1, 1, 1});
    Mask3D full = empty;
    for (std::size_t i = 0; i < 64; ++i) full.set_index(i, true);
    CHECK(dice(empty, empty) == 100.0);
    CHECK(dice(full, full) == 100.0);
    CHECK(dice(full, empty) == 0.0);
    CHECK_THROWS_AS(dice(full, Mask3D({4, 4, 5}, {1, 1, 1})), ValidationError);

    std::mt19937_64 rng(1);
    for (int n = 0; n < 20; ++n) {
        Mask3D x = empty, y = empty;
        for (std::size_t i = 0; i < 64; ++i) {
            x.set_index(i, rng() & 1);
            y.set_index(i, rng() & 1);
        }
        const double d = dice(x, y);
        CHECK(d == dice(y, x));
        CHECK(d >= 0.0);
        CHECK(d <= 100.0);
    }
}

TEST_CASE("geometric baseline volumes")
{
    CHECK(sphere_model_volume(2.0) == doctest::Approx(4.18879).epsilon(1e-5 / 4.18879));
    CHECK(ellipsoid_model_volume(1, 2, 3) == doctest::Approx(3.14159).epsilon(1e-5 / 3.14159));
    for (double d : {0.5, 1.0, 2.0, 3.7, 12.25}) CHECK(ellipsoid_model_volume(d, d, d) == sphere_model_volume(d));
}

TEST_CASE("voxelized icosphere has the ball's volume")
{
    const SurfaceMesh s = make_icosphere({32, 32, 32}, 10.0, 3);
    const Mask3D m = voxelize(s, {64, 64, 64}, {1, 1, 1});
    const double ball = 4.0 / 3.0 * std::numbers::pi * 1000.0;
    CHECK(std::abs(static_cast<double>(m.count()) - ball) / ball < 0.02);
}

TEST_CASE("voxelization agrees with a half-space oracle")
{
    const SurfaceMesh s = make_icosphere({10.3, 9.7, 11.1}, 6.4, 2);
    const Vec3 spacing{0.9, 1.1, 1.3};
    const Dims d{24, 20, 18};
    const Mask3D m = voxelize(s, d, spacing);
    std::size_t disagreements = 0;
    for (std::int64_t k = 0; k < d.nz; ++k)
        for (std::int64_t j = 0; j < d.ny; ++j)
            for (std::int64_t i = 0; i < d.nx; ++i) {
                const Vec3 p{i * spacing.x, j * spacing.y, k * spacing.z};
                if (m.at(i, j, k) != inside_convex(s, p)) ++disagreements;
            }
    CHECK(disagreements == 0);
}

TEST_CASE("voxelization commutes with whole-voxel shifts")
{
    const SurfaceMesh a = make_icosphere({12.2, 13.4, 11.9}, 7.0, 3);
    SurfaceMesh b = a;
    for (Vec3& p : b.positions) p = p + Vec3{3, -2, 5};
    const Dims d{32, 32, 32};
    const Mask3D ma = voxelize(a, d, {1, 1, 1});
    const Mask3D mb = voxelize(b, d, {1, 1, 1});
    CHECK(ma.count() == mb.count());
    for (std::int64_t k = 0; k < 24; ++k)
        for (std::int64_t j = 2; j < 32; ++j)
            for (std::int64_t i = 0; i < 29; ++i) REQUIRE(ma.at(i, j, k) == mb.at(i + 3, j - 2, k + 5));
}

TEST_CASE("voxelization of a box counts enclosed centers")
{
    SurfaceMesh box;
    const double lo = 2.5, hi = 7.5;
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) box.positions.push_back({i ? hi : lo, j ? hi : lo, k ? hi : lo});
    box.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                     {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
    box.max_seen.assign(8, 0.0);
    CHECK(voxelize(box, {12, 12, 12}, {1, 1, 1}).count() == 125);
}
