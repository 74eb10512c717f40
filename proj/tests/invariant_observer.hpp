#pragma once

#include "balloonseg/inflation.hpp"
#include "balloonseg/mesh.hpp"

#include <string>
#include <vector>

namespace testing {

// Records every per-iteration invariant violation of a segmentation run.
class InvariantObserver : public balloonseg::InflationObserver
{
public:
    InvariantObserver(const balloonseg::Volume3D& vol, const balloonseg::InitParams& init,
                      balloonseg::GateSampling sampling = balloonseg::GateSampling::nearest)
        : vol_(vol), init_(init), sampling_(sampling), center_(vol.to_mm(init.center_vox))
    {
    }

    void after_inflate(int iteration, const balloonseg::SurfaceMesh& before, const balloonseg::SurfaceMesh& after,
                       const balloonseg::InflateStats& stats) override
    {
        using namespace balloonseg;
        if (before.vertex_count() != after.vertex_count()) fail(iteration, "inflate changed the vertex count");
        std::size_t moved = 0;
        for (std::size_t v = 0; v < before.vertex_count(); ++v) {
            if (after.max_seen[v] < before.max_seen[v]) fail(iteration, "max_seen decreased at " + std::to_string(v));
            if (after.positions[v] == before.positions[v]) continue;
            ++moved;
            if (!(distance(after.positions[v], center_) > distance(before.positions[v], center_)))
                fail(iteration, "vertex " + std::to_string(v) + " did not move outward");
            const double i = gate_intensity(vol_, after.positions[v], sampling_);
            if (i < init_.intensity_lo || i > init_.intensity_hi)
                fail(iteration, "vertex " + std::to_string(v) + " moved onto intensity " + std::to_string(i));
        }
        if (moved != stats.moved) fail(iteration, "moved count disagrees with the stats");
    }

    void after_iteration(const balloonseg::SurfaceMesh& mesh, const balloonseg::TraceRecord& record) override
    {
        ++iterations;
        const balloonseg::MeshCheck c = balloonseg::check_mesh(mesh);
        for (const std::string& v : c.violations) fail(record.iteration, v);
        if (c.euler_characteristic() != 2) fail(record.iteration, "Euler characteristic is not 2");
        if (!(c.signed_volume > 0)) fail(record.iteration, "mesh is not outward oriented");
    }

    std::vector<std::string> violations;
    int iterations = 0;

private:
    void fail(int iteration, const std::string& what)
    {
        if (violations.size() < 50) violations.push_back("iteration " + std::to_string(iteration) + ": " + what);
    }

    const balloonseg::Volume3D& vol_;
    balloonseg::InitParams init_;
    balloonseg::GateSampling sampling_;
    balloonseg::Vec3 center_;
};

} // namespace testing
