#include "balloonseg/inflation.hpp"

#include "balloonseg/error.hpp"
#include "balloonseg/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace balloonseg {

std::string gate_sampling_name(GateSampling s)
{
    return s == GateSampling::trilinear ? "trilinear" : "nearest";
}

GateSampling parse_gate_sampling(const std::string& name)
{
    if (name == "nearest") return GateSampling::nearest;
    if (name == "trilinear") return GateSampling::trilinear;
    throw ValidationError("gate_sampling: expected 'nearest' or 'trilinear', got '" + name + "'");
}

std::string termination_reason_name(TerminationReason r)
{
    return r == TerminationReason::stalled ? "stalled" : "max_iterations";
}

namespace {

void require(bool ok, const char* field, const char* what)
{
    if (!ok) throw ValidationError(std::string(field) + ": " + what);
}

} // namespace

InflationConfig resolve_config(InflationConfig cfg, const Volume3D& vol, const InitParams& init)
{
    const Vec3& s = vol.spacing();
    if (!cfg.step_mm) cfg.step_mm = 0.5 * std::min({s.x, s.y, s.z});
    if (!cfg.initial_radius_mm)
        cfg.initial_radius_mm = std::min(2.0 * vol.geometric_mean_spacing(), 0.25 * init.avg_radius_mm);

    require(std::isfinite(*cfg.step_mm) && *cfg.step_mm > 0.0, "step_mm", "must be > 0");
    require(cfg.lambda_smooth >= 1e-12 && cfg.lambda_smooth < 1.0, "lambda_smooth", "must lie in (0, 1)");
    require(std::isfinite(cfg.split_factor) && cfg.split_factor > 0.0, "split_factor", "must be > 0");
    require(cfg.boundary_fraction > 0.0 && cfg.boundary_fraction < 1.0, "boundary_fraction", "must lie in (0, 1)");
    require(std::isfinite(cfg.curvature_cap_H) && cfg.curvature_cap_H > 0.0, "curvature_cap_H", "must be > 0");
    require(cfg.min_speed_factor > 0.0 && cfg.min_speed_factor <= 1.0, "min_speed_factor", "must lie in (0, 1]");
    require(cfg.stall_window_W >= 2, "stall_window_W", "must be >= 2");
    require(std::isfinite(cfg.stall_epsilon) && cfg.stall_epsilon > 0.0, "stall_epsilon", "must be > 0");
    require(cfg.max_iterations >= 0, "max_iterations", "must be >= 0");
    require(std::isfinite(*cfg.initial_radius_mm) && *cfg.initial_radius_mm > 0.0, "initial_radius_mm",
            "must be > 0");
    require(cfg.initial_subdivisions >= 0 && cfg.initial_subdivisions <= 6, "initial_subdivisions",
            "must lie in [0, 6]");
    return cfg;
}

double speed_factor(const VertexKinematics& kin, const InflationConfig& cfg)
{
    if (!(kin.cos_phi > 0.0)) return 0.0;
    const double angular = std::min(kin.cos_phi, 1.0);
    const double damping = std::min(1.0, std::max(cfg.min_speed_factor, 1.0 - kin.curvature_H / cfg.curvature_cap_H));
    return angular * damping;
}

double gate_intensity(const Volume3D& vol, const Vec3& position_mm, GateSampling sampling)
{
    const Vec3 p = vol.to_voxel(position_mm);
    return sampling == GateSampling::trilinear ? vol.sample_trilinear(p) : vol.sample_nearest(p);
}

MoveDecision can_move(const Volume3D& vol, const InitParams& init, const Vec3& target_mm, double max_seen,
                      const InflationConfig& cfg)
{
    MoveDecision d;
    d.intensity = gate_intensity(vol, target_mm, cfg.gate_sampling);
    const bool in_range = d.intensity >= init.intensity_lo && d.intensity <= init.intensity_hi;
    const bool above_boundary = max_seen <= 0.0 || d.intensity > cfg.boundary_fraction * max_seen;
    d.allowed = in_range && above_boundary;
    return d;
}

InflateStats inflate_once(SurfaceMesh& mesh, const Vec3& center_mm, const Volume3D& vol, const InitParams& init,
                          const InflationConfig& cfg)
{
    const std::vector<Vec3> normals = vertex_normals(mesh);
    const std::vector<double> curvature = mean_curvature(mesh);
    const double step = cfg.step_mm.value_or(0.5 * std::min({vol.spacing().x, vol.spacing().y, vol.spacing().z}));

    InflateStats stats;
    for (std::size_t v = 0; v < mesh.positions.size(); ++v) {
        const Vec3 offset = mesh.positions[v] - center_mm;
        const double r = norm(offset);
        if (!(r > 1e-12)) {
            ++stats.degenerate;
            continue;
        }
        VertexKinematics kin;
        kin.normal = normals[v];
        kin.center_dir = offset / r;
        kin.cos_phi = std::clamp(dot(kin.normal, kin.center_dir), -1.0, 1.0);
        kin.curvature_H = curvature[v];
        kin.speed_factor = speed_factor(kin, cfg);
        if (!(kin.speed_factor > 0.0)) continue;

        const Vec3 target = mesh.positions[v] + kin.center_dir * (step * kin.speed_factor);
        const MoveDecision d = can_move(vol, init, target, mesh.max_seen[v], cfg);
        if (!d.allowed) continue;
        mesh.positions[v] = target;
        mesh.max_seen[v] = std::max(mesh.max_seen[v], d.intensity);
        ++stats.moved;
    }
    return stats;
}

bool is_stalled(const InflationTrace& trace, const InflationConfig& cfg)
{
    const auto n = trace.records.size();
    const auto w = static_cast<std::size_t>(cfg.stall_window_W);
    if (n < w || w < 2) return false;
    const double now = trace.records[n - 1].avg_center_distance_mm;
    const double then = trace.records[n - w].avg_center_distance_mm;
    return (now - then) / std::max(now, 1e-12) < cfg.stall_epsilon;
}

SegmentationResult segment(const Volume3D& vol, const InitParams& init, const InflationConfig& cfg_in,
                           const Mask3D* truth, InflationObserver* observer)
{
    const auto started = std::chrono::steady_clock::now();
    const InflationConfig cfg = resolve_config(cfg_in, vol, init);

    for (std::size_t a = 0; a < 3; ++a) {
        const double c = init.center_vox[a];
        if (!std::isfinite(c) || c < 0.0 || c > static_cast<double>(vol.dims()[a] - 1))
            throw ValidationError("init center lies outside the volume");
    }
    if (!(init.intensity_lo <= init.intensity_hi))
        throw ValidationError("init intensity range is inverted");
    if (truth && truth->dims() != vol.dims())
        throw ValidationError("truth mask dims differ from the volume");

    const Vec3 center = vol.to_mm(init.center_vox);
    const double seed_intensity = gate_intensity(vol, center, cfg.gate_sampling);
    if (seed_intensity < init.intensity_lo || seed_intensity > init.intensity_hi)
        throw SeedOutsideRangeError("intensity " + std::to_string(seed_intensity) +
                                    " at the seed center is outside the initialized range [" +
                                    std::to_string(init.intensity_lo) + ", " + std::to_string(init.intensity_hi) +
                                    "]");

    SegmentationResult result;
    result.init = init;
    result.config = cfg;
    result.mesh = make_icosphere(center, *cfg.initial_radius_mm, cfg.initial_subdivisions);
    const double split_threshold = cfg.split_factor * vol.geometric_mean_spacing();

    result.trace.termination_reason = TerminationReason::max_iterations;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        TraceRecord rec;
        rec.iteration = it;
        rec.split_count = split_long_edges(result.mesh, split_threshold);

        InflateStats stats;
        if (observer) {
            const SurfaceMesh before = result.mesh;
            stats = inflate_once(result.mesh, center, vol, init, cfg);
            observer->after_inflate(it, before, result.mesh, stats);
        } else {
            stats = inflate_once(result.mesh, center, vol, init, cfg);
        }
        laplacian_smooth(result.mesh, cfg.lambda_smooth);

        rec.moved_vertex_count = stats.moved;
        rec.vertex_count = result.mesh.vertex_count();
        rec.avg_center_distance_mm = avg_center_distance(result.mesh, center);
        result.trace.records.push_back(rec);
        if (observer) observer->after_iteration(result.mesh, rec);
        if (is_stalled(result.trace, cfg)) {
            result.trace.termination_reason = TerminationReason::stalled;
            break;
        }
    }

    result.mask = voxelize(result.mesh, vol.dims(), vol.spacing());
    const MaskVolume mv = volume_from_mask(result.mask);
    result.voxel_count = mv.voxel_count;
    result.volume_mm3 = mv.volume_mm3;
    if (truth) result.dsc_vs_truth = dice(result.mask, *truth);
    result.star_shape_score = star_shape_score(result.mesh, center);
    result.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return result;
}

} // namespace balloonseg
