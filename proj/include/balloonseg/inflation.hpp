#pragma once

#include "balloonseg/init.hpp"
#include "balloonseg/mesh.hpp"
#include "balloonseg/volume.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace balloonseg {

/// How the move gate reads the intensity at a target position.
enum class GateSampling : std::uint8_t
{
    nearest,   ///< value of the voxel containing the target
    trilinear, ///< trilinear interpolation of the 8 surrounding voxels
};

std::string gate_sampling_name(GateSampling s);
GateSampling parse_gate_sampling(const std::string& name);

/// Tunables of the inflation loop. `step_mm` and `initial_radius_mm` default
/// to values derived from the volume spacing and the initialization; use
/// resolve_config() to obtain the concrete values.
struct InflationConfig
{
    std::optional<double> step_mm;
    double lambda_smooth = 0.1;
    double split_factor = 3.0;
    double boundary_fraction = 0.8;
    double curvature_cap_H = 0.5;
    double min_speed_factor = 0.1;
    int stall_window_W = 10;
    double stall_epsilon = 1e-3;
    int max_iterations = 2000;
    std::optional<double> initial_radius_mm;
    int initial_subdivisions = 2;
    GateSampling gate_sampling = GateSampling::nearest;
};

/// Fills the spacing/initialization-dependent defaults and validates every
/// field. Throws ValidationError naming the field.
InflationConfig resolve_config(InflationConfig cfg, const Volume3D& vol, const InitParams& init);

struct VertexKinematics
{
    Vec3 normal;
    Vec3 center_dir;
    double cos_phi = 0.0;
    double curvature_H = 0.0;
    double speed_factor = 0.0;
};

/// clamp(cos_phi, 0, 1) * max(min_speed_factor, 1 - H / curvature_cap_H),
/// the curvature term itself capped at 1.
double speed_factor(const VertexKinematics& kin, const InflationConfig& cfg);

struct MoveDecision
{
    bool allowed = false;
    double intensity = 0.0;
};

/// Gate for one vertex move: target intensity inside [lo, hi] and strictly
/// above boundary_fraction * max_seen (vacuous while max_seen <= 0).
MoveDecision can_move(const Volume3D& vol, const InitParams& init, const Vec3& target_mm, double max_seen,
                      const InflationConfig& cfg);

/// Intensity the gate sees at a physical position.
double gate_intensity(const Volume3D& vol, const Vec3& position_mm, GateSampling sampling);

struct InflateStats
{
    std::size_t moved = 0;
    /// Vertices sitting on the center (no defined direction); skipped.
    std::size_t degenerate = 0;
};

/// One radial inflation pass over a position snapshot, ascending vertex order.
/// `cfg` must be resolved.
InflateStats inflate_once(SurfaceMesh& mesh, const Vec3& center_mm, const Volume3D& vol, const InitParams& init,
                          const InflationConfig& cfg);

struct TraceRecord
{
    int iteration = 0;
    double avg_center_distance_mm = 0.0;
    std::size_t moved_vertex_count = 0;
    std::size_t vertex_count = 0;
    std::size_t split_count = 0;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

enum class TerminationReason : std::uint8_t { stalled, max_iterations };

std::string termination_reason_name(TerminationReason r);

struct InflationTrace
{
    std::vector<TraceRecord> records;
    TerminationReason termination_reason = TerminationReason::max_iterations;

    friend bool operator==(const InflationTrace&, const InflationTrace&) = default;
};

/// True once the trace holds at least W records and the mean radius grew by
/// less than stall_epsilon (relative) across the last W of them.
bool is_stalled(const InflationTrace& trace, const InflationConfig& cfg);

/// Hooks for inspecting a run; the default implementation ignores everything.
class InflationObserver
{
public:
    virtual ~InflationObserver() = default;
    /// Called around inflate_once (after split and before smoothing).
    virtual void after_inflate(int /*iteration*/, const SurfaceMesh& /*before*/, const SurfaceMesh& /*after*/,
                               const InflateStats& /*stats*/)
    {
    }
    /// Called once the iteration's trace record has been appended.
    virtual void after_iteration(const SurfaceMesh& /*mesh*/, const TraceRecord& /*record*/) {}
};

struct SegmentationResult
{
    SurfaceMesh mesh;
    Mask3D mask;
    double volume_mm3 = 0.0;
    std::size_t voxel_count = 0;
    InflationTrace trace;
    double runtime_ms = 0.0;
    std::optional<double> dsc_vs_truth;
    double star_shape_score = 0.0;
    InitParams init;
    InflationConfig config;
};

/// Runs the full balloon inflation from the initialization and voxelizes the
/// final surface onto the volume lattice.
SegmentationResult segment(const Volume3D& vol, const InitParams& init, const InflationConfig& cfg,
                           const Mask3D* truth = nullptr, InflationObserver* observer = nullptr);

} // namespace balloonseg
