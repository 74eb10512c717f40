#pragma once

#include "balloonseg/inflation.hpp"
#include "balloonseg/init.hpp"
#include "balloonseg/volume.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace balloonseg {

/// Exit codes shared by every subcommand.
enum ExitCode : int { exit_ok = 0, exit_domain_error = 1, exit_usage_error = 2 };

/// Parses `argv` and dispatches to a subcommand. Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct SweepRow
{
    std::int64_t slice_index = 0;
    std::optional<double> volume_mm3;
    std::optional<std::size_t> voxels;
    std::optional<double> dsc_percent;
    std::string error;
};

struct SweepReport
{
    std::vector<SweepRow> rows;
    double truth_volume_mm3 = 0.0;
    std::size_t truth_voxels = 0;
    std::int64_t extent_low = 0;
    std::int64_t extent_high = 0;
};

struct SweepOptions
{
    Axis axis = Axis::z;
    /// Inclusive range; defaults to every slice where the truth is nonempty.
    std::optional<std::pair<std::int64_t, std::int64_t>> slices;
    InflationConfig config;
    double trim_percent = default_trim_percent;
    std::size_t contour_points = 64;
    /// When > 0, run this many jittered contours on one slice instead.
    int jitter = 0;
    std::uint64_t seed = 1;
};

/// Inclusive [low, high] of slices along `axis` that contain foreground.
std::pair<std::int64_t, std::int64_t> truth_extent(const Mask3D& truth, Axis axis);

/// Each point displaced radially about the centroid by uniform(-f, +f) of its
/// distance to the centroid. Deterministic for a seed.
std::vector<ContourInit> jitter_contours(const ContourInit& base, int count, std::uint64_t seed,
                                         double fraction = 0.10);

SweepReport run_sweep(const Volume3D& vol, const Mask3D& truth, const SweepOptions& options);

/// `slice,volume_mm3,voxels,dsc` followed by one line per row.
std::string sweep_csv(const SweepReport& report);

/// `iteration,avg_center_distance_mm,moved_vertex_count,vertex_count,split_count`
std::string trace_csv(const InflationTrace& trace);

/// Parses "A..B" (or a single integer) into an inclusive range.
std::pair<std::int64_t, std::int64_t> parse_slice_range(const std::string& text);

} // namespace balloonseg
