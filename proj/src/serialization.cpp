#include "balloonseg/serialization.hpp"

#include "balloonseg/error.hpp"

#include <fstream>
#include <iterator>
#include <set>

namespace balloonseg {

namespace {

template <typename T>
T field(const Json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ValidationError(std::string(key) + ": " + e.what());
    }
}

template <typename T>
void optional_field(const Json& j, const char* key, T& out)
{
    if (j.contains(key)) out = field<T>(j, key);
}

Vec3 vec3_field(const Json& j, const char* key)
{
    const auto v = field<std::vector<double>>(j, key);
    if (v.size() != 3) throw ValidationError(std::string(key) + ": expected 3 numbers");
    return {v[0], v[1], v[2]};
}

Json vec3_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

void reject_unknown(const Json& j, const std::set<std::string>& known, const char* what)
{
    if (!j.is_object()) throw ValidationError(std::string(what) + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ValidationError(std::string(what) + ": unknown field '" + key + "'");
    }
}

} // namespace

Json contour_to_json(const ContourInit& c)
{
    Json pts = Json::array();
    for (const Point2& p : c.points) pts.push_back({p.u, p.v});
    return {{"axis", std::string(1, axis_name(c.axis))}, {"slice_index", c.slice_index}, {"points_vox", pts}};
}

ContourInit contour_from_json(const Json& j)
{
    if (!j.is_object()) throw ContourError("contour: expected a JSON object");
    ContourInit c;
    const auto axis = j.contains("axis") ? field<std::string>(j, "axis") : std::string("z");
    if (axis.size() != 1) throw ContourError("axis: expected one of x, y, z");
    c.axis = parse_axis(axis[0]);
    c.slice_index = field<std::int64_t>(j, "slice_index");
    const auto raw = field<std::vector<std::vector<double>>>(j, "points_vox");
    for (const auto& p : raw) {
        if (p.size() != 2) throw ContourError("points_vox: every point needs exactly 2 coordinates");
        c.points.push_back({p[0], p[1]});
    }
    return c;
}

InflationConfig config_from_json(const Json& j)
{
    reject_unknown(j,
                   {"step_mm", "lambda_smooth", "split_factor", "boundary_fraction", "curvature_cap_H",
                    "min_speed_factor", "stall_window_W", "stall_epsilon", "max_iterations", "initial_radius_mm",
                    "initial_subdivisions", "gate_sampling"},
                   "config");
    InflationConfig cfg;
    if (j.contains("step_mm")) cfg.step_mm = field<double>(j, "step_mm");
    optional_field(j, "lambda_smooth", cfg.lambda_smooth);
    optional_field(j, "split_factor", cfg.split_factor);
    optional_field(j, "boundary_fraction", cfg.boundary_fraction);
    optional_field(j, "curvature_cap_H", cfg.curvature_cap_H);
    optional_field(j, "min_speed_factor", cfg.min_speed_factor);
    optional_field(j, "stall_window_W", cfg.stall_window_W);
    optional_field(j, "stall_epsilon", cfg.stall_epsilon);
    optional_field(j, "max_iterations", cfg.max_iterations);
    if (j.contains("initial_radius_mm")) cfg.initial_radius_mm = field<double>(j, "initial_radius_mm");
    optional_field(j, "initial_subdivisions", cfg.initial_subdivisions);
    if (j.contains("gate_sampling")) cfg.gate_sampling = parse_gate_sampling(field<std::string>(j, "gate_sampling"));
    return cfg;
}

Json config_to_json(const InflationConfig& cfg)
{
    Json j = {
        {"lambda_smooth", cfg.lambda_smooth},
        {"split_factor", cfg.split_factor},
        {"boundary_fraction", cfg.boundary_fraction},
        {"curvature_cap_H", cfg.curvature_cap_H},
        {"min_speed_factor", cfg.min_speed_factor},
        {"stall_window_W", cfg.stall_window_W},
        {"stall_epsilon", cfg.stall_epsilon},
        {"max_iterations", cfg.max_iterations},
        {"initial_subdivisions", cfg.initial_subdivisions},
        {"gate_sampling", gate_sampling_name(cfg.gate_sampling)},
    };
    if (cfg.step_mm) j["step_mm"] = *cfg.step_mm;
    if (cfg.initial_radius_mm) j["initial_radius_mm"] = *cfg.initial_radius_mm;
    return j;
}

PhantomSpec phantom_spec_from_json(const Json& j)
{
    reject_unknown(j,
                   {"dims", "spacing_mm", "shape", "center_vox", "radii_mm", "lobe_amplitude",
                    "intensity_background", "intensity_interior", "intensity_shell", "shell_thickness_mm",
                    "noise_sigma", "rng_seed"},
                   "phantom spec");
    PhantomSpec s;
    if (j.contains("dims")) {
        const auto d = field<std::vector<std::int64_t>>(j, "dims");
        if (d.size() != 3) throw ValidationError("dims: expected 3 integers");
        s.dims = {d[0], d[1], d[2]};
        // Unless given, keep the object centered in the requested lattice.
        s.center_vox = {static_cast<double>(d[0] / 2), static_cast<double>(d[1] / 2), static_cast<double>(d[2] / 2)};
    }
    if (j.contains("spacing_mm")) s.spacing_mm = vec3_field(j, "spacing_mm");
    if (j.contains("shape")) s.shape = parse_phantom_shape(field<std::string>(j, "shape"));
    if (j.contains("center_vox")) s.center_vox = vec3_field(j, "center_vox");
    if (j.contains("radii_mm")) s.radii_mm = vec3_field(j, "radii_mm");
    optional_field(j, "lobe_amplitude", s.lobe_amplitude);
    optional_field(j, "intensity_background", s.intensity_background);
    optional_field(j, "intensity_interior", s.intensity_interior);
    optional_field(j, "intensity_shell", s.intensity_shell);
    optional_field(j, "shell_thickness_mm", s.shell_thickness_mm);
    optional_field(j, "noise_sigma", s.noise_sigma);
    optional_field(j, "rng_seed", s.rng_seed);
    return s;
}

Json phantom_spec_to_json(const PhantomSpec& s)
{
    return {
        {"dims", {s.dims.nx, s.dims.ny, s.dims.nz}},
        {"spacing_mm", vec3_json(s.spacing_mm)},
        {"shape", phantom_shape_name(s.shape)},
        {"center_vox", vec3_json(s.center_vox)},
        {"radii_mm", vec3_json(s.radii_mm)},
        {"lobe_amplitude", s.lobe_amplitude},
        {"intensity_background", s.intensity_background},
        {"intensity_interior", s.intensity_interior},
        {"intensity_shell", s.intensity_shell},
        {"shell_thickness_mm", s.shell_thickness_mm},
        {"noise_sigma", s.noise_sigma},
        {"rng_seed", s.rng_seed},
    };
}

Json eval_report_to_json(const EvalReport& r)
{
    return {
        {"dsc_percent", r.dsc_percent},   {"volume_a_mm3", r.volume_a_mm3}, {"volume_b_mm3", r.volume_b_mm3},
        {"voxels_a", r.voxels_a},         {"voxels_b", r.voxels_b},         {"voxels_intersection", r.voxels_intersection},
    };
}

Json init_params_to_json(const InitParams& p)
{
    return {
        {"center_vox", vec3_json(p.center_vox)},
        {"intensity_lo", p.intensity_lo},
        {"intensity_hi", p.intensity_hi},
        {"avg_radius_mm", p.avg_radius_mm},
    };
}

Json segmentation_metrics_json(const SegmentationResult& r)
{
    Json j = {
        {"volume_mm3", r.volume_mm3},
        {"volume_cm3", r.volume_mm3 / mm3_per_cm3},
        {"voxel_count", r.voxel_count},
        {"iterations", r.trace.records.size()},
        {"termination_reason", termination_reason_name(r.trace.termination_reason)},
        {"runtime_ms", r.runtime_ms},
        {"star_shape_score", r.star_shape_score},
        {"vertex_count", r.mesh.vertex_count()},
        {"triangle_count", r.mesh.face_count()},
        {"init", init_params_to_json(r.init)},
        {"config", config_to_json(r.config)},
    };
    if (r.dsc_vs_truth) j["dsc_percent"] = *r.dsc_vs_truth;
    return j;
}

Json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw JsonParseError("'" + path.string() + "': JSON parse error at byte " + std::to_string(e.byte) + ": " +
                             e.what());
    }
}

void write_json_file(const Json& j, const std::filesystem::path& path)
{
    if (path.empty()) throw IoError("output path is empty");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

} // namespace balloonseg
