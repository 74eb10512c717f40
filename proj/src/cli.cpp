#include "balloonseg/cli.hpp"

#include "balloonseg/error.hpp"
#include "balloonseg/metrics.hpp"
#include "balloonseg/phantom.hpp"
#include "balloonseg/serialization.hpp"
#include "balloonseg/service.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

namespace balloonseg {

namespace fs = std::filesystem;

namespace {

fs::path with_suffix(const std::string& prefix, const char* suffix) { return fs::path(prefix + suffix); }

std::string format_number(const char* fmt, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

InflationConfig load_config(const std::string& path)
{
    if (path.empty()) return {};
    return config_from_json(read_json_file(path));
}

// --- phantom -------------------------------------------------------------

int cmd_phantom(const std::string& spec_path, const std::string& prefix, std::ostream& out)
{
    PhantomSpec spec;
    if (!spec_path.empty()) spec = phantom_spec_from_json(read_json_file(spec_path));
    const Phantom p = generate_phantom(spec);
    save_volume(p.volume, with_suffix(prefix, "_vol.nrrd"));
    save_mask(p.truth, with_suffix(prefix, "_truth.nrrd"));
    write_json_file(contour_to_json(p.suggested_contour), with_suffix(prefix, "_contour.json"));

    const MaskVolume mv = volume_from_mask(p.truth);
    const auto [low, high] = truth_extent(p.truth, Axis::z);
    Json meta = {
        {"spec", phantom_spec_to_json(spec)},
        {"truth_voxels", mv.voxel_count},
        {"truth_volume_mm3", mv.volume_mm3},
        {"truth_slice_extent_z", {low, high}},
        {"files",
         {{"volume", with_suffix(prefix, "_vol.nrrd").filename().string()},
          {"truth", with_suffix(prefix, "_truth.nrrd").filename().string()},
          {"contour", with_suffix(prefix, "_contour.json").filename().string()}}},
    };
    write_json_file(meta, with_suffix(prefix, "_meta.json"));
    out << meta.dump(2) << '\n';
    return exit_ok;
}

// --- segment -------------------------------------------------------------

struct SegmentArgs
{
    std::string volume;
    std::string contour;
    std::string config;
    std::string truth;
    std::string out;
    double trim = default_trim_percent;
};

int cmd_segment(const SegmentArgs& a, std::ostream& out)
{
    const Volume3D vol = load_volume(a.volume);
    const ContourInit contour = contour_from_json(read_json_file(a.contour));
    const InflationConfig cfg = load_config(a.config);
    std::optional<Mask3D> truth;
    if (!a.truth.empty()) truth = load_mask(a.truth);

    const InitParams init = process_contour(vol, contour, a.trim);
    const SegmentationResult r = segment(vol, init, cfg, truth ? &*truth : nullptr);

    save_mask(r.mask, with_suffix(a.out, "_mask.nrrd"));
    export_mesh(r.mesh, with_suffix(a.out, "_mesh.obj"), MeshFormat::obj);
    write_text(with_suffix(a.out, "_trace.csv"), trace_csv(r.trace));
    const Json metrics = segmentation_metrics_json(r);
    write_json_file(metrics, with_suffix(a.out, "_metrics.json"));
    out << metrics.dump(2) << '\n';
    return exit_ok;
}

// --- evaluate ------------------------------------------------------------

int cmd_evaluate(const std::string& pred, const std::string& truth, std::ostream& out)
{
    const EvalReport r = evaluate(load_mask(pred), load_mask(truth));
    out << eval_report_to_json(r).dump(2) << '\n';
    return exit_ok;
}

// --- sweep ---------------------------------------------------------------

struct SweepArgs
{
    std::string volume;
    std::string truth;
    std::string slices;
    std::string config;
    std::string out;
    std::string axis = "z";
    double trim = default_trim_percent;
    int jitter = 0;
    std::uint64_t seed = 1;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out)
{
    const Volume3D vol = load_volume(a.volume);
    const Mask3D truth = load_mask(a.truth);
    SweepOptions opt;
    opt.axis = parse_axis(a.axis[0]);
    if (!a.slices.empty()) opt.slices = parse_slice_range(a.slices);
    opt.config = load_config(a.config);
    opt.trim_percent = a.trim;
    opt.jitter = a.jitter;
    opt.seed = a.seed;
    const SweepReport report = run_sweep(vol, truth, opt);
    write_text(a.out, sweep_csv(report));

    Json rows = Json::array();
    for (const SweepRow& r : report.rows) {
        Json row = {{"slice_index", r.slice_index}};
        row["tumor_volume_mm3_algorithm"] = r.volume_mm3 ? Json(*r.volume_mm3) : Json();
        row["voxel_count_algorithm"] = r.voxels ? Json(*r.voxels) : Json();
        row["dsc_percent"] = r.dsc_percent ? Json(*r.dsc_percent) : Json();
        if (!r.error.empty()) row["error"] = r.error;
        rows.push_back(row);
    }
    const Json summary = {
        {"rows", rows},
        {"truth_volume_mm3", report.truth_volume_mm3},
        {"truth_voxels", report.truth_voxels},
        {"slice_extent", {report.extent_low, report.extent_high}},
    };
    out << summary.dump(2) << '\n';
    return exit_ok;
}

} // namespace

std::pair<std::int64_t, std::int64_t> parse_slice_range(const std::string& text)
{
    auto parse_int = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return static_cast<std::int64_t>(v);
        } catch (const std::exception&) {
            throw ValidationError("--slices: cannot parse '" + text + "' (expected A..B)");
        }
    };
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        const auto v = parse_int(text);
        return {v, v};
    }
    const auto lo = parse_int(text.substr(0, dots));
    const auto hi = parse_int(text.substr(dots + 2));
    if (lo > hi) throw ValidationError("--slices: range " + text + " is empty");
    return {lo, hi};
}

std::pair<std::int64_t, std::int64_t> truth_extent(const Mask3D& truth, Axis axis)
{
    const std::size_t a = axis_index(axis);
    std::int64_t low = -1;
    std::int64_t high = -1;
    for (std::int64_t k = 0; k < truth.dims().nz; ++k) {
        for (std::int64_t j = 0; j < truth.dims().ny; ++j) {
            for (std::int64_t i = 0; i < truth.dims().nx; ++i) {
                if (!truth.at(i, j, k)) continue;
                const std::int64_t idx[3] = {i, j, k};
                if (low < 0 || idx[a] < low) low = idx[a];
                if (idx[a] > high) high = idx[a];
            }
        }
    }
    if (low < 0) throw ValidationError("truth mask is empty");
    return {low, high};
}

std::vector<ContourInit> jitter_contours(const ContourInit& base, int count, std::uint64_t seed, double fraction)
{
    const Vec3 c3 = contour_centroid(base);
    const auto [fast, slow] = in_plane_axes(base.axis);
    const Point2 c{c3[fast], c3[slow]};
    std::mt19937_64 engine(seed);
    auto uniform = [&] { return static_cast<double>(engine() >> 11) * 0x1.0p-53; };

    std::vector<ContourInit> out;
    for (int n = 0; n < count; ++n) {
        ContourInit j = base;
        for (Point2& p : j.points) {
            const double scale = 1.0 + fraction * (2.0 * uniform() - 1.0);
            p = {c.u + (p.u - c.u) * scale, c.v + (p.v - c.v) * scale};
        }
        out.push_back(std::move(j));
    }
    return out;
}

SweepReport run_sweep(const Volume3D& vol, const Mask3D& truth, const SweepOptions& options)
{
    if (truth.dims() != vol.dims())
        throw ValidationError("truth mask dims differ from the volume");
    SweepReport report;
    const MaskVolume tv = volume_from_mask(truth);
    report.truth_voxels = tv.voxel_count;
    report.truth_volume_mm3 = tv.volume_mm3;
    std::tie(report.extent_low, report.extent_high) = truth_extent(truth, options.axis);

    auto run_one = [&](std::int64_t slice, const ContourInit* given) {
        SweepRow row;
        row.slice_index = slice;
        try {
            const ContourInit contour =
                given ? *given : contour_from_mask(truth, options.axis, slice, options.contour_points).contour;
            const InitParams init = process_contour(vol, contour, options.trim_percent);
            const SegmentationResult r = segment(vol, init, options.config, &truth);
            row.volume_mm3 = r.volume_mm3;
            row.voxels = r.voxel_count;
            row.dsc_percent = r.dsc_vs_truth;
        } catch (const Error& e) {
            row.error = e.what();
        }
        return row;
    };

    if (options.jitter > 0) {
        const std::int64_t slice =
            options.slices ? options.slices->first : (report.extent_low + report.extent_high) / 2;
        const ContourInit base = contour_from_mask(truth, options.axis, slice, options.contour_points).contour;
        for (const ContourInit& c : jitter_contours(base, options.jitter, options.seed))
            report.rows.push_back(run_one(slice, &c));
        return report;
    }

    const auto [low, high] = options.slices.value_or(std::make_pair(report.extent_low, report.extent_high));
    const std::int64_t n = vol.dims()[axis_index(options.axis)];
    for (std::int64_t s = std::max<std::int64_t>(low, 0); s <= std::min(high, n - 1); ++s)
        report.rows.push_back(run_one(s, nullptr));
    return report;
}

std::string sweep_csv(const SweepReport& report)
{
    std::ostringstream os;
    os << "slice,volume_mm3,voxels,dsc\n";
    for (const SweepRow& r : report.rows) {
        os << r.slice_index << ',';
        if (r.volume_mm3) os << format_number("%.6f", *r.volume_mm3);
        os << ',';
        if (r.voxels) os << *r.voxels;
        os << ',';
        if (r.dsc_percent) os << format_number("%.4f", *r.dsc_percent);
        os << '\n';
    }
    return os.str();
}

std::string trace_csv(const InflationTrace& trace)
{
    std::ostringstream os;
    os << "iteration,avg_center_distance_mm,moved_vertex_count,vertex_count,split_count\n";
    for (const TraceRecord& r : trace.records) {
        os << r.iteration << ',' << format_number("%.17g", r.avg_center_distance_mm) << ',' << r.moved_vertex_count
           << ',' << r.vertex_count << ',' << r.split_count << '\n';
    }
    return os.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Semi-automatic balloon-inflation tumor segmentation"};
    app.require_subcommand(1);

    std::string phantom_spec;
    std::string phantom_out;
    auto* phantom = app.add_subcommand("phantom", "Generate a synthetic phantom with ground truth");
    phantom->add_option("--spec", phantom_spec, "PhantomSpec JSON (defaults to the standard sphere phantom)");
    phantom->add_option("--out", phantom_out, "Output prefix")->required();

    SegmentArgs seg;
    auto* segment_cmd = app.add_subcommand("segment", "Segment a volume from a contour");
    segment_cmd->add_option("--volume", seg.volume, "Volume (.nrrd or .json sidecar)")->required();
    segment_cmd->add_option("--contour", seg.contour, "Contour JSON")->required();
    segment_cmd->add_option("--config", seg.config, "InflationConfig JSON");
    segment_cmd->add_option("--truth", seg.truth, "Ground-truth mask for DSC");
    segment_cmd->add_option("--trim", seg.trim, "Percent trimmed from each intensity tail")->capture_default_str();
    segment_cmd->add_option("--out", seg.out, "Output prefix")->required();

    std::string eval_pred;
    std::string eval_truth;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Dice overlap of two masks");
    evaluate_cmd->add_option("--pred", eval_pred, "Predicted mask")->required();
    evaluate_cmd->add_option("--truth", eval_truth, "Reference mask")->required();

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Initialization-robustness sweep over truth slices");
    sweep->add_option("--volume", sw.volume, "Volume")->required();
    sweep->add_option("--truth", sw.truth, "Ground-truth mask")->required();
    sweep->add_option("--slices", sw.slices, "Inclusive slice range A..B")
        ->check(CLI::Validator(
            [](std::string& text) {
                try {
                    (void)parse_slice_range(text);
                } catch (const std::exception& e) {
                    return std::string(e.what());
                }
                return std::string();
            },
            "A..B"));
    sweep->add_option("--axis", sw.axis, "Slice axis")->capture_default_str()->check(CLI::IsMember({"x", "y", "z"}));
    sweep->add_option("--config", sw.config, "InflationConfig JSON");
    sweep->add_option("--trim", sw.trim, "Percent trimmed from each intensity tail")->capture_default_str();
    sweep->add_option("--jitter", sw.jitter, "Number of jittered contours on one slice")->check(CLI::NonNegativeNumber);
    sweep->add_option("--seed", sw.seed, "Jitter seed")->capture_default_str();
    sweep->add_option("--out", sw.out, "Output CSV")->required();

    std::string serve_volume;
    std::string serve_truth;
    std::string serve_host = "127.0.0.1";
    int serve_port = default_service_port;
    auto* serve = app.add_subcommand("serve", "HTTP service for the browser UI");
    serve->add_option("--volume", serve_volume, "Volume")->required();
    serve->add_option("--truth", serve_truth, "Optional ground-truth mask");
    serve->add_option("--host", serve_host, "Bind address")->capture_default_str();
    serve->add_option("--port", serve_port, "Port")->capture_default_str()->check(CLI::Range(0, 65535));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage_error;
    }

    try {
        if (*phantom) return cmd_phantom(phantom_spec, phantom_out, out);
        if (*segment_cmd) return cmd_segment(seg, out);
        if (*evaluate_cmd) return cmd_evaluate(eval_pred, eval_truth, out);
        if (*sweep) return cmd_sweep(sw, out);
        if (*serve) {
            std::optional<Mask3D> truth;
            if (!serve_truth.empty()) truth = load_mask(serve_truth);
            Service service(load_volume(serve_volume), std::move(truth));
            err << "serving on http://" << serve_host << ':' << serve_port << '\n';
            service.listen(serve_host, serve_port);
            return exit_ok;
        }
    } catch (const JsonParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_domain_error;
    }
    return exit_usage_error;
}

} // namespace balloonseg
