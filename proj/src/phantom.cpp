#include "balloonseg/phantom.hpp"

#include "balloonseg/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace balloonseg {

std::string phantom_shape_name(PhantomShape s)
{
    switch (s) {
    case PhantomShape::sphere: return "sphere";
    case PhantomShape::ellipsoid: return "ellipsoid";
    case PhantomShape::lobed: return "lobed";
    }
    return "sphere";
}

PhantomShape parse_phantom_shape(const std::string& name)
{
    if (name == "sphere") return PhantomShape::sphere;
    if (name == "ellipsoid") return PhantomShape::ellipsoid;
    if (name == "lobed") return PhantomShape::lobed;
    throw ValidationError("shape: unknown phantom shape '" + name + "' (expected sphere, ellipsoid or lobed)");
}

namespace {

double max_radius(const PhantomSpec& s)
{
    switch (s.shape) {
    case PhantomShape::sphere: return s.radii_mm.x;
    case PhantomShape::ellipsoid: return std::max({s.radii_mm.x, s.radii_mm.y, s.radii_mm.z});
    case PhantomShape::lobed: return s.radii_mm.x * (1.0 + s.lobe_amplitude);
    }
    return s.radii_mm.x;
}

void require(bool ok, const std::string& field, const std::string& what)
{
    if (!ok) throw ValidationError(field + ": " + what);
}

// Box-Muller on a named 64-bit engine so noise is reproducible for a seed.
class GaussianSource
{
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double next()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace

void validate_phantom_spec(const PhantomSpec& s)
{
    require(s.dims.nx >= 1 && s.dims.ny >= 1 && s.dims.nz >= 1, "dims", "entries must be >= 1");
    for (std::size_t a = 0; a < 3; ++a) {
        require(std::isfinite(s.spacing_mm[a]) && s.spacing_mm[a] > 0.0, "spacing_mm", "entries must be > 0");
        require(std::isfinite(s.center_vox[a]), "center_vox", "entries must be finite");
    }
    const bool ellipsoid = s.shape == PhantomShape::ellipsoid;
    for (std::size_t a = 0; a < (ellipsoid ? 3u : 1u); ++a)
        require(std::isfinite(s.radii_mm[a]) && s.radii_mm[a] > 0.0, "radii_mm", "entries must be > 0");
    require(s.lobe_amplitude >= 0.0 && s.lobe_amplitude <= 0.3, "lobe_amplitude", "must lie in [0, 0.3]");
    require(std::isfinite(s.intensity_background) && std::isfinite(s.intensity_interior) &&
                std::isfinite(s.intensity_shell),
            "intensity_*", "must be finite");
    require(s.intensity_shell > s.intensity_interior, "intensity_shell", "must exceed intensity_interior");
    require(s.intensity_interior > s.intensity_background, "intensity_interior",
            "must exceed intensity_background");
    require(std::isfinite(s.shell_thickness_mm) && s.shell_thickness_mm > 0.0, "shell_thickness_mm", "must be > 0");
    require(std::isfinite(s.noise_sigma) && s.noise_sigma >= 0.0, "noise_sigma", "must be >= 0");

    const double extent_mm = max_radius(s) + s.shell_thickness_mm;
    for (std::size_t a = 0; a < 3; ++a) {
        const double extent = extent_mm / s.spacing_mm[a];
        const double n = static_cast<double>(s.dims[a]);
        if (s.center_vox[a] - extent < 2.0 || s.center_vox[a] + extent > n - 3.0)
            throw ValidationError(std::string("center_vox/radii_mm: object does not fit inside the volume with a "
                                              "2-voxel margin on axis ") +
                                  axis_name(static_cast<Axis>(a)));
    }
}

double phantom_surface_radius(const PhantomSpec& s, const Vec3& q)
{
    const double len = norm(q);
    switch (s.shape) {
    case PhantomShape::sphere: return s.radii_mm.x;
    case PhantomShape::ellipsoid: {
        if (len == 0.0) return std::min({s.radii_mm.x, s.radii_mm.y, s.radii_mm.z});
        const Vec3 u = q / len;
        const double k = (u.x / s.radii_mm.x) * (u.x / s.radii_mm.x) + (u.y / s.radii_mm.y) * (u.y / s.radii_mm.y) +
                         (u.z / s.radii_mm.z) * (u.z / s.radii_mm.z);
        return 1.0 / std::sqrt(k);
    }
    case PhantomShape::lobed: {
        if (len == 0.0) return s.radii_mm.x;
        const double azimuth = std::atan2(q.y, q.x);
        const double polar = std::acos(std::clamp(q.z / len, -1.0, 1.0));
        return s.radii_mm.x * (1.0 + s.lobe_amplitude * std::sin(3.0 * azimuth) * std::sin(2.0 * polar));
    }
    }
    return s.radii_mm.x;
}

double phantom_radial_ratio(const PhantomSpec& s, const Vec3& q)
{
    const double len = norm(q);
    if (len == 0.0) return 0.0;
    return len / phantom_surface_radius(s, q);
}

Phantom generate_phantom(const PhantomSpec& spec)
{
    validate_phantom_spec(spec);
    const Dims& d = spec.dims;
    std::vector<double> scalars(d.count(), spec.intensity_background);
    std::vector<std::uint8_t> bits(d.count(), 0);

    std::size_t idx = 0;
    for (std::int64_t k = 0; k < d.nz; ++k) {
        for (std::int64_t j = 0; j < d.ny; ++j) {
            for (std::int64_t i = 0; i < d.nx; ++i, ++idx) {
                const Vec3 q = hadamard(Vec3{static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)} -
                                            spec.center_vox,
                                        spec.spacing_mm);
                const double len = norm(q);
                const double surface = phantom_surface_radius(spec, q);
                if (len <= surface) {
                    bits[idx] = 1;
                    scalars[idx] = spec.intensity_interior;
                } else if (len - surface <= spec.shell_thickness_mm) {
                    scalars[idx] = spec.intensity_shell;
                }
            }
        }
    }
    if (spec.noise_sigma > 0.0) {
        GaussianSource noise(spec.rng_seed);
        for (double& v : scalars) v += spec.noise_sigma * noise.next();
    }

    Phantom p{Volume3D(d, spec.spacing_mm, std::move(scalars), ValueKind::float32),
              Mask3D(d, spec.spacing_mm, std::move(bits)), ContourInit{}};
    const auto slice = static_cast<std::int64_t>(std::llround(spec.center_vox.z));
    p.suggested_contour = contour_from_mask(p.truth, Axis::z, slice, suggested_contour_points).contour;
    return p;
}

namespace {

struct Corner
{
    std::int64_t u;
    std::int64_t v;
    friend bool operator==(const Corner&, const Corner&) = default;
};

} // namespace

TracedContour contour_from_mask(const Mask3D& mask, Axis axis, std::int64_t index, std::size_t n_points)
{
    if (n_points < 8)
        throw ValidationError("contour_from_mask needs n_points >= 8");
    const std::vector<std::uint8_t> slice = mask.extract_slice(axis, index);
    const auto [fast, slow] = in_plane_axes(axis);
    const std::int64_t w = mask.dims()[fast];
    const std::int64_t h = mask.dims()[slow];
    auto fg = [&](std::int64_t u, std::int64_t v) {
        return u >= 0 && v >= 0 && u < w && v < h && slice[static_cast<std::size_t>(u + v * w)] != 0;
    };

    // 8-connected components; keep the largest (first in scan order on ties).
    std::vector<std::int32_t> label(slice.size(), -1);
    std::vector<std::size_t> sizes;
    std::vector<std::int64_t> stack;
    for (std::int64_t start = 0; start < w * h; ++start) {
        if (!slice[static_cast<std::size_t>(start)] || label[static_cast<std::size_t>(start)] >= 0) continue;
        const auto id = static_cast<std::int32_t>(sizes.size());
        sizes.push_back(0);
        stack.push_back(start);
        label[static_cast<std::size_t>(start)] = id;
        while (!stack.empty()) {
            const std::int64_t p = stack.back();
            stack.pop_back();
            ++sizes.back();
            const std::int64_t pu = p % w;
            const std::int64_t pv = p / w;
            for (std::int64_t dv = -1; dv <= 1; ++dv) {
                for (std::int64_t du = -1; du <= 1; ++du) {
                    const std::int64_t nu = pu + du;
                    const std::int64_t nv = pv + dv;
                    if (!fg(nu, nv)) continue;
                    auto& l = label[static_cast<std::size_t>(nu + nv * w)];
                    if (l < 0) {
                        l = id;
                        stack.push_back(nu + nv * w);
                    }
                }
            }
        }
    }
    if (sizes.empty())
        throw ContourError("slice " + std::to_string(index) + " on axis " + axis_name(axis) + " has no foreground");
    const auto best =
        static_cast<std::int32_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    auto in_best = [&](std::int64_t u, std::int64_t v) {
        return fg(u, v) && label[static_cast<std::size_t>(u + v * w)] == best;
    };

    // Directed pixel-edge outline with the component on the left. Corner
    // (u, v) sits at slice coordinate (u - 0.5, v - 0.5).
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Corner>> out_edges;
    for (std::int64_t v = 0; v < h; ++v) {
        for (std::int64_t u = 0; u < w; ++u) {
            if (!in_best(u, v)) continue;
            if (!in_best(u, v - 1)) out_edges[{u, v}].push_back({u + 1, v});
            if (!in_best(u + 1, v)) out_edges[{u + 1, v}].push_back({u + 1, v + 1});
            if (!in_best(u, v + 1)) out_edges[{u + 1, v + 1}].push_back({u, v + 1});
            if (!in_best(u - 1, v)) out_edges[{u, v + 1}].push_back({u, v});
        }
    }

    // Follow loops, preferring the rightmost turn at pinch corners so that
    // diagonally touching pixels stay in one outline (8-connectivity).
    std::vector<std::vector<Corner>> loops;
    while (!out_edges.empty()) {
        const auto first = out_edges.begin()->first;
        std::vector<Corner> loop;
        Corner cur{first.first, first.second};
        Corner prev_dir{0, 0};
        while (true) {
            auto it = out_edges.find({cur.u, cur.v});
            if (it == out_edges.end()) break;
            auto& options = it->second;
            std::size_t pick = 0;
            if (options.size() > 1 && (prev_dir.u != 0 || prev_dir.v != 0)) {
                for (std::size_t o = 0; o < options.size(); ++o) {
                    const Corner dir{options[o].u - cur.u, options[o].v - cur.v};
                    // right turn: cross(prev, dir) < 0
                    if (prev_dir.u * dir.v - prev_dir.v * dir.u < 0) pick = o;
                }
            }
            const Corner next = options[pick];
            options.erase(options.begin() + static_cast<std::ptrdiff_t>(pick));
            if (options.empty()) out_edges.erase(it);
            loop.push_back(cur);
            prev_dir = {next.u - cur.u, next.v - cur.v};
            cur = next;
        }
        loops.push_back(std::move(loop));
    }

    auto loop_area = [](const std::vector<Corner>& l) {
        double a = 0.0;
        for (std::size_t i = 0; i < l.size(); ++i) {
            const Corner& p = l[i];
            const Corner& q = l[(i + 1) % l.size()];
            a += static_cast<double>(p.u * q.v - q.u * p.v);
        }
        return a / 2.0;
    };
    const auto outer = std::max_element(loops.begin(), loops.end(), [&](const auto& a, const auto& b) {
        return loop_area(a) < loop_area(b);
    });

    // Corners visited twice (pinches) are pulled slightly into their own
    // pixel so the outline stays simple.
    const std::vector<Corner>& l = *outer;
    std::map<std::pair<std::int64_t, std::int64_t>, int> visits;
    for (const Corner& c : l) ++visits[{c.u, c.v}];
    std::vector<Point2> pts;
    pts.reserve(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
        const Corner& c = l[i];
        Point2 p{static_cast<double>(c.u) - 0.5, static_cast<double>(c.v) - 0.5};
        if (visits[{c.u, c.v}] > 1) {
            const Corner& prev = l[(i + l.size() - 1) % l.size()];
            const Corner& next = l[(i + 1) % l.size()];
            constexpr double inset = 0.05;
            p.u += inset * static_cast<double>((next.u - c.u) - (c.u - prev.u));
            p.v += inset * static_cast<double>((next.v - c.v) - (c.v - prev.v));
        }
        pts.push_back(p);
    }

    TracedContour out;
    out.component_count = sizes.size();
    out.contour.axis = axis;
    out.contour.slice_index = index;
    out.contour.points = resample_closed(pts, n_points);
    validate_contour(out.contour);
    return out;
}

} // namespace balloonseg
