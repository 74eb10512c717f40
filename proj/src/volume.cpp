#include "balloonseg/volume.hpp"

#include "balloonseg/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace balloonseg {

std::string value_kind_name(ValueKind kind)
{
    switch (kind) {
    case ValueKind::uint8: return "uint8";
    case ValueKind::int16: return "int16";
    case ValueKind::uint16: return "uint16";
    case ValueKind::float32: return "float32";
    }
    return "float32";
}

ValueKind parse_value_kind(const std::string& name)
{
    if (name == "uint8") return ValueKind::uint8;
    if (name == "int16") return ValueKind::int16;
    if (name == "uint16") return ValueKind::uint16;
    if (name == "float32") return ValueKind::float32;
    throw ValidationError("unsupported dtype '" + name + "' (expected uint8, int16, uint16 or float32)");
}

std::size_t value_kind_bytes(ValueKind kind)
{
    switch (kind) {
    case ValueKind::uint8: return 1;
    case ValueKind::int16:
    case ValueKind::uint16: return 2;
    case ValueKind::float32: return 4;
    }
    return 4;
}

namespace {

double clamp_round(double v, double lo, double hi)
{
    if (std::isnan(v)) return lo;
    return std::clamp(std::nearbyint(v), lo, hi);
}

} // namespace

double quantize(double value, ValueKind kind)
{
    switch (kind) {
    case ValueKind::uint8: return clamp_round(value, 0.0, 255.0);
    case ValueKind::int16: return clamp_round(value, -32768.0, 32767.0);
    case ValueKind::uint16: return clamp_round(value, 0.0, 65535.0);
    case ValueKind::float32: return static_cast<double>(static_cast<float>(value));
    }
    return value;
}

namespace {

void validate_lattice(const Dims& dims, const Vec3& spacing)
{
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1)
        throw ValidationError("dims must all be >= 1");
    for (std::size_t a = 0; a < 3; ++a) {
        if (!std::isfinite(spacing[a]) || spacing[a] <= 0.0)
            throw ValidationError("spacing_mm must be finite and > 0 on every axis");
    }
}

// Lower stencil index and weight along one axis, after clamping into [0, n-1].
struct AxisStencil
{
    std::int64_t i0;
    std::int64_t i1;
    double t;
};

AxisStencil stencil(double p, std::int64_t n)
{
    const double hi = static_cast<double>(n - 1);
    const double c = std::clamp(p, 0.0, hi);
    if (n == 1) return {0, 0, 0.0};
    auto i0 = static_cast<std::int64_t>(std::floor(c));
    if (i0 >= n - 1) i0 = n - 2;
    return {i0, i0 + 1, c - static_cast<double>(i0)};
}

double lerp(double a, double b, double t) { return a + t * (b - a); }

} // namespace

Volume3D::Volume3D(Dims dims, Vec3 spacing_mm, std::vector<double> scalars, ValueKind kind)
    : dims_(dims), spacing_(spacing_mm), scalars_(std::move(scalars)), kind_(kind)
{
    validate_lattice(dims_, spacing_);
    if (scalars_.size() != dims_.count())
        throw ValidationError("scalar count " + std::to_string(scalars_.size()) + " does not match dims product " +
                              std::to_string(dims_.count()));
    for (double& v : scalars_)
        v = quantize(v, kind_);
    const auto [lo, hi] = std::minmax_element(scalars_.begin(), scalars_.end());
    min_ = *lo;
    max_ = *hi;
}

double Volume3D::sample_trilinear(const Vec3& p) const
{
    const AxisStencil sx = stencil(p.x, dims_.nx);
    const AxisStencil sy = stencil(p.y, dims_.ny);
    const AxisStencil sz = stencil(p.z, dims_.nz);

    const double c00 = lerp(at(sx.i0, sy.i0, sz.i0), at(sx.i1, sy.i0, sz.i0), sx.t);
    const double c10 = lerp(at(sx.i0, sy.i1, sz.i0), at(sx.i1, sy.i1, sz.i0), sx.t);
    const double c01 = lerp(at(sx.i0, sy.i0, sz.i1), at(sx.i1, sy.i0, sz.i1), sx.t);
    const double c11 = lerp(at(sx.i0, sy.i1, sz.i1), at(sx.i1, sy.i1, sz.i1), sx.t);
    const double c0 = lerp(c00, c10, sy.t);
    const double c1 = lerp(c01, c11, sy.t);
    return lerp(c0, c1, sz.t);
}

double Volume3D::sample_nearest(const Vec3& p) const
{
    auto nearest = [](double c, std::int64_t n) {
        const double clamped = std::clamp(c, 0.0, static_cast<double>(n - 1));
        return std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(clamped + 0.5)), n - 1);
    };
    return at(nearest(p.x, dims_.nx), nearest(p.y, dims_.ny), nearest(p.z, dims_.nz));
}

double Volume3D::geometric_mean_spacing() const
{
    return std::cbrt(spacing_.x * spacing_.y * spacing_.z);
}

Slice2D Volume3D::extract_slice(Axis axis, std::int64_t index) const
{
    const std::size_t a = axis_index(axis);
    if (index < 0 || index >= dims_[a])
        throw ValidationError("slice index " + std::to_string(index) + " out of range [0, " +
                              std::to_string(dims_[a]) + ") on axis " + axis_name(axis));
    const auto [fast, slow] = in_plane_axes(axis);
    Slice2D s;
    s.width = dims_[fast];
    s.height = dims_[slow];
    s.pixels.resize(static_cast<std::size_t>(s.width * s.height));
    std::int64_t ijk[3] = {0, 0, 0};
    ijk[a] = index;
    for (std::int64_t v = 0; v < s.height; ++v) {
        ijk[slow] = v;
        for (std::int64_t u = 0; u < s.width; ++u) {
            ijk[fast] = u;
            s.pixels[static_cast<std::size_t>(u + v * s.width)] = at(ijk[0], ijk[1], ijk[2]);
        }
    }
    return s;
}

Mask3D::Mask3D(Dims dims, Vec3 spacing_mm) : dims_(dims), spacing_(spacing_mm)
{
    validate_lattice(dims_, spacing_);
    bits_.assign(dims_.count(), 0);
}

Mask3D::Mask3D(Dims dims, Vec3 spacing_mm, std::vector<std::uint8_t> bits)
    : dims_(dims), spacing_(spacing_mm), bits_(std::move(bits))
{
    validate_lattice(dims_, spacing_);
    if (bits_.size() != dims_.count())
        throw ValidationError("mask length does not match dims product");
    for (auto& b : bits_)
        b = b != 0 ? 1 : 0;
}

std::size_t Mask3D::count() const
{
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::uint8_t> Mask3D::extract_slice(Axis axis, std::int64_t index) const
{
    const std::size_t a = axis_index(axis);
    if (index < 0 || index >= dims_[a])
        throw ValidationError("slice index " + std::to_string(index) + " out of range on axis " + axis_name(axis));
    const auto [fast, slow] = in_plane_axes(axis);
    const std::int64_t w = dims_[fast];
    const std::int64_t h = dims_[slow];
    std::vector<std::uint8_t> out(static_cast<std::size_t>(w * h));
    std::int64_t ijk[3] = {0, 0, 0};
    ijk[a] = index;
    for (std::int64_t v = 0; v < h; ++v) {
        ijk[slow] = v;
        for (std::int64_t u = 0; u < w; ++u) {
            ijk[fast] = u;
            out[static_cast<std::size_t>(u + v * w)] = bits_[this->index(ijk[0], ijk[1], ijk[2])];
        }
    }
    return out;
}

Volume3D mask_to_volume(const Mask3D& mask)
{
    std::vector<double> scalars(mask.bits().begin(), mask.bits().end());
    return Volume3D(mask.dims(), mask.spacing(), std::move(scalars), ValueKind::uint8);
}

} // namespace balloonseg
