#pragma once

#include "balloonseg/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace balloonseg {

struct Dims
{
    std::int64_t nx = 0;
    std::int64_t ny = 0;
    std::int64_t nz = 0;

    std::int64_t operator[](std::size_t i) const { return i == 0 ? nx : (i == 1 ? ny : nz); }
    std::size_t count() const { return static_cast<std::size_t>(nx * ny * nz); }

    friend bool operator==(const Dims&, const Dims&) = default;
};

/// On-disk sample type. Scalars are always held as doubles; the kind only
/// governs how they are stored and which values are representable.
enum class ValueKind : std::uint8_t { uint8, int16, uint16, float32 };

std::string value_kind_name(ValueKind kind);
ValueKind parse_value_kind(const std::string& name);
std::size_t value_kind_bytes(ValueKind kind);

/// Round/clamp a real value to what `kind` can represent exactly.
double quantize(double value, ValueKind kind);

/// Row-major 2D image; `width` runs along the fast in-plane axis.
struct Slice2D
{
    std::int64_t width = 0;
    std::int64_t height = 0;
    std::vector<double> pixels;

    double at(std::int64_t i, std::int64_t j) const { return pixels[static_cast<std::size_t>(i + j * width)]; }
};

/// Anisotropic scalar volume, x fastest then y then z. Immutable after
/// construction.
class Volume3D
{
public:
    Volume3D() = default;
    /// Validates dims/spacing/length and quantizes every scalar to `kind`.
    Volume3D(Dims dims, Vec3 spacing_mm, std::vector<double> scalars, ValueKind kind = ValueKind::float32);

    const Dims& dims() const { return dims_; }
    const Vec3& spacing() const { return spacing_; }
    ValueKind kind() const { return kind_; }
    std::span<const double> scalars() const { return scalars_; }

    std::size_t index(std::int64_t i, std::int64_t j, std::int64_t k) const
    {
        return static_cast<std::size_t>(i + dims_.nx * (j + dims_.ny * k));
    }
    double at(std::int64_t i, std::int64_t j, std::int64_t k) const { return scalars_[index(i, j, k)]; }

    double min_value() const { return min_; }
    double max_value() const { return max_; }

    /// Trilinear interpolation at a continuous voxel coordinate, each axis
    /// clamped to [0, n-1] first.
    double sample_trilinear(const Vec3& p) const;

    /// Value of the voxel whose cell contains `p` (round half up), with the
    /// same border clamp as sample_trilinear.
    double sample_nearest(const Vec3& p) const;

    /// Voxel coordinate of a physical point (index = mm / spacing).
    Vec3 to_voxel(const Vec3& mm) const { return divide(mm, spacing_); }
    Vec3 to_mm(const Vec3& vox) const { return hadamard(vox, spacing_); }

    double voxel_volume_mm3() const { return spacing_.x * spacing_.y * spacing_.z; }
    double geometric_mean_spacing() const;

    Slice2D extract_slice(Axis axis, std::int64_t index) const;

    friend bool operator==(const Volume3D&, const Volume3D&) = default;

private:
    Dims dims_{};
    Vec3 spacing_{1.0, 1.0, 1.0};
    std::vector<double> scalars_;
    ValueKind kind_ = ValueKind::float32;
    double min_ = 0.0;
    double max_ = 0.0;
};

/// Binary mask on the same lattice as a Volume3D.
class Mask3D
{
public:
    Mask3D() = default;
    Mask3D(Dims dims, Vec3 spacing_mm);
    Mask3D(Dims dims, Vec3 spacing_mm, std::vector<std::uint8_t> bits);

    const Dims& dims() const { return dims_; }
    const Vec3& spacing() const { return spacing_; }
    std::span<const std::uint8_t> bits() const { return bits_; }

    std::size_t index(std::int64_t i, std::int64_t j, std::int64_t k) const
    {
        return static_cast<std::size_t>(i + dims_.nx * (j + dims_.ny * k));
    }
    bool at(std::int64_t i, std::int64_t j, std::int64_t k) const { return bits_[index(i, j, k)] != 0; }
    void set(std::int64_t i, std::int64_t j, std::int64_t k, bool v) { bits_[index(i, j, k)] = v ? 1 : 0; }
    void set_index(std::size_t idx, bool v) { bits_[idx] = v ? 1 : 0; }

    std::size_t count() const;
    bool same_lattice(const Mask3D& other) const { return dims_ == other.dims_; }

    /// Row-major bits of a slice, same layout as Volume3D::extract_slice.
    std::vector<std::uint8_t> extract_slice(Axis axis, std::int64_t index) const;

    friend bool operator==(const Mask3D&, const Mask3D&) = default;

private:
    Dims dims_{};
    Vec3 spacing_{1.0, 1.0, 1.0};
    std::vector<std::uint8_t> bits_;
};

enum class NrrdEncoding : std::uint8_t { raw, gzip };

/// Loads a volume from `.nrrd` (attached header) or a `.json` raw sidecar.
Volume3D load_volume(const std::filesystem::path& path);
/// Writes `.nrrd` unless the path ends in `.json`, in which case a sidecar and
/// a `<stem>.raw` payload are written next to it.
void save_volume(const Volume3D& vol, const std::filesystem::path& path,
                 NrrdEncoding encoding = NrrdEncoding::raw);

/// Any nonzero voxel is foreground.
Mask3D load_mask(const std::filesystem::path& path);
/// Always a uint8 volume holding 0/1.
void save_mask(const Mask3D& mask, const std::filesystem::path& path);

Volume3D mask_to_volume(const Mask3D& mask);

} // namespace balloonseg
