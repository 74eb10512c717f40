#include "balloonseg/volume.hpp"

#include "balloonseg/error.hpp"

#include <json.hpp>
#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

namespace balloonseg {

namespace fs = std::filesystem;

namespace {

// --- payload encoding (little-endian, x fastest) ---------------------------

template <typename T>
T from_le(const unsigned char* p)
{
    std::array<unsigned char, sizeof(T)> b{};
    std::memcpy(b.data(), p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(b.begin(), b.end());
    T v;
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
}

template <typename T>
void to_le(T v, unsigned char* p)
{
    std::array<unsigned char, sizeof(T)> b{};
    std::memcpy(b.data(), &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(b.begin(), b.end());
    std::memcpy(p, b.data(), sizeof(T));
}

std::vector<double> decode_payload(const std::vector<unsigned char>& bytes, ValueKind kind, std::size_t count)
{
    const std::size_t width = value_kind_bytes(kind);
    std::vector<double> out(count);
    const unsigned char* p = bytes.data();
    for (std::size_t i = 0; i < count; ++i, p += width) {
        switch (kind) {
        case ValueKind::uint8: out[i] = *p; break;
        case ValueKind::int16: out[i] = from_le<std::int16_t>(p); break;
        case ValueKind::uint16: out[i] = from_le<std::uint16_t>(p); break;
        case ValueKind::float32: out[i] = from_le<float>(p); break;
        }
    }
    return out;
}

std::vector<unsigned char> encode_payload(std::span<const double> scalars, ValueKind kind)
{
    const std::size_t width = value_kind_bytes(kind);
    std::vector<unsigned char> out(scalars.size() * width);
    unsigned char* p = out.data();
    for (double v : scalars) {
        const double q = quantize(v, kind);
        switch (kind) {
        case ValueKind::uint8: *p = static_cast<unsigned char>(q); break;
        case ValueKind::int16: to_le(static_cast<std::int16_t>(q), p); break;
        case ValueKind::uint16: to_le(static_cast<std::uint16_t>(q), p); break;
        case ValueKind::float32: to_le(static_cast<float>(q), p); break;
        }
        p += width;
    }
    return out;
}

std::vector<unsigned char> gunzip(const unsigned char* data, std::size_t size)
{
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK)
        throw IoError("encoding: gzip: inflateInit failed");
    zs.next_in = const_cast<unsigned char*>(data);
    zs.avail_in = static_cast<uInt>(size);
    std::vector<unsigned char> out;
    std::array<unsigned char, 1 << 16> chunk{};
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = chunk.data();
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw IoError("encoding: gzip: corrupt or truncated payload");
        }
        out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw IoError("encoding: gzip: truncated payload");
        }
    }
    inflateEnd(&zs);
    return out;
}

std::vector<unsigned char> gzip(const std::vector<unsigned char>& data)
{
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw IoError("gzip: deflateInit failed");
    zs.next_in = const_cast<unsigned char*>(data.data());
    zs.avail_in = static_cast<uInt>(data.size());
    std::vector<unsigned char> out(deflateBound(&zs, static_cast<uLong>(data.size())));
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END)
        throw IoError("gzip: deflate failed");
    out.resize(zs.total_out);
    return out;
}

std::vector<unsigned char> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& header, const std::vector<unsigned char>& payload)
{
    if (path.empty())
        throw IoError("output path is empty");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!out)
        throw IoError("write to '" + path.string() + "' failed");
}

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string fmt_double(double v)
{
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    return os.str();
}

// --- NRRD -------------------------------------------------------------------

ValueKind parse_nrrd_type(const std::string& t)
{
    static const std::map<std::string, ValueKind> names = {
        {"uchar", ValueKind::uint8},          {"unsigned char", ValueKind::uint8},
        {"uint8", ValueKind::uint8},          {"uint8_t", ValueKind::uint8},
        {"short", ValueKind::int16},          {"short int", ValueKind::int16},
        {"signed short", ValueKind::int16},   {"signed short int", ValueKind::int16},
        {"int16", ValueKind::int16},          {"int16_t", ValueKind::int16},
        {"ushort", ValueKind::uint16},        {"unsigned short", ValueKind::uint16},
        {"unsigned short int", ValueKind::uint16}, {"uint16", ValueKind::uint16},
        {"uint16_t", ValueKind::uint16},      {"float", ValueKind::float32},
    };
    const auto it = names.find(t);
    if (it == names.end())
        throw IoError("type: unsupported NRRD type '" + t + "' (expected uchar, short, ushort or float)");
    return it->second;
}

std::string nrrd_type_name(ValueKind kind)
{
    switch (kind) {
    case ValueKind::uint8: return "uchar";
    case ValueKind::int16: return "short";
    case ValueKind::uint16: return "ushort";
    case ValueKind::float32: return "float";
    }
    return "float";
}

std::vector<double> parse_numbers(const std::string& field, const std::string& value, std::size_t expected)
{
    std::istringstream is(value);
    is.imbue(std::locale::classic());
    std::vector<double> out;
    std::string tok;
    while (is >> tok) {
        if (tok == "nan" || tok == "NaN") {
            out.push_back(std::nan(""));
            continue;
        }
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw IoError(field + ": cannot parse '" + tok + "' as a number");
        }
    }
    if (out.size() != expected)
        throw IoError(field + ": expected " + std::to_string(expected) + " values, got " + std::to_string(out.size()));
    return out;
}

Vec3 parse_space_directions(const std::string& value)
{
    std::vector<std::array<double, 3>> vectors;
    std::size_t pos = 0;
    while ((pos = value.find('(', pos)) != std::string::npos) {
        const auto close = value.find(')', pos);
        if (close == std::string::npos)
            throw IoError("space directions: unbalanced parenthesis");
        std::string inner = value.substr(pos + 1, close - pos - 1);
        std::replace(inner.begin(), inner.end(), ',', ' ');
        const auto nums = parse_numbers("space directions", inner, 3);
        vectors.push_back({nums[0], nums[1], nums[2]});
        pos = close + 1;
    }
    if (vectors.size() != 3)
        throw IoError("space directions: expected 3 vectors, got " + std::to_string(vectors.size()));
    Vec3 spacing;
    for (std::size_t a = 0; a < 3; ++a) {
        const double diag = std::abs(vectors[a][a]);
        for (std::size_t b = 0; b < 3; ++b) {
            if (b != a && std::abs(vectors[a][b]) > 1e-9 * std::max(1.0, diag))
                throw IoError("space directions: non-axis-aligned directions are not supported");
        }
        spacing[a] = diag;
    }
    return spacing;
}

Volume3D load_nrrd(const fs::path& path)
{
    const std::vector<unsigned char> bytes = read_file(path);
    std::size_t pos = 0;
    auto next_line = [&](std::string& line) {
        if (pos >= bytes.size()) return false;
        const auto* begin = bytes.data() + pos;
        const auto* end = bytes.data() + bytes.size();
        const auto* nl = std::find(begin, end, static_cast<unsigned char>('\n'));
        line.assign(begin, nl);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = static_cast<std::size_t>(nl - bytes.data()) + (nl == end ? 0 : 1);
        return nl != end;
    };

    std::string line;
    if (!next_line(line) || line.rfind("NRRD000", 0) != 0)
        throw IoError("'" + path.string() + "': missing NRRD magic line");

    std::map<std::string, std::string> fields;
    bool header_done = false;
    while (next_line(line)) {
        if (line.empty()) {
            header_done = true;
            break;
        }
        if (line[0] == '#') continue;
        if (line.find(":=") != std::string::npos) continue; // key/value pairs carry no layout info
        const auto colon = line.find(':');
        if (colon == std::string::npos)
            throw IoError("'" + path.string() + "': malformed header line '" + line + "'");
        fields[trim(line.substr(0, colon))] = trim(line.substr(colon + 1));
    }
    if (!header_done)
        throw IoError("'" + path.string() + "': header not terminated by a blank line (detached headers unsupported)");

    auto require = [&](const std::string& key) -> const std::string& {
        const auto it = fields.find(key);
        if (it == fields.end())
            throw IoError(key + ": required NRRD field missing in '" + path.string() + "'");
        return it->second;
    };

    if (fields.count("data file") || fields.count("datafile"))
        throw IoError("data file: detached payloads are not supported");
    if (const auto it = fields.find("byte skip"); it != fields.end() && it->second != "0")
        throw IoError("byte skip: only 0 is supported");
    if (const auto it = fields.find("line skip"); it != fields.end() && it->second != "0")
        throw IoError("line skip: only 0 is supported");
    if (require("dimension") != "3")
        throw IoError("dimension: only 3 is supported, got " + fields["dimension"]);
    if (const auto it = fields.find("space dimension"); it != fields.end() && it->second != "3")
        throw IoError("space dimension: only 3 is supported");

    const ValueKind kind = parse_nrrd_type(require("type"));
    const auto sizes = parse_numbers("sizes", require("sizes"), 3);
    Dims dims;
    for (double s : sizes) {
        if (s < 1 || s != std::floor(s))
            throw IoError("sizes: entries must be positive integers");
    }
    dims = {static_cast<std::int64_t>(sizes[0]), static_cast<std::int64_t>(sizes[1]),
            static_cast<std::int64_t>(sizes[2])};

    Vec3 spacing{1.0, 1.0, 1.0};
    if (const auto it = fields.find("space directions"); it != fields.end()) {
        spacing = parse_space_directions(it->second);
    } else if (const auto sp = fields.find("spacings"); sp != fields.end()) {
        const auto s = parse_numbers("spacings", sp->second, 3);
        for (std::size_t a = 0; a < 3; ++a)
            spacing[a] = std::isnan(s[a]) ? 1.0 : s[a];
    }
    for (std::size_t a = 0; a < 3; ++a) {
        if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
            throw IoError("spacings: must be finite and > 0");
    }

    if (value_kind_bytes(kind) > 1) {
        const auto it = fields.find("endian");
        if (it == fields.end())
            throw IoError("endian: required for multi-byte types");
        if (it->second != "little")
            throw IoError("endian: only little is supported, got '" + it->second + "'");
    }

    const std::string encoding = require("encoding");
    std::vector<unsigned char> payload;
    if (encoding == "raw") {
        payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
    } else if (encoding == "gzip" || encoding == "gz") {
        payload = gunzip(bytes.data() + pos, bytes.size() - pos);
    } else {
        throw IoError("encoding: unsupported '" + encoding + "' (expected raw or gzip)");
    }

    const std::size_t expected = dims.count() * value_kind_bytes(kind);
    if (payload.size() != expected)
        throw IoError("sizes: header declares " + std::to_string(dims.count()) + " voxels (" +
                      std::to_string(expected) + " bytes) but payload has " + std::to_string(payload.size()) +
                      " bytes");
    return Volume3D(dims, spacing, decode_payload(payload, kind, dims.count()), kind);
}

void save_nrrd(const Volume3D& vol, const fs::path& path, NrrdEncoding encoding)
{
    const Dims& d = vol.dims();
    const Vec3& s = vol.spacing();
    std::ostringstream h;
    h << "NRRD0004\n"
      << "type: " << nrrd_type_name(vol.kind()) << "\n"
      << "dimension: 3\n"
      << "sizes: " << d.nx << " " << d.ny << " " << d.nz << "\n"
      << "spacings: " << fmt_double(s.x) << " " << fmt_double(s.y) << " " << fmt_double(s.z) << "\n"
      << "endian: little\n"
      << "encoding: " << (encoding == NrrdEncoding::gzip ? "gzip" : "raw") << "\n\n";
    auto payload = encode_payload(vol.scalars(), vol.kind());
    if (encoding == NrrdEncoding::gzip)
        payload = gzip(payload);
    write_file(path, h.str(), payload);
}

// --- raw + JSON sidecar --------------------------------------------------------

Volume3D load_sidecar(const fs::path& path)
{
    nlohmann::json doc;
    try {
        const auto text = read_file(path);
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::exception& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
    try {
        const auto dims_arr = doc.at("dims").get<std::vector<std::int64_t>>();
        const auto spacing_arr = doc.contains("spacing_mm") ? doc.at("spacing_mm").get<std::vector<double>>()
                                                             : std::vector<double>{1.0, 1.0, 1.0};
        if (dims_arr.size() != 3) throw IoError("dims: expected 3 entries");
        if (spacing_arr.size() != 3) throw IoError("spacing_mm: expected 3 entries");
        const ValueKind kind = parse_value_kind(doc.at("dtype").get<std::string>());
        const fs::path data = path.parent_path() / doc.at("data_file").get<std::string>();
        const Dims dims{dims_arr[0], dims_arr[1], dims_arr[2]};
        if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) throw IoError("dims: entries must be >= 1");
        const auto payload = read_file(data);
        const std::size_t expected = dims.count() * value_kind_bytes(kind);
        if (payload.size() != expected)
            throw IoError("data_file: expected " + std::to_string(expected) + " bytes for dims, got " +
                          std::to_string(payload.size()));
        return Volume3D(dims, {spacing_arr[0], spacing_arr[1], spacing_arr[2]},
                        decode_payload(payload, kind, dims.count()), kind);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
}

void save_sidecar(const Volume3D& vol, const fs::path& path)
{
    const fs::path data = fs::path(path).replace_extension(".raw");
    nlohmann::json doc;
    doc["dims"] = {vol.dims().nx, vol.dims().ny, vol.dims().nz};
    doc["spacing_mm"] = {vol.spacing().x, vol.spacing().y, vol.spacing().z};
    doc["dtype"] = value_kind_name(vol.kind());
    doc["data_file"] = data.filename().string();
    write_file(data, {}, encode_payload(vol.scalars(), vol.kind()));
    write_file(path, doc.dump(2) + "\n", {});
}

bool is_sidecar(const fs::path& path) { return path.extension() == ".json"; }

} // namespace

Volume3D load_volume(const fs::path& path)
{
    if (!fs::exists(path))
        throw IoError("'" + path.string() + "' does not exist");
    return is_sidecar(path) ? load_sidecar(path) : load_nrrd(path);
}

void save_volume(const Volume3D& vol, const fs::path& path, NrrdEncoding encoding)
{
    if (path.empty())
        throw IoError("output path is empty");
    if (is_sidecar(path))
        save_sidecar(vol, path);
    else
        save_nrrd(vol, path, encoding);
}

Mask3D load_mask(const fs::path& path)
{
    const Volume3D vol = load_volume(path);
    std::vector<std::uint8_t> bits(vol.scalars().size());
    std::transform(vol.scalars().begin(), vol.scalars().end(), bits.begin(),
                   [](double v) { return static_cast<std::uint8_t>(v != 0.0 ? 1 : 0); });
    return Mask3D(vol.dims(), vol.spacing(), std::move(bits));
}

void save_mask(const Mask3D& mask, const fs::path& path)
{
    save_volume(mask_to_volume(mask), path);
}

} // namespace balloonseg
