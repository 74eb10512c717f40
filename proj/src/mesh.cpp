#include "balloonseg/mesh.hpp"

#include "balloonseg/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace balloonseg {

namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::uint64_t directed_key(std::uint32_t a, std::uint32_t b)
{
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

Vec3 face_cross(const SurfaceMesh& m, const Triangle& t)
{
    const Vec3& a = m.positions[t[0]];
    return cross(m.positions[t[1]] - a, m.positions[t[2]] - a);
}

void require_closed(const SurfaceMesh& mesh, const char* what)
{
    std::unordered_map<std::uint64_t, int> uses;
    uses.reserve(mesh.triangles.size() * 2);
    for (const Triangle& t : mesh.triangles)
        for (int e = 0; e < 3; ++e)
            ++uses[edge_key(t[e], t[(e + 1) % 3])];
    for (const auto& [key, n] : uses) {
        if (n != 2)
            throw MeshError(std::string(what) + ": mesh is not closed (edge " + std::to_string(key >> 32) + "-" +
                            std::to_string(key & 0xffffffffu) + " used by " + std::to_string(n) + " triangles)");
    }
}

std::vector<std::vector<std::uint32_t>> one_rings(const SurfaceMesh& mesh)
{
    std::vector<std::vector<std::uint32_t>> rings(mesh.positions.size());
    for (const Triangle& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            rings[t[e]].push_back(t[(e + 1) % 3]);
            rings[t[e]].push_back(t[(e + 2) % 3]);
        }
    }
    for (auto& r : rings) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
    }
    return rings;
}

} // namespace

std::size_t edge_count(const SurfaceMesh& mesh)
{
    std::vector<std::uint64_t> keys;
    keys.reserve(mesh.triangles.size() * 3);
    for (const Triangle& t : mesh.triangles)
        for (int e = 0; e < 3; ++e)
            keys.push_back(edge_key(t[e], t[(e + 1) % 3]));
    std::sort(keys.begin(), keys.end());
    return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

MeshCheck check_mesh(const SurfaceMesh& mesh)
{
    MeshCheck c;
    c.vertices = mesh.positions.size();
    c.faces = mesh.triangles.size();
    if (mesh.max_seen.size() != mesh.positions.size())
        c.violations.push_back("max_seen length differs from vertex count");

    std::unordered_map<std::uint64_t, int> directed;
    std::unordered_map<std::uint64_t, int> undirected;
    directed.reserve(c.faces * 3);
    undirected.reserve(c.faces * 2);
    std::vector<bool> referenced(c.vertices, false);
    for (std::size_t f = 0; f < c.faces; ++f) {
        const Triangle& t = mesh.triangles[f];
        if (t[0] >= c.vertices || t[1] >= c.vertices || t[2] >= c.vertices) {
            c.violations.push_back("triangle " + std::to_string(f) + " references a missing vertex");
            continue;
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
            c.violations.push_back("triangle " + std::to_string(f) + " repeats a vertex");
            continue;
        }
        const double area = 0.5 * norm(face_cross(mesh, t));
        if (!(area > 1e-12))
            c.violations.push_back("triangle " + std::to_string(f) + " is degenerate (area " + std::to_string(area) + ")");
        for (int e = 0; e < 3; ++e) {
            referenced[t[e]] = true;
            ++directed[directed_key(t[e], t[(e + 1) % 3])];
            ++undirected[edge_key(t[e], t[(e + 1) % 3])];
        }
    }
    c.edges = undirected.size();
    for (const auto& [key, n] : undirected) {
        if (n != 2) {
            c.violations.push_back("edge " + std::to_string(key >> 32) + "-" + std::to_string(key & 0xffffffffu) +
                                   " is shared by " + std::to_string(n) + " triangles");
        }
    }
    for (const auto& [key, n] : directed) {
        if (n != 1) {
            c.violations.push_back("directed edge " + std::to_string(key >> 32) + "->" +
                                   std::to_string(key & 0xffffffffu) + " appears " + std::to_string(n) +
                                   " times (inconsistent winding)");
        }
    }
    for (std::size_t v = 0; v < c.vertices; ++v) {
        if (!referenced[v]) c.violations.push_back("vertex " + std::to_string(v) + " is isolated");
        const Vec3& p = mesh.positions[v];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            c.violations.push_back("vertex " + std::to_string(v) + " has a non-finite position");
    }
    if (c.euler_characteristic() != 2)
        c.violations.push_back("Euler characteristic is " + std::to_string(c.euler_characteristic()) + ", expected 2");

    for (const Triangle& t : mesh.triangles) {
        if (t[0] < c.vertices && t[1] < c.vertices && t[2] < c.vertices)
            c.signed_volume += dot(mesh.positions[t[0]], cross(mesh.positions[t[1]], mesh.positions[t[2]])) / 6.0;
    }
    if (!(c.signed_volume > 0.0))
        c.violations.push_back("signed volume " + std::to_string(c.signed_volume) + " is not positive");
    return c;
}

SurfaceMesh make_icosphere(const Vec3& center, double radius, int subdivisions)
{
    if (!(radius > 0.0))
        throw ValidationError("icosphere radius must be > 0");
    if (subdivisions < 0)
        throw ValidationError("icosphere subdivisions must be >= 0");

    const double phi = std::numbers::phi;
    std::vector<Vec3> unit = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (Vec3& p : unit) p = p / norm(p);
    std::vector<Triangle> tris = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };

    for (int s = 0; s < subdivisions; ++s) {
        std::unordered_map<std::uint64_t, std::uint32_t> midpoint;
        auto mid = [&](std::uint32_t a, std::uint32_t b) {
            const auto key = edge_key(a, b);
            if (const auto it = midpoint.find(key); it != midpoint.end()) return it->second;
            const Vec3 m = unit[a] + unit[b];
            unit.push_back(m / norm(m));
            const auto idx = static_cast<std::uint32_t>(unit.size() - 1);
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Triangle> next;
        next.reserve(tris.size() * 4);
        for (const Triangle& t : tris) {
            const std::uint32_t ab = mid(t[0], t[1]);
            const std::uint32_t bc = mid(t[1], t[2]);
            const std::uint32_t ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }

    SurfaceMesh mesh;
    mesh.positions.reserve(unit.size());
    for (const Vec3& u : unit) mesh.positions.push_back(center + u * radius);
    for (Triangle& t : tris) {
        if (dot(cross(unit[t[1]] - unit[t[0]], unit[t[2]] - unit[t[0]]), unit[t[0]] + unit[t[1]] + unit[t[2]]) < 0.0)
            std::swap(t[1], t[2]);
    }
    mesh.triangles = std::move(tris);
    mesh.max_seen.assign(mesh.positions.size(), 0.0);
    return mesh;
}

std::vector<Vec3> vertex_normals(const SurfaceMesh& mesh)
{
    std::vector<Vec3> n(mesh.positions.size());
    for (const Triangle& t : mesh.triangles) {
        const Vec3 fc = face_cross(mesh, t); // |fc| = 2 * area
        for (std::uint32_t v : t) n[v] += fc;
    }
    for (std::size_t v = 0; v < n.size(); ++v) {
        const double len = norm(n[v]);
        if (!(len > 0.0) || !std::isfinite(len))
            throw MeshError("vertex " + std::to_string(v) + " has a zero-length accumulated normal");
        n[v] = n[v] / len;
    }
    return n;
}

std::vector<double> mean_curvature(const SurfaceMesh& mesh)
{
    constexpr double max_weight = 1e4;
    const std::size_t nv = mesh.positions.size();
    std::unordered_map<std::uint64_t, double> weight;
    weight.reserve(mesh.triangles.size() * 2);
    std::vector<double> area(nv, 0.0);

    for (const Triangle& t : mesh.triangles) {
        const Vec3 p[3] = {mesh.positions[t[0]], mesh.positions[t[1]], mesh.positions[t[2]]};
        const double tri_area = 0.5 * norm(cross(p[1] - p[0], p[2] - p[0]));
        double cot[3];
        bool obtuse[3];
        for (int i = 0; i < 3; ++i) {
            const Vec3 e1 = p[(i + 1) % 3] - p[i];
            const Vec3 e2 = p[(i + 2) % 3] - p[i];
            const double c = dot(e1, e2);
            const double s = norm(cross(e1, e2));
            cot[i] = s > 0.0 ? c / s : max_weight;
            obtuse[i] = c < 0.0;
        }
        for (int i = 0; i < 3; ++i)
            weight[edge_key(t[(i + 1) % 3], t[(i + 2) % 3])] += cot[i];

        const bool any_obtuse = obtuse[0] || obtuse[1] || obtuse[2];
        for (int i = 0; i < 3; ++i) {
            if (!any_obtuse) {
                const int j = (i + 1) % 3;
                const int k = (i + 2) % 3;
                const Vec3 eij = p[j] - p[i];
                const Vec3 eik = p[k] - p[i];
                // Voronoi region: edge ij is opposite corner k, edge ik opposite corner j.
                area[t[i]] += (dot(eij, eij) * cot[k] + dot(eik, eik) * cot[j]) / 8.0;
            } else {
                area[t[i]] += obtuse[i] ? tri_area / 2.0 : tri_area / 4.0;
            }
        }
    }

    std::vector<Vec3> lap(nv);
    for (const auto& [key, w_raw] : weight) {
        const auto a = static_cast<std::uint32_t>(key >> 32);
        const auto b = static_cast<std::uint32_t>(key & 0xffffffffu);
        const double w = std::clamp(w_raw, 0.0, max_weight);
        const Vec3 d = mesh.positions[b] - mesh.positions[a];
        lap[a] += d * w;
        lap[b] -= d * w;
    }

    std::vector<double> h(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        if (!(area[v] > 0.0))
            throw MeshError("vertex " + std::to_string(v) + " is isolated (no incident area)");
        h[v] = norm(lap[v] / (2.0 * area[v])) / 2.0;
    }
    return h;
}

std::size_t split_long_edges(SurfaceMesh& mesh, double threshold_mm)
{
    if (!(threshold_mm > 0.0))
        throw ValidationError("split threshold must be > 0");

    // Undirected edge -> its two triangles.
    std::unordered_map<std::uint64_t, std::array<std::uint32_t, 2>> edge_tris;
    edge_tris.reserve(mesh.triangles.size() * 2);
    for (std::uint32_t f = 0; f < mesh.triangles.size(); ++f) {
        const Triangle& t = mesh.triangles[f];
        for (int e = 0; e < 3; ++e) {
            auto [it, fresh] = edge_tris.try_emplace(edge_key(t[e], t[(e + 1) % 3]),
                                                     std::array<std::uint32_t, 2>{f, f});
            if (!fresh) it->second[1] = f;
        }
    }

    struct LongEdge
    {
        double length;
        std::uint32_t a;
        std::uint32_t b;
    };
    std::vector<LongEdge> snapshot;
    for (const auto& [key, tris] : edge_tris) {
        const auto a = static_cast<std::uint32_t>(key >> 32);
        const auto b = static_cast<std::uint32_t>(key & 0xffffffffu);
        const double len = distance(mesh.positions[a], mesh.positions[b]);
        if (len > threshold_mm) snapshot.push_back({len, a, b});
    }
    std::sort(snapshot.begin(), snapshot.end(), [](const LongEdge& l, const LongEdge& r) {
        return std::tie(r.length, l.a, l.b) < std::tie(l.length, r.a, r.b);
    });

    auto replace_tri = [&](std::uint32_t a, std::uint32_t b, std::uint32_t from, std::uint32_t to) {
        auto& tris = edge_tris.at(edge_key(a, b));
        if (tris[0] == from) tris[0] = to;
        else if (tris[1] == from) tris[1] = to;
    };
    // Rotates triangle f so that it reads (a, b, x) and returns x, or
    // returns false when f does not contain the directed edge a->b.
    auto opposite = [&](std::uint32_t f, std::uint32_t a, std::uint32_t b, std::uint32_t& x) {
        const Triangle& t = mesh.triangles[f];
        for (int e = 0; e < 3; ++e) {
            if (t[e] == a && t[(e + 1) % 3] == b) {
                x = t[(e + 2) % 3];
                return true;
            }
        }
        return false;
    };

    for (const LongEdge& le : snapshot) {
        const auto tris = edge_tris.at(edge_key(le.a, le.b));
        std::uint32_t a = le.a;
        std::uint32_t b = le.b;
        std::uint32_t t1 = tris[0];
        std::uint32_t t2 = tris[1];
        std::uint32_t c = 0;
        std::uint32_t d = 0;
        if (!opposite(t1, a, b, c)) std::swap(t1, t2);
        if (!opposite(t1, a, b, c) || !opposite(t2, b, a, d))
            throw MeshError("split_long_edges: inconsistent winding around edge " + std::to_string(a) + "-" +
                            std::to_string(b));

        const auto m = static_cast<std::uint32_t>(mesh.positions.size());
        mesh.positions.push_back((mesh.positions[a] + mesh.positions[b]) * 0.5);
        mesh.max_seen.push_back(std::max(mesh.max_seen[a], mesh.max_seen[b]));

        const auto t1b = static_cast<std::uint32_t>(mesh.triangles.size());
        const auto t2b = t1b + 1;
        mesh.triangles[t1] = {a, m, c};
        mesh.triangles[t2] = {b, m, d};
        mesh.triangles.push_back({m, b, c});
        mesh.triangles.push_back({m, a, d});

        edge_tris.erase(edge_key(a, b));
        replace_tri(b, c, t1, t1b);
        replace_tri(a, d, t2, t2b);
        edge_tris[edge_key(a, m)] = {t1, t2b};
        edge_tris[edge_key(m, b)] = {t1b, t2};
        edge_tris[edge_key(m, c)] = {t1, t1b};
        edge_tris[edge_key(m, d)] = {t2, t2b};
    }
    return snapshot.size();
}

void laplacian_smooth(SurfaceMesh& mesh, double lambda)
{
    if (!(lambda >= 1e-12) || !(lambda < 1.0))
        throw ValidationError("smoothing lambda must lie in (0, 1), got " + std::to_string(lambda));
    const auto rings = one_rings(mesh);
    const std::vector<Vec3> snapshot = mesh.positions;
    for (std::size_t v = 0; v < snapshot.size(); ++v) {
        if (rings[v].empty()) continue;
        Vec3 mean;
        for (std::uint32_t n : rings[v]) mean += snapshot[n];
        mean = mean / static_cast<double>(rings[v].size());
        mesh.positions[v] = snapshot[v] + (mean - snapshot[v]) * lambda;
    }
}

double mesh_volume(const SurfaceMesh& mesh)
{
    require_closed(mesh, "mesh_volume");
    double vol = 0.0;
    for (const Triangle& t : mesh.triangles)
        vol += dot(mesh.positions[t[0]], cross(mesh.positions[t[1]], mesh.positions[t[2]]));
    return vol / 6.0;
}

double avg_center_distance(const SurfaceMesh& mesh, const Vec3& center)
{
    if (mesh.positions.empty())
        throw ValidationError("avg_center_distance needs at least one vertex");
    double sum = 0.0;
    for (const Vec3& p : mesh.positions) sum += distance(p, center);
    return sum / static_cast<double>(mesh.positions.size());
}

double star_shape_score(const SurfaceMesh& mesh, const Vec3& center, int directions)
{
    if (directions < 1 || mesh.triangles.empty()) return 0.0;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    int single = 0;
    for (int i = 0; i < directions; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / directions;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Vec3 dir{r * std::cos(golden * i), r * std::sin(golden * i), z};
        int hits = 0;
        for (const Triangle& t : mesh.triangles) {
            // Moller-Trumbore
            const Vec3& p0 = mesh.positions[t[0]];
            const Vec3 e1 = mesh.positions[t[1]] - p0;
            const Vec3 e2 = mesh.positions[t[2]] - p0;
            const Vec3 pv = cross(dir, e2);
            const double det = dot(e1, pv);
            if (std::abs(det) < 1e-18) continue;
            const Vec3 tv = center - p0;
            const double u = dot(tv, pv) / det;
            if (u < 0.0 || u > 1.0) continue;
            const Vec3 qv = cross(tv, e1);
            const double v = dot(dir, qv) / det;
            if (v < 0.0 || u + v > 1.0) continue;
            if (dot(e2, qv) / det > 1e-12) ++hits;
        }
        if (hits == 1) ++single;
    }
    return static_cast<double>(single) / directions;
}

void export_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path, MeshFormat format)
{
    if (path.empty())
        throw IoError("mesh output path is empty");
    if (format == MeshFormat::obj) {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
        out.imbue(std::locale::classic());
        out.precision(17);
        for (const Vec3& p : mesh.positions) out << "v " << p.x << ' ' << p.y << ' ' << p.z << '\n';
        for (const Triangle& t : mesh.triangles)
            out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
        if (!out) throw IoError("write to '" + path.string() + "' failed");
        return;
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    auto put_u32 = [&](std::uint32_t v) {
        const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    auto put_f32 = [&](double d) {
        const float f = static_cast<float>(d);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(bits);
    };
    std::string header = "binary STL";
    header.resize(80, ' ');
    out.write(header.data(), 80);
    put_u32(static_cast<std::uint32_t>(mesh.triangles.size()));
    for (const Triangle& t : mesh.triangles) {
        Vec3 n = face_cross(mesh, t);
        const double len = norm(n);
        if (len > 0.0) n = n / len;
        put_f32(n.x); put_f32(n.y); put_f32(n.z);
        for (std::uint32_t v : t) {
            put_f32(mesh.positions[v].x);
            put_f32(mesh.positions[v].y);
            put_f32(mesh.positions[v].z);
        }
        const char attr[2] = {0, 0};
        out.write(attr, 2);
    }
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

SurfaceMesh import_obj(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    SurfaceMesh mesh;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream is(line);
        is.imbue(std::locale::classic());
        std::string tag;
        is >> tag;
        if (tag == "v") {
            Vec3 p;
            if (!(is >> p.x >> p.y >> p.z)) throw IoError("malformed vertex line: " + line);
            mesh.positions.push_back(p);
        } else if (tag == "f") {
            std::vector<std::uint32_t> idx;
            std::string tok;
            while (is >> tok) {
                const long v = std::stol(tok.substr(0, tok.find('/')));
                const long resolved = v < 0 ? static_cast<long>(mesh.positions.size()) + v : v - 1;
                if (resolved < 0) throw IoError("bad face index in: " + line);
                idx.push_back(static_cast<std::uint32_t>(resolved));
            }
            if (idx.size() < 3) throw IoError("face with fewer than 3 vertices: " + line);
            for (std::size_t k = 1; k + 1 < idx.size(); ++k)
                mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
        }
    }
    mesh.max_seen.assign(mesh.positions.size(), 0.0);
    return mesh;
}

} // namespace balloonseg
