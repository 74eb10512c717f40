#include "balloonseg/service.hpp"

#include "balloonseg/error.hpp"
#include "balloonseg/inflation.hpp"
#include "balloonseg/init.hpp"
#include "balloonseg/serialization.hpp"

#include <httplib.h>

#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>

namespace balloonseg {

namespace {

void send_json(httplib::Response& res, int status, const Json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message)
{
    send_json(res, status, Json{{"error", message}});
}

std::optional<std::int64_t> parse_index(const std::string& text)
{
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::optional<double> query_double(const httplib::Request& req, const char* key)
{
    if (!req.has_param(key)) return std::nullopt;
    try {
        std::size_t used = 0;
        const std::string text = req.get_param_value(key);
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace

std::vector<std::pair<std::size_t, std::size_t>> run_lengths(const std::vector<std::uint8_t>& bits)
{
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    std::size_t i = 0;
    while (i < bits.size()) {
        if (!bits[i]) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < bits.size() && bits[i]) ++i;
        runs.emplace_back(start, i - start);
    }
    return runs;
}

std::uint8_t window_byte(double value, double lo, double hi)
{
    if (!(hi > lo)) return 0;
    const double t = std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(t * 255.0));
}

struct Service::Impl
{
    Volume3D volume;
    std::optional<Mask3D> truth;
    ServiceOptions options;

    httplib::Server server;
    std::thread thread;

    std::mutex segment_mutex;
    std::shared_mutex results_mutex;
    std::map<std::int64_t, std::shared_ptr<const Mask3D>> results;
    std::int64_t next_id = 1;

    void routes();
    void handle_segment(const httplib::Request& req, httplib::Response& res);
};

void Service::Impl::routes()
{
    server.set_default_headers({
        {"Access-Control-Allow-Origin", "*"},
        {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
        {"Access-Control-Allow-Headers", "Content-Type"},
        {"Access-Control-Expose-Headers", "X-Width, X-Height"},
    });
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/api/volume", [this](const httplib::Request&, httplib::Response& res) {
        const Dims& d = volume.dims();
        const Vec3& s = volume.spacing();
        send_json(res, 200,
                  Json{{"dims", {d.nx, d.ny, d.nz}},
                       {"spacing_mm", {s.x, s.y, s.z}},
                       {"intensity_min", volume.min_value()},
                       {"intensity_max", volume.max_value()},
                       {"has_truth", truth.has_value()}});
    });

    server.Get(R"(/api/slice/([xyz])/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const Axis axis = parse_axis(req.matches[1].str()[0]);
        const auto index = parse_index(req.matches[2].str());
        if (!index || *index < 0 || *index >= volume.dims()[axis_index(axis)])
            return send_error(res, 404, "slice index out of range");
        const double lo = query_double(req, "lo").value_or(volume.min_value());
        const double hi = query_double(req, "hi").value_or(volume.max_value());
        const Slice2D slice = volume.extract_slice(axis, *index);
        std::string body(slice.pixels.size(), '\0');
        for (std::size_t i = 0; i < slice.pixels.size(); ++i)
            body[i] = static_cast<char>(window_byte(slice.pixels[i], lo, hi));
        res.set_header("X-Width", std::to_string(slice.width));
        res.set_header("X-Height", std::to_string(slice.height));
        res.set_content(std::move(body), "application/octet-stream");
    });

    server.Post("/api/segment",
                [this](const httplib::Request& req, httplib::Response& res) { handle_segment(req, res); });

    server.Get(R"(/api/mask/([^/]+)/([xyz])/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const auto id = parse_index(req.matches[1].str());
        std::shared_ptr<const Mask3D> mask;
        {
            std::shared_lock lock(results_mutex);
            if (id) {
                const auto it = results.find(*id);
                if (it != results.end()) mask = it->second;
            }
        }
        if (!mask) return send_error(res, 404, "unknown result id");
        const Axis axis = parse_axis(req.matches[2].str()[0]);
        const auto index = parse_index(req.matches[3].str());
        if (!index || *index < 0 || *index >= mask->dims()[axis_index(axis)])
            return send_error(res, 404, "slice index out of range");
        Json runs = Json::array();
        for (const auto& [start, len] : run_lengths(mask->extract_slice(axis, *index))) runs.push_back({start, len});
        send_json(res, 200, Json{{"runs", runs}});
    });
}

void Service::Impl::handle_segment(const httplib::Request& req, httplib::Response& res)
{
    std::unique_lock flight(segment_mutex, std::try_to_lock);
    if (!flight.owns_lock()) return send_error(res, 409, "a segmentation is already running");
    if (options.before_segment) options.before_segment();

    Json body;
    try {
        body = Json::parse(req.body);
    } catch (const Json::parse_error& e) {
        return send_error(res, 400, std::string("request body is not valid JSON: ") + e.what());
    }

    try {
        if (!body.is_object() || !body.contains("contour")) throw ValidationError("contour: field is required");
        const ContourInit contour = contour_from_json(body.at("contour"));
        InflationConfig cfg;
        if (body.contains("config") && !body.at("config").is_null()) cfg = config_from_json(body.at("config"));
        const InitParams init = process_contour(volume, contour);
        SegmentationResult r = segment(volume, init, cfg, truth ? &*truth : nullptr);

        std::int64_t id = 0;
        {
            std::unique_lock lock(results_mutex);
            id = next_id++;
            results.emplace(id, std::make_shared<const Mask3D>(std::move(r.mask)));
        }
        Json out = {
            {"result_id", id},
            {"volume_mm3", r.volume_mm3},
            {"voxel_count", r.voxel_count},
            {"iterations", r.trace.records.size()},
            {"termination_reason", termination_reason_name(r.trace.termination_reason)},
            {"runtime_ms", r.runtime_ms},
        };
        if (r.dsc_vs_truth) out["dsc_percent"] = *r.dsc_vs_truth;
        send_json(res, 200, out);
    } catch (const ValidationError& e) {
        send_error(res, 422, e.what());
    } catch (const Json::exception& e) {
        send_error(res, 422, e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, e.what());
    }
}

Service::Service(Volume3D volume, std::optional<Mask3D> truth, ServiceOptions options)
    : impl_(std::make_unique<Impl>())
{
    if (truth && !(truth->dims() == volume.dims())) throw ValidationError("truth mask dims differ from the volume");
    impl_->volume = std::move(volume);
    impl_->truth = std::move(truth);
    impl_->options = std::move(options);
    impl_->routes();
}

Service::~Service() { stop(); }

int Service::start(const std::string& host, int port)
{
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw IoError("cannot bind " + host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        throw IoError("cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void Service::stop()
{
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

void Service::listen(const std::string& host, int port)
{
    if (!impl_->server.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

} // namespace balloonseg
