#pragma once

#include "balloonseg/volume.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace balloonseg {

inline constexpr int default_service_port = 8191;

struct ServiceOptions
{
    /// Invoked inside the single-flight section, before segmentation starts.
    /// Tests use it to hold a run open.
    std::function<void()> before_segment;
};

/// HTTP front end over one immutable volume. Routes live under /api.
class Service
{
public:
    Service(Volume3D volume, std::optional<Mask3D> truth, ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds and serves on a background thread. Port 0 picks a free port;
    /// the bound port is returned.
    int start(const std::string& host, int port);
    void stop();

    /// Binds and serves on the calling thread until stop().
    void listen(const std::string& host, int port);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// `[[start,len],...]` over a row-major slice of bits.
std::vector<std::pair<std::size_t, std::size_t>> run_lengths(const std::vector<std::uint8_t>& bits);

/// Linear window of [lo, hi] onto 0..255; lo >= hi maps everything to 0.
std::uint8_t window_byte(double value, double lo, double hi);

} // namespace balloonseg
