#pragma once

#include "balloonseg/error.hpp"
#include "balloonseg/inflation.hpp"
#include "balloonseg/init.hpp"
#include "balloonseg/metrics.hpp"
#include "balloonseg/phantom.hpp"

#include <json.hpp>

#include <filesystem>

namespace balloonseg {

using Json = nlohmann::json;

/// `{"axis":"z","slice_index":57,"points_vox":[[u,v],...]}`
Json contour_to_json(const ContourInit& c);
ContourInit contour_from_json(const Json& j);

/// Every field optional; unknown keys are rejected so typos surface.
InflationConfig config_from_json(const Json& j);
Json config_to_json(const InflationConfig& cfg);

PhantomSpec phantom_spec_from_json(const Json& j);
Json phantom_spec_to_json(const PhantomSpec& s);

Json eval_report_to_json(const EvalReport& r);
Json init_params_to_json(const InitParams& p);

/// Summary written next to a segmentation (`*_metrics.json`). Excludes the
/// mesh and the mask; includes runtime_ms.
Json segmentation_metrics_json(const SegmentationResult& r);

/// Parses a JSON file; parse failures raise JsonParseError with the location.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const Json& j, const std::filesystem::path& path);

class JsonParseError : public IoError
{
public:
    using IoError::IoError;
};

} // namespace balloonseg
