#include <doctest.h>

#include "balloonseg/serialization.hpp"
#include "support.hpp"

using namespace balloonseg;

TEST_CASE("contour JSON round trip")
{
    const ContourInit c{Axis::y, 17, {{1.5, 2}, {4, 2.25}, {3, 6}}};
    const Json j = contour_to_json(c);
    CHECK(j.at("axis") == "y");
    CHECK(j.at("slice_index") == 17);
    CHECK(j.at("points_vox").size() == 3);
    const ContourInit back = contour_from_json(j);
    CHECK(back.axis == c.axis);
    CHECK(back.slice_index == c.slice_index);
    CHECK(back.points == c.points);
    CHECK_THROWS_AS(contour_from_json(Json::parse(R"({"axis":"w","slice_index":1,"points_vox":[]})")), ValidationError);
    CHECK_THROWS_AS(contour_from_json(Json::parse(R"({"axis":"z","slice_index":1,"points_vox":[[1,2,3]]})")),
                    ContourError);
}

TEST_CASE("config JSON is partial, strict and round-trips")
{
    const InflationConfig c = config_from_json(Json::parse(R"({"max_iterations": 5, "gate_sampling": "trilinear"})"));
    CHECK(c.max_iterations == 5);
    CHECK(c.gate_sampling == GateSampling::trilinear);
    CHECK(c.lambda_smooth == 0.1);
    CHECK_FALSE(c.step_mm.has_value());
    CHECK_THROWS_AS(config_from_json(Json::parse(R"({"max_iteration": 5})")), ValidationError);

    InflationConfig full;
    full.step_mm = 0.3;
    full.initial_radius_mm = 1.5;
    full.stall_epsilon = 2e-3;
    const InflationConfig back = config_from_json(config_to_json(full));
    CHECK(*back.step_mm == 0.3);
    CHECK(*back.initial_radius_mm == 1.5);
    CHECK(back.stall_epsilon == 2e-3);
}

TEST_CASE("phantom spec JSON centers the object in the given dims")
{
    const PhantomSpec s = phantom_spec_from_json(Json::parse(R"({"dims":[40,50,60],"radii_mm":[8,8,8]})"));
    CHECK(s.center_vox.x == 20);
    CHECK(s.center_vox.y == 25);
    CHECK(s.center_vox.z == 30);
    const PhantomSpec back = phantom_spec_from_json(phantom_spec_to_json(s));
    CHECK(back.dims == s.dims);
    CHECK(back.radii_mm.x == 8);
    CHECK(back.rng_seed == s.rng_seed);
    CHECK_THROWS_AS(phantom_spec_from_json(Json::parse(R"({"shape":"cube"})")), ValidationError);
    CHECK_THROWS_AS(phantom_spec_from_json(Json::parse(R"({"radius": 3})")), ValidationError);
}

TEST_CASE("eval report uses the documented field names")
{
    EvalReport r;
    r.dsc_percent = 50;
    r.voxels_a = 3;
    const Json j = eval_report_to_json(r);
    for (const char* key :
         {"dsc_percent", "volume_a_mm3", "volume_b_mm3", "voxels_a", "voxels_b", "voxels_intersection"})
        CHECK(j.contains(key));
    CHECK(j.size() == 6);
}

TEST_CASE("JSON files: parse errors carry the location")
{
    testing::TempDir dir;
    testing::spit(dir / "bad.json", "{\"a\": [1, 2,, 3]}");
    try {
        (void)read_json_file(dir / "bad.json");
        FAIL("expected JsonParseError");
    } catch (const JsonParseError& e) {
        CHECK(std::string(e.what()).find("byte 13") != std::string::npos);
    }
    CHECK_THROWS_AS(read_json_file(dir / "none.json"), IoError);
    write_json_file(Json{{"k", 1}}, dir / "ok.json");
    CHECK(read_json_file(dir / "ok.json").at("k") == 1);
}
