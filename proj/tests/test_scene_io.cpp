#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdmc/scene_io.hpp"

#include <filesystem>
#include <string>

using namespace sdmc;
namespace fs = std::filesystem;

namespace {

const fs::path kScenesDir = SDMC_SCENES_DIR;

std::string minimal_doc(const std::string& radius = "0.5",
                        const std::string& sphere_material = "sphere")
{
    return R"({
      "materials": {
        "ambient": { "mu_a": 0.0, "mu_s": 0.0, "g": 0.0, "n": 1.0 },
        "sphere": { "mu_a": 0.1, "mu_s": 1.0, "g": 0.5, "n": 1.4 }
      },
      "ambient": "ambient",
      "sdfs": [ { "material": ")" +
           sphere_material + R"(", "shape": { "type": "sphere", "radius": )" + radius +
           R"( } } ],
      "bounds": { "lo": [-1, -1, -1], "hi": [1, 1, 1] },
      "source": { "kind": "point_isotropic", "position": [0, 0, 0] },
      "grid": { "dims": [4, 4, 4] },
      "run": { "photons": 100, "seed": 3, "workers": 1 }
    })";
}

}  // namespace

TEST_CASE("every shipped scene document parses without warnings")
{
    for (const char* name : {"isotropic_sphere_tau10.json", "glass_sphere.json",
                             "jacques_420.json", "jacques_630.json", "vessel_network.json"}) {
        CAPTURE(name);
        const ParsedScene parsed = load_scene(kScenesDir / name);
        CHECK(parsed.warnings.empty());
        CHECK_NOTHROW(validate_scene(parsed.scene));
    }
}

TEST_CASE("the isotropic sphere fixture round-trips through serialize and parse")
{
    const ParsedScene parsed = load_scene(kScenesDir / "isotropic_sphere_tau10.json");
    const Scene& scene = parsed.scene;
    CHECK(scene.materials[scene.roots[0]->material].mu_s == 20.0);  // tau_max 10 over 0.5 cm
    CHECK(scene.source.kind == SourceKind::PointIsotropic);

    const std::string text = serialize_scene(scene);
    const ParsedScene again = parse_scene(text);
    CHECK(again.warnings.empty());
    CHECK(scene_equal(scene, again.scene));

    // idempotent: a second round trip yields the same document text
    CHECK(serialize_scene(again.scene) == text);
}

TEST_CASE("every fixture survives a serialize/parse round trip")
{
    for (const char* name : {"glass_sphere.json", "jacques_420.json", "jacques_630.json",
                             "vessel_network.json"}) {
        CAPTURE(name);
        const Scene scene = load_scene(kScenesDir / name).scene;
        CHECK(scene_equal(scene, parse_scene(serialize_scene(scene)).scene));
    }
}

TEST_CASE("parse errors and validation errors are distinct categories")
{
    // malformed JSON
    CHECK_THROWS_AS(parse_scene("{ not json"), ParseError);
    // missing required key
    CHECK_THROWS_AS(parse_scene("{}"), ParseError);
    // ill-typed value
    CHECK_THROWS_AS(parse_scene(R"({"materials": 5})"), ParseError);
    // well-formed but invalid
    CHECK_THROWS_AS(parse_scene(minimal_doc("-0.5")), ValidationError);
    CHECK_THROWS_AS(parse_scene(minimal_doc("0.5", "no_such_material")), ValidationError);
}

TEST_CASE("diagnostics name the offending key")
{
    try {
        parse_scene(minimal_doc("0.5", "no_such_material"));
        FAIL("expected a validation error");
    } catch (const ValidationError& err) {
        CHECK(std::string(err.what()).find("no_such_material") != std::string::npos);
    }
    try {
        parse_scene(minimal_doc("-0.5"));
        FAIL("expected a validation error");
    } catch (const ValidationError& err) {
        CHECK(std::string(err.what()).find("radius") != std::string::npos);
    }
}

TEST_CASE("unknown keys produce warnings, not errors")
{
    std::string doc = minimal_doc();
    doc.insert(doc.rfind('}'), R"(, "extra_section": 1)");
    const ParsedScene parsed = parse_scene(doc);
    REQUIRE(parsed.warnings.size() == 1);
    CHECK(parsed.warnings[0].find("extra_section") != std::string::npos);
}

TEST_CASE("documents cover every node kind")
{
    const std::string doc = R"({
      "materials": {
        "ambient": { "mu_a": 0, "mu_s": 0 },
        "solid": { "mu_a": 0.1, "mu_s": 1.0 }
      },
      "ambient": "ambient",
      "sdfs": [ { "material": "solid", "shape": {
        "type": "smooth_union", "k": 0.25,
        "a": { "type": "twist", "rate": 0.5, "child": {
          "type": "rotate", "axis": [0, 0, 1], "angle": 0.7853981633974483, "child": {
            "type": "elongate", "amount": [0.2, 0, 0], "child": {
              "type": "torus", "major_radius": 0.5, "minor_radius": 0.1 } } } },
        "b": { "type": "displace", "amplitude": 0.01, "frequency": 5.0, "child": {
          "type": "bend", "rate": 0.2, "child": {
            "type": "repeat", "period": [2, 2, 2], "child": {
              "type": "subtraction",
              "a": { "type": "intersection",
                     "a": { "type": "box", "half_extents": [0.4, 0.4, 0.4] },
                     "b": { "type": "cylinder", "half_height": 0.5, "radius": 0.35 } },
              "b": { "type": "capsule", "a": [0, 0, -0.5], "b": [0, 0, 0.5],
                     "radius": 0.1 } } } } } } } ],
      "bounds": { "lo": [-2, -2, -2], "hi": [2, 2, 2] },
      "source": { "kind": "uniform_plane", "z": 2, "direction": [0, 0, -1] },
      "grid": { "dims": [2, 2, 2] },
      "run": { "photons": 10 }
    })";
    const ParsedScene parsed = parse_scene(doc);
    CHECK(parsed.warnings.empty());
    CHECK(scene_equal(parsed.scene, parse_scene(serialize_scene(parsed.scene)).scene));
}
