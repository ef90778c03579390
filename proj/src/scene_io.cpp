#include "sdmc/scene_io.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sdmc {

using json = nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little,
              "grid files are little-endian; big-endian hosts need byte swaps");

constexpr char kMagic[8] = {'S', 'D', 'M', 'C', 'G', 'R', 'I', 'D'};
constexpr std::uint32_t kVersion = 1;

// --- JSON helpers ----------------------------------------------------------

[[noreturn]] void parse_fail(const std::string& where, const std::string& what)
{
    throw ParseError(where + ": " + what);
}

const json& require_key(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.is_object()) parse_fail(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) parse_fail(where, "missing key '" + key + "'");
    return *it;
}

double as_number(const json& value, const std::string& where)
{
    if (!value.is_number()) parse_fail(where, "expected a number");
    return value.get<double>();
}

double number_at(const json& obj, const std::string& key, const std::string& where)
{
    return as_number(require_key(obj, key, where), where + "." + key);
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& where)
{
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return as_number(obj.at(key), where + "." + key);
}

Vec3 as_vec3(const json& value, const std::string& where)
{
    if (!value.is_array() || value.size() != 3)
        parse_fail(where, "expected an array of 3 numbers");
    return {as_number(value[0], where), as_number(value[1], where),
            as_number(value[2], where)};
}

Vec3 vec3_at(const json& obj, const std::string& key, const std::string& where)
{
    return as_vec3(require_key(obj, key, where), where + "." + key);
}

void warn_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                       const std::string& where, std::vector<std::string>& warnings)
{
    if (!obj.is_object()) return;
    for (const auto& [key, value] : obj.items()) {
        bool found = false;
        for (const char* k : known)
            if (key == k) { found = true; break; }
        if (!found) warnings.push_back("unknown key '" + key + "' in " + where);
    }
}

// --- SDF node (de)serialization ---------------------------------------------

SdfPtr parse_node(const json& obj, const std::string& where,
                  std::vector<std::string>& warnings)
{
    const json& type_value = require_key(obj, "type", where);
    if (!type_value.is_string()) parse_fail(where + ".type", "expected a string");
    const std::string type = type_value.get<std::string>();
    const std::string here = where + "(" + type + ")";

    auto child = [&](const char* key) {
        return parse_node(require_key(obj, key, here), here + "." + key, warnings);
    };

    if (type == "sphere") {
        warn_unknown_keys(obj, {"type", "radius"}, here, warnings);
        return make_sphere(number_at(obj, "radius", here));
    }
    if (type == "box") {
        warn_unknown_keys(obj, {"type", "half_extents"}, here, warnings);
        return make_box(vec3_at(obj, "half_extents", here));
    }
    if (type == "capsule") {
        warn_unknown_keys(obj, {"type", "a", "b", "radius"}, here, warnings);
        return make_capsule(vec3_at(obj, "a", here), vec3_at(obj, "b", here),
                            number_at(obj, "radius", here));
    }
    if (type == "cylinder") {
        warn_unknown_keys(obj, {"type", "half_height", "radius"}, here, warnings);
        return make_cylinder(number_at(obj, "half_height", here),
                             number_at(obj, "radius", here));
    }
    if (type == "torus") {
        warn_unknown_keys(obj, {"type", "major_radius", "minor_radius"}, here, warnings);
        return make_torus(number_at(obj, "major_radius", here),
                          number_at(obj, "minor_radius", here));
    }
    if (type == "union") {
        warn_unknown_keys(obj, {"type", "a", "b"}, here, warnings);
        return make_union(child("a"), child("b"));
    }
    if (type == "smooth_union") {
        warn_unknown_keys(obj, {"type", "a", "b", "k"}, here, warnings);
        return make_smooth_union(child("a"), child("b"), number_at(obj, "k", here));
    }
    if (type == "intersection") {
        warn_unknown_keys(obj, {"type", "a", "b"}, here, warnings);
        return make_intersection(child("a"), child("b"));
    }
    if (type == "subtraction") {
        warn_unknown_keys(obj, {"type", "a", "b"}, here, warnings);
        return make_subtraction(child("a"), child("b"));
    }
    if (type == "translate") {
        warn_unknown_keys(obj, {"type", "offset", "child"}, here, warnings);
        return make_translate(child("child"), vec3_at(obj, "offset", here));
    }
    if (type == "rotate") {
        warn_unknown_keys(obj, {"type", "axis", "angle", "child"}, here, warnings);
        return make_rotate(child("child"), vec3_at(obj, "axis", here),
                           number_at(obj, "angle", here));
    }
    if (type == "elongate") {
        warn_unknown_keys(obj, {"type", "amount", "child"}, here, warnings);
        return make_elongate(child("child"), vec3_at(obj, "amount", here));
    }
    if (type == "twist") {
        warn_unknown_keys(obj, {"type", "rate", "child"}, here, warnings);
        return make_twist(child("child"), number_at(obj, "rate", here));
    }
    if (type == "bend") {
        warn_unknown_keys(obj, {"type", "rate", "child"}, here, warnings);
        return make_bend(child("child"), number_at(obj, "rate", here));
    }
    if (type == "repeat") {
        warn_unknown_keys(obj, {"type", "period", "child"}, here, warnings);
        return make_repeat(child("child"), vec3_at(obj, "period", here));
    }
    if (type == "displace") {
        warn_unknown_keys(obj, {"type", "amplitude", "frequency", "child"}, here, warnings);
        return make_displace(child("child"), number_at(obj, "amplitude", here),
                             number_at(obj, "frequency", here));
    }
    throw ValidationError(where + ": unknown SDF node type '" + type + "'");
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json node_json(const SdfNode& node)
{
    struct Visitor {
        json operator()(const SphereParams& s) const
        {
            return {{"type", "sphere"}, {"radius", s.radius}};
        }
        json operator()(const BoxParams& b) const
        {
            return {{"type", "box"}, {"half_extents", vec3_json(b.half_extents)}};
        }
        json operator()(const CapsuleParams& c) const
        {
            return {{"type", "capsule"}, {"a", vec3_json(c.a)}, {"b", vec3_json(c.b)},
                    {"radius", c.radius}};
        }
        json operator()(const CylinderParams& c) const
        {
            return {{"type", "cylinder"}, {"half_height", c.half_height},
                    {"radius", c.radius}};
        }
        json operator()(const TorusParams& t) const
        {
            return {{"type", "torus"}, {"major_radius", t.major_radius},
                    {"minor_radius", t.minor_radius}};
        }
        json operator()(const CsgParams& c) const
        {
            const char* name = nullptr;
            switch (c.kind) {
                case CsgKind::Union: name = "union"; break;
                case CsgKind::SmoothUnion: name = "smooth_union"; break;
                case CsgKind::Intersection: name = "intersection"; break;
                case CsgKind::Subtraction: name = "subtraction"; break;
            }
            json out{{"type", name}, {"a", node_json(*c.lhs)}, {"b", node_json(*c.rhs)}};
            if (c.kind == CsgKind::SmoothUnion) out["k"] = c.smooth_k;
            return out;
        }
        json operator()(const TranslateParams& t) const
        {
            return {{"type", "translate"}, {"offset", vec3_json(t.offset)},
                    {"child", node_json(*t.child)}};
        }
        json operator()(const RotateParams& r) const
        {
            return {{"type", "rotate"}, {"axis", vec3_json(r.axis)}, {"angle", r.angle},
                    {"child", node_json(*r.child)}};
        }
        json operator()(const ElongateParams& e) const
        {
            return {{"type", "elongate"}, {"amount", vec3_json(e.amount)},
                    {"child", node_json(*e.child)}};
        }
        json operator()(const TwistParams& t) const
        {
            return {{"type", "twist"}, {"rate", t.rate}, {"child", node_json(*t.child)}};
        }
        json operator()(const BendParams& b) const
        {
            return {{"type", "bend"}, {"rate", b.rate}, {"child", node_json(*b.child)}};
        }
        json operator()(const RepeatParams& r) const
        {
            return {{"type", "repeat"}, {"period", vec3_json(r.period)},
                    {"child", node_json(*r.child)}};
        }
        json operator()(const DisplaceParams& d) const
        {
            return {{"type", "displace"}, {"amplitude", d.amplitude},
                    {"frequency", d.frequency}, {"child", node_json(*d.child)}};
        }
    };
    return std::visit(Visitor{}, node.shape);
}

}  // namespace

// ---------------------------------------------------------------------------
// Scene documents
// ---------------------------------------------------------------------------

ParsedScene parse_scene(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& err) {
        throw ParseError(std::string("scene document: ") + err.what());
    }

    ParsedScene out;
    Scene& scene = out.scene;
    auto& warnings = out.warnings;

    warn_unknown_keys(doc, {"materials", "ambient", "sdfs", "bounds", "source", "grid", "run"},
                      "document root", warnings);

    // materials
    const json& mats = require_key(doc, "materials", "document root");
    if (!mats.is_object() || mats.empty())
        parse_fail("materials", "expected a non-empty object of named materials");
    for (const auto& [name, body] : mats.items()) {
        const std::string where = "materials." + name;
        warn_unknown_keys(body, {"mu_a", "mu_s", "g", "n"}, where, warnings);
        OpticalProps props;
        props.mu_a = number_at(body, "mu_a", where);
        props.mu_s = number_at(body, "mu_s", where);
        props.g = number_or(body, "g", 0.0, where);
        props.n = number_or(body, "n", 1.0, where);
        validate_props(props, "material '" + name + "'");
        scene.material_names.push_back(name);
        scene.materials.push_back(props);
    }
    auto material_index = [&](const std::string& name, const std::string& where) {
        for (std::size_t i = 0; i < scene.material_names.size(); ++i)
            if (scene.material_names[i] == name) return static_cast<int>(i);
        throw ValidationError(where + ": reference to unknown material '" + name + "'");
    };

    const json& ambient = require_key(doc, "ambient", "document root");
    if (!ambient.is_string()) parse_fail("ambient", "expected a material name");
    scene.ambient = material_index(ambient.get<std::string>(), "ambient");

    // sdf roots
    const json& sdfs = require_key(doc, "sdfs", "document root");
    if (!sdfs.is_array()) parse_fail("sdfs", "expected an array");
    for (std::size_t i = 0; i < sdfs.size(); ++i) {
        const std::string where = "sdfs[" + std::to_string(i) + "]";
        const json& entry = sdfs[i];
        warn_unknown_keys(entry, {"material", "shape"}, where, warnings);
        const json& mat_name = require_key(entry, "material", where);
        if (!mat_name.is_string()) parse_fail(where + ".material", "expected a material name");
        SdfPtr root = parse_node(require_key(entry, "shape", where), where + ".shape", warnings);
        scene.roots.push_back(
            with_material(root, material_index(mat_name.get<std::string>(), where)));
    }

    // bounds
    const json& bounds = require_key(doc, "bounds", "document root");
    warn_unknown_keys(bounds, {"lo", "hi"}, "bounds", warnings);
    scene.bounds.lo = vec3_at(bounds, "lo", "bounds");
    scene.bounds.hi = vec3_at(bounds, "hi", "bounds");

    // source
    const json& source = require_key(doc, "source", "document root");
    const json& kind = require_key(source, "kind", "source");
    if (!kind.is_string()) parse_fail("source.kind", "expected a string");
    const std::string kind_name = kind.get<std::string>();
    if (kind_name == "point_isotropic") {
        warn_unknown_keys(source, {"kind", "position"}, "source", warnings);
        scene.source.kind = SourceKind::PointIsotropic;
        scene.source.position = vec3_at(source, "position", "source");
    } else if (kind_name == "uniform_plane") {
        warn_unknown_keys(source, {"kind", "z", "direction"}, "source", warnings);
        scene.source.kind = SourceKind::UniformPlane;
        scene.source.plane_z = number_at(source, "z", "source");
        scene.source.direction = vec3_at(source, "direction", "source").normalized();
    } else if (kind_name == "circular_beam") {
        warn_unknown_keys(source, {"kind", "center", "radius", "direction"}, "source", warnings);
        scene.source.kind = SourceKind::CircularBeam;
        scene.source.center = vec3_at(source, "center", "source");
        scene.source.radius = number_at(source, "radius", "source");
        scene.source.direction = vec3_at(source, "direction", "source").normalized();
    } else {
        throw ValidationError("source.kind: unknown source kind '" + kind_name + "'");
    }

    // grid
    const json& grid = require_key(doc, "grid", "document root");
    warn_unknown_keys(grid, {"dims"}, "grid", warnings);
    const json& dims = require_key(grid, "dims", "grid");
    if (!dims.is_array() || dims.size() != 3 || !dims[0].is_number_integer() ||
        !dims[1].is_number_integer() || !dims[2].is_number_integer())
        parse_fail("grid.dims", "expected an array of 3 integers");
    scene.grid.dims = Vec3i(dims[0].get<int>(), dims[1].get<int>(), dims[2].get<int>());

    // run
    const json& run = require_key(doc, "run", "document root");
    warn_unknown_keys(run,
                      {"photons", "seed", "workers", "delta", "roulette", "max_steps",
                       "lipschitz_safety"},
                      "run", warnings);
    const json& photons = require_key(run, "photons", "run");
    if (!photons.is_number_integer()) parse_fail("run.photons", "expected an integer");
    scene.run.n_photons = photons.get<std::int64_t>();
    if (run.contains("seed")) {
        if (!run.at("seed").is_number_integer()) parse_fail("run.seed", "expected an integer");
        scene.run.seed = run.at("seed").get<std::uint64_t>();
    }
    if (run.contains("workers")) {
        if (!run.at("workers").is_number_integer())
            parse_fail("run.workers", "expected an integer");
        scene.run.workers = run.at("workers").get<int>();
    }
    scene.run.delta = number_or(run, "delta", scene.run.delta, "run");
    if (run.contains("roulette")) {
        if (!run.at("roulette").is_boolean()) parse_fail("run.roulette", "expected a boolean");
        scene.run.roulette = run.at("roulette").get<bool>();
    }
    if (run.contains("max_steps")) {
        if (!run.at("max_steps").is_number_integer())
            parse_fail("run.max_steps", "expected an integer");
        scene.run.max_steps = run.at("max_steps").get<int>();
    }
    scene.run.lipschitz_safety =
        number_or(run, "lipschitz_safety", scene.run.lipschitz_safety, "run");

    validate_scene(scene);
    return out;
}

ParsedScene load_scene(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open scene file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scene(buffer.str());
}

std::string serialize_scene(const Scene& scene)
{
    json doc;
    json mats = json::object();
    for (std::size_t i = 0; i < scene.materials.size(); ++i) {
        const OpticalProps& props = scene.materials[i];
        mats[scene.material_names[i]] = {
            {"mu_a", props.mu_a}, {"mu_s", props.mu_s}, {"g", props.g}, {"n", props.n}};
    }
    doc["materials"] = std::move(mats);
    doc["ambient"] = scene.material_names[scene.ambient];

    json sdfs = json::array();
    for (const auto& root : scene.roots)
        sdfs.push_back({{"material", scene.material_names[root->material]},
                        {"shape", node_json(*root)}});
    doc["sdfs"] = std::move(sdfs);

    doc["bounds"] = {{"lo", vec3_json(scene.bounds.lo)}, {"hi", vec3_json(scene.bounds.hi)}};

    switch (scene.source.kind) {
        case SourceKind::PointIsotropic:
            doc["source"] = {{"kind", "point_isotropic"},
                             {"position", vec3_json(scene.source.position)}};
            break;
        case SourceKind::UniformPlane:
            doc["source"] = {{"kind", "uniform_plane"},
                             {"z", scene.source.plane_z},
                             {"direction", vec3_json(scene.source.direction)}};
            break;
        case SourceKind::CircularBeam:
            doc["source"] = {{"kind", "circular_beam"},
                             {"center", vec3_json(scene.source.center)},
                             {"radius", scene.source.radius},
                             {"direction", vec3_json(scene.source.direction)}};
            break;
    }

    doc["grid"] = {{"dims", {scene.grid.dims.x(), scene.grid.dims.y(), scene.grid.dims.z()}}};
    doc["run"] = {{"photons", scene.run.n_photons},
                  {"seed", scene.run.seed},
                  {"workers", scene.run.workers},
                  {"delta", scene.run.delta},
                  {"roulette", scene.run.roulette},
                  {"max_steps", scene.run.max_steps},
                  {"lipschitz_safety", scene.run.lipschitz_safety}};
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Grid files
// ---------------------------------------------------------------------------

void write_grid(const GridData& grid, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    out.exceptions(std::ios::failbit | std::ios::badbit);

    out.write(kMagic, sizeof kMagic);
    auto write_u32 = [&](std::uint32_t v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
    };
    auto write_f64 = [&](double v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
    };
    write_u32(kVersion);
    write_u32(static_cast<std::uint32_t>(grid.kind));
    for (int axis = 0; axis < 3; ++axis)
        write_u32(static_cast<std::uint32_t>(grid.dims[axis]));
    for (int axis = 0; axis < 3; ++axis) write_f64(grid.extents.lo[axis]);
    for (int axis = 0; axis < 3; ++axis) write_f64(grid.extents.hi[axis]);

    const std::size_t expected = static_cast<std::size_t>(grid.dims.x()) * grid.dims.y() *
                                 grid.dims.z();
    if (grid.values.size() != expected)
        throw FormatError("write_grid: value count does not match dims");
    out.write(reinterpret_cast<const char*>(grid.values.data()),
              static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
}

GridData read_grid(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open grid file: " + path.string());

    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw FormatError("grid file: bad magic");

    auto read_u32 = [&]() {
        std::uint32_t v = 0;
        if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
            throw FormatError("grid file: truncated header");
        return v;
    };
    auto read_f64 = [&]() {
        double v = 0;
        if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
            throw FormatError("grid file: truncated header");
        return v;
    };

    const std::uint32_t version = read_u32();
    if (version != kVersion)
        throw FormatError("grid file: unsupported version " + std::to_string(version));
    const std::uint32_t kind = read_u32();
    if (kind > static_cast<std::uint32_t>(GridKind::Fluence))
        throw FormatError("grid file: unknown accumulator kind " + std::to_string(kind));

    GridData grid;
    grid.kind = static_cast<GridKind>(kind);
    for (int axis = 0; axis < 3; ++axis) {
        const std::uint32_t d = read_u32();
        if (d == 0) throw FormatError("grid file: zero dimension");
        grid.dims[axis] = static_cast<int>(d);
    }
    for (int axis = 0; axis < 3; ++axis) grid.extents.lo[axis] = read_f64();
    for (int axis = 0; axis < 3; ++axis) grid.extents.hi[axis] = read_f64();

    const std::size_t count = static_cast<std::size_t>(grid.dims.x()) * grid.dims.y() *
                              grid.dims.z();
    grid.values.resize(count);
    if (!in.read(reinterpret_cast<char*>(grid.values.data()),
                 static_cast<std::streamsize>(count * sizeof(double))))
        throw FormatError("grid file: payload shorter than header dims");
    char extra;
    if (in.read(&extra, 1))
        throw FormatError("grid file: payload longer than header dims");
    return grid;
}

void write_slice_csv(const Slice& slice, const std::filesystem::path& path)
{
    std::ofstream out(path);
    out.exceptions(std::ios::failbit | std::ios::badbit);
    out.precision(17);
    for (int r = 0; r < slice.n_rows; ++r) {
        for (int c = 0; c < slice.n_cols; ++c) {
            if (c) out << ',';
            out << slice.values[static_cast<std::size_t>(r) * slice.n_cols + c];
        }
        out << '\n';
    }
}

}  // namespace sdmc
