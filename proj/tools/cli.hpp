#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <type_traits>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <meshdist/meshdist.hpp>

namespace meshdist::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

// Column order of the CSV report; mirrored in schemas/report.schema.json.
inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{
        "command",   "frame",     "kind",      "variant",   "distance",       "witness_exact", "tri_a",
        "tri_b",     "point_a_x", "point_a_y", "point_a_z", "point_b_x",      "point_b_y",     "point_b_z",
        "iterations", "bvtt_nodes", "expanded_pairs", "peak_front", "triangle_tests", "build_ms", "refit_ms",
        "query_ms",  "check_distance", "check_ok"};
    return cols;
}

struct RunSpec {
    std::string command;
    std::optional<std::string> mesh_a, mesh_b;
    std::optional<std::string> gen_kind;
    SceneParams gen_params;
    std::optional<std::uint64_t> seed;
    std::string kind = "min";
    std::optional<std::string> frames_path;
    EngineConfig engine;
    std::string out;
    std::string format = "json";
    bool force = false;
    bool check = false;
    bool coherent = false;

    void validate() const {
        if (command != "query" && command != "ablate" && command != "oracle") throw Error("unknown command '" + command + "'");
        const bool files = mesh_a || mesh_b;
        if (files && gen_kind) throw Error("give either --mesh-a/--mesh-b or --gen, not both");
        if (!gen_kind && !(mesh_a && mesh_b)) throw Error("both --mesh-a and --mesh-b are required without --gen");
        if (kind != "min" && kind != "max" && kind != "both") throw Error("--kind must be min, max or both");
        if (format != "json" && format != "csv") throw Error("--format must be json or csv");
        engine.validate();
    }

    std::vector<QueryKind> kinds() const {
        if (kind == "both") return {QueryKind::Min, QueryKind::Max};
        return {kind == "max" ? QueryKind::Max : QueryKind::Min};
    }
};

template <typename Real>
struct Frame {
    RigidTransform<Real> a, b;
    std::optional<std::string> mesh_a, mesh_b;
};

namespace detail {

inline Vec3<double> vec3_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) throw Error(std::string("frames: '") + what + "' must be an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// {"rotation": [[r00,r01,r02],[...],[...]]} or {"axis": [x,y,z], "angle_deg": a, "pivot": [x,y,z]},
// plus an optional "translation": [x,y,z].
template <typename Real>
RigidTransform<Real> transform_from_json(const json& j) {
    if (!j.is_object()) throw Error("frames: a transform must be an object");
    Mat3<double> r = Mat3<double>::Identity();
    Vec3<double> t = Vec3<double>::Zero();
    if (j.contains("rotation")) {
        const auto& rows = j.at("rotation");
        if (!rows.is_array() || rows.size() != 3) throw Error("frames: 'rotation' must be a 3x3 array");
        for (int i = 0; i < 3; ++i) r.row(i) = vec3_from_json(rows[i], "rotation row").transpose();
    } else if (j.contains("axis")) {
        const Vec3<double> axis = vec3_from_json(j.at("axis"), "axis");
        const double angle = j.value("angle_deg", 0.0) * std::numbers::pi / 180.0;
        const Vec3<double> pivot = j.contains("pivot") ? vec3_from_json(j.at("pivot"), "pivot") : Vec3<double>::Zero();
        const auto xf = RigidTransform<double>::rotation_about(axis, angle, pivot);
        r = xf.rotation();
        t = xf.translation();
    }
    if (j.contains("translation")) t += vec3_from_json(j.at("translation"), "translation");
    return RigidTransform<Real>(r.cast<Real>(), t.cast<Real>());
}

} // namespace detail

// Frames file: either an array of {"a": xf, "b": xf, "mesh_a": path, "mesh_b": path}
// (every key optional; a mesh path replaces that mesh's base geometry for the frame) or an object {"a": [xf...], "b": [xf...]} whose arrays must
// have equal length when both are present.
template <typename Real>
std::vector<Frame<Real>> load_frames(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open frames file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error("frames file '" + path + "': " + e.what());
    }
    // Mesh paths inside the file are relative to the file itself.
    const auto resolve = [&](const json& v) {
        std::filesystem::path p = v.get<std::string>();
        if (p.is_relative()) p = std::filesystem::path(path).parent_path() / p;
        return p.string();
    };
    std::vector<Frame<Real>> frames;
    try {
        if (j.is_array()) {
            for (const auto& f : j) {
                Frame<Real> fr;
                if (f.contains("a")) fr.a = detail::transform_from_json<Real>(f.at("a"));
                if (f.contains("b")) fr.b = detail::transform_from_json<Real>(f.at("b"));
                if (f.contains("mesh_a")) fr.mesh_a = resolve(f.at("mesh_a"));
                if (f.contains("mesh_b")) fr.mesh_b = resolve(f.at("mesh_b"));
                frames.push_back(std::move(fr));
            }
        } else if (j.is_object()) {
            const std::size_t na = j.contains("a") ? j.at("a").size() : 0;
            const std::size_t nb = j.contains("b") ? j.at("b").size() : 0;
            if (na && nb && na != nb)
                throw Error("frames file '" + path + "': " + std::to_string(na) + " transforms for A but " +
                            std::to_string(nb) + " for B");
            frames.resize(std::max(na, nb));
            for (std::size_t i = 0; i < na; ++i) frames[i].a = detail::transform_from_json<Real>(j.at("a")[i]);
            for (std::size_t i = 0; i < nb; ++i) frames[i].b = detail::transform_from_json<Real>(j.at("b")[i]);
        } else {
            throw Error("frames file '" + path + "' must hold an array or an object");
        }
    } catch (const json::exception& e) {
        throw Error("frames file '" + path + "': " + e.what());
    }
    if (frames.empty()) throw Error("frames file '" + path + "' has no frames");
    return frames;
}

template <typename Real>
MeshPair<Real> load_inputs(const RunSpec& spec) {
    if (spec.gen_kind) {
        SceneParams params = spec.gen_params;
        if (spec.seed) params.set("seed", std::to_string(*spec.seed));
        return gen_scene<Real>(*spec.gen_kind, params);
    }
    return {load_obj<Real>(*spec.mesh_a), load_obj<Real>(*spec.mesh_b)};
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename Real>
json make_record(const std::string& command, std::size_t frame, QueryKind kind, const std::string& variant,
                 const QueryResult<Real>& r, double build_ms, double refit_ms, double query_ms) {
    json rec = to_json(r);
    rec["command"] = command;
    rec["frame"] = frame;
    rec["kind"] = to_string(kind);
    rec["variant"] = variant;
    rec["timings_ms"] = {{"build", build_ms}, {"refit", refit_ms}, {"query", query_ms}};
    rec["check"] = nullptr;
    return rec;
}

template <typename Real>
QueryResult<Real> run_kind(QueryKind kind, const TriangleMesh<Real>& a, const TriangleMesh<Real>& b, const F12Bvh<Real>& ba,
                           const F12Bvh<Real>& bb, const EngineConfig& cfg,
                           const std::optional<std::pair<TriangleId, TriangleId>>& seed = std::nullopt) {
    return kind == QueryKind::Min ? run_query<QueryKind::Min>(a, b, ba, bb, cfg, seed)
                                  : run_query<QueryKind::Max>(a, b, ba, bb, cfg, seed);
}

template <typename Real>
Witness<Real> oracle_kind(QueryKind kind, const TriangleMesh<Real>& a, const TriangleMesh<Real>& b, bool force, int threads) {
    return kind == QueryKind::Min ? brute_force_min(a, b, force, threads) : brute_force_max(a, b, force, threads);
}

template <typename Real>
TriangleMesh<Real> posed(const TriangleMesh<Real>& base, const RigidTransform<Real>& xf, const std::optional<std::string>& replacement) {
    if (!replacement) return apply_transform(base, xf);
    auto mesh = load_obj<Real>(*replacement);
    if (!mesh.same_topology(base))
        throw TopologyMismatchError("frame mesh '" + *replacement + "' has " + std::to_string(mesh.triangle_count()) +
                                    " triangles / " + std::to_string(mesh.vertex_count()) +
                                    " vertices but the base mesh has " + std::to_string(base.triangle_count()) + " / " +
                                    std::to_string(base.vertex_count()));
    return apply_transform(mesh, xf);
}

} // namespace detail

struct CommandOutcome {
    json report;
    int exit_code = kExitOk;
    std::string message;
};

template <typename Real>
CommandOutcome run_frames(const RunSpec& spec) {
    CommandOutcome outcome;
    auto [base_a, base_b] = load_inputs<Real>(spec);
    std::vector<Frame<Real>> frames = spec.frames_path ? load_frames<Real>(*spec.frames_path) : std::vector<Frame<Real>>(1);
    const bool animated = spec.frames_path.has_value();

    json records = json::array();
    const auto kinds = spec.kinds();

    if (spec.command == "oracle") {
        for (std::size_t f = 0; f < frames.size(); ++f) {
            const auto a = detail::posed(base_a, frames[f].a, frames[f].mesh_a);
            const auto b = detail::posed(base_b, frames[f].b, frames[f].mesh_b);
            for (QueryKind kind : kinds) {
                const auto t0 = detail::Clock::now();
                const Witness<Real> w = detail::oracle_kind(kind, a, b, spec.force, spec.engine.threads);
                QueryResult<Real> r;
                r.kind = kind;
                r.distance = w.distance;
                r.witness = w;
                r.witness_exact = true;
                r.triangle_tests = a.triangle_count() * b.triangle_count();
                records.push_back(detail::make_record(spec.command, f, kind, "oracle", r, 0.0, 0.0, detail::ms_since(t0)));
            }
        }
        outcome.report["records"] = std::move(records);
        return outcome;
    }

    auto t0 = detail::Clock::now();
    F12Bvh<Real> bvh_a = build_f12(base_a), bvh_b = build_f12(base_b);
    const double build_ms = detail::ms_since(t0);

    std::vector<std::optional<std::pair<TriangleId, TriangleId>>> previous(2);
    bool consistent = true;

    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto a = detail::posed(base_a, frames[f].a, frames[f].mesh_a);
        const auto b = detail::posed(base_b, frames[f].b, frames[f].mesh_b);
        double refit_ms = 0;
        if (animated) {
            t0 = detail::Clock::now();
            bvh_a.refit(a);
            bvh_b.refit(b);
            refit_ms = detail::ms_since(t0);
        }
        for (QueryKind kind : kinds) {
            const std::size_t slot = kind == QueryKind::Min ? 0 : 1;
            std::optional<Witness<Real>> oracle;
            if (spec.check) oracle = detail::oracle_kind(kind, a, b, true, spec.engine.threads);

            auto attach_check = [&](json& rec, Real distance) {
                if (!oracle) return;
                const double tol = std::is_same_v<Real, float> ? 1e-5 : 1e-9;
                const double ref = double(oracle->distance);
                const bool ok = std::abs(double(distance) - ref) <= tol * std::max(1.0, std::abs(ref));
                rec["check"] = {{"distance", double(oracle->distance)}, {"ok", ok}};
                if (!ok) {
                    outcome.exit_code = kExitCheckFailed;
                    outcome.message += "frame " + std::to_string(f) + " " + to_string(kind) + ": engine distance " +
                                       std::to_string(double(distance)) + " != brute force " +
                                       std::to_string(double(oracle->distance)) + "\n";
                }
            };

            if (spec.command == "query") {
                t0 = detail::Clock::now();
                const auto seed = spec.coherent ? previous[slot] : std::nullopt;
                const auto r = detail::run_kind(kind, a, b, bvh_a, bvh_b, spec.engine, seed);
                const double query_ms = detail::ms_since(t0);
                if (r.witness) previous[slot] = std::make_pair(r.witness->tri_a, r.witness->tri_b);
                json rec = detail::make_record(spec.command, f, kind, "full", r, f == 0 ? build_ms : 0.0, refit_ms, query_ms);
                attach_check(rec, r.distance);
                records.push_back(std::move(rec));
                continue;
            }

            // ablate
            struct Variant {
                const char* name;
                EngineConfig cfg;
                bool dfs;
            };
            EngineConfig no_enhanced = spec.engine, fixed_depth = spec.engine;
            no_enhanced.enhanced_bounds = false;
            fixed_depth.depth_cap = 1;
            const Variant variants[] = {{"full", spec.engine, false},
                                        {"no-enhanced", no_enhanced, false},
                                        {"fixed-depth", fixed_depth, false},
                                        {"dfs", spec.engine, true}};
            std::optional<Real> reference;
            for (const auto& v : variants) {
                t0 = detail::Clock::now();
                const auto r = v.dfs ? run_dfs_baseline(a, b, bvh_b, kind, v.cfg) : detail::run_kind(kind, a, b, bvh_a, bvh_b, v.cfg);
                const double query_ms = detail::ms_since(t0);
                json rec = detail::make_record(spec.command, f, kind, v.name, r, f == 0 ? build_ms : 0.0, refit_ms, query_ms);
                attach_check(rec, r.distance);
                records.push_back(std::move(rec));
                if (!reference) reference = r.distance;
                if (r.distance != *reference) {
                    consistent = false;
                    outcome.exit_code = kExitCheckFailed;
                    outcome.message += "frame " + std::to_string(f) + " " + to_string(kind) + ": variant " + v.name +
                                       " distance differs from the full engine\n";
                }
            }
        }
    }
    outcome.report["records"] = std::move(records);
    if (spec.command == "ablate") outcome.report["consistent"] = consistent;
    return outcome;
}

inline json config_to_json(const RunSpec& spec) {
    return {{"front_cap", spec.engine.front_cap},
            {"depth_cap", spec.engine.depth_cap},
            {"threads", spec.engine.threads},
            {"enhanced_bounds", spec.engine.enhanced_bounds},
            {"kind", spec.kind}};
}

inline std::string csv_field(const json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) {
        // Shortest text that reads back to the same double.
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, v.get<double>());
        return std::string(buf, res.ptr);
    }
    return v.dump();
}

inline std::string to_csv(const json& report) {
    std::ostringstream out;
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& rec : report.at("records")) {
        auto point = [&](const char* key, int axis) -> json {
            return rec.at(key).is_null() ? json(nullptr) : rec.at(key)[axis];
        };
        const json check = rec.at("check");
        const std::vector<json> row{rec.at("command"),
                                    rec.at("frame"),
                                    rec.at("kind"),
                                    rec.at("variant"),
                                    rec.at("distance"),
                                    rec.at("witness_exact"),
                                    rec.at("tri_a"),
                                    rec.at("tri_b"),
                                    point("point_a", 0),
                                    point("point_a", 1),
                                    point("point_a", 2),
                                    point("point_b", 0),
                                    point("point_b", 1),
                                    point("point_b", 2),
                                    rec.at("iterations").size(),
                                    rec.at("bvtt_nodes"),
                                    rec.at("expanded_pairs"),
                                    rec.at("peak_front"),
                                    rec.at("triangle_tests"),
                                    rec.at("timings_ms").at("build"),
                                    rec.at("timings_ms").at("refit"),
                                    rec.at("timings_ms").at("query"),
                                    check.is_null() ? json(nullptr) : check.at("distance"),
                                    check.is_null() ? json(nullptr) : check.at("ok")};
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
        out << '\n';
    }
    return out.str();
}

// Runs a parsed command and writes its report. Errors are reported on `err`;
// the return value is the process exit code.
inline int execute(const RunSpec& spec, std::ostream& err) {
    CommandOutcome outcome;
    try {
        spec.validate();
        outcome = spec.engine.precision == Precision::Single ? run_frames<float>(spec) : run_frames<double>(spec);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }

    json report;
    report["schema_version"] = 1;
    report["command"] = spec.command;
    report["precision"] = static_cast<int>(spec.engine.precision);
    report["config"] = config_to_json(spec);
    for (auto& [k, v] : outcome.report.items()) report[k] = v;

    const std::string text = spec.format == "csv" ? to_csv(report) : report.dump(2) + "\n";
    if (spec.out.empty() || spec.out == "-") {
        std::cout << text;
    } else {
        std::ofstream out(spec.out);
        if (!out) {
            err << "error: cannot write '" << spec.out << "'\n";
            return kExitError;
        }
        out << text;
    }
    if (outcome.exit_code != kExitOk) err << outcome.message;
    return outcome.exit_code;
}

// Builds the command-line parser bound to `spec`.
inline void configure_app(CLI::App& app, RunSpec& spec, std::string& threads, std::vector<std::string>& gen, int& precision) {
    app.require_subcommand(1, 1);
    for (const char* name : {"query", "ablate", "oracle"}) {
        auto* sub = app.add_subcommand(name, std::string(name) == "query"    ? "Run distance queries, one record per frame"
                                             : std::string(name) == "ablate" ? "Compare full engine, no-enhanced, fixed-depth and DFS variants"
                                                                             : "Brute-force reference distances");
        sub->add_option("--mesh-a", spec.mesh_a, "OBJ file for mesh A");
        sub->add_option("--mesh-b", spec.mesh_b, "OBJ file for mesh B");
        sub->add_option("--gen", gen, "Generated scene: KIND [k=v,...]")->expected(1, 2);
        sub->add_option("--kind", spec.kind, "min | max | both")->check(CLI::IsMember({"min", "max", "both"}));
        sub->add_option("--frames", spec.frames_path, "JSON file of per-frame transforms");
        sub->add_option("--precision", precision, "32 | 64")->check(CLI::IsMember({32, 64}));
        sub->add_option("--front-cap", spec.engine.front_cap, "Front size target C");
        sub->add_option("--depth-cap", spec.engine.depth_cap, "Maximum expansion depth k");
        sub->add_flag("--no-enhanced", [&spec](std::int64_t) { spec.engine.enhanced_bounds = false; }, "Use conventional box bounds only");
        sub->add_option("--threads", threads, "Worker count or 'auto' (default: $MESHDIST_THREADS or auto)");
        sub->add_option("--seed", spec.seed, "Scene seed (overrides seed= in --gen)");
        sub->add_option("--out", spec.out, "Report path (default: stdout)");
        sub->add_option("--format", spec.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_flag("--force", spec.force, "Lift the brute-force pair guard");
        sub->add_flag("--check", spec.check, "Cross-check every frame against brute force");
        sub->add_flag("--coherent", spec.coherent, "Seed each frame with the previous frame's witness pair");
        sub->callback([&spec, name] { spec.command = name; });
    }
}

inline int parse_threads(const std::string& text) {
    if (text.empty() || text == "auto") return 0;
    try {
        std::size_t used = 0;
        const int n = std::stoi(text, &used);
        if (used == text.size() && n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw Error("--threads must be a positive integer or 'auto', got '" + text + "'");
}

inline int main(int argc, char** argv, std::ostream& err = std::cerr) {
    CLI::App app{"Exact minimum/maximum distance between two triangle meshes"};
    RunSpec spec;
    std::string threads;
    std::vector<std::string> gen;
    int precision = 64;
    configure_app(app, spec, threads, gen, precision);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        if (threads.empty()) {
            if (const char* env = std::getenv("MESHDIST_THREADS")) threads = env;
        }
        spec.engine.threads = parse_threads(threads);
        spec.engine.precision = precision == 32 ? Precision::Single : Precision::Double;
        if (!gen.empty()) {
            spec.gen_kind = gen[0];
            if (gen.size() > 1) spec.gen_params = SceneParams::parse(gen[1]);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return execute(spec, err);
}

} // namespace meshdist::cli
