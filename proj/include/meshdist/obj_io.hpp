#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mesh.hpp"

namespace meshdist {

class ObjParseError : public Error {
public:
    ObjParseError(std::string source, std::size_t line, const std::string& what)
        : Error(source + ", line " + std::to_string(line) + ": " + what), source_(std::move(source)), line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline bool parse_double(std::string_view tok, double& out) {
    // std::from_chars for double is not available everywhere in libstdc++ 11.
    std::string buf(tok);
    char* end = nullptr;
    out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size() && !buf.empty();
}

} // namespace detail

// Reads the `v` and `f` records of a Wavefront OBJ stream. Polygons are
// fan-triangulated around their first vertex; negative (relative) indices are
// resolved against the vertices read so far; texture/normal indices are ignored.
template <typename Real>
TriangleMesh<Real> read_obj(std::istream& in, const std::string& source = "<stream>") {
    std::vector<Vec3<Real>> vertices;
    std::vector<TriangleIndices> triangles;
    std::vector<std::size_t> face_lines;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        const auto tok = detail::split_ws(view);
        if (tok.empty()) continue;

        if (tok[0] == "v") {
            if (tok.size() < 4) throw ObjParseError(source, lineno, "vertex record needs 3 coordinates");
            double xyz[3];
            for (int i = 0; i < 3; ++i) {
                if (!detail::parse_double(tok[1 + i], xyz[i]))
                    throw ObjParseError(source, lineno, "invalid coordinate '" + std::string(tok[1 + i]) + "'");
            }
            vertices.emplace_back(Real(xyz[0]), Real(xyz[1]), Real(xyz[2]));
        } else if (tok[0] == "f") {
            if (tok.size() < 4) throw ObjParseError(source, lineno, "face record needs at least 3 vertices");
            std::vector<std::uint32_t> poly;
            for (std::size_t i = 1; i < tok.size(); ++i) {
                const auto ref = tok[i].substr(0, tok[i].find('/'));
                long long idx = 0;
                auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), idx);
                if (ec != std::errc{} || ptr != ref.data() + ref.size() || idx == 0)
                    throw ObjParseError(source, lineno, "invalid vertex reference '" + std::string(tok[i]) + "'");
                const long long n = static_cast<long long>(vertices.size());
                const long long resolved = idx > 0 ? idx - 1 : n + idx;
                if (resolved < 0 || resolved >= n)
                    throw ObjParseError(source, lineno, "vertex reference " + std::to_string(idx) + " out of range");
                poly.push_back(static_cast<std::uint32_t>(resolved));
            }
            for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
                triangles.push_back({poly[0], poly[i], poly[i + 1]});
                face_lines.push_back(lineno);
            }
        }
        // vn, vt, o, g, s, usemtl, mtllib, l, p: ignored
    }

    try {
        return TriangleMesh<Real>(std::move(vertices), std::move(triangles));
    } catch (const DegenerateTriangleError& e) {
        std::string context = source + (e.faces().size() == 1 ? ", line" : ", lines");
        for (std::size_t i = 0; i < e.faces().size(); ++i) context += (i ? ", " : " ") + std::to_string(face_lines[e.faces()[i]]);
        throw DegenerateTriangleError(e.faces(), context + ": ");
    }
}

template <typename Real>
TriangleMesh<Real> load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open OBJ file '" + path + "'");
    return read_obj<Real>(in, path);
}

template <typename Real>
void write_obj(std::ostream& out, const TriangleMesh<Real>& mesh) {
    std::ostringstream ss;
    ss.precision(17);
    for (const auto& v : mesh.vertices()) ss << "v " << double(v.x()) << ' ' << double(v.y()) << ' ' << double(v.z()) << '\n';
    for (const auto& t : mesh.triangles()) ss << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    out << ss.str();
}

} // namespace meshdist
