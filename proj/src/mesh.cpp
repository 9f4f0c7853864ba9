/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/mesh.cpp
 *
 * Copyright 2026 The facemorph authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "facemorph/mesh.hpp"

#include "Eigen/Geometry"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

namespace facemorph {
namespace mesh {

namespace {

std::vector<std::string_view> split_whitespace(std::string_view line)
{
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size())
    {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        if (i > start)
            tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

double to_double(std::string_view token, std::size_t line_number)
{
    double value = 0.0;
    if (!token.empty() && token.front() == '+')
        token.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw MeshError("OBJ line " + std::to_string(line_number) + ": bad number '" + std::string(token) + "'");
    return value;
}

// Resolves a 1-based or negative OBJ index against `count` elements.
int resolve_index(std::string_view token, std::size_t count, std::size_t line_number, const char* what)
{
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || value == 0)
        throw MeshError("OBJ line " + std::to_string(line_number) + ": bad " + what + " index '" +
                        std::string(token) + "'");
    const long long resolved = value > 0 ? value - 1 : static_cast<long long>(count) + value;
    if (resolved < 0 || resolved >= static_cast<long long>(count))
        throw MeshError("OBJ line " + std::to_string(line_number) + ": " + what + " index " + std::to_string(value) +
                        " out of range (" + std::to_string(count) + " defined)");
    return static_cast<int>(resolved);
}

void append_fixed(std::string& out, double value)
{
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::fixed, 6);
    if (ec != std::errc())
        throw MeshError("coordinate too large to serialize");
    out.append(buffer, ptr);
}

} // namespace

void validate(const TriangleMesh& mesh)
{
    if (mesh.uvs.size() != mesh.vertices.size())
        throw MeshError("mesh has " + std::to_string(mesh.uvs.size()) + " uvs for " +
                        std::to_string(mesh.vertices.size()) + " vertices");
    if (!mesh.normals.empty() && mesh.normals.size() != mesh.vertices.size())
        throw MeshError("mesh has " + std::to_string(mesh.normals.size()) + " normals for " +
                        std::to_string(mesh.vertices.size()) + " vertices");
    for (std::size_t f = 0; f < mesh.faces.size(); ++f)
    {
        for (const int i : mesh.faces[f])
        {
            if (i < 0 || static_cast<std::size_t>(i) >= mesh.vertices.size())
                throw MeshError("face " + std::to_string(f) + " references vertex " + std::to_string(i) + " of " +
                                std::to_string(mesh.vertices.size()));
        }
    }
}

TriangleMesh load_obj(std::string_view text)
{
    TriangleMesh mesh;
    std::vector<Vec2> texcoords;
    std::vector<std::vector<std::pair<int, int>>> polygons; // (vertex, texcoord or -1) per corner
    std::vector<std::size_t> polygon_lines;
    std::set<std::string> skipped;
    bool warned_polygons = false;

    std::size_t line_number = 0;
    while (!text.empty())
    {
        ++line_number;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const auto tokens = split_whitespace(line);
        if (tokens.empty())
            continue;

        const auto keyword = tokens[0];
        if (keyword == "v")
        {
            if (tokens.size() < 4)
                throw MeshError("OBJ line " + std::to_string(line_number) + ": 'v' needs three coordinates");
            mesh.vertices.emplace_back(to_double(tokens[1], line_number), to_double(tokens[2], line_number),
                                       to_double(tokens[3], line_number));
        } else if (keyword == "vt")
        {
            if (tokens.size() < 3)
                throw MeshError("OBJ line " + std::to_string(line_number) + ": 'vt' needs two coordinates");
            texcoords.emplace_back(to_double(tokens[1], line_number), to_double(tokens[2], line_number));
        } else if (keyword == "f")
        {
            if (tokens.size() < 4)
                throw MeshError("OBJ line " + std::to_string(line_number) + ": face needs at least 3 corners");
            std::vector<std::pair<int, int>> corners;
            for (std::size_t k = 1; k < tokens.size(); ++k)
            {
                const auto corner = tokens[k];
                const auto slash = corner.find('/');
                const int v = resolve_index(corner.substr(0, slash), mesh.vertices.size(), line_number, "vertex");
                int vt = -1;
                if (slash != std::string_view::npos)
                {
                    const auto rest = corner.substr(slash + 1);
                    const auto uv_token = rest.substr(0, rest.find('/'));
                    if (!uv_token.empty())
                        vt = resolve_index(uv_token, texcoords.size(), line_number, "texture");
                }
                corners.emplace_back(v, vt);
            }
            if (corners.size() > 3 && !warned_polygons)
            {
                warn("OBJ: faces with more than 3 corners are fan-triangulated");
                warned_polygons = true;
            }
            polygons.push_back(std::move(corners));
            polygon_lines.push_back(line_number);
        } else if (skipped.insert(std::string(keyword)).second)
        {
            warn("OBJ: skipping unsupported directive '" + std::string(keyword) + "'");
        }
    }

    std::vector<std::optional<Vec2>> assigned(mesh.vertices.size());
    for (std::size_t p = 0; p < polygons.size(); ++p)
    {
        const auto& corners = polygons[p];
        for (const auto& [v, vt] : corners)
        {
            if (vt < 0)
                continue;
            if (assigned[v] && *assigned[v] != texcoords[vt])
                throw MeshError("OBJ line " + std::to_string(polygon_lines[p]) + ": vertex " + std::to_string(v + 1) +
                                " has conflicting texture coordinates (uv seams are not supported)");
            assigned[v] = texcoords[vt];
        }
        for (std::size_t k = 1; k + 1 < corners.size(); ++k)
            mesh.faces.push_back({corners[0].first, corners[k].first, corners[k + 1].first});
    }

    mesh.uvs.resize(mesh.vertices.size(), Vec2::Zero());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    {
        if (assigned[i])
            mesh.uvs[i] = *assigned[i];
        else if (texcoords.size() == mesh.vertices.size())
            mesh.uvs[i] = texcoords[i];
    }
    return mesh;
}

std::string save_obj(const TriangleMesh& mesh)
{
    validate(mesh);
    std::string out;
    out.reserve(mesh.vertices.size() * 64 + mesh.faces.size() * 32);
    for (const auto& v : mesh.vertices)
    {
        out += "v ";
        append_fixed(out, v.x());
        out += ' ';
        append_fixed(out, v.y());
        out += ' ';
        append_fixed(out, v.z());
        out += '\n';
    }
    for (const auto& uv : mesh.uvs)
    {
        out += "vt ";
        append_fixed(out, uv.x());
        out += ' ';
        append_fixed(out, uv.y());
        out += '\n';
    }
    for (const auto& f : mesh.faces)
    {
        out += 'f';
        for (const int i : f)
        {
            const auto index = std::to_string(i + 1);
            out += ' ' + index + '/' + index;
        }
        out += '\n';
    }
    return out;
}

TriangleMesh read_obj_file(const std::filesystem::path& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw MeshError("could not open OBJ file: " + path.string());
    std::ostringstream contents;
    contents << file.rdbuf();
    return load_obj(contents.str());
}

void write_obj_file(const TriangleMesh& mesh, const std::filesystem::path& path)
{
    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw MeshError("could not open OBJ file for writing: " + path.string());
    file << save_obj(mesh);
}

bool same_topology(const TriangleMesh& a, const TriangleMesh& b)
{
    return a.vertices.size() == b.vertices.size() && a.faces.size() == b.faces.size() &&
           (a.faces.empty() ||
            std::memcmp(a.faces.data(), b.faces.data(), a.faces.size() * sizeof(TriangleIndices)) == 0);
}

void interpolate_mesh_into(const TriangleMesh& a, const TriangleMesh& b, double t, TriangleMesh& out)
{
    if (!(t >= 0.0 && t <= 1.0))
        throw MeshError("interpolation factor " + std::to_string(t) + " is outside [0, 1]");
    if (!same_topology(a, b))
        throw MeshError("interpolate_mesh: meshes do not share connectivity");
    if (a.uvs.size() != b.uvs.size())
        throw MeshError("interpolate_mesh: uv counts differ");
    if (&out == &a || &out == &b)
        throw MeshError("interpolate_mesh: output aliases an input mesh");
    for (std::size_t i = 0; i < a.uvs.size(); ++i)
    {
        if ((a.uvs[i] - b.uvs[i]).cwiseAbs().maxCoeff() > 1e-9)
            throw MeshError("interpolate_mesh: uv " + std::to_string(i) + " differs between the meshes");
    }

    out.faces.assign(a.faces.begin(), a.faces.end());
    out.uvs.assign(a.uvs.begin(), a.uvs.end());
    if (t == 0.0)
    {
        out.vertices.assign(a.vertices.begin(), a.vertices.end());
    } else if (t == 1.0)
    {
        out.vertices.assign(b.vertices.begin(), b.vertices.end());
    } else
    {
        const auto weights = blend_weights(t);
        out.vertices.resize(a.vertices.size());
        for (std::size_t i = 0; i < a.vertices.size(); ++i)
            out.vertices[i] = blend(a.vertices[i], b.vertices[i], weights);
    }
    compute_vertex_normals_in_place(out);
}

TriangleMesh interpolate_mesh(const TriangleMesh& a, const TriangleMesh& b, double t)
{
    TriangleMesh result;
    interpolate_mesh_into(a, b, t, result);
    return result;
}

void compute_vertex_normals_in_place(TriangleMesh& mesh)
{
    // Accumulate area-weighted face normals directly in the output buffer.
    mesh.normals.assign(mesh.vertices.size(), Vec3::Zero());
    for (const auto& f : mesh.faces)
    {
        const Vec3& p0 = mesh.vertices[f[0]];
        const Vec3 weighted = (mesh.vertices[f[1]] - p0).cross(mesh.vertices[f[2]] - p0); // 2 * area * n
        mesh.normals[f[0]] += weighted;
        mesh.normals[f[1]] += weighted;
        mesh.normals[f[2]] += weighted;
    }
    std::size_t fallback = 0;
    for (auto& n : mesh.normals)
    {
        const double length = n.norm();
        if (length > std::numeric_limits<double>::min() && std::isfinite(length))
        {
            n /= length;
        } else
        {
            n = Vec3::UnitZ();
            ++fallback;
        }
    }
    if (fallback > 0)
        warn(std::to_string(fallback) + " vertex normal(s) undefined; using (0, 0, 1)");
}

TriangleMesh compute_vertex_normals(const TriangleMesh& mesh)
{
    TriangleMesh result = mesh;
    compute_vertex_normals_in_place(result);
    return result;
}

BoundingBox bounding_box(const TriangleMesh& mesh)
{
    if (mesh.vertices.empty())
        throw MeshError("bounding_box of an empty mesh");
    BoundingBox box{mesh.vertices.front(), mesh.vertices.front()};
    for (const auto& v : mesh.vertices)
    {
        box.min = box.min.cwiseMin(v);
        box.max = box.max.cwiseMax(v);
    }
    return box;
}

} /* namespace mesh */
} /* namespace facemorph */
