/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: include/facemorph/mesh.hpp
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
#pragma once

#ifndef FACEMORPH_MESH_HPP
#define FACEMORPH_MESH_HPP

#include "facemorph/common.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace facemorph {
namespace mesh {

class MeshError : public Error
{
public:
    using Error::Error;
};

/**
 * Indexed triangle mesh with one texture coordinate per vertex.
 *
 * Texture coordinates follow the OBJ convention: v = 0 is the bottom row
 * of the texture image. Normals are optional derived data (empty when not
 * computed).
 */
struct TriangleMesh
{
    std::vector<Vec3> vertices;
    std::vector<Vec2> uvs;
    std::vector<TriangleIndices> faces;
    std::vector<Vec3> normals;
};

/// Throws MeshError if face indices, uv count or normal count are inconsistent.
void validate(const TriangleMesh& mesh);

/**
 * Parses the OBJ subset: `v x y z`, `vt u v`, `f` with `a`, `a/b`, `a//c`
 * or `a/b/c` corners (1-based or negative relative indices) and `#`
 * comments. Other directives are skipped with one warning per keyword.
 * Polygons with more than three corners are fan-triangulated with a warning.
 *
 * Texture coordinates are attached per vertex: a vertex referenced with two
 * different `vt` entries is an error.
 */
TriangleMesh load_obj(std::string_view text);

/// Writes `v`, `vt` and `f i/i j/j k/k` lines with 6 decimal digits. Normals are not written.
std::string save_obj(const TriangleMesh& mesh);

TriangleMesh read_obj_file(const std::filesystem::path& path);
void write_obj_file(const TriangleMesh& mesh, const std::filesystem::path& path);

/// Equal vertex counts and identical face lists (order-sensitive).
bool same_topology(const TriangleMesh& a, const TriangleMesh& b);

/**
 * Linear vertex interpolation between two meshes with shared connectivity.
 *
 * Vertex i becomes (1 - t) a_i + t b_i; faces and uvs are copied from a and
 * normals are recomputed. t = 0 and t = 1 reproduce the endpoint positions
 * bitwise, and interpolate_mesh(a, b, t) == interpolate_mesh(b, a, 1 - t).
 *
 * @throws MeshError on topology or uv mismatch, or t outside [0, 1].
 */
TriangleMesh interpolate_mesh(const TriangleMesh& a, const TriangleMesh& b, double t);

/**
 * interpolate_mesh() writing into `out`, whose buffers are reused when they
 * are large enough. Meant for loops that produce many frames.
 */
void interpolate_mesh_into(const TriangleMesh& a, const TriangleMesh& b, double t, TriangleMesh& out);

/**
 * Per-vertex normals as the normalized sum of area-weighted incident face
 * normals. Vertices without a usable sum get (0, 0, 1) and a warning.
 */
TriangleMesh compute_vertex_normals(const TriangleMesh& mesh);
void compute_vertex_normals_in_place(TriangleMesh& mesh);

struct BoundingBox
{
    Vec3 min;
    Vec3 max;
};

BoundingBox bounding_box(const TriangleMesh& mesh);

} /* namespace mesh */
} /* namespace facemorph */

#endif /* FACEMORPH_MESH_HPP */
