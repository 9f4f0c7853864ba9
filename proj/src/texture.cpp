/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/texture.cpp
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
#include "facemorph/fitting.hpp"
#include "facemorph/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace facemorph {
namespace fitting {

image::Image extract_texture(const mesh::TriangleMesh& mesh, const AffineCamera& camera, const image::Image& photo,
                             int texture_size)
{
    if (texture_size < 1)
        throw FittingError("extract_texture: texture size must be positive");
    if (photo.empty())
        throw FittingError("extract_texture: empty photo");
    if (mesh.uvs.size() != mesh.vertices.size())
        throw FittingError("extract_texture: mesh has no per-vertex uv coordinates");

    const int size = texture_size;
    image::Image texture(size, size);
    std::vector<bool> covered(static_cast<std::size_t>(size) * size, false);

    std::vector<Vec2> texel_positions(mesh.uvs.size());
    for (std::size_t i = 0; i < mesh.uvs.size(); ++i)
        texel_positions[i] = uv_to_texel(mesh.uvs[i], size);

    // Faces are visited in index order and never overwrite a texel, so the
    // lowest-numbered face containing a texel centre wins.
    for (const auto& face : mesh.faces)
    {
        const Vec2& a = texel_positions[face[0]];
        const Vec2& b = texel_positions[face[1]];
        const Vec2& c = texel_positions[face[2]];
        if (std::abs(geometry::orient2d(a, b, c)) <= geometry::epsilon_area)
            continue;
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x(), b.x(), c.x()}) - 0.5)));
        const int x1 = std::min(size - 1, static_cast<int>(std::ceil(std::max({a.x(), b.x(), c.x()}) - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y(), b.y(), c.y()}) - 0.5)));
        const int y1 = std::min(size - 1, static_cast<int>(std::ceil(std::max({a.y(), b.y(), c.y()}) - 0.5)));
        for (int y = y0; y <= y1; ++y)
        {
            for (int x = x0; x <= x1; ++x)
            {
                const std::size_t index = static_cast<std::size_t>(y) * size + x;
                if (covered[index])
                    continue;
                const Vec2 centre(x + 0.5, y + 0.5);
                if (!geometry::triangle_contains(a, b, c, centre))
                    continue;
                const auto w = geometry::barycentric_coords(a, b, c, centre);
                const Vec3 point = w.w0 * mesh.vertices[face[0]] + w.w1 * mesh.vertices[face[1]] +
                                   w.w2 * mesh.vertices[face[2]];
                const Vec2 pixel = camera.project(point);
                texture.set_pixel(x, y, image::sample_bilinear(photo, pixel.x(), pixel.y()));
                covered[index] = true;
            }
        }
    }

    // Dilate into uncovered texels (left, right, up, down neighbour order)
    // until everything is filled.
    const bool any_covered = std::find(covered.begin(), covered.end(), true) != covered.end();
    if (!any_covered)
        return texture;
    std::vector<std::size_t> frontier;
    for (std::size_t i = 0; i < covered.size(); ++i)
    {
        if (!covered[i])
            frontier.push_back(i);
    }
    while (!frontier.empty())
    {
        std::vector<std::pair<std::size_t, std::size_t>> fills;
        std::vector<std::size_t> remaining;
        for (const std::size_t i : frontier)
        {
            const int x = static_cast<int>(i % size), y = static_cast<int>(i / size);
            const std::pair<int, int> neighbours[4] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
            bool filled = false;
            for (const auto& [nx, ny] : neighbours)
            {
                if (nx < 0 || ny < 0 || nx >= size || ny >= size)
                    continue;
                const std::size_t j = static_cast<std::size_t>(ny) * size + nx;
                if (covered[j])
                {
                    fills.emplace_back(i, j);
                    filled = true;
                    break;
                }
            }
            if (!filled)
                remaining.push_back(i);
        }
        auto& bytes = texture.bytes();
        for (const auto& [dst, src] : fills)
        {
            std::copy_n(bytes.begin() + 3 * src, 3, bytes.begin() + 3 * dst);
        }
        for (const auto& fill : fills)
            covered[fill.first] = true;
        frontier = std::move(remaining);
    }
    return texture;
}

} /* namespace fitting */
} /* namespace facemorph */
