/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: include/facemorph/render.hpp
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

#ifndef FACEMORPH_RENDER_HPP
#define FACEMORPH_RENDER_HPP

#include "facemorph/common.hpp"
#include "facemorph/image.hpp"
#include "facemorph/mesh.hpp"

#include "Eigen/Core"

#include <limits>
#include <vector>

namespace facemorph {
namespace render {

class RenderError : public Error
{
public:
    using Error::Error;
};

struct Material
{
    double ka = 0.2;
    double kd = 0.75;
    double ks = 0.15;
    double shininess = 20.0;
};

/**
 * Maps model space to the frame: screen x (right) and y (down) in pixels
 * plus a depth that grows away from the viewer.
 *
 * `normal_rotation` takes model-space normals to a right-handed view frame
 * in which +z points at the viewer, which is where lights and the view
 * direction are expressed.
 */
struct ViewTransform
{
    Eigen::Matrix<double, 3, 4> screen = Eigen::Matrix<double, 3, 4>::Zero();
    Eigen::Matrix3d normal_rotation = Eigen::Matrix3d::Identity();

    Vec3 apply(const Vec3& p) const { return screen.leftCols<3>() * p + screen.col(3); }
};

/**
 * View transform of an affine camera (2x4, pixels). The viewing direction
 * is r1 x r2 for the two rows of its linear part, so a camera with x right
 * and y down looks along the direction in which depth increases.
 *
 * @throws RenderError if the linear part is rank deficient.
 */
ViewTransform view_from_affine(const Eigen::Matrix<double, 2, 4>& P);

enum class ViewDirection { front, side };

/**
 * Orthographic camera looking down -z (front) or along a 90 degree yaw
 * about the vertical axis through the centroid (side), scaled uniformly so
 * the mesh's bounding box fills the frame with a 5% margin.
 */
ViewTransform fit_orthographic_view(const mesh::TriangleMesh& mesh, int width, int height,
                                    ViewDirection direction = ViewDirection::front);

struct RenderParams
{
    int width = 512;
    int height = 512;
    ViewTransform view;
    /// Unit vector towards the light, in view space.
    Vec3 light_direction = Vec3(0.0, 0.0, 1.0);
    Material material;
    Color background = Color(0.0, 0.0, 0.0);
};

/// Throws RenderError if the frame size or light direction is invalid.
void validate(const RenderParams& params);

struct DepthBuffer
{
    int width = 0;
    int height = 0;
    std::vector<double> depth;

    DepthBuffer() = default;
    DepthBuffer(int w, int h)
        : width(w), height(h),
          depth(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity())
    {
    }

    double& at(int x, int y) { return depth[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
};

/**
 * Phong illumination of one fragment:
 * ka*texel + kd*max(N.L, 0)*texel + ks*max(R.V, 0)^n, clamped to [0, 1],
 * where R reflects -L about N. The specular term is only added when the
 * light is in front of the surface.
 */
Color phong_shade(const Vec3& normal, const Vec3& light_direction, const Vec3& view_direction,
                  const Material& material, const Color& texel);

/**
 * Scan-converts the mesh with a depth buffer and per-fragment Phong shading.
 *
 * Pixel centres sit at integer + 0.5 and edge ties follow the top-left
 * rule. The nearer fragment wins; equal depths keep the earlier face.
 * Faces are not culled and screen-degenerate faces are skipped. Normals,
 * uvs and depth are interpolated with barycentric weights; the texture is
 * sampled bilinearly (v = 0 is the bottom row).
 *
 * @throws RenderError if the mesh lacks normals or uvs, or the params are invalid.
 */
image::Image rasterize(const mesh::TriangleMesh& mesh, const image::Image& texture, const RenderParams& params,
                       DepthBuffer* depth_out = nullptr);

} /* namespace render */
} /* namespace facemorph */

#endif /* FACEMORPH_RENDER_HPP */
