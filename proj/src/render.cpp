/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/render.cpp
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
#include "facemorph/render.hpp"

#include "Eigen/Geometry"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace facemorph {
namespace render {

namespace {

constexpr double view_margin = 0.05;

// Edge function of p against the directed edge a->b (screen coordinates,
// y down). Evaluated with the endpoints in a canonical order so that two
// faces sharing the edge get exactly opposite values.
double edge_function(const Vec2& a, const Vec2& b, const Vec2& p)
{
    const bool swap = b.x() < a.x() || (b.x() == a.x() && b.y() < a.y());
    const Vec2& u = swap ? b : a;
    const Vec2& v = swap ? a : b;
    const double value = (v.x() - u.x()) * (p.y() - u.y()) - (v.y() - u.y()) * (p.x() - u.x());
    return swap ? -value : value;
}

// Top-left rule for a face with positive edge functions in its interior.
bool is_top_left(const Vec2& a, const Vec2& b)
{
    const double dx = b.x() - a.x(), dy = b.y() - a.y();
    return dy < 0.0 || (dy == 0.0 && dx > 0.0);
}

Eigen::Matrix<double, 2, 4> fit_front_projection(const std::vector<Vec3>& points, int width, int height)
{
    Vec3 lo = points.front(), hi = points.front();
    for (const auto& p : points)
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double extent_x = hi.x() - lo.x(), extent_y = hi.y() - lo.y();
    const double usable = 1.0 - 2.0 * view_margin;
    double scale = 1.0;
    if (extent_x > 0.0 && extent_y > 0.0)
        scale = usable * std::min(width / extent_x, height / extent_y);
    else if (extent_x > 0.0)
        scale = usable * width / extent_x;
    else if (extent_y > 0.0)
        scale = usable * height / extent_y;

    const Vec3 centre = 0.5 * (lo + hi);
    Eigen::Matrix<double, 2, 4> P = Eigen::Matrix<double, 2, 4>::Zero();
    P(0, 0) = scale;
    P(0, 3) = 0.5 * width - scale * centre.x();
    P(1, 1) = -scale;
    P(1, 3) = 0.5 * height + scale * centre.y();
    return P;
}

} // namespace

ViewTransform view_from_affine(const Eigen::Matrix<double, 2, 4>& P)
{
    const Vec3 r1 = P.block<1, 3>(0, 0).transpose();
    const Vec3 r2 = P.block<1, 3>(1, 0).transpose();
    const Vec3 n = r1.cross(r2);
    if (!(n.norm() > 1e-12 * r1.norm() * r2.norm()) || !P.allFinite())
        throw RenderError("camera projection is rank deficient");
    const Vec3 forward = n.normalized();

    ViewTransform view;
    view.screen.topRows<2>() = P;
    view.screen.block<1, 3>(2, 0) = forward.transpose();
    view.screen(2, 3) = 0.0;

    const Vec3 x_axis = r1.normalized();
    const Vec3 z_axis = -forward;
    const Vec3 y_axis = z_axis.cross(x_axis).normalized();
    view.normal_rotation.row(0) = x_axis.transpose();
    view.normal_rotation.row(1) = y_axis.transpose();
    view.normal_rotation.row(2) = z_axis.transpose();
    return view;
}

ViewTransform fit_orthographic_view(const mesh::TriangleMesh& mesh, int width, int height, ViewDirection direction)
{
    if (mesh.vertices.empty())
        throw RenderError("cannot fit a view to an empty mesh");
    if (width < 1 || height < 1)
        throw RenderError("frame size must be at least 1x1");

    if (direction == ViewDirection::front)
        return view_from_affine(fit_front_projection(mesh.vertices, width, height));

    Vec3 centroid = Vec3::Zero();
    for (const auto& v : mesh.vertices)
        centroid += v;
    centroid /= static_cast<double>(mesh.vertices.size());
    const Eigen::Matrix3d yaw = Eigen::AngleAxisd(0.5 * std::numbers::pi, Vec3::UnitY()).toRotationMatrix();
    std::vector<Vec3> rotated;
    rotated.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices)
        rotated.push_back(yaw * (v - centroid) + centroid);
    const Eigen::Matrix<double, 2, 4> F = fit_front_projection(rotated, width, height);
    Eigen::Matrix<double, 2, 4> P;
    P.leftCols<3>() = F.leftCols<3>() * yaw;
    P.col(3) = F.leftCols<3>() * (centroid - yaw * centroid) + F.col(3);
    return view_from_affine(P);
}

void validate(const RenderParams& params)
{
    if (params.width < 1 || params.height < 1)
        throw RenderError("frame size must be at least 1x1");
    if (!(std::abs(params.light_direction.norm() - 1.0) < 1e-9))
        throw RenderError("light direction must be a unit vector");
    const auto& m = params.material;
    if (!(m.ka >= 0.0 && m.kd >= 0.0 && m.ks >= 0.0))
        throw RenderError("material coefficients must be non-negative");
    if (!(m.shininess >= 1.0))
        throw RenderError("shininess exponent must be at least 1");
}

Color phong_shade(const Vec3& normal, const Vec3& light_direction, const Vec3& view_direction,
                  const Material& material, const Color& texel)
{
    const double n_dot_l = normal.dot(light_direction);
    Color color = material.ka * texel;
    if (n_dot_l > 0.0)
    {
        color += material.kd * n_dot_l * texel;
        const Vec3 reflected = 2.0 * n_dot_l * normal - light_direction;
        const double r_dot_v = reflected.dot(view_direction);
        if (r_dot_v > 0.0 && material.ks > 0.0)
            color += material.ks * std::pow(r_dot_v, material.shininess);
    }
    return color.cwiseMax(0.0).cwiseMin(1.0);
}

image::Image rasterize(const mesh::TriangleMesh& mesh, const image::Image& texture, const RenderParams& params,
                       DepthBuffer* depth_out)
{
    validate(params);
    if (mesh.normals.size() != mesh.vertices.size())
        throw RenderError("mesh has no per-vertex normals");
    if (mesh.uvs.size() != mesh.vertices.size())
        throw RenderError("mesh has no per-vertex uv coordinates");
    if (texture.empty())
        throw RenderError("empty texture");
    mesh::validate(mesh);

    const int width = params.width, height = params.height;
    image::Image frame(width, height, params.background);
    DepthBuffer depth(width, height);

    std::vector<Vec3> screen(mesh.vertices.size());
    std::vector<Vec3> normals(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    {
        screen[i] = params.view.apply(mesh.vertices[i]);
        normals[i] = params.view.normal_rotation * mesh.normals[i];
    }
    const Vec3 view_direction(0.0, 0.0, 1.0);

    for (const auto& face : mesh.faces)
    {
        std::array<int, 3> v = face;
        Vec2 p0 = screen[v[0]].head<2>(), p1 = screen[v[1]].head<2>(), p2 = screen[v[2]].head<2>();
        double area = edge_function(p0, p1, p2);
        if (!std::isfinite(area) || std::abs(area) <= 1e-12)
            continue;
        if (area < 0.0)
        {
            std::swap(v[1], v[2]);
            std::swap(p1, p2);
            area = -area;
        }

        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({p0.x(), p1.x(), p2.x()}) - 0.5)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max({p0.x(), p1.x(), p2.x()}) - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({p0.y(), p1.y(), p2.y()}) - 0.5)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max({p0.y(), p1.y(), p2.y()}) - 0.5)));
        const bool top_left[3] = {is_top_left(p1, p2), is_top_left(p2, p0), is_top_left(p0, p1)};

        for (int y = y0; y <= y1; ++y)
        {
            for (int x = x0; x <= x1; ++x)
            {
                const Vec2 p(x + 0.5, y + 0.5);
                const double e[3] = {edge_function(p1, p2, p), edge_function(p2, p0, p), edge_function(p0, p1, p)};
                bool inside = true;
                for (int k = 0; k < 3 && inside; ++k)
                    inside = e[k] > 0.0 || (e[k] == 0.0 && top_left[k]);
                if (!inside)
                    continue;

                const double w0 = e[0] / area, w1 = e[1] / area, w2 = e[2] / area;
                const double z = w0 * screen[v[0]].z() + w1 * screen[v[1]].z() + w2 * screen[v[2]].z();
                if (!(z < depth.at(x, y)))
                    continue;
                depth.at(x, y) = z;

                Vec3 normal = w0 * normals[v[0]] + w1 * normals[v[1]] + w2 * normals[v[2]];
                const double length = normal.norm();
                normal = length > 0.0 ? Vec3(normal / length) : view_direction;
                const Vec2 uv = w0 * mesh.uvs[v[0]] + w1 * mesh.uvs[v[1]] + w2 * mesh.uvs[v[2]];
                const Color texel =
                    image::sample_bilinear(texture, uv.x() * texture.width(), (1.0 - uv.y()) * texture.height());
                frame.set_pixel(x, y, phong_shade(normal, params.light_direction, view_direction, params.material,
                                                  texel));
            }
        }
    }
    if (depth_out)
        *depth_out = std::move(depth);
    return frame;
}

} /* namespace render */
} /* namespace facemorph */
