/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/morph.cpp
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
#include "facemorph/morph.hpp"

#include <cmath>
#include <sstream>

namespace facemorph {
namespace morph {

namespace {

void check_factor(double t)
{
    if (!(t >= 0.0 && t <= 1.0))
    {
        std::ostringstream msg;
        msg << "interpolation factor " << t << " is outside [0, 1]";
        throw MorphError(msg.str());
    }
}

std::vector<std::size_t> degenerate_triangles(const std::vector<Vec2>& points,
                                              const std::vector<TriangleIndices>& triangles)
{
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < triangles.size(); ++i)
    {
        const auto& t = triangles[i];
        if (!(0.5 * geometry::orient2d(points[t[0]], points[t[1]], points[t[2]]) > geometry::epsilon_area))
            bad.push_back(i);
    }
    return bad;
}

} // namespace

MorphMapping build_correspondence(const landmarks::LandmarkSet& lm_a, const landmarks::LandmarkSet& lm_b)
{
    if (lm_a.points.size() != lm_b.points.size())
        throw MorphError("landmark count mismatch: " + std::to_string(lm_a.points.size()) + " vs " +
                         std::to_string(lm_b.points.size()));
    if (!lm_a.has_anchors || !lm_b.has_anchors)
        throw MorphError("landmark sets must carry boundary anchors (see add_boundary_anchors)");
    if (lm_a.image_width != lm_b.image_width || lm_a.image_height != lm_b.image_height)
        throw MorphError("image size mismatch: " + std::to_string(lm_a.image_width) + "x" +
                         std::to_string(lm_a.image_height) + " vs " + std::to_string(lm_b.image_width) + "x" +
                         std::to_string(lm_b.image_height));

    std::vector<Vec2> midpoints(lm_a.points.size());
    for (std::size_t i = 0; i < midpoints.size(); ++i)
        midpoints[i] = (lm_a.points[i] + lm_b.points[i]) / 2.0;

    MorphMapping mapping;
    mapping.points_a = lm_a.points;
    mapping.points_b = lm_b.points;
    mapping.width = lm_a.image_width;
    mapping.height = lm_a.image_height;
    mapping.triangles = geometry::delaunay_triangulate(midpoints).triangles;

    const auto bad_a = degenerate_triangles(mapping.points_a, mapping.triangles);
    const auto bad_b = degenerate_triangles(mapping.points_b, mapping.triangles);
    if (!bad_a.empty() || !bad_b.empty())
    {
        std::ostringstream msg;
        msg << "shared triangulation degenerates at an endpoint:";
        for (const auto& [label, bad] : {std::pair{"A", &bad_a}, std::pair{"B", &bad_b}})
        {
            for (const auto i : *bad)
            {
                const auto& t = mapping.triangles[i];
                msg << "\n  triangle " << i << " (" << t[0] << ", " << t[1] << ", " << t[2] << ") in configuration "
                    << label;
            }
        }
        throw MorphError(msg.str());
    }
    return mapping;
}

std::vector<Vec2> interpolate_landmarks(const MorphMapping& mapping, double t)
{
    check_factor(t);
    const auto weights = blend_weights(t);
    std::vector<Vec2> points(mapping.points_a.size());
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        if (t == 0.0)
            points[i] = mapping.points_a[i];
        else if (t == 1.0)
            points[i] = mapping.points_b[i];
        else
            points[i] = blend(mapping.points_a[i], mapping.points_b[i], weights);
    }
    return points;
}

image::Image warp_blend(const image::Image& img_a, const image::Image& img_b, const MorphMapping& mapping,
                        double t)
{
    check_factor(t);
    if (img_a.width() != mapping.width || img_a.height() != mapping.height || img_b.width() != mapping.width ||
        img_b.height() != mapping.height)
    {
        throw MorphError("image sizes " + std::to_string(img_a.width()) + "x" + std::to_string(img_a.height()) +
                         " / " + std::to_string(img_b.width()) + "x" + std::to_string(img_b.height()) +
                         " do not match the landmark frame " + std::to_string(mapping.width) + "x" +
                         std::to_string(mapping.height));
    }

    const auto points = interpolate_landmarks(mapping, t);
    const auto bad = degenerate_triangles(points, mapping.triangles);
    std::vector<bool> skip(mapping.triangles.size(), false);
    for (const auto i : bad)
        skip[i] = true;
    if (!bad.empty())
    {
        std::ostringstream msg;
        msg << bad.size() << " shared triangle(s) degenerate at t=" << t << "; their pixels fall back to cross-dissolve";
        warn(msg.str());
    }
    const geometry::TriangleLocator locator(points, mapping.triangles, skip);
    const auto [from, to] = blend_weights(t);

    image::Image out(mapping.width, mapping.height);
    for (int y = 0; y < out.height(); ++y)
    {
        for (int x = 0; x < out.width(); ++x)
        {
            const Vec2 p(x + 0.5, y + 0.5);
            Color color;
            if (const auto hit = locator.locate(p))
            {
                const auto& tri = mapping.triangles[*hit];
                const auto w = geometry::barycentric_coords(points[tri[0]], points[tri[1]], points[tri[2]], p);
                const Vec2 pa = w.w0 * mapping.points_a[tri[0]] + w.w1 * mapping.points_a[tri[1]] +
                                w.w2 * mapping.points_a[tri[2]];
                const Vec2 pb = w.w0 * mapping.points_b[tri[0]] + w.w1 * mapping.points_b[tri[1]] +
                                w.w2 * mapping.points_b[tri[2]];
                color = from * image::sample_bilinear(img_a, pa.x(), pa.y()) +
                        to * image::sample_bilinear(img_b, pb.x(), pb.y());
            } else
            {
                color = from * img_a.pixel(x, y) + to * img_b.pixel(x, y);
            }
            out.set_pixel(x, y, color);
        }
    }
    return out;
}

} /* namespace morph */
} /* namespace facemorph */
