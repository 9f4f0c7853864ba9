/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: include/facemorph/geometry.hpp
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

#ifndef FACEMORPH_GEOMETRY_HPP
#define FACEMORPH_GEOMETRY_HPP

#include "facemorph/common.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace facemorph {
namespace geometry {

/// Minimum triangle area (squared input units) for a triangle to count as non-degenerate.
inline constexpr double epsilon_area = 1e-12;
/// Points closer than this (in input units) are duplicates.
inline constexpr double duplicate_tolerance = 1e-9;
/// Slack on barycentric weights for boundary-inclusive containment.
inline constexpr double epsilon_bary = 1e-12;

class GeometryError : public Error
{
public:
    using Error::Error;
};

class DegenerateTriangleError : public GeometryError
{
public:
    using GeometryError::GeometryError;
};

/**
 * Planar triangulation. Triangles are counter-clockwise in the (x right,
 * y up) sense, i.e. orient2d of each triple is positive. In image
 * coordinates (y down) they therefore appear clockwise on screen.
 */
struct Triangulation
{
    std::vector<Vec2> points;
    std::vector<TriangleIndices> triangles;
};

struct BarycentricWeights
{
    double w0;
    double w1;
    double w2;
};

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
double orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

/**
 * Sign of orient2d with a magnitude-scaled floating-point error bound:
 * returns 0 when the double-precision result cannot be trusted.
 */
int orient2d_sign(const Vec2& a, const Vec2& b, const Vec2& c);

/**
 * Sign of the in-circle determinant for a counter-clockwise (a, b, c):
 * +1 if d is strictly inside the circumcircle, -1 if strictly outside, 0
 * if d is on the circle or too close for double precision to decide.
 */
int incircle_sign(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

/**
 * True iff p lies strictly inside the circumcircle of (a, b, c), for
 * either orientation of the triangle.
 *
 * @throws DegenerateTriangleError if (a, b, c) is degenerate.
 */
bool circumcircle_contains(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p);

/**
 * Barycentric weights of p with respect to (a, b, c), so that
 * w0 * a + w1 * b + w2 * c = p and w0 + w1 + w2 = 1.
 *
 * @throws DegenerateTriangleError if (a, b, c) is degenerate.
 */
BarycentricWeights barycentric_coords(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p);

/**
 * Delaunay triangulation by Bowyer-Watson incremental insertion.
 *
 * Points are inserted in input order. The enclosing super-triangle is kept
 * symbolic (a single vertex at infinity), so the result always covers the
 * convex hull exactly, including hull points collinear with hull edges.
 *
 * Cocircular ties are broken by a symbolic perturbation of the lifted
 * points in which a lower input index receives the dominant perturbation.
 * The output is canonical: each triangle starts at its smallest index and
 * the list is sorted, so it depends only on the input sequence.
 *
 * @throws GeometryError for fewer than 3 points, all-collinear input or
 *         duplicate points.
 */
Triangulation delaunay_triangulate(std::span<const Vec2> points);

/// Signed area of triangle `index` (positive for counter-clockwise).
double triangle_area(const Triangulation& triangulation, std::size_t index);

/**
 * Boundary-inclusive containment test of p in triangle (a, b, c).
 * Degenerate triangles contain nothing.
 */
bool triangle_contains(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p);

/**
 * Index of the lowest-numbered triangle containing p (boundary inclusive),
 * or nothing if p lies outside every triangle. Linear scan.
 */
std::optional<std::size_t> locate_point(const Triangulation& triangulation, const Vec2& p);

/**
 * Grid-accelerated point location with the same answers as locate_point().
 *
 * Triangles flagged in `skip` are ignored, which lets callers drop
 * triangles that degenerate under a particular configuration.
 */
class TriangleLocator
{
public:
    TriangleLocator(std::span<const Vec2> points, std::span<const TriangleIndices> triangles,
                    const std::vector<bool>& skip = {});

    std::optional<std::size_t> locate(const Vec2& p) const;

private:
    std::vector<Vec2> points_;
    std::vector<TriangleIndices> triangles_;
    Vec2 origin_;
    double cell_size_ = 1.0;
    int columns_ = 0;
    int rows_ = 0;
    std::vector<std::vector<int>> cells_;
};

/// Plain-text dump: point count, one "x y" line per point, then one "i j k" line per triangle.
std::string write_tris(const Triangulation& triangulation);
Triangulation parse_tris(std::string_view text);

} /* namespace geometry */
} /* namespace facemorph */

#endif /* FACEMORPH_GEOMETRY_HPP */
