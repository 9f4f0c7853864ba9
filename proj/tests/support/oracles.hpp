/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: tests/support/oracles.hpp
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

#ifndef FACEMORPH_TESTS_ORACLES_HPP
#define FACEMORPH_TESTS_ORACLES_HPP

#include "facemorph/common.hpp"
#include "facemorph/geometry.hpp"

#include <span>
#include <string>
#include <vector>

namespace facemorph {
namespace oracle {

/// Sign of orient2d evaluated in 100-digit floating point.
int exact_orient(const Vec2& a, const Vec2& b, const Vec2& c);

/// Sign of the in-circle determinant for counter-clockwise (a, b, c), in 100-digit floating point.
int exact_incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

/// Number of points on the convex hull boundary, including points interior to hull edges.
std::size_t hull_point_count(std::span<const Vec2> points);

/// Area of the convex hull (monotone chain).
double hull_area(std::span<const Vec2> points);

/**
 * Every triple whose circumcircle contains no input point strictly inside,
 * as canonical (rotated to smallest index first, counter-clockwise) sorted
 * triples. O(n^4); for points in general position this is exactly the
 * Delaunay triangulation.
 */
std::vector<TriangleIndices> brute_force_delaunay(std::span<const Vec2> points);

/// Canonical form of a triangle list: counter-clockwise, smallest index first, sorted.
std::vector<TriangleIndices> canonical(std::span<const Vec2> points, std::vector<TriangleIndices> triangles);

/**
 * Checks a triangulation against the exact empty-circumcircle test, the
 * 2n - 2 - h count, orientation, index validity and hull coverage. Returns
 * an empty string on success, otherwise a description of the first failure.
 */
std::string check_delaunay(const geometry::Triangulation& triangulation);

} /* namespace oracle */
} /* namespace facemorph */

#endif /* FACEMORPH_TESTS_ORACLES_HPP */
