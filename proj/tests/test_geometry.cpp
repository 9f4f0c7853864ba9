/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: tests/test_geometry.cpp
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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "facemorph/geometry.hpp"
#include "oracles.hpp"

#include <random>

using namespace facemorph;
using namespace facemorph::geometry;

namespace {

std::vector<Vec2> random_points(std::mt19937_64& rng, int n, double extent = 100.0)
{
    std::uniform_real_distribution<double> coord(0.0, extent);
    std::vector<Vec2> points;
    for (int i = 0; i < n; ++i)
        points.emplace_back(coord(rng), coord(rng));
    return points;
}

// Small integer grids: many collinear and cocircular subsets.
std::vector<Vec2> grid_points(std::mt19937_64& rng, int n, int side)
{
    std::uniform_int_distribution<int> coord(0, side - 1);
    std::vector<Vec2> points;
    while (static_cast<int>(points.size()) < n)
    {
        const Vec2 p(coord(rng), coord(rng));
        if (std::find(points.begin(), points.end(), p) == points.end())
            points.push_back(p);
    }
    return points;
}

std::vector<Vec2> face_like_points(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> coord(20.0, 180.0);
    std::vector<Vec2> points;
    for (int i = 0; i < 68; ++i)
        points.emplace_back(coord(rng), coord(rng));
    const double w = 200.0, h = 200.0;
    for (const Vec2& p : {Vec2(0, 0), Vec2(w, 0), Vec2(w, h), Vec2(0, h), Vec2(w / 2, 0), Vec2(w, h / 2), Vec2(w / 2, h),
                         Vec2(0, h / 2)})
        points.push_back(p);
    return points;
}

} // namespace

TEST_CASE("circumcircle_contains examples")
{
    const Vec2 a(0, 0), b(1, 0), c(0, 1);
    CHECK(circumcircle_contains(a, b, c, Vec2(0.5, 0.5)));
    CHECK_FALSE(circumcircle_contains(a, b, c, Vec2(1, 1)));
    CHECK(circumcircle_contains(a, c, b, Vec2(0.5, 0.5)));
    CHECK_FALSE(circumcircle_contains(a, c, b, Vec2(1, 1)));
    CHECK_FALSE(circumcircle_contains(a, b, c, Vec2(2, 2)));
    CHECK_THROWS_AS(circumcircle_contains(a, b, Vec2(2, 0), Vec2(0.5, 0.5)), DegenerateTriangleError);
}

TEST_CASE("circumcircle_contains agrees with a 100-digit evaluation on 1e5 quadruples")
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coord(-500.0, 500.0);
    int disagreements = 0, checked = 0;
    for (int i = 0; i < 100000; ++i)
    {
        const Vec2 a(coord(rng), coord(rng)), b(coord(rng), coord(rng)), c(coord(rng), coord(rng)),
            p(coord(rng), coord(rng));
        const int o = oracle::exact_orient(a, b, c);
        if (o == 0 || std::abs(orient2d(a, b, c)) <= epsilon_area)
            continue;
        const int expected = o > 0 ? oracle::exact_incircle(a, b, c, p) : oracle::exact_incircle(a, c, b, p);
        ++checked;
        if (circumcircle_contains(a, b, c, p) != (expected > 0))
            ++disagreements;
    }
    CHECK(checked > 99000);
    CHECK(disagreements == 0);
}

TEST_CASE("orient2d_sign and incircle_sign refuse to guess on exact degeneracies")
{
    CHECK(orient2d_sign(Vec2(0, 0), Vec2(1, 1), Vec2(3, 3)) == 0);
    CHECK(orient2d_sign(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)) == 1);
    CHECK(orient2d_sign(Vec2(0, 0), Vec2(0, 1), Vec2(1, 0)) == -1);
    CHECK(incircle_sign(Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)) == 0);
    CHECK(incircle_sign(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(0.5, 0.5)) == 1);
}

TEST_CASE("barycentric_coords examples")
{
    const Vec2 a(0, 0), b(2, 0), c(0, 2);
    auto w = barycentric_coords(a, b, c, a);
    CHECK(w.w0 == doctest::Approx(1.0));
    CHECK(w.w1 == doctest::Approx(0.0));
    CHECK(w.w2 == doctest::Approx(0.0));
    w = barycentric_coords(a, b, c, (a + b + c) / 3.0);
    CHECK(w.w0 == doctest::Approx(1.0 / 3.0));
    CHECK(w.w1 == doctest::Approx(1.0 / 3.0));
    CHECK(w.w2 == doctest::Approx(1.0 / 3.0));
    w = barycentric_coords(a, b, c, Vec2(1, 0));
    CHECK(w.w0 == doctest::Approx(0.5));
    CHECK(w.w1 == doctest::Approx(0.5));
    CHECK(w.w2 == doctest::Approx(0.0));
    CHECK_THROWS_AS(barycentric_coords(a, b, Vec2(4, 0), Vec2(1, 1)), DegenerateTriangleError);
}

TEST_CASE("barycentric reconstruction identity on random triangles")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-1000.0, 1000.0);
    for (int i = 0; i < 20000; ++i)
    {
        const Vec2 a(coord(rng), coord(rng)), b(coord(rng), coord(rng)), c(coord(rng), coord(rng)),
            p(coord(rng), coord(rng));
        if (std::abs(orient2d(a, b, c)) < 1e-3)
            continue;
        const auto w = barycentric_coords(a, b, c, p);
        const double diameter = std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
        REQUIRE(std::abs(w.w0 + w.w1 + w.w2 - 1.0) <= 1e-12);
        const Vec2 q = w.w0 * a + w.w1 * b + w.w2 * c;
        REQUIRE((q - p).norm() <= 1e-9 * std::max(diameter, (p - a).norm()));
    }
}

TEST_CASE("delaunay_triangulate base cases")
{
    const std::vector<Vec2> three = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    const auto t = delaunay_triangulate(three);
    REQUIRE(t.triangles.size() == 1);
    CHECK(t.triangles[0] == TriangleIndices{0, 1, 2});

    const std::vector<Vec2> clockwise = {Vec2(0, 0), Vec2(0, 1), Vec2(1, 0)};
    CHECK(delaunay_triangulate(clockwise).triangles[0] == TriangleIndices{0, 2, 1});
}

TEST_CASE("unit square uses the diagonal that avoids the lowest-index corner")
{
    const std::vector<Vec2> square = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    const auto t = delaunay_triangulate(square);
    REQUIRE(t.triangles.size() == 2);
    CHECK(t.triangles[0] == TriangleIndices{0, 1, 3});
    CHECK(t.triangles[1] == TriangleIndices{1, 2, 3});

    // Relabelling the corners moves the diagonal with the lowest index.
    const std::vector<Vec2> rotated = {Vec2(1, 0), Vec2(1, 1), Vec2(0, 1), Vec2(0, 0)};
    const auto r = delaunay_triangulate(rotated);
    REQUIRE(r.triangles.size() == 2);
    CHECK(r.triangles[0] == TriangleIndices{0, 1, 3});
    CHECK(r.triangles[1] == TriangleIndices{1, 2, 3});
}

TEST_CASE("landmarks plus anchors give 2n - 2 - 8 triangles and match the brute-force oracle")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial)
    {
        const auto points = face_like_points(rng);
        const auto t = delaunay_triangulate(points);
        CHECK(t.triangles.size() == 142);
        CHECK(oracle::check_delaunay(t) == "");
        CHECK(oracle::canonical(points, t.triangles) == oracle::brute_force_delaunay(points));
    }
}

TEST_CASE("random point sets match the brute-force oracle exactly")
{
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> count(3, 40);
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto points = random_points(rng, count(rng));
        const auto t = delaunay_triangulate(points);
        REQUIRE(t.triangles == oracle::canonical(points, t.triangles));
        REQUIRE(t.triangles == oracle::brute_force_delaunay(points));
    }
}

TEST_CASE("degenerate grid inputs still satisfy every triangulation invariant")
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> count(4, 60);
    for (int trial = 0; trial < 150; ++trial)
    {
        const int side = 4 + trial % 9;
        const int n = std::min(count(rng), side * side);
        const auto points = grid_points(rng, n, side);
        if (oracle::hull_area(points) == 0.0)
            continue;
        const auto t = delaunay_triangulate(points);
        INFO("trial " << trial << " n " << n);
        REQUIRE(oracle::check_delaunay(t) == "");
    }
}

TEST_CASE("hull points collinear with hull edges are part of the triangulation")
{
    const std::vector<Vec2> points = {Vec2(0, 0), Vec2(1, 0), Vec2(2, 0), Vec2(3, 0), Vec2(1.5, 1)};
    const auto t = delaunay_triangulate(points);
    CHECK(t.triangles.size() == 3);
    CHECK(oracle::check_delaunay(t) == "");
}

TEST_CASE("delaunay_triangulate is deterministic and invariant under translation and scaling")
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial)
    {
        const auto points = random_points(rng, 60);
        const auto first = delaunay_triangulate(points);
        CHECK(delaunay_triangulate(points).triangles == first.triangles);
        std::vector<Vec2> moved;
        for (const auto& p : points)
            moved.push_back(3.7 * p + Vec2(123.4, -56.7));
        CHECK(delaunay_triangulate(moved).triangles == first.triangles);
    }
}

TEST_CASE("delaunay_triangulate rejects invalid input")
{
    CHECK_THROWS_AS(delaunay_triangulate(std::vector<Vec2>{Vec2(0, 0), Vec2(1, 1)}), GeometryError);
    CHECK_THROWS_AS(delaunay_triangulate(std::vector<Vec2>{Vec2(0, 0), Vec2(1, 1), Vec2(2, 2), Vec2(5, 5)}),
                    GeometryError);
    CHECK_THROWS_AS(delaunay_triangulate(std::vector<Vec2>{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(1, 0)}),
                    GeometryError);
    CHECK_THROWS_AS(
        delaunay_triangulate(std::vector<Vec2>{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(1e-10, 1e-10) + Vec2(1, 0)}),
        GeometryError);
    CHECK_THROWS_AS(delaunay_triangulate(std::vector<Vec2>{Vec2(0, 0), Vec2(1, 0), Vec2(0, std::nan(""))}),
                    GeometryError);
}

TEST_CASE("locate_point examples")
{
    Triangulation single;
    single.points = {Vec2(0, 0), Vec2(4, 0), Vec2(0, 4)};
    single.triangles = {{0, 1, 2}};
    CHECK(locate_point(single, Vec2(1, 1)) == std::optional<std::size_t>(0));
    CHECK_FALSE(locate_point(single, Vec2(100, 100)).has_value());
    CHECK(locate_point(single, Vec2(2, 2)) == std::optional<std::size_t>(0)); // on the boundary

    const std::vector<Vec2> square = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    const auto t = delaunay_triangulate(square);
    CHECK(locate_point(t, Vec2(0.5, 0.5)) == std::optional<std::size_t>(0)); // shared edge -> lowest index
}

TEST_CASE("TriangleLocator matches the linear scan on 1e4 queries")
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial)
    {
        const auto points = face_like_points(rng);
        const auto t = delaunay_triangulate(points);
        const TriangleLocator locator(t.points, t.triangles);
        std::uniform_real_distribution<double> coord(-20.0, 220.0);
        for (int i = 0; i < 2000; ++i)
        {
            // Mix random queries with vertices and edge midpoints.
            Vec2 p(coord(rng), coord(rng));
            if (i % 4 == 1)
                p = points[static_cast<std::size_t>(i) % points.size()];
            if (i % 4 == 2)
            {
                const auto& tri = t.triangles[static_cast<std::size_t>(i) % t.triangles.size()];
                p = 0.5 * (points[tri[0]] + points[tri[1]]);
            }
            std::optional<std::size_t> scan;
            for (std::size_t k = 0; k < t.triangles.size() && !scan; ++k)
            {
                const auto& tri = t.triangles[k];
                if (triangle_contains(points[tri[0]], points[tri[1]], points[tri[2]], p))
                    scan = k;
            }
            REQUIRE(locate_point(t, p) == scan);
            REQUIRE(locator.locate(p) == scan);
        }
    }
}

TEST_CASE("TriangleLocator honours the skip mask")
{
    const std::vector<Vec2> square = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    const auto t = delaunay_triangulate(square);
    const TriangleLocator locator(t.points, t.triangles, {true, false});
    CHECK_FALSE(locator.locate(Vec2(0.1, 0.1)).has_value());
    CHECK(locator.locate(Vec2(0.9, 0.9)) == std::optional<std::size_t>(1));
}

TEST_CASE("tris files round trip")
{
    std::mt19937_64 rng(1);
    const auto t = delaunay_triangulate(face_like_points(rng));
    const auto parsed = parse_tris(write_tris(t));
    CHECK(parsed.triangles == t.triangles);
    REQUIRE(parsed.points.size() == t.points.size());
    for (std::size_t i = 0; i < t.points.size(); ++i)
        CHECK((parsed.points[i] - t.points[i]).norm() < 1e-6);
    CHECK_THROWS_AS(parse_tris("3\n0 0\n1 0\n"), GeometryError);
}
