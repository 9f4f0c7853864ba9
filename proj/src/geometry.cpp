/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/geometry.cpp
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
#include "facemorph/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace facemorph {
namespace geometry {

namespace {

// Error bounds of the double-precision orientation and in-circle
// determinants (Shewchuk, "Adaptive Precision Floating-Point Arithmetic").
constexpr double unit_roundoff = 0.5 * std::numeric_limits<double>::epsilon();
constexpr double orient_error_bound = (3.0 + 16.0 * unit_roundoff) * unit_roundoff;
constexpr double incircle_error_bound = (10.0 + 96.0 * unit_roundoff) * unit_roundoff;

constexpr int infinite_vertex = -1;

struct Face
{
    // Ghost faces carry infinite_vertex in one slot; they stand for the
    // open half-plane beyond a convex hull edge.
    std::array<int, 3> v;
    std::array<int, 3> adjacent{-1, -1, -1}; // across the edge opposite v[i]
    bool alive = true;
};

class DelaunayBuilder
{
public:
    explicit DelaunayBuilder(std::span<const Vec2> points) : points_(points) {}

    std::vector<TriangleIndices> run();

private:
    const Vec2& at(int i) const { return points_[static_cast<std::size_t>(i)]; }
    bool perturbed_incircle(int a, int b, int c, int d) const;
    bool in_conflict(const Face& face, int p) const;
    int find_seed(int p) const;
    void insert(int p);
    void initialize(int a, int b, int c);

    std::span<const Vec2> points_;
    std::vector<Face> faces_;
};

// In-circle test with ties broken by lifting each point by an infinitesimal
// amount that shrinks steeply with its index. The first non-zero cofactor
// in index order decides.
bool DelaunayBuilder::perturbed_incircle(int a, int b, int c, int d) const
{
    const int s = incircle_sign(at(a), at(b), at(c), at(d));
    if (s != 0)
        return s > 0;

    std::array<int, 4> order{a, b, c, d};
    std::sort(order.begin(), order.end());
    for (const int q : order)
    {
        int cofactor = 0;
        if (q == d)
            return false; // cofactor is -orient2d(a, b, c) < 0
        if (q == a)
            cofactor = orient2d_sign(at(d), at(b), at(c));
        else if (q == b)
            cofactor = orient2d_sign(at(d), at(c), at(a));
        else
            cofactor = orient2d_sign(at(d), at(a), at(b));
        if (cofactor != 0)
            return cofactor > 0;
    }
    return false;
}

bool DelaunayBuilder::in_conflict(const Face& face, int p) const
{
    const auto it = std::find(face.v.begin(), face.v.end(), infinite_vertex);
    if (it == face.v.end())
        return perturbed_incircle(face.v[0], face.v[1], face.v[2], p);

    const auto k = static_cast<std::size_t>(it - face.v.begin());
    const int x = face.v[(k + 1) % 3];
    const int y = face.v[(k + 2) % 3];
    const int s = orient2d_sign(at(x), at(y), at(p));
    if (s != 0)
        return s > 0;
    // On the hull line: only the open segment lies inside the limit circle.
    return (at(p) - at(x)).dot(at(y) - at(x)) > 0.0 && (at(p) - at(y)).dot(at(x) - at(y)) > 0.0;
}

int DelaunayBuilder::find_seed(int p) const
{
    for (std::size_t f = 0; f < faces_.size(); ++f)
    {
        const Face& face = faces_[f];
        if (!face.alive || face.v[2] == infinite_vertex || face.v[0] == infinite_vertex ||
            face.v[1] == infinite_vertex)
            continue;
        if (orient2d_sign(at(face.v[0]), at(face.v[1]), at(p)) >= 0 &&
            orient2d_sign(at(face.v[1]), at(face.v[2]), at(p)) >= 0 &&
            orient2d_sign(at(face.v[2]), at(face.v[0]), at(p)) >= 0)
            return static_cast<int>(f);
    }
    for (std::size_t f = 0; f < faces_.size(); ++f)
    {
        if (faces_[f].alive && in_conflict(faces_[f], p))
            return static_cast<int>(f);
    }
    throw GeometryError("delaunay_triangulate: no conflicting triangle for point " + std::to_string(p));
}

void DelaunayBuilder::initialize(int a, int b, int c)
{
    faces_.push_back({{a, b, c}});
    faces_.push_back({{b, a, infinite_vertex}});
    faces_.push_back({{c, b, infinite_vertex}});
    faces_.push_back({{a, c, infinite_vertex}});

    // Pair up twin edges (u, w) / (w, u).
    std::unordered_map<long long, std::pair<int, int>> edges;
    const auto key = [](int u, int w) { return (static_cast<long long>(u) + 1) * 1000003LL + (w + 1); };
    for (int f = 0; f < 4; ++f)
    {
        for (int j = 0; j < 3; ++j)
            edges[key(faces_[f].v[(j + 1) % 3], faces_[f].v[(j + 2) % 3])] = {f, j};
    }
    for (int f = 0; f < 4; ++f)
    {
        for (int j = 0; j < 3; ++j)
        {
            const auto& twin = edges.at(key(faces_[f].v[(j + 2) % 3], faces_[f].v[(j + 1) % 3]));
            faces_[f].adjacent[j] = twin.first;
        }
    }
}

void DelaunayBuilder::insert(int p)
{
    const int seed = find_seed(p);
    std::vector<char> in_cavity(faces_.size(), 0);
    std::vector<int> cavity{seed};
    in_cavity[seed] = 1;

    for (std::size_t i = 0; i < cavity.size(); ++i)
    {
        for (const int n : faces_[cavity[i]].adjacent)
        {
            if (!in_cavity[n] && in_conflict(faces_[n], p))
            {
                in_cavity[n] = 1;
                cavity.push_back(n);
            }
        }
    }

    // The cavity must be star-shaped from p. Exact predicates guarantee it;
    // the guarded double-precision ones may not, so grow until it is.
    for (bool grown = true; grown;)
    {
        grown = false;
        for (std::size_t i = 0; i < cavity.size() && !grown; ++i)
        {
            const Face& face = faces_[cavity[i]];
            for (int j = 0; j < 3; ++j)
            {
                const int n = face.adjacent[j];
                const int u = face.v[(j + 1) % 3];
                const int w = face.v[(j + 2) % 3];
                if (in_cavity[n] || u == infinite_vertex || w == infinite_vertex)
                    continue;
                if (orient2d_sign(at(u), at(w), at(p)) <= 0)
                {
                    in_cavity[n] = 1;
                    cavity.push_back(n);
                    grown = true;
                    break;
                }
            }
        }
    }

    std::unordered_map<int, int> by_start;
    std::vector<int> created;
    for (const int f : cavity)
    {
        for (int j = 0; j < 3; ++j)
        {
            const int n = faces_[f].adjacent[j];
            if (in_cavity[n])
                continue;
            const int id = static_cast<int>(faces_.size());
            Face face{{faces_[f].v[(j + 1) % 3], faces_[f].v[(j + 2) % 3], p}};
            face.adjacent[2] = n;
            for (auto& back : faces_[n].adjacent)
            {
                if (back == f)
                    back = id;
            }
            faces_.push_back(face);
            if (!by_start.emplace(face.v[0], id).second)
                throw GeometryError("delaunay_triangulate: cavity boundary is not a simple cycle");
            created.push_back(id);
        }
    }
    for (const int id : created)
    {
        const auto next = by_start.find(faces_[id].v[1]);
        if (next == by_start.end())
            throw GeometryError("delaunay_triangulate: open cavity boundary");
        faces_[id].adjacent[0] = next->second;
        faces_[next->second].adjacent[1] = id;
    }
    for (const int f : cavity)
        faces_[f].alive = false;
}

std::vector<TriangleIndices> DelaunayBuilder::run()
{
    const int n = static_cast<int>(points_.size());
    if (n < 3)
        throw GeometryError("delaunay_triangulate: need at least 3 points, got " + std::to_string(n));
    for (int i = 0; i < n; ++i)
    {
        if (!at(i).allFinite())
            throw GeometryError("delaunay_triangulate: point " + std::to_string(i) + " is not finite");
    }

    std::vector<int> by_x(static_cast<std::size_t>(n));
    std::iota(by_x.begin(), by_x.end(), 0);
    std::sort(by_x.begin(), by_x.end(), [&](int l, int r) { return at(l).x() < at(r).x(); });
    for (std::size_t i = 0; i < by_x.size(); ++i)
    {
        for (std::size_t j = i + 1; j < by_x.size() && at(by_x[j]).x() - at(by_x[i]).x() <= duplicate_tolerance;
             ++j)
        {
            if ((at(by_x[j]) - at(by_x[i])).norm() <= duplicate_tolerance)
            {
                const auto [lo, hi] = std::minmax(by_x[i], by_x[j]);
                throw GeometryError("delaunay_triangulate: duplicate points " + std::to_string(lo) + " and " +
                                    std::to_string(hi));
            }
        }
    }

    int third = -1;
    for (int k = 2; k < n; ++k)
    {
        if (orient2d_sign(at(0), at(1), at(k)) != 0)
        {
            third = k;
            break;
        }
    }
    if (third < 0)
        throw GeometryError("delaunay_triangulate: all points are collinear");

    if (orient2d_sign(at(0), at(1), at(third)) > 0)
        initialize(0, 1, third);
    else
        initialize(0, third, 1);

    for (int p = 2; p < n; ++p)
    {
        if (p != third)
            insert(p);
    }

    std::vector<TriangleIndices> triangles;
    for (const Face& face : faces_)
    {
        if (!face.alive || std::find(face.v.begin(), face.v.end(), infinite_vertex) != face.v.end())
            continue;
        if (orient2d(at(face.v[0]), at(face.v[1]), at(face.v[2])) <= 2.0 * epsilon_area)
            throw GeometryError("delaunay_triangulate: near-degenerate input produced a sliver triangle");
        const auto first = std::min_element(face.v.begin(), face.v.end()) - face.v.begin();
        triangles.push_back({face.v[first], face.v[(first + 1) % 3], face.v[(first + 2) % 3]});
    }
    std::sort(triangles.begin(), triangles.end());
    return triangles;
}

void append_number(std::string& out, double value)
{
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    out.append(buffer, ptr);
}

} // namespace

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return (a.x() - c.x()) * (b.y() - c.y()) - (a.y() - c.y()) * (b.x() - c.x());
}

int orient2d_sign(const Vec2& a, const Vec2& b, const Vec2& c)
{
    const double left = (a.x() - c.x()) * (b.y() - c.y());
    const double right = (a.y() - c.y()) * (b.x() - c.x());
    const double det = left - right;
    const double bound = orient_error_bound * (std::abs(left) + std::abs(right));
    if (det > bound)
        return 1;
    if (det < -bound)
        return -1;
    return 0;
}

int incircle_sign(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d)
{
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();

    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;

    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                             (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                             (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    const double bound = incircle_error_bound * permanent;
    if (det > bound)
        return 1;
    if (det < -bound)
        return -1;
    return 0;
}

bool circumcircle_contains(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p)
{
    const double area = orient2d(a, b, c);
    if (!(std::abs(area) > 2.0 * epsilon_area))
        throw DegenerateTriangleError("circumcircle_contains: degenerate triangle");
    return area > 0 ? incircle_sign(a, b, c, p) > 0 : incircle_sign(a, c, b, p) > 0;
}

BarycentricWeights barycentric_coords(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p)
{
    const double area = orient2d(a, b, c);
    if (!(std::abs(area) > 2.0 * epsilon_area))
        throw DegenerateTriangleError("barycentric_coords: degenerate triangle");
    const double w0 = orient2d(p, b, c) / area;
    const double w1 = orient2d(a, p, c) / area;
    return {w0, w1, 1.0 - w0 - w1};
}

Triangulation delaunay_triangulate(std::span<const Vec2> points)
{
    Triangulation result;
    result.points.assign(points.begin(), points.end());
    result.triangles = DelaunayBuilder(result.points).run();
    return result;
}

double triangle_area(const Triangulation& triangulation, std::size_t index)
{
    const auto& t = triangulation.triangles.at(index);
    return 0.5 * orient2d(triangulation.points[t[0]], triangulation.points[t[1]], triangulation.points[t[2]]);
}

bool triangle_contains(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p)
{
    const double area = orient2d(a, b, c);
    if (!(std::abs(area) > 2.0 * epsilon_area))
        return false;
    const double w0 = orient2d(p, b, c) / area;
    const double w1 = orient2d(a, p, c) / area;
    const double w2 = 1.0 - w0 - w1;
    return w0 >= -epsilon_bary && w1 >= -epsilon_bary && w2 >= -epsilon_bary;
}

std::optional<std::size_t> locate_point(const Triangulation& triangulation, const Vec2& p)
{
    const auto& pts = triangulation.points;
    for (std::size_t i = 0; i < triangulation.triangles.size(); ++i)
    {
        const auto& t = triangulation.triangles[i];
        if (triangle_contains(pts[t[0]], pts[t[1]], pts[t[2]], p))
            return i;
    }
    return std::nullopt;
}

TriangleLocator::TriangleLocator(std::span<const Vec2> points, std::span<const TriangleIndices> triangles,
                                 const std::vector<bool>& skip)
    : points_(points.begin(), points.end()), triangles_(triangles.begin(), triangles.end())
{
    if (triangles_.empty() || points_.empty())
        return;

    Vec2 lo = points_.front(), hi = points_.front();
    for (const auto& p : points_)
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Vec2 extent = hi - lo;
    const double margin = 1e-9 * std::max(1.0, extent.maxCoeff());
    origin_ = lo - Vec2::Constant(margin);
    const double area = std::max(extent.x(), 1e-12) * std::max(extent.y(), 1e-12);
    cell_size_ = std::max(std::sqrt(area / static_cast<double>(triangles_.size())), 1e-9);
    columns_ = std::clamp(static_cast<int>(std::ceil((extent.x() + 2 * margin) / cell_size_)), 1, 1024);
    rows_ = std::clamp(static_cast<int>(std::ceil((extent.y() + 2 * margin) / cell_size_)), 1, 1024);
    cell_size_ = std::max((extent.x() + 2 * margin) / columns_, (extent.y() + 2 * margin) / rows_);
    cells_.resize(static_cast<std::size_t>(columns_ * rows_));

    const auto cell_of = [&](double v, double o, int count) {
        return std::clamp(static_cast<int>(std::floor((v - o) / cell_size_)), 0, count - 1);
    };
    for (std::size_t i = 0; i < triangles_.size(); ++i)
    {
        if (i < skip.size() && skip[i])
            continue;
        const auto& t = triangles_[i];
        Vec2 tlo = points_[t[0]].cwiseMin(points_[t[1]]).cwiseMin(points_[t[2]]) - Vec2::Constant(margin);
        Vec2 thi = points_[t[0]].cwiseMax(points_[t[1]]).cwiseMax(points_[t[2]]) + Vec2::Constant(margin);
        const int x0 = cell_of(tlo.x(), origin_.x(), columns_), x1 = cell_of(thi.x(), origin_.x(), columns_);
        const int y0 = cell_of(tlo.y(), origin_.y(), rows_), y1 = cell_of(thi.y(), origin_.y(), rows_);
        for (int y = y0; y <= y1; ++y)
        {
            for (int x = x0; x <= x1; ++x)
                cells_[static_cast<std::size_t>(y * columns_ + x)].push_back(static_cast<int>(i));
        }
    }
}

std::optional<std::size_t> TriangleLocator::locate(const Vec2& p) const
{
    if (cells_.empty())
        return std::nullopt;
    const double fx = std::floor((p.x() - origin_.x()) / cell_size_);
    const double fy = std::floor((p.y() - origin_.y()) / cell_size_);
    if (!(fx >= 0 && fy >= 0 && fx < columns_ && fy < rows_))
        return std::nullopt;
    const auto& cell = cells_[static_cast<std::size_t>(static_cast<int>(fy) * columns_ + static_cast<int>(fx))];
    for (const int i : cell)
    {
        const auto& t = triangles_[static_cast<std::size_t>(i)];
        if (triangle_contains(points_[t[0]], points_[t[1]], points_[t[2]], p))
            return static_cast<std::size_t>(i);
    }
    return std::nullopt;
}

std::string write_tris(const Triangulation& triangulation)
{
    std::string out = std::to_string(triangulation.points.size()) + "\n";
    for (const auto& p : triangulation.points)
    {
        append_number(out, p.x());
        out += ' ';
        append_number(out, p.y());
        out += '\n';
    }
    for (const auto& t : triangulation.triangles)
        out += std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
    return out;
}

Triangulation parse_tris(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::size_t count = 0;
    if (!(in >> count))
        throw GeometryError("parse_tris: missing point count");
    Triangulation result;
    result.points.resize(count);
    for (auto& p : result.points)
    {
        if (!(in >> p.x() >> p.y()))
            throw GeometryError("parse_tris: truncated point list");
    }
    TriangleIndices t;
    while (in >> t[0])
    {
        if (!(in >> t[1] >> t[2]))
            throw GeometryError("parse_tris: truncated triangle");
        for (const int i : t)
        {
            if (i < 0 || static_cast<std::size_t>(i) >= count)
                throw GeometryError("parse_tris: triangle index " + std::to_string(i) + " out of range");
        }
        result.triangles.push_back(t);
    }
    if (!in.eof())
        throw GeometryError("parse_tris: malformed triangle list");
    return result;
}

} /* namespace geometry */
} /* namespace facemorph */
