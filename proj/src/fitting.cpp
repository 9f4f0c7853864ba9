/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/fitting.cpp
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

#include "Eigen/Dense"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace facemorph {
namespace fitting {

namespace {

// ibug-like landmark layout in face coordinates: x in [-1, 1] left to
// right, y in [-1, 1] top to bottom.
std::array<Vec2, landmarks::ibug_point_count> face_layout()
{
    using std::numbers::pi;
    std::array<Vec2, landmarks::ibug_point_count> pts;
    std::size_t n = 0;
    const auto ellipse = [](Vec2 center, double rx, double ry, double degrees) {
        const double a = degrees * pi / 180.0;
        return Vec2(center.x() + rx * std::cos(a), center.y() - ry * std::sin(a));
    };

    for (int k = 0; k <= 16; ++k) // jaw
    {
        const double a = pi * k / 16.0;
        pts[n++] = Vec2(-0.95 * std::cos(a), -0.05 + 0.95 * std::sin(a));
    }
    for (const double side : {-1.0, 1.0}) // brows
    {
        for (int k = 0; k < 5; ++k)
        {
            const double s = k / 4.0;
            const double x = side < 0 ? -0.75 + 0.6 * s : 0.15 + 0.6 * s;
            pts[n++] = Vec2(x, -0.45 - 0.08 * std::sin(pi * s));
        }
    }
    for (const double y : {-0.30, -0.18, -0.06, 0.06}) // nose bridge
        pts[n++] = Vec2(0.0, y);
    for (int k = 0; k < 5; ++k) // nostrils
        pts[n++] = Vec2(-0.2 + 0.1 * k, 0.22 - 0.02 * std::abs(k - 2));
    for (const double cx : {-0.4, 0.4}) // eyes
    {
        for (const double deg : {180.0, 120.0, 60.0, 0.0, 300.0, 240.0})
            pts[n++] = ellipse({cx, -0.25}, 0.16, 0.1, deg);
    }
    for (int k = 0; k < 12; ++k) // outer lips
        pts[n++] = ellipse({0.0, 0.5}, 0.36, 0.2, 180.0 - 30.0 * k);
    for (const double deg : {180.0, 135.0, 90.0, 45.0, 0.0, -45.0, -90.0, -135.0}) // inner lips
        pts[n++] = ellipse({0.0, 0.5}, 0.22, 0.09, deg);
    return pts;
}

Vec3 mean_surface(double u, double v)
{
    using std::numbers::pi;
    const double theta = (u - 0.5) * 0.9 * pi;
    const double phi = (v - 0.5) * 0.8 * pi;
    Vec3 p(70.0 * std::sin(theta) * std::cos(phi), 95.0 * std::sin(phi), 80.0 * std::cos(theta) * std::cos(phi));

    const auto bump = [&](double cx, double cy, double width) {
        const double dx = p.x() - cx, dy = p.y() - cy;
        return std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
    };
    p.z() += 22.0 * bump(0.0, -5.0, 11.0);   // nose
    p.z() += 8.0 * bump(0.0, 15.0, 8.0);     // bridge
    p.z() -= 7.0 * bump(-28.0, 22.0, 11.0);  // eye sockets
    p.z() -= 7.0 * bump(28.0, 22.0, 11.0);
    p.z() += 5.0 * bump(0.0, -45.0, 14.0);   // lips
    p.z() += 6.0 * bump(0.0, -78.0, 14.0);   // chin
    return p;
}

struct GridLayout
{
    std::vector<Vec2> uvs;
    std::vector<TriangleIndices> faces;
};

// Rows of (almost) equal length stacked bottom to top, with neighbouring
// rows stitched by merging their u positions.
GridLayout build_grid(int num_vertices)
{
    const int rows = std::max(2, static_cast<int>(std::lround(std::sqrt(static_cast<double>(num_vertices)))));
    const int base = num_vertices / rows;
    const int extra = num_vertices % rows;

    GridLayout grid;
    std::vector<int> row_start(static_cast<std::size_t>(rows) + 1, 0);
    for (int r = 0; r < rows; ++r)
    {
        const int count = base + (r < extra ? 1 : 0);
        row_start[r + 1] = row_start[r] + count;
        const double v = static_cast<double>(r) / (rows - 1);
        for (int j = 0; j < count; ++j)
            grid.uvs.emplace_back(static_cast<double>(j) / (count - 1), v);
    }

    for (int r = 0; r + 1 < rows; ++r)
    {
        const int lo = row_start[r], n_lo = row_start[r + 1] - lo;
        const int hi = row_start[r + 1], n_hi = row_start[r + 2] - hi;
        int i = 0, j = 0;
        while (i < n_lo - 1 || j < n_hi - 1)
        {
            const bool advance_lower =
                i < n_lo - 1 && (j == n_hi - 1 || grid.uvs[lo + i + 1].x() <= grid.uvs[hi + j + 1].x());
            if (advance_lower)
            {
                grid.faces.push_back({lo + i, lo + i + 1, hi + j});
                ++i;
            } else
            {
                grid.faces.push_back({lo + i, hi + j + 1, hi + j});
                ++j;
            }
        }
    }
    return grid;
}

// Orthonormal basis of the 12 affine motions x -> A x + b of the shape.
Eigen::MatrixXd affine_motion_basis(const Eigen::VectorXd& shape)
{
    const Eigen::Index n = shape.size() / 3;
    Eigen::MatrixXd motions = Eigen::MatrixXd::Zero(shape.size(), 12);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const double coords[4] = {shape(3 * i), shape(3 * i + 1), shape(3 * i + 2), 1.0};
        for (int axis = 0; axis < 3; ++axis)
        {
            for (int c = 0; c < 4; ++c)
                motions(3 * i + axis, axis * 4 + c) = coords[c];
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(motions);
    return qr.householderQ() * Eigen::MatrixXd::Identity(shape.size(), 12);
}

void check_landmark_count(std::size_t count)
{
    if (count != landmarks::ibug_point_count)
        throw FittingError("expected " + std::to_string(landmarks::ibug_point_count) + " landmarks, got " +
                           std::to_string(count));
}

struct Normalization
{
    Vec2 center;
    double scale;
};

Normalization normalize_2d(std::span<const Vec2> points)
{
    Vec2 center = Vec2::Zero();
    for (const auto& p : points)
        center += p;
    center /= static_cast<double>(points.size());
    double sum = 0.0;
    for (const auto& p : points)
        sum += (p - center).squaredNorm();
    const double rms = std::sqrt(sum / static_cast<double>(points.size()));
    if (!(rms > 0.0))
        throw FittingError("landmarks are all coincident");
    return {center, std::sqrt(2.0) / rms};
}

// Objective in pixel units; lambda acts in the normalized frame.
double pixel_objective(const AffineCamera& camera, std::span<const Vec3> points3d, std::span<const Vec2> points2d,
                       const Eigen::VectorXd& alpha, double lambda, double scale)
{
    double data = 0.0;
    for (std::size_t i = 0; i < points2d.size(); ++i)
        data += (camera.project(points3d[i]) - points2d[i]).squaredNorm();
    return data + lambda / (scale * scale) * alpha.squaredNorm();
}

} // namespace

void validate(const MorphableModel& model)
{
    const Eigen::Index rows = model.mean.size();
    if (rows == 0 || rows % 3 != 0)
        throw FittingError("model mean must have 3V entries");
    if (model.basis.rows() != rows)
        throw FittingError("model basis has " + std::to_string(model.basis.rows()) + " rows, expected " +
                           std::to_string(rows));
    if (model.sigma.size() != model.basis.cols())
        throw FittingError("model has " + std::to_string(model.sigma.size()) + " standard deviations for " +
                           std::to_string(model.basis.cols()) + " components");
    if ((model.sigma.array() <= 0.0).any())
        throw FittingError("model standard deviations must be positive");
    const auto v = static_cast<std::size_t>(model.num_vertices());
    if (model.uvs.size() != v)
        throw FittingError("model has " + std::to_string(model.uvs.size()) + " uvs for " + std::to_string(v) +
                           " vertices");
    for (const auto& f : model.faces)
    {
        for (const int i : f)
        {
            if (i < 0 || static_cast<std::size_t>(i) >= v)
                throw FittingError("model face references vertex " + std::to_string(i));
        }
    }
    std::vector<int> ids(model.landmark_vertex_ids.begin(), model.landmark_vertex_ids.end());
    std::sort(ids.begin(), ids.end());
    if (ids.front() < 0 || static_cast<std::size_t>(ids.back()) >= v)
        throw FittingError("model landmark vertex id out of range");
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw FittingError("model landmark vertex ids are not distinct");
}

MorphableModel synthesize_model(std::uint64_t seed, int num_components, int num_vertices)
{
    if (num_components < 1)
        throw FittingError("synthesize_model: need at least one component");
    if (num_vertices < static_cast<int>(landmarks::ibug_point_count))
        throw FittingError("synthesize_model: need at least 68 vertices, got " + std::to_string(num_vertices));
    if (static_cast<long long>(num_components) > 3LL * num_vertices)
        throw FittingError("synthesize_model: " + std::to_string(num_components) + " components exceed 3V = " +
                           std::to_string(3LL * num_vertices));

    MorphableModel model;
    model.seed = seed;
    auto grid = build_grid(num_vertices);
    model.uvs = std::move(grid.uvs);
    model.faces = std::move(grid.faces);

    const Eigen::Index rows = 3 * static_cast<Eigen::Index>(num_vertices);
    model.mean.resize(rows);
    for (int i = 0; i < num_vertices; ++i)
        model.mean.segment<3>(3 * i) = mean_surface(model.uvs[i].x(), model.uvs[i].y());

    // Landmarks: nearest unused vertex to each layout position.
    const auto layout = face_layout();
    std::vector<bool> used(static_cast<std::size_t>(num_vertices), false);
    for (std::size_t k = 0; k < layout.size(); ++k)
    {
        const Vec2 target(0.5 + 0.28 * layout[k].x(), 0.5 - 0.3 * layout[k].y());
        int best = -1;
        double best_distance = 0.0;
        for (int i = 0; i < num_vertices; ++i)
        {
            const double d = (model.uvs[i] - target).squaredNorm();
            if (!used[i] && (best < 0 || d < best_distance))
            {
                best = i;
                best_distance = d;
            }
        }
        used[best] = true;
        model.landmark_vertex_ids[k] = best;
    }

    // Smooth random deformation fields: low-order cosine modes plus two
    // localized bumps each.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Eigen::MatrixXd fields(rows, num_components);
    for (int k = 0; k < num_components; ++k)
    {
        std::vector<std::array<double, 5>> modes; // p, q, cx, cy, cz
        for (int p = 0; p < 4; ++p)
        {
            for (int q = 0; q < 4; ++q)
            {
                if (p + q == 0)
                    continue;
                const double decay = 1.0 / (1.0 + p + q);
                modes.push_back({double(p), double(q), decay * normal(rng), decay * normal(rng), decay * normal(rng)});
            }
        }
        std::array<std::array<double, 6>, 2> bumps; // u, v, width, ax, ay, az
        for (auto& b : bumps)
            b = {0.25 + 0.5 * uniform(rng), 0.25 + 0.5 * uniform(rng), 0.05 + 0.1 * uniform(rng), normal(rng),
                 normal(rng), normal(rng)};

        for (int i = 0; i < num_vertices; ++i)
        {
            const double u = model.uvs[i].x(), v = model.uvs[i].y();
            Vec3 d = Vec3::Zero();
            for (const auto& m : modes)
            {
                const double phi = std::cos(std::numbers::pi * m[0] * u) * std::cos(std::numbers::pi * m[1] * v);
                d += phi * Vec3(m[2], m[3], m[4]);
            }
            for (const auto& b : bumps)
            {
                const double r2 = (u - b[0]) * (u - b[0]) + (v - b[1]) * (v - b[1]);
                d += std::exp(-r2 / (2.0 * b[2] * b[2])) * Vec3(b[3], b[4], b[5]);
            }
            fields.block<3, 1>(3 * i, k) = d;
        }
    }

    if (num_components + 12 <= rows)
    {
        const Eigen::MatrixXd affine = affine_motion_basis(model.mean);
        fields -= affine * (affine.transpose() * fields);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(fields);
    model.basis = qr.householderQ() * Eigen::MatrixXd::Identity(rows, num_components);

    // About 1.6 model units RMS per coordinate at alpha_k = 1, decaying by
    // component. Larger variation folds the small eye and mouth contours.
    model.sigma.resize(num_components);
    const double scale = 1.6 * std::sqrt(static_cast<double>(rows));
    for (int k = 0; k < num_components; ++k)
        model.sigma(k) = scale * std::pow(0.8, k);
    return model;
}

mesh::TriangleMesh instance_mesh(const MorphableModel& model, const ShapeCoefficients& coefficients)
{
    if (coefficients.alpha.size() != model.num_components())
        throw FittingError("instance_mesh: got " + std::to_string(coefficients.alpha.size()) +
                           " coefficients for a model with " + std::to_string(model.num_components()) +
                           " components");
    const Eigen::VectorXd shape =
        model.mean + model.basis * model.sigma.cwiseProduct(coefficients.alpha);
    mesh::TriangleMesh result;
    result.vertices.resize(static_cast<std::size_t>(model.num_vertices()));
    for (std::size_t i = 0; i < result.vertices.size(); ++i)
        result.vertices[i] = shape.segment<3>(3 * static_cast<Eigen::Index>(i));
    result.faces = model.faces;
    result.uvs = model.uvs;
    mesh::compute_vertex_normals_in_place(result);
    return result;
}

std::vector<Vec3> landmark_positions(const MorphableModel& model, const ShapeCoefficients& coefficients)
{
    if (coefficients.alpha.size() != model.num_components())
        throw FittingError("landmark_positions: coefficient count does not match the model");
    const Eigen::VectorXd weights = model.sigma.cwiseProduct(coefficients.alpha);
    std::vector<Vec3> points;
    points.reserve(model.landmark_vertex_ids.size());
    for (const int id : model.landmark_vertex_ids)
    {
        points.push_back(model.mean.segment<3>(3 * id) + model.basis.middleRows<3>(3 * id) * weights);
    }
    return points;
}

AffineCamera estimate_affine_camera(std::span<const Vec2> points2d, std::span<const Vec3> points3d)
{
    if (points2d.size() != points3d.size())
        throw FittingError("estimate_affine_camera: " + std::to_string(points2d.size()) + " image points for " +
                           std::to_string(points3d.size()) + " model points");
    const auto n = static_cast<Eigen::Index>(points2d.size());
    if (n < 4)
        throw FittingError("estimate_affine_camera: need at least 4 correspondences");

    const Normalization norm2 = normalize_2d(points2d);
    Vec3 center3 = Vec3::Zero();
    for (const auto& p : points3d)
        center3 += p;
    center3 /= static_cast<double>(n);
    double sum3 = 0.0;
    for (const auto& p : points3d)
        sum3 += (p - center3).squaredNorm();
    const double rms3 = std::sqrt(sum3 / static_cast<double>(n));
    if (!(rms3 > 0.0))
        throw FittingError("estimate_affine_camera: model points are coincident");
    const double scale3 = std::sqrt(3.0) / rms3;

    Eigen::MatrixXd A(n, 4);
    Eigen::MatrixXd rhs(n, 2);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        A.block<1, 3>(i, 0) = (scale3 * (points3d[i] - center3)).transpose();
        A(i, 3) = 1.0;
        rhs.row(i) = (norm2.scale * (points2d[i] - norm2.center)).transpose();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv(3) > 1e-10 * sv(0)))
        throw FittingError("estimate_affine_camera: model points are coplanar or degenerate (rank < 4)");
    const Eigen::Matrix<double, 4, 2> solution = svd.solve(rhs);

    // Undo both normalizations: P = T2^-1 * [P~; 0 0 0 1] * T3.
    Eigen::Matrix4d T3 = Eigen::Matrix4d::Identity();
    T3.topLeftCorner<3, 3>() *= scale3;
    T3.block<3, 1>(0, 3) = -scale3 * center3;
    Eigen::Matrix<double, 2, 4> normalized = solution.transpose();
    AffineCamera camera;
    camera.P = normalized * T3 / norm2.scale;
    camera.P.col(3) += norm2.center;

    Eigen::JacobiSVD<Eigen::Matrix<double, 2, 3>> block_svd(camera.P.leftCols<3>());
    const auto& bsv = block_svd.singularValues();
    if (!(bsv(1) > 1e-10 * bsv(0)))
        throw FittingError("estimate_affine_camera: projection is rank deficient (collinear image points?)");
    return camera;
}

ShapeCoefficients fit_shape(const MorphableModel& model, const AffineCamera& camera,
                            std::span<const Vec2> landmarks2d, double lambda, double coefficient_cap)
{
    check_landmark_count(landmarks2d.size());
    if (!(lambda >= 0.0))
        throw FittingError("fit_shape: lambda must be non-negative");

    const Normalization norm = normalize_2d(landmarks2d);
    Eigen::Matrix<double, 2, 4> P = norm.scale * camera.P;
    P.col(3) -= norm.scale * norm.center;

    const int K = model.num_components();
    const auto L = static_cast<Eigen::Index>(landmarks2d.size());
    Eigen::MatrixXd A(2 * L, K);
    Eigen::VectorXd b(2 * L);
    const Eigen::Matrix<double, 2, 3> M = P.leftCols<3>();
    for (Eigen::Index i = 0; i < L; ++i)
    {
        const int id = model.landmark_vertex_ids[static_cast<std::size_t>(i)];
        A.middleRows<2>(2 * i) = M * model.basis.middleRows<3>(3 * id) * model.sigma.asDiagonal();
        const Vec2 target = norm.scale * (landmarks2d[i] - norm.center);
        b.segment<2>(2 * i) = target - (M * model.mean.segment<3>(3 * id) + P.col(3));
    }

    Eigen::MatrixXd normal = A.transpose() * A;
    if (lambda == 0.0)
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
        const auto& ev = eig.eigenvalues();
        if (!(ev(0) > 1e-12 * std::max(ev(ev.size() - 1), 1e-300)))
            throw FittingError("fit_shape: singular system with lambda = 0 (landmarks do not constrain every "
                               "component); use lambda > 0");
    }
    normal.diagonal().array() += lambda;
    ShapeCoefficients result;
    result.alpha = normal.ldlt().solve(A.transpose() * b);
    if (!result.alpha.allFinite())
        throw FittingError("fit_shape: solve produced non-finite coefficients");

    if (coefficient_cap > 0.0 && result.alpha.cwiseAbs().maxCoeff() > coefficient_cap)
    {
        std::ostringstream msg;
        msg << "fit_shape: clamping coefficients to +-" << coefficient_cap << " (max |alpha| was "
            << result.alpha.cwiseAbs().maxCoeff() << ")";
        warn(msg.str());
        result.alpha = result.alpha.cwiseMax(-coefficient_cap).cwiseMin(coefficient_cap);
    }
    return result;
}

double reprojection_rmse(const AffineCamera& camera, std::span<const Vec3> points3d, std::span<const Vec2> points2d)
{
    if (points2d.empty() || points2d.size() != points3d.size())
        throw FittingError("reprojection_rmse: mismatched or empty point lists");
    double sum = 0.0;
    for (std::size_t i = 0; i < points2d.size(); ++i)
        sum += (camera.project(points3d[i]) - points2d[i]).squaredNorm();
    return std::sqrt(sum / static_cast<double>(points2d.size()));
}

FitResult fit_from_photo_landmarks(const MorphableModel& model, const landmarks::LandmarkSet& landmarks,
                                   double lambda, int iterations, double coefficient_cap)
{
    check_landmark_count(landmarks.points.size());
    if (iterations < 1)
        throw FittingError("fit_from_photo_landmarks: iterations must be at least 1");

    const std::span<const Vec2> observed(landmarks.points);
    const double scale = normalize_2d(observed).scale;

    FitResult result;
    result.coefficients.alpha = Eigen::VectorXd::Zero(model.num_components());
    for (int it = 0; it < iterations; ++it)
    {
        const auto current = landmark_positions(model, result.coefficients);
        result.camera = estimate_affine_camera(observed, current);
        result.objective_history.push_back(
            pixel_objective(result.camera, current, observed, result.coefficients.alpha, lambda, scale));

        result.coefficients = fit_shape(model, result.camera, observed, lambda, coefficient_cap);
        const auto fitted = landmark_positions(model, result.coefficients);
        result.objective_history.push_back(
            pixel_objective(result.camera, fitted, observed, result.coefficients.alpha, lambda, scale));
        result.rmse_history.push_back(reprojection_rmse(result.camera, fitted, observed));
    }
    result.mesh = instance_mesh(model, result.coefficients);
    return result;
}

} /* namespace fitting */
} /* namespace facemorph */
