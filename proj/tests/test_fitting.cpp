/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: tests/test_fitting.cpp
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

#include "facemorph/fitting.hpp"
#include "facemorph/geometry.hpp"
#include "synthetic.hpp"

#include "Eigen/Dense"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <cmath>
#include <random>

using namespace facemorph;
using namespace facemorph::fitting;

namespace {

const MorphableModel& model()
{
    static const auto m = synthesize_model(1, 10, 3448);
    return m;
}

struct WarningCapture
{
    std::vector<std::string> messages;
    WarningHandler previous;

    WarningCapture()
    {
        previous = set_warning_handler([this](std::string_view m) { messages.emplace_back(m); });
    }
    ~WarningCapture() { set_warning_handler(previous); }
};

std::vector<Vec2> project_all(const AffineCamera& camera, const std::vector<Vec3>& points)
{
    std::vector<Vec2> out;
    for (const auto& p : points)
        out.push_back(camera.project(p));
    return out;
}

ShapeCoefficients zero_alpha()
{
    ShapeCoefficients c;
    c.alpha = Eigen::VectorXd::Zero(model().num_components());
    return c;
}

} // namespace

TEST_CASE("synthesize_model is deterministic and well formed")
{
    const auto& m = model();
    const auto again = synthesize_model(1, 10, 3448);
    CHECK(again.mean == m.mean);
    CHECK(again.basis == m.basis);
    CHECK(again.sigma == m.sigma);
    CHECK(again.faces == m.faces);
    CHECK(again.landmark_vertex_ids == m.landmark_vertex_ids);
    CHECK_FALSE(synthesize_model(2, 10, 3448).basis == m.basis);

    CHECK(m.num_vertices() == 3448);
    CHECK(m.num_components() == 10);
    const Eigen::MatrixXd gram = m.basis.transpose() * m.basis;
    CHECK((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((m.sigma.array() > 0.0).all());
    CHECK_NOTHROW(validate(m));

    // Every uv lies in the unit square and faces are counter-clockwise in uv space.
    for (const auto& uv : m.uvs)
        REQUIRE(((uv.array() >= 0.0).all() && (uv.array() <= 1.0).all()));
    for (const auto& f : m.faces)
    {
        const Vec2 e1 = m.uvs[f[1]] - m.uvs[f[0]], e2 = m.uvs[f[2]] - m.uvs[f[0]];
        REQUIRE(e1.x() * e2.y() - e1.y() * e2.x() > 0.0);
    }
}

TEST_CASE("synthesize_model hits the exact requested vertex counts")
{
    for (const int v : {3448, 16759, 29587})
        CHECK(synthesize_model(1, 3, v).num_vertices() == v);
}

TEST_CASE("synthesize_model argument checks")
{
    CHECK_THROWS_AS(synthesize_model(1, 0, 3448), FittingError);
    CHECK_THROWS_AS(synthesize_model(1, 10, 67), FittingError);
    CHECK_THROWS_AS(synthesize_model(1, 3 * 100 + 1, 100), FittingError);
    CHECK_NOTHROW(synthesize_model(1, 3 * 100, 100));
}

TEST_CASE("instance_mesh definition and linearity")
{
    const auto& m = model();
    const auto mean = instance_mesh(m, zero_alpha());
    for (int i = 0; i < m.num_vertices(); ++i)
        REQUIRE(mean.vertices[i] == Vec3(m.mean.segment<3>(3 * i)));
    CHECK(mean.uvs == m.uvs);
    CHECK(mean.normals.size() == mean.vertices.size());

    auto e1 = zero_alpha();
    e1.alpha(0) = 1.0;
    const auto first = instance_mesh(m, e1);
    for (int i = 0; i < m.num_vertices(); ++i)
    {
        const Vec3 expected = m.mean.segment<3>(3 * i) + m.sigma(0) * m.basis.block<3, 1>(3 * i, 0);
        REQUIRE((first.vertices[i] - expected).norm() < 1e-12);
    }

    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0.0, 1.0);
    ShapeCoefficients a, b, sum;
    a.alpha = Eigen::VectorXd::NullaryExpr(10, [&]() { return normal(rng); });
    b.alpha = Eigen::VectorXd::NullaryExpr(10, [&]() { return normal(rng); });
    sum.alpha = a.alpha + b.alpha;
    const auto ia = instance_mesh(m, a), ib = instance_mesh(m, b), isum = instance_mesh(m, sum);
    for (int i = 0; i < m.num_vertices(); ++i)
        REQUIRE((ia.vertices[i] + ib.vertices[i] - mean.vertices[i] - isum.vertices[i]).norm() < 1e-9);

    ShapeCoefficients wrong;
    wrong.alpha = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(instance_mesh(m, wrong), FittingError);
}

TEST_CASE("estimate_affine_camera recovers random cameras")
{
    const auto points3d = landmark_positions(model(), zero_alpha());
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial)
    {
        AffineCamera truth;
        truth.P = Eigen::Matrix<double, 2, 4>::NullaryExpr([&]() { return normal(rng); });
        truth.P.col(3) *= 200.0;
        const auto estimated = estimate_affine_camera(project_all(truth, points3d), points3d);
        REQUIRE((estimated.P - truth.P).norm() <= 1e-6 * truth.P.norm());
    }

    AffineCamera drop_z;
    drop_z.P << 1, 0, 0, 0, 0, 1, 0, 0;
    const auto recovered = estimate_affine_camera(project_all(drop_z, points3d), points3d);
    CHECK((recovered.P - drop_z.P).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("estimate_affine_camera with pixel noise stays within twice the noise level")
{
    const auto points3d = landmark_positions(model(), zero_alpha());
    std::mt19937_64 rng(4);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto face = synthetic::random_face(model(), 100 + trial, 500, 500, 0.0);
        auto observed = face.landmarks.points;
        for (auto& p : observed)
            p += Vec2(noise(rng), noise(rng));
        const auto camera = estimate_affine_camera(observed, points3d);
        REQUIRE(reprojection_rmse(camera, points3d, observed) <= 2.0);
    }
}

TEST_CASE("estimate_affine_camera rejects degenerate input")
{
    std::vector<Vec3> planar;
    std::vector<Vec2> image;
    for (int i = 0; i < 10; ++i)
    {
        planar.emplace_back(i, i * i % 7, 0.0);
        image.emplace_back(i, i * i % 7);
    }
    CHECK_THROWS_AS(estimate_affine_camera(image, planar), FittingError);
    CHECK_THROWS_AS(estimate_affine_camera(std::vector<Vec2>(3, Vec2(1, 2)), std::vector<Vec3>(3, Vec3(1, 2, 3))),
                    FittingError);
    CHECK_THROWS_AS(estimate_affine_camera(image, std::vector<Vec3>(4)), FittingError);
}

TEST_CASE("fit_shape examples")
{
    const auto face = synthetic::random_face(model(), 5, 640, 480, 0.0);
    for (const double lambda : {0.0, 0.1, 10.0})
    {
        const auto fit = fit_shape(model(), face.camera, face.landmarks.points, lambda);
        CHECK(fit.alpha.cwiseAbs().maxCoeff() < 1e-9);
    }

    const auto shaped = synthetic::random_face(model(), 6, 640, 480);
    const auto exact = fit_shape(model(), shaped.camera, shaped.landmarks.points, 0.0);
    CHECK((exact.alpha - shaped.alpha.alpha).cwiseAbs().maxCoeff() < 1e-6);

    const auto ridge = fit_shape(model(), shaped.camera, shaped.landmarks.points, 1e12);
    CHECK(ridge.alpha.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fit_shape reports singular systems and clamps large coefficients")
{
    // 150 components cannot be determined by 136 landmark coordinates.
    const auto big = synthesize_model(1, 150, 600);
    const auto face = synthetic::random_face(big, 1, 640, 480, 0.0);
    try
    {
        fit_shape(big, face.camera, face.landmarks.points, 0.0);
        FAIL("expected a singular-system error");
    } catch (const FittingError& e)
    {
        CHECK(std::string(e.what()).find("lambda > 0") != std::string::npos);
    }
    CHECK_NOTHROW(fit_shape(big, face.camera, face.landmarks.points, 0.1));

    WarningCapture capture;
    const auto wild = synthetic::random_face(model(), 7, 640, 480, 10.0);
    const auto clamped = fit_shape(model(), wild.camera, wild.landmarks.points, 0.0, 4.0);
    CHECK(clamped.alpha.cwiseAbs().maxCoeff() <= 4.0);
    CHECK(capture.messages.size() == 1);

    CHECK_THROWS_AS(fit_shape(model(), wild.camera, std::vector<Vec2>(10), 0.0), FittingError);
    CHECK_THROWS_AS(fit_shape(model(), wild.camera, wild.landmarks.points, -1.0), FittingError);
}

TEST_CASE("fit_from_photo_landmarks on the mean shape converges in one round")
{
    const auto face = synthetic::random_face(model(), 8, 640, 480, 0.0);
    const auto fit = fit_from_photo_landmarks(model(), face.landmarks, 0.0, 3);
    CHECK(fit.coefficients.alpha.cwiseAbs().maxCoeff() < 1e-6);
    CHECK((fit.camera.P - face.camera.P).norm() < 1e-6 * face.camera.P.norm());
    CHECK(fit.rmse_history.back() < 1e-6);
    CHECK(fit.rmse_history.size() == 3);
    CHECK(fit.objective_history.size() == 6);
    CHECK(fit.mesh.vertices.size() == 3448);
    CHECK(fit.mesh.uvs.size() == 3448);
}

TEST_CASE("fit_from_photo_landmarks recovers shape and camera jointly")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        const auto face = synthetic::random_face(model(), 200 + seed, 640, 480);
        const auto fit = fit_from_photo_landmarks(model(), face.landmarks, 0.0, 1000, 1e9);
        CHECK((fit.coefficients.alpha - face.alpha.alpha).cwiseAbs().maxCoeff() <= 1e-4);
        CHECK((fit.camera.P - face.camera.P).norm() <= 1e-4 * face.camera.P.norm());
        CHECK(fit.rmse_history.back() <= 1e-4);
    }
}

TEST_CASE("alternation never increases the objective")
{
    std::mt19937_64 rng(9);
    std::normal_distribution<double> noise(0.0, 2.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        auto face = synthetic::random_face(model(), 300 + seed, 640, 480);
        for (auto& p : face.landmarks.points)
            p += Vec2(noise(rng), noise(rng));
        for (const double lambda : {0.0, 0.1, 1.0})
        {
            const auto fit = fit_from_photo_landmarks(model(), face.landmarks, lambda, 10);
            for (std::size_t i = 1; i < fit.objective_history.size(); ++i)
                REQUIRE(fit.objective_history[i] <= fit.objective_history[i - 1] * (1.0 + 1e-12) + 1e-9);
            if (lambda == 0.0)
            {
                for (std::size_t i = 1; i < fit.rmse_history.size(); ++i)
                    REQUIRE(fit.rmse_history[i] <= fit.rmse_history[i - 1] + 1e-9);
            }
            const auto one = fit_from_photo_landmarks(model(), face.landmarks, lambda, 1);
            const auto three = fit_from_photo_landmarks(model(), face.landmarks, lambda, 3);
            if (lambda == 0.0)
                CHECK(three.rmse_history.back() <= one.rmse_history.back() + 1e-9);
        }
    }
}

TEST_CASE("fitting is equivariant to image scale")
{
    const auto face = synthetic::random_face(model(), 400, 640, 480);
    auto scaled = face.landmarks;
    const double s = 2.5;
    for (auto& p : scaled.points)
        p *= s;
    scaled.image_width = static_cast<int>(640 * s);
    scaled.image_height = static_cast<int>(480 * s);
    const auto a = fit_from_photo_landmarks(model(), face.landmarks, 0.1, 5);
    const auto b = fit_from_photo_landmarks(model(), scaled, 0.1, 5);
    CHECK((a.coefficients.alpha - b.coefficients.alpha).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((b.camera.P - s * a.camera.P).norm() < 1e-9 * b.camera.P.norm());
}

TEST_CASE("extract_texture reproduces a constant photo and fills every texel")
{
    const auto face = synthetic::random_face(model(), 10, 320, 320, 0.5);
    const image::Image photo(320, 320, Color(0.2, 0.6, 0.4));
    const auto texture = extract_texture(instance_mesh(model(), face.alpha), face.camera, photo, 64);
    CHECK(texture == image::Image(64, 64, Color(0.2, 0.6, 0.4)));
}

TEST_CASE("extract_texture samples the photo where each texel's surface point projects")
{
    const auto face = synthetic::random_face(model(), 11, 400, 400, 0.5);
    const auto shape = instance_mesh(model(), face.alpha);
    const auto photo = synthetic::smooth_image(5, 400, 400);
    const int size = 256;
    const auto texture = extract_texture(shape, face.camera, photo, size);
    REQUIRE(texture.width() == size);
    REQUIRE(texture.height() == size);

    int checked = 0;
    for (std::size_t fi = 0; fi < shape.faces.size(); fi += 37)
    {
        const auto& f = shape.faces[fi];
        const Vec2 t0 = uv_to_texel(shape.uvs[f[0]], size), t1 = uv_to_texel(shape.uvs[f[1]], size),
                   t2 = uv_to_texel(shape.uvs[f[2]], size);
        const Vec2 centroid = (t0 + t1 + t2) / 3.0;
        const Vec2 centre(std::floor(centroid.x()) + 0.5, std::floor(centroid.y()) + 0.5);
        if (!geometry::triangle_contains(t0, t1, t2, centre))
            continue;
        const auto w = geometry::barycentric_coords(t0, t1, t2, centre);
        const Vec3 surface = w.w0 * shape.vertices[f[0]] + w.w1 * shape.vertices[f[1]] + w.w2 * shape.vertices[f[2]];
        const Vec2 pixel = face.camera.project(surface);
        const Color expected = image::sample_bilinear(photo, pixel.x(), pixel.y());
        const Color actual = texture.pixel(static_cast<int>(centre.x()), static_cast<int>(centre.y()));
        REQUIRE((actual - expected).abs().maxCoeff() <= 1.0 / 255.0);
        ++checked;
    }
    CHECK(checked > 50);
    CHECK(extract_texture(shape, face.camera, photo, size) == texture);
    CHECK_THROWS_AS(extract_texture(shape, face.camera, photo, 0), FittingError);
}

TEST_CASE("model files round trip bitwise")
{
    const auto dir = std::filesystem::temp_directory_path() / "facemorph_test_fitting";
    std::filesystem::create_directories(dir);
    const auto m = synthesize_model(5, 7, 500);
    const auto bytes = serialize_model(m);
    CHECK(std::string(bytes.begin(), bytes.begin() + 5) == "MKMM1");
    const auto back = deserialize_model(bytes);
    CHECK(back.mean == m.mean);
    CHECK(back.basis == m.basis);
    CHECK(back.sigma == m.sigma);
    CHECK(back.faces == m.faces);
    CHECK(back.uvs == m.uvs);
    CHECK(back.landmark_vertex_ids == m.landmark_vertex_ids);
    CHECK(back.seed == 5);
    CHECK(serialize_model(back) == bytes);

    save_model(m, dir / "model.mkmm");
    const auto loaded = load_model(dir / "model.mkmm");
    CHECK(serialize_model(loaded) == bytes);
    std::ifstream sidecar(dir / "model.mkmm.json");
    const auto meta = nlohmann::json::parse(sidecar);
    CHECK(meta["K"] == 7);
    CHECK(meta["V"] == 500);
    CHECK(meta["seed"] == 5);

    auto corrupt = bytes;
    corrupt[0] = 'X';
    CHECK_THROWS_AS(deserialize_model(corrupt), FittingError);
    CHECK_THROWS_AS(deserialize_model(std::span(bytes).first(bytes.size() - 3)), FittingError);
    CHECK_THROWS_AS(deserialize_model(std::span(bytes).first(200)), FittingError);
    auto bad_id = bytes;
    // The last section is LMID; point the final landmark far out of range.
    REQUIRE(bad_id.size() > 4);
    bad_id.back() = 0x7f;
    CHECK_THROWS_AS(deserialize_model(bad_id), FittingError);
}
