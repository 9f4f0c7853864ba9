/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: tests/support/synthetic.cpp
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
#include "synthetic.hpp"

#include "facemorph/pipeline.hpp"
#include "facemorph/render.hpp"

#include "Eigen/Geometry"

#include <cmath>
#include <numbers>
#include <random>

namespace facemorph {
namespace synthetic {

image::Image smooth_image(std::uint64_t seed, int width, int height, double min_wavelength)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    struct Wave
    {
        double kx, ky, phase;
        Color amplitude;
    };
    std::vector<Wave> waves;
    for (int i = 0; i < 4; ++i)
    {
        const double wavelength = min_wavelength * (1.0 + 3.0 * unit(rng));
        const double angle = 2.0 * std::numbers::pi * unit(rng);
        const double k = 2.0 * std::numbers::pi / wavelength;
        waves.push_back({k * std::cos(angle), k * std::sin(angle), 2.0 * std::numbers::pi * unit(rng),
                         Color(unit(rng), unit(rng), unit(rng)) * 0.1});
    }
    const Color base(0.3 + 0.3 * unit(rng), 0.3 + 0.3 * unit(rng), 0.3 + 0.3 * unit(rng));

    image::Image img(width, height);
    for (int y = 0; y < height; ++y)
    {
        for (int x = 0; x < width; ++x)
        {
            Color c = base;
            for (const auto& w : waves)
                c += w.amplitude * std::sin(w.kx * x + w.ky * y + w.phase);
            img.set_pixel(x, y, c.cwiseMax(0.1).cwiseMin(0.9));
        }
    }
    return img;
}

Face random_face(const fitting::MorphableModel& model, std::uint64_t seed, int width, int height,
                 double alpha_scale)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    Face face;
    face.alpha.alpha = Eigen::VectorXd::NullaryExpr(model.num_components(), [&]() { return alpha_scale * normal(rng); });
    const Eigen::Matrix3d rotation = (Eigen::AngleAxisd(0.15 * unit(rng), Vec3::UnitY()) *
                                      Eigen::AngleAxisd(0.1 * unit(rng), Vec3::UnitX()) *
                                      Eigen::AngleAxisd(0.1 * unit(rng), Vec3::UnitZ()))
                                         .toRotationMatrix();
    // The synthetic head spans about 190 model units vertically.
    const double scale = 0.6 * height / 190.0 * (1.0 + 0.1 * unit(rng));
    Eigen::Matrix<double, 2, 3> flip;
    flip << 1.0, 0.0, 0.0, 0.0, -1.0, 0.0;
    face.camera.P.leftCols<3>() = scale * flip * rotation;
    face.camera.P.col(3) = Vec2(0.5 * width + 0.03 * width * unit(rng), 0.5 * height + 0.03 * height * unit(rng));

    face.landmarks.image_width = width;
    face.landmarks.image_height = height;
    for (const auto& p : fitting::landmark_positions(model, face.alpha))
        face.landmarks.points.push_back(face.camera.project(p));
    return face;
}

image::Image render_photo(const fitting::MorphableModel& model, const Face& face, std::uint64_t seed, int width,
                          int height)
{
    const auto shape = fitting::instance_mesh(model, face.alpha);
    const auto skin = smooth_image(seed * 2 + 1, 256, 256, 24.0);
    render::RenderParams params;
    params.width = width;
    params.height = height;
    params.view = render::view_from_affine(face.camera.P);
    params.material = {0.35, 0.65, 0.0, 1.0};
    params.background = Color(0.5, 0.5, 0.5);
    render::DepthBuffer depth;
    auto photo = render::rasterize(shape, skin, params, &depth);

    // Replace the flat background with a smooth one.
    const auto backdrop = smooth_image(seed * 2 + 2, width, height);
    for (int y = 0; y < height; ++y)
    {
        for (int x = 0; x < width; ++x)
        {
            if (std::isinf(depth.at(x, y)))
                photo.set_pixel(x, y, backdrop.pixel(x, y));
        }
    }
    return photo;
}

PhotoPair photo_pair(const fitting::MorphableModel& model, std::uint64_t seed, int width, int height)
{
    PhotoPair pair;
    const auto face_a = random_face(model, 2 * seed + 1, width, height);
    const auto face_b = random_face(model, 2 * seed + 2, width, height);
    pair.image_a = render_photo(model, face_a, 2 * seed + 1, width, height);
    pair.image_b = render_photo(model, face_b, 2 * seed + 2, width, height);
    pair.landmarks_a = face_a.landmarks;
    pair.landmarks_b = face_b.landmarks;
    return pair;
}

void write_demo_data(const std::filesystem::path& directory, std::uint64_t seed, int width, int height)
{
    std::filesystem::create_directories(directory);
    const pipeline::SynthSpec spec;
    const auto model = fitting::synthesize_model(spec.seed, spec.components, spec.vertices);
    const char* names[2] = {"a", "b"};
    for (int i = 0; i < 2; ++i)
    {
        const auto face = random_face(model, seed * 7 + i, width, height);
        const auto photo = render_photo(model, face, seed * 7 + i, width, height);
        image::save_image(photo, directory / ("photo_" + std::string(names[i]) + ".png"));
        landmarks::write_pts_file(face.landmarks, directory / (std::string(names[i]) + ".pts"));
    }
}

} /* namespace synthetic */
} /* namespace facemorph */
