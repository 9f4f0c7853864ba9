/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: tests/support/synthetic.hpp
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

#ifndef FACEMORPH_TESTS_SYNTHETIC_HPP
#define FACEMORPH_TESTS_SYNTHETIC_HPP

#include "facemorph/fitting.hpp"
#include "facemorph/image.hpp"
#include "facemorph/landmarks.hpp"

#include <cstdint>
#include <filesystem>

namespace facemorph {
namespace synthetic {

/// Smooth random colour field (a few low-frequency waves and blobs), values in [0.1, 0.9].
image::Image smooth_image(std::uint64_t seed, int width, int height, double min_wavelength = 40.0);

/// A random face: coefficients, a camera looking at it and its projected landmarks.
struct Face
{
    fitting::ShapeCoefficients alpha;
    fitting::AffineCamera camera;
    landmarks::LandmarkSet landmarks;
};

/**
 * Draws alpha ~ N(0, 1) scaled by `alpha_scale` and a camera with small
 * random yaw, pitch and roll that maps the face to about 60% of the
 * image height, centred with a small random offset.
 */
Face random_face(const fitting::MorphableModel& model, std::uint64_t seed, int width, int height,
                 double alpha_scale = 1.0);

/// Renders the face instance with a smooth texture over a smooth background, as a stand-in photo.
image::Image render_photo(const fitting::MorphableModel& model, const Face& face, std::uint64_t seed, int width,
                          int height);

/// Two same-size photos with their (un-anchored) landmark sets.
struct PhotoPair
{
    image::Image image_a;
    image::Image image_b;
    landmarks::LandmarkSet landmarks_a;
    landmarks::LandmarkSet landmarks_b;
};

/// Two rendered faces of `model` with different shapes and poses.
PhotoPair photo_pair(const fitting::MorphableModel& model, std::uint64_t seed, int width, int height);

/// Writes photo_a.png, photo_b.png, a.pts and b.pts for two random faces of the default synthetic model.
void write_demo_data(const std::filesystem::path& directory, std::uint64_t seed, int width = 320,
                     int height = 320);

} /* namespace synthetic */
} /* namespace facemorph */

#endif /* FACEMORPH_TESTS_SYNTHETIC_HPP */
