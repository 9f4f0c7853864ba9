/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: include/facemorph/morph.hpp
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

#ifndef FACEMORPH_MORPH_HPP
#define FACEMORPH_MORPH_HPP

#include "facemorph/common.hpp"
#include "facemorph/geometry.hpp"
#include "facemorph/image.hpp"
#include "facemorph/landmarks.hpp"

#include <vector>

namespace facemorph {
namespace morph {

class MorphError : public Error
{
public:
    using Error::Error;
};

/**
 * Two corresponding, boundary-anchored point sets sharing one triangle
 * connectivity. The triangles are the Delaunay triangulation of the
 * midpoint configuration (a_i + b_i) / 2.
 */
struct MorphMapping
{
    std::vector<Vec2> points_a;
    std::vector<Vec2> points_b;
    std::vector<TriangleIndices> triangles;
    int width = 0;
    int height = 0;
};

/**
 * Builds the shared triangulation for two anchored landmark sets of the
 * same image size.
 *
 * @throws MorphError on count or size mismatch, missing anchors, or
 *         triangles that are degenerate (or inverted) in either endpoint
 *         configuration; the message lists the offending triangles.
 */
MorphMapping build_correspondence(const landmarks::LandmarkSet& lm_a, const landmarks::LandmarkSet& lm_b);

/// Point i = (1 - t) a_i + t b_i. Throws MorphError unless 0 <= t <= 1.
std::vector<Vec2> interpolate_landmarks(const MorphMapping& mapping, double t);

/**
 * Landmark-driven morph of two images at factor t.
 *
 * Each output pixel centre is located in the t-interpolated triangulation;
 * its barycentric weights there map it to a position in configuration A
 * and one in B; both images are sampled bilinearly and cross-dissolved with
 * weights (1 - t, t). Pixels outside every triangle, and pixels of
 * triangles that degenerate at this t, get the plain cross-dissolve.
 */
image::Image warp_blend(const image::Image& img_a, const image::Image& img_b, const MorphMapping& mapping,
                        double t);

} /* namespace morph */
} /* namespace facemorph */

#endif /* FACEMORPH_MORPH_HPP */
