/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: include/facemorph/common.hpp
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

#ifndef FACEMORPH_COMMON_HPP
#define FACEMORPH_COMMON_HPP

#include "Eigen/Core"

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace facemorph {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// RGB colour, one channel per component on [0, 1].
using Color = Eigen::Array3d;

/// Vertex indices of one triangle.
using TriangleIndices = std::array<int, 3>;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

using WarningHandler = std::function<void(std::string_view)>;

/**
 * Reports a non-fatal condition. The default handler prints to stderr.
 */
void warn(std::string_view message);

/**
 * Installs a new warning handler and returns the previous one. Passing an
 * empty handler restores the stderr default.
 */
WarningHandler set_warning_handler(WarningHandler handler);

/**
 * Linear blend weights (1 - t, t) for a factor t in [0, 1].
 *
 * The weights are computed so that blend_weights(t) and
 * blend_weights(1 - t) are exact mirror images of each other, which makes
 * interpolate(a, b, t) and interpolate(b, a, 1 - t) bitwise identical.
 * Factors below 0.5 are snapped to the grid of 1 - t (a shift of at most
 * one ulp of 0.5).
 */
struct BlendWeights
{
    double from;
    double to;
};

BlendWeights blend_weights(double t);

/// from * a + to * b, except that equal inputs are returned unchanged.
inline double blend(double a, double b, const BlendWeights& w)
{
    return a == b ? a : w.from * a + w.to * b;
}

inline Vec2 blend(const Vec2& a, const Vec2& b, const BlendWeights& w)
{
    return {blend(a.x(), b.x(), w), blend(a.y(), b.y(), w)};
}

inline Vec3 blend(const Vec3& a, const Vec3& b, const BlendWeights& w)
{
    return {blend(a.x(), b.x(), w), blend(a.y(), b.y(), w), blend(a.z(), b.z(), w)};
}

} /* namespace facemorph */

#endif /* FACEMORPH_COMMON_HPP */
