/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: include/facemorph/landmarks.hpp
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

#ifndef FACEMORPH_LANDMARKS_HPP
#define FACEMORPH_LANDMARKS_HPP

#include "facemorph/common.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace facemorph {
namespace landmarks {

/// Number of points in an ibug face annotation.
inline constexpr std::size_t ibug_point_count = 68;
/// Number of image-boundary anchors appended by add_boundary_anchors().
inline constexpr std::size_t anchor_count = 8;

/**
 * Ordered 2D facial feature points in pixel coordinates (origin top-left,
 * x right, y down). Index i always denotes the same facial feature.
 *
 * Image dimensions are not part of the pts format and are zero until set
 * by the caller (usually from the paired photo).
 */
struct LandmarkSet
{
    std::vector<Vec2> points;
    int image_width = 0;
    int image_height = 0;
    bool has_anchors = false;
};

class ParseError : public Error
{
public:
    ParseError(std::size_t line, const std::string& message);

    /// 1-based line number the error refers to.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/**
 * Parses the text of an ibug .pts file:
 *
 *   version: 1
 *   n_points: N
 *   {
 *   x y        (N lines)
 *   }
 *
 * Coordinates are taken verbatim (no 1-based shift).
 *
 * @throws ParseError naming the offending line.
 */
LandmarkSet parse_pts(std::string_view text);

/// Serializes to the .pts format with 6 decimal digits per coordinate.
std::string write_pts(const LandmarkSet& landmarks);

LandmarkSet read_pts_file(const std::filesystem::path& path);
void write_pts_file(const LandmarkSet& landmarks, const std::filesystem::path& path);

/**
 * Appends the 8 image-boundary anchors after the existing points, in the
 * order top-left, top-right, bottom-right, bottom-left, top-mid, right-mid,
 * bottom-mid, left-mid. Existing points are left untouched.
 *
 * Requires image_width and image_height to be set.
 */
LandmarkSet add_boundary_anchors(const LandmarkSet& landmarks);

/**
 * Moves points lying within `margin` pixels of the image border onto the
 * line `margin` pixels inside it, so they cannot coincide or be collinear
 * with the boundary anchors.
 */
LandmarkSet nudge_inside(const LandmarkSet& landmarks, double margin = 0.5);

/**
 * Checks the LandmarkSet invariants: 68 points if `require_ibug`, image
 * dimensions set, and every point inside [0, width] x [0, height].
 *
 * @throws Error listing every violation.
 */
void validate(const LandmarkSet& landmarks, bool require_ibug);

} /* namespace landmarks */
} /* namespace facemorph */

#endif /* FACEMORPH_LANDMARKS_HPP */
