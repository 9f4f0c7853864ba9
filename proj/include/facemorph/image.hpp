/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: include/facemorph/image.hpp
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

#ifndef FACEMORPH_IMAGE_HPP
#define FACEMORPH_IMAGE_HPP

#include "facemorph/common.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace facemorph {
namespace image {

class ImageError : public Error
{
public:
    using Error::Error;
};

/**
 * Row-major 8-bit RGB raster.
 *
 * Pixel (x, y) covers [x, x+1) x [y, y+1); its centre is at (x + 0.5, y + 0.5).
 * Values are read and written as floating point on [0, 1]; writes quantize
 * to the nearest 8-bit level. No gamma handling: arithmetic happens on the
 * stored (sRGB-encoded) values.
 */
class Image
{
public:
    Image() = default;
    Image(int width, int height, const Color& fill = Color::Zero());

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }

    Color pixel(int x, int y) const;
    void set_pixel(int x, int y, const Color& color);

    std::uint8_t* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_ * 3; }
    const std::uint8_t* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_ * 3; }
    std::vector<std::uint8_t>& bytes() noexcept { return data_; }
    const std::vector<std::uint8_t>& bytes() const noexcept { return data_; }

    bool operator==(const Image& other) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Rounds a [0, 1] channel value to the nearest 8-bit level (clamping, NaN -> 0).
std::uint8_t quantize(double value);

/**
 * Bilinear blend of the four pixel centres around (x, y). Coordinates
 * outside the image clamp to the edge pixels.
 */
Color sample_bilinear(const Image& img, double x, double y);

/// Bilinear resampling to a new size.
Image resize_bilinear(const Image& img, int width, int height);

/**
 * Loads an 8-bit PNG or binary PPM (P6, maxval 255). The format is taken
 * from the file's magic bytes.
 *
 * @throws ImageError on unsupported formats, truncated data or oversized dimensions.
 */
Image load_image(const std::filesystem::path& path);

/// Saves as PNG or PPM depending on the extension (.png, .ppm).
void save_image(const Image& img, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_ppm(const Image& img);
Image decode_ppm(const std::vector<std::uint8_t>& bytes);

/// "frame_007.png" for index 7.
std::string frame_filename(std::size_t index);

} /* namespace image */
} /* namespace facemorph */

#endif /* FACEMORPH_IMAGE_HPP */
