/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/image.cpp
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
#include "facemorph/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

namespace facemorph {
namespace image {

namespace {

// Keeps width * height * 3 comfortably inside size_t and memory.
constexpr long long max_pixels = 1LL << 28;

void check_dimensions(long long width, long long height)
{
    if (width < 1 || height < 1)
        throw ImageError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                         std::to_string(height));
    if (width > max_pixels || height > max_pixels || width * height > max_pixels)
        throw ImageError("image dimensions " + std::to_string(width) + "x" + std::to_string(height) +
                         " are too large");
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw ImageError("could not open image file: " + path.string());
    return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

Image decode_png(const std::vector<std::uint8_t>& bytes)
{
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
        throw ImageError(std::string("PNG decode failed: ") + png.message);
    png.format = PNG_FORMAT_RGB;
    try
    {
        check_dimensions(png.width, png.height);
    } catch (...)
    {
        png_image_free(&png);
        throw;
    }
    Image img(static_cast<int>(png.width), static_cast<int>(png.height));
    if (!png_image_finish_read(&png, nullptr, img.bytes().data(), 0, nullptr))
    {
        const std::string message = png.message;
        png_image_free(&png);
        throw ImageError("PNG decode failed: " + message);
    }
    return img;
}

void write_png(const Image& img, const std::filesystem::path& path)
{
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width());
    png.height = static_cast<png_uint_32>(img.height());
    png.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.c_str(), 0, img.bytes().data(), 0, nullptr))
        throw ImageError("PNG encode failed for " + path.string() + ": " + png.message);
}

} // namespace

Image::Image(int width, int height, const Color& fill)
{
    check_dimensions(width, height);
    width_ = width;
    height_ = height;
    data_.resize(static_cast<std::size_t>(width) * height * 3);
    const std::uint8_t rgb[3] = {quantize(fill[0]), quantize(fill[1]), quantize(fill[2])};
    for (std::size_t i = 0; i < data_.size(); ++i)
        data_[i] = rgb[i % 3];
}

Color Image::pixel(int x, int y) const
{
    const std::uint8_t* p = row(y) + static_cast<std::size_t>(x) * 3;
    return Color(p[0], p[1], p[2]) / 255.0;
}

void Image::set_pixel(int x, int y, const Color& color)
{
    std::uint8_t* p = row(y) + static_cast<std::size_t>(x) * 3;
    p[0] = quantize(color[0]);
    p[1] = quantize(color[1]);
    p[2] = quantize(color[2]);
}

std::uint8_t quantize(double value)
{
    if (!(value > 0.0))
        return 0;
    if (value >= 1.0)
        return 255;
    return static_cast<std::uint8_t>(std::lround(value * 255.0));
}

Color sample_bilinear(const Image& img, double x, double y)
{
    const double u = std::clamp(x - 0.5, 0.0, static_cast<double>(img.width() - 1));
    const double v = std::clamp(y - 0.5, 0.0, static_cast<double>(img.height() - 1));
    const int x0 = static_cast<int>(u);
    const int y0 = static_cast<int>(v);
    const int x1 = std::min(x0 + 1, img.width() - 1);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = u - x0;
    const double fy = v - y0;

    const Color top = (1.0 - fx) * img.pixel(x0, y0) + fx * img.pixel(x1, y0);
    const Color bottom = (1.0 - fx) * img.pixel(x0, y1) + fx * img.pixel(x1, y1);
    return (1.0 - fy) * top + fy * bottom;
}

Image resize_bilinear(const Image& img, int width, int height)
{
    Image out(width, height);
    const double sx = static_cast<double>(img.width()) / width;
    const double sy = static_cast<double>(img.height()) / height;
    for (int y = 0; y < height; ++y)
    {
        for (int x = 0; x < width; ++x)
            out.set_pixel(x, y, sample_bilinear(img, (x + 0.5) * sx, (y + 0.5) * sy));
    }
    return out;
}

std::vector<std::uint8_t> encode_ppm(const Image& img)
{
    const std::string header = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.bytes().begin(), img.bytes().end());
    return out;
}

Image decode_ppm(const std::vector<std::uint8_t>& bytes)
{
    std::size_t pos = 0;
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
        throw ImageError("not a binary PPM (P6) file");
    pos = 2;

    // Header: three whitespace-separated integers with optional # comments.
    const auto next_number = [&]() -> long long {
        for (;;)
        {
            while (pos < bytes.size() && std::isspace(bytes[pos]))
                ++pos;
            if (pos < bytes.size() && bytes[pos] == '#')
            {
                while (pos < bytes.size() && bytes[pos] != '\n')
                    ++pos;
                continue;
            }
            break;
        }
        if (pos >= bytes.size() || !std::isdigit(bytes[pos]))
            throw ImageError("malformed PPM header");
        long long value = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos]))
        {
            value = value * 10 + (bytes[pos++] - '0');
            if (value > max_pixels)
                throw ImageError("PPM dimension overflow");
        }
        return value;
    };
    const long long width = next_number();
    const long long height = next_number();
    const long long maxval = next_number();
    if (maxval != 255)
        throw ImageError("unsupported PPM maxval " + std::to_string(maxval) + " (only 255 is supported)");
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        throw ImageError("malformed PPM header");
    ++pos;
    check_dimensions(width, height);

    Image img(static_cast<int>(width), static_cast<int>(height));
    if (bytes.size() - pos < img.bytes().size())
        throw ImageError("truncated PPM data: expected " + std::to_string(img.bytes().size()) + " bytes, got " +
                         std::to_string(bytes.size() - pos));
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), img.bytes().size(), img.bytes().begin());
    return img;
}

Image load_image(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    static constexpr std::uint8_t png_magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::equal(std::begin(png_magic), std::end(png_magic), bytes.begin()))
        return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6')
        return decode_ppm(bytes);
    throw ImageError("unsupported image format: " + path.string());
}

void save_image(const Image& img, const std::filesystem::path& path)
{
    if (img.empty())
        throw ImageError("cannot save an empty image");
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png")
    {
        write_png(img, path);
    } else if (ext == ".ppm")
    {
        const auto bytes = encode_ppm(img);
        std::ofstream file(path, std::ios::binary);
        if (!file)
            throw ImageError("could not open image file for writing: " + path.string());
        file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    } else
    {
        throw ImageError("unsupported output format '" + ext + "' (use .png or .ppm)");
    }
}

std::string frame_filename(std::size_t index)
{
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%03zu.png", index);
    return name;
}

} /* namespace image */
} /* namespace facemorph */
