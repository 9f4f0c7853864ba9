/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/landmarks.cpp
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
#include "facemorph/landmarks.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace facemorph {
namespace landmarks {

namespace {

std::string_view trim(std::string_view s)
{
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && is_space(s.back()))
        s.remove_suffix(1);
    return s;
}

// Splits "key : value" and returns the trimmed value, or nothing if the key differs.
bool header_value(std::string_view line, std::string_view key, std::string_view& value)
{
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || trim(line.substr(0, colon)) != key)
        return false;
    value = trim(line.substr(colon + 1));
    return true;
}

bool parse_double(std::string_view token, double& out)
{
    if (!token.empty() && token.front() == '+')
        token.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc() && ptr == token.data() + token.size() && std::isfinite(out);
}

void append_fixed(std::string& out, double value)
{
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::fixed, 6);
    if (ec != std::errc())
        throw Error("coordinate too large to serialize");
    out.append(buffer, ptr);
}

} // namespace

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error("line " + std::to_string(line) + ": " + message), line_(line)
{
}

LandmarkSet parse_pts(std::string_view text)
{
    std::vector<std::string_view> lines;
    while (!text.empty())
    {
        const auto nl = text.find('\n');
        lines.push_back(text.substr(0, nl));
        if (nl == std::string_view::npos)
            break;
        text.remove_prefix(nl + 1);
    }

    const auto line_at = [&](std::size_t index) -> std::string_view {
        if (index >= lines.size())
            throw ParseError(index + 1, "unexpected end of file");
        return trim(lines[index]);
    };

    std::string_view value;
    if (!header_value(line_at(0), "version", value))
        throw ParseError(1, "expected 'version: 1'");
    if (value != "1")
        throw ParseError(1, "unsupported version '" + std::string(value) + "'");

    if (!header_value(line_at(1), "n_points", value))
        throw ParseError(2, "expected 'n_points: <N>'");
    std::size_t declared = 0;
    {
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), declared);
        if (ec != std::errc() || ptr != value.data() + value.size())
            throw ParseError(2, "malformed point count '" + std::string(value) + "'");
    }

    if (line_at(2) != "{")
        throw ParseError(3, "expected '{'");

    LandmarkSet result;
    result.points.reserve(std::min(declared, lines.size()));
    std::size_t index = 3;
    for (;; ++index)
    {
        const auto line = line_at(index);
        if (line == "}")
            break;
        if (result.points.size() == declared)
            throw ParseError(index + 1, "count mismatch: header declares " + std::to_string(declared) +
                                            " points but more are listed");
        const auto split = line.find_first_of(" \t");
        Vec2 p;
        if (split == std::string_view::npos || !parse_double(trim(line.substr(0, split)), p.x()) ||
            !parse_double(trim(line.substr(split + 1)), p.y()))
        {
            throw ParseError(index + 1, "expected two numeric coordinates, got '" + std::string(line) + "'");
        }
        result.points.push_back(p);
    }
    if (result.points.size() != declared)
        throw ParseError(index + 1, "count mismatch: header declares " + std::to_string(declared) +
                                        " points, found " + std::to_string(result.points.size()));
    for (++index; index < lines.size(); ++index)
    {
        if (!trim(lines[index]).empty())
            throw ParseError(index + 1, "trailing content after '}'");
    }
    return result;
}

std::string write_pts(const LandmarkSet& landmarks)
{
    std::string out = "version: 1\nn_points: " + std::to_string(landmarks.points.size()) + "\n{\n";
    for (const auto& p : landmarks.points)
    {
        append_fixed(out, p.x());
        out += ' ';
        append_fixed(out, p.y());
        out += '\n';
    }
    out += "}\n";
    return out;
}

LandmarkSet read_pts_file(const std::filesystem::path& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw Error("could not open landmark file: " + path.string());
    std::ostringstream contents;
    contents << file.rdbuf();
    try
    {
        return parse_pts(contents.str());
    } catch (const ParseError& e)
    {
        throw ParseError(e.line(), path.string() + ": " + e.what());
    }
}

void write_pts_file(const LandmarkSet& landmarks, const std::filesystem::path& path)
{
    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw Error("could not open landmark file for writing: " + path.string());
    file << write_pts(landmarks);
}

LandmarkSet add_boundary_anchors(const LandmarkSet& landmarks)
{
    if (landmarks.image_width <= 0 || landmarks.image_height <= 0)
        throw Error("add_boundary_anchors: image dimensions are not set");
    if (landmarks.has_anchors)
        throw Error("add_boundary_anchors: the set already carries boundary anchors");
    const double w = landmarks.image_width;
    const double h = landmarks.image_height;

    LandmarkSet result = landmarks;
    result.points.reserve(landmarks.points.size() + anchor_count);
    result.points.emplace_back(0.0, 0.0);
    result.points.emplace_back(w, 0.0);
    result.points.emplace_back(w, h);
    result.points.emplace_back(0.0, h);
    result.points.emplace_back(w / 2.0, 0.0);
    result.points.emplace_back(w, h / 2.0);
    result.points.emplace_back(w / 2.0, h);
    result.points.emplace_back(0.0, h / 2.0);
    result.has_anchors = true;
    return result;
}

LandmarkSet nudge_inside(const LandmarkSet& landmarks, double margin)
{
    if (landmarks.image_width <= 0 || landmarks.image_height <= 0)
        throw Error("nudge_inside: image dimensions are not set");
    const double w = landmarks.image_width;
    const double h = landmarks.image_height;
    LandmarkSet result = landmarks;
    for (auto& p : result.points)
    {
        p.x() = std::min(std::max(p.x(), margin), w - margin);
        p.y() = std::min(std::max(p.y(), margin), h - margin);
    }
    return result;
}

void validate(const LandmarkSet& landmarks, bool require_ibug)
{
    std::vector<std::string> problems;
    if (require_ibug && landmarks.points.size() != ibug_point_count)
        problems.push_back("expected " + std::to_string(ibug_point_count) + " ibug landmarks, got " +
                           std::to_string(landmarks.points.size()));
    if (landmarks.image_width <= 0 || landmarks.image_height <= 0)
    {
        problems.push_back("image dimensions are not set");
    } else
    {
        for (std::size_t i = 0; i < landmarks.points.size(); ++i)
        {
            const auto& p = landmarks.points[i];
            if (!(p.x() >= 0.0 && p.x() <= landmarks.image_width && p.y() >= 0.0 &&
                  p.y() <= landmarks.image_height))
            {
                std::ostringstream msg;
                msg << "point " << i << " (" << p.x() << ", " << p.y() << ") lies outside the "
                    << landmarks.image_width << "x" << landmarks.image_height << " image";
                problems.push_back(msg.str());
            }
        }
    }
    if (problems.empty())
        return;
    std::string message = "invalid landmark set:";
    for (const auto& p : problems)
        message += "\n  " + p;
    throw Error(message);
}

} /* namespace landmarks */
} /* namespace facemorph */
