/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: include/facemorph/pipeline.hpp
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

#ifndef FACEMORPH_PIPELINE_HPP
#define FACEMORPH_PIPELINE_HPP

#include "facemorph/common.hpp"
#include "facemorph/fitting.hpp"
#include "facemorph/image.hpp"
#include "facemorph/landmarks.hpp"
#include "facemorph/render.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace facemorph {
namespace pipeline {

class ConfigError : public Error
{
public:
    using Error::Error;
};

class PipelineError : public Error
{
public:
    using Error::Error;
};

enum class MorphSpace { texture, photo };

struct SynthSpec
{
    std::uint64_t seed = 1;
    int components = 10;
    int vertices = 3448;
};

/// Parses "seed,K,V".
SynthSpec parse_synth_spec(std::string_view text);

/// Settings as key/value strings, before conversion.
using Settings = std::map<std::string, std::string>;

struct PipelineConfig
{
    std::filesystem::path photo_a;
    std::filesystem::path photo_b;
    std::filesystem::path landmarks_a;
    std::filesystem::path landmarks_b;
    /// Optional prefit meshes; the fit is skipped and only the camera is estimated.
    std::filesystem::path mesh_a;
    std::filesystem::path mesh_b;
    /// Model file; when empty the synthetic model `synth` is used.
    std::filesystem::path model;
    SynthSpec synth;

    double t_start = 0.0;
    double t_end = 1.0;
    double t_step = 0.1;
    MorphSpace morph_space = MorphSpace::texture;
    std::filesystem::path output_dir = "frames";

    double lambda = fitting::default_lambda;
    int iterations = fitting::default_iterations;
    int texture_size = 512;
    bool resize_b_to_a = false;

    int width = 512;
    int height = 512;
    render::ViewDirection view = render::ViewDirection::front;
    Vec3 light_direction = Vec3(0.0, 0.0, 1.0);
    render::Material material;
    Color background = Color(0.0, 0.0, 0.0);

    /// Record per-frame wall-clock times in the manifest (makes it non-reproducible).
    bool timing = false;
};

/**
 * Reads `key = value` lines. `#` starts a comment, values may be quoted,
 * blank lines and `[section]` headers are ignored.
 *
 * @throws ConfigError naming the line of a malformed entry.
 */
Settings parse_settings(std::string_view text);

/**
 * Builds a validated config from file settings overridden by flag
 * settings. Unknown keys produce a warning. All problems found (bad
 * numbers, missing inputs, invalid ranges, missing files) are reported
 * together in one ConfigError.
 */
PipelineConfig parse_config(const Settings& file_settings, const Settings& flag_settings, bool check_paths = true);

/// Reads `path` (if non-empty) with parse_settings(), then calls parse_config().
PipelineConfig parse_config_file(const std::filesystem::path& path, const Settings& flag_settings,
                                 bool check_paths = true);

/// Throws ConfigError listing every violated invariant.
void validate(const PipelineConfig& config, bool check_paths = true);

/// Inclusive schedule: floor((t_end - t_start) / t_step + 1e-9) + 1 values t_start + k * t_step.
std::vector<double> frame_schedule(double t_start, double t_end, double t_step);

/// The configured model file or the synthetic model.
fitting::MorphableModel load_model(const PipelineConfig& config);

struct FaceData
{
    image::Image photo;
    landmarks::LandmarkSet landmarks;
    fitting::FitResult fit;
    image::Image texture;
};

/**
 * Fits one face: loads photo and landmarks, runs the landmark fit (or
 * loads `prefit_mesh` and estimates only its camera) and extracts the
 * texture.
 */
FaceData prepare_face(const fitting::MorphableModel& model, const std::filesystem::path& photo_path,
                      const std::filesystem::path& landmarks_path, const std::filesystem::path& prefit_mesh,
                      double lambda, int iterations, int texture_size);

struct AnimationResult
{
    std::vector<std::filesystem::path> frames;
    std::filesystem::path manifest;
};

/**
 * Runs the full method: fits both faces, morphs the textures (in the uv
 * atlas or in photo space), interpolates the meshes and renders one frame
 * per scheduled t into the output directory together with manifest.json.
 *
 * The view is fitted once to face A and kept for every frame.
 *
 * @throws PipelineError naming the failing stage and t. Frames written so
 *         far are kept and the manifest is marked incomplete.
 */
AnimationResult run_animation(const PipelineConfig& config);

struct BenchRow
{
    int vertices = 0;
    double mean_ms = 0.0;
    double std_ms = 0.0;
    int iterations = 0;
};

struct BenchReport
{
    std::vector<BenchRow> rows;
};

inline constexpr int bench_warmup_iterations = 5;

/**
 * Times interpolate_mesh alone on pre-built synthetic mesh pairs (K = 10)
 * with a monotonic clock: 5 warmup runs, then `iterations` measured runs
 * per vertex count.
 *
 * @throws ConfigError if iterations < 10 or the counts are not strictly increasing.
 */
BenchReport run_bench(const std::vector<int>& vertex_counts, int iterations, std::uint64_t seed = 1);

/// Aligned text table.
std::string format_bench_table(const BenchReport& report);

/// CSV with header `vertices,mean_ms,std_ms,iters`.
std::string format_bench_csv(const BenchReport& report);

/// Parses "3448,16759,29587".
std::vector<int> parse_int_list(std::string_view text);

} /* namespace pipeline */
} /* namespace facemorph */

#endif /* FACEMORPH_PIPELINE_HPP */
