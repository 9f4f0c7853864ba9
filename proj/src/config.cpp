/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/config.cpp
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
#include "facemorph/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace facemorph {
namespace pipeline {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
std::optional<T> parse_number(std::string_view text)
{
    text = trim(text);
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        return std::nullopt;
    if constexpr (std::is_floating_point_v<T>)
    {
        if (!std::isfinite(value))
            return std::nullopt;
    }
    return value;
}

std::optional<bool> parse_bool(std::string_view text)
{
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes" || text == "on")
        return true;
    if (text == "false" || text == "0" || text == "no" || text == "off")
        return false;
    return std::nullopt;
}

std::vector<std::string_view> split(std::string_view text, char separator)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true)
    {
        const auto pos = text.find(separator, start);
        parts.push_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return parts;
}

} // namespace

SynthSpec parse_synth_spec(std::string_view text)
{
    const auto parts = split(text, ',');
    if (parts.size() != 3)
        throw ConfigError("synth spec must be seed,K,V (got '" + std::string(text) + "')");
    const auto seed = parse_number<std::uint64_t>(parts[0]);
    const auto k = parse_number<int>(parts[1]);
    const auto v = parse_number<int>(parts[2]);
    if (!seed || !k || !v)
        throw ConfigError("synth spec must be three integers seed,K,V (got '" + std::string(text) + "')");
    if (*k < 1 || *v < static_cast<int>(landmarks::ibug_point_count))
        throw ConfigError("synth spec needs K >= 1 and V >= 68 (got '" + std::string(text) + "')");
    return {*seed, *k, *v};
}

std::vector<int> parse_int_list(std::string_view text)
{
    std::vector<int> values;
    for (const auto part : split(text, ','))
    {
        const auto v = parse_number<int>(part);
        if (!v)
            throw ConfigError("expected a comma-separated list of integers, got '" + std::string(text) + "'");
        values.push_back(*v);
    }
    return values;
}

Settings parse_settings(std::string_view text)
{
    Settings settings;
    std::size_t line_number = 0;
    std::size_t start = 0;
    while (start <= text.size())
    {
        const auto end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_number;

        // Strip comments outside of quotes.
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i)
        {
            if (line[i] == '"')
                quoted = !quoted;
            else if (line[i] == '#' && !quoted)
            {
                line = line.substr(0, i);
                break;
            }
        }
        line = trim(line);
        if (line.empty() || (line.front() == '[' && line.back() == ']'))
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_number) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_number) + ": empty key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        settings[std::string(key)] = std::string(value);
    }
    return settings;
}

PipelineConfig parse_config(const Settings& file_settings, const Settings& flag_settings, bool check_paths)
{
    Settings merged = file_settings;
    for (const auto& [key, value] : flag_settings)
        merged[key] = value;

    PipelineConfig config;
    std::vector<std::string> problems;

    const auto number = [&](const std::string& key, const std::string& value, auto& target) {
        using T = std::remove_reference_t<decltype(target)>;
        if (const auto v = parse_number<T>(value))
            target = *v;
        else
            problems.push_back(key + ": '" + value + "' is not a valid number");
    };
    const auto flag = [&](const std::string& key, const std::string& value, bool& target) {
        if (const auto v = parse_bool(value))
            target = *v;
        else
            problems.push_back(key + ": '" + value + "' is not a boolean");
    };
    const auto path = [](std::filesystem::path& target) {
        return [&target](const std::string&, const std::string& value) { target = value; };
    };

    using Handler = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Handler> handlers = {
        {"photo_a", path(config.photo_a)},
        {"photo_b", path(config.photo_b)},
        {"landmarks_a", path(config.landmarks_a)},
        {"landmarks_b", path(config.landmarks_b)},
        {"mesh_a", path(config.mesh_a)},
        {"mesh_b", path(config.mesh_b)},
        {"model", path(config.model)},
        {"out", path(config.output_dir)},
        {"output_dir", path(config.output_dir)},
        {"synth",
         [&](const std::string&, const std::string& v) {
             try
             {
                 config.synth = parse_synth_spec(v);
             } catch (const ConfigError& e)
             {
                 problems.emplace_back(e.what());
             }
         }},
        {"t_start", [&](const std::string& k, const std::string& v) { number(k, v, config.t_start); }},
        {"t_end", [&](const std::string& k, const std::string& v) { number(k, v, config.t_end); }},
        {"t_step", [&](const std::string& k, const std::string& v) { number(k, v, config.t_step); }},
        {"lambda", [&](const std::string& k, const std::string& v) { number(k, v, config.lambda); }},
        {"iterations", [&](const std::string& k, const std::string& v) { number(k, v, config.iterations); }},
        {"texture_size", [&](const std::string& k, const std::string& v) { number(k, v, config.texture_size); }},
        {"width", [&](const std::string& k, const std::string& v) { number(k, v, config.width); }},
        {"height", [&](const std::string& k, const std::string& v) { number(k, v, config.height); }},
        {"ka", [&](const std::string& k, const std::string& v) { number(k, v, config.material.ka); }},
        {"kd", [&](const std::string& k, const std::string& v) { number(k, v, config.material.kd); }},
        {"ks", [&](const std::string& k, const std::string& v) { number(k, v, config.material.ks); }},
        {"shininess", [&](const std::string& k, const std::string& v) { number(k, v, config.material.shininess); }},
        {"resize_b_to_a", [&](const std::string& k, const std::string& v) { flag(k, v, config.resize_b_to_a); }},
        {"timing", [&](const std::string& k, const std::string& v) { flag(k, v, config.timing); }},
        {"morph_space",
         [&](const std::string& k, const std::string& v) {
             if (v == "texture")
                 config.morph_space = MorphSpace::texture;
             else if (v == "photo")
                 config.morph_space = MorphSpace::photo;
             else
                 problems.push_back(k + ": expected photo or texture, got '" + v + "'");
         }},
        {"view",
         [&](const std::string& k, const std::string& v) {
             if (v == "front")
                 config.view = render::ViewDirection::front;
             else if (v == "side")
                 config.view = render::ViewDirection::side;
             else
                 problems.push_back(k + ": expected front or side, got '" + v + "'");
         }},
        {"light",
         [&](const std::string& k, const std::string& v) {
             const auto parts = split(v, ',');
             Vec3 light;
             bool ok = parts.size() == 3;
             for (std::size_t i = 0; ok && i < 3; ++i)
             {
                 const auto c = parse_number<double>(parts[i]);
                 ok = c.has_value();
                 if (ok)
                     light(static_cast<Eigen::Index>(i)) = *c;
             }
             if (ok && light.norm() > 0.0)
                 config.light_direction = light.normalized();
             else
                 problems.push_back(k + ": expected a non-zero vector x,y,z, got '" + v + "'");
         }},
        {"background",
         [&](const std::string& k, const std::string& v) {
             const auto parts = split(v, ',');
             bool ok = parts.size() == 3;
             Color c;
             for (std::size_t i = 0; ok && i < 3; ++i)
             {
                 const auto value = parse_number<double>(parts[i]);
                 ok = value && *value >= 0.0 && *value <= 1.0;
                 if (ok)
                     c(static_cast<Eigen::Index>(i)) = *value;
             }
             if (ok)
                 config.background = c;
             else
                 problems.push_back(k + ": expected r,g,b in [0, 1], got '" + v + "'");
         }},
    };

    for (const auto& [key, value] : merged)
    {
        const auto it = handlers.find(key);
        if (it == handlers.end())
            warn("config: ignoring unknown key '" + key + "'");
        else
            it->second(key, value);
    }

    try
    {
        validate(config, check_paths);
    } catch (const ConfigError& e)
    {
        problems.emplace_back(e.what());
    }
    if (!problems.empty())
    {
        std::string message = "invalid configuration:";
        for (const auto& p : problems)
            message += "\n  " + p;
        throw ConfigError(message);
    }
    return config;
}

PipelineConfig parse_config_file(const std::filesystem::path& path, const Settings& flag_settings, bool check_paths)
{
    Settings file_settings;
    if (!path.empty())
    {
        std::ifstream file(path);
        if (!file)
            throw ConfigError("cannot open config file " + path.string());
        std::ostringstream text;
        text << file.rdbuf();
        try
        {
            file_settings = parse_settings(text.str());
        } catch (const ConfigError& e)
        {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }
    return parse_config(file_settings, flag_settings, check_paths);
}

void validate(const PipelineConfig& config, bool check_paths)
{
    std::vector<std::string> problems;
    const auto require = [&](const std::filesystem::path& p, const char* name) {
        if (p.empty())
            problems.push_back(std::string(name) + " is required");
        else if (check_paths && !std::filesystem::exists(p))
            problems.push_back(std::string(name) + ": " + p.string() + " does not exist");
    };
    const auto optional_file = [&](const std::filesystem::path& p, const char* name) {
        if (!p.empty() && check_paths && !std::filesystem::exists(p))
            problems.push_back(std::string(name) + ": " + p.string() + " does not exist");
    };
    require(config.photo_a, "photo_a");
    require(config.photo_b, "photo_b");
    require(config.landmarks_a, "landmarks_a");
    require(config.landmarks_b, "landmarks_b");
    optional_file(config.mesh_a, "mesh_a");
    optional_file(config.mesh_b, "mesh_b");
    optional_file(config.model, "model");

    if (!(config.t_step > 0.0))
        problems.push_back("t_step must be positive");
    if (!(config.t_start >= 0.0 && config.t_start <= config.t_end && config.t_end <= 1.0))
        problems.push_back("need 0 <= t_start <= t_end <= 1");
    if (!(config.lambda >= 0.0))
        problems.push_back("lambda must be non-negative");
    if (config.iterations < 1)
        problems.push_back("iterations must be at least 1");
    if (config.texture_size < 1 || config.texture_size > 8192)
        problems.push_back("texture_size must be in [1, 8192]");
    if (config.width < 1 || config.height < 1 || config.width > 16384 || config.height > 16384)
        problems.push_back("width and height must be in [1, 16384]");
    if (!(config.material.ka >= 0.0 && config.material.kd >= 0.0 && config.material.ks >= 0.0))
        problems.push_back("material coefficients must be non-negative");
    if (!(config.material.shininess >= 1.0))
        problems.push_back("shininess must be at least 1");
    if (config.output_dir.empty())
        problems.push_back("output directory is required");

    if (!problems.empty())
    {
        std::string message = problems.front();
        for (std::size_t i = 1; i < problems.size(); ++i)
            message += "\n  " + problems[i];
        throw ConfigError(message);
    }
}

std::vector<double> frame_schedule(double t_start, double t_end, double t_step)
{
    if (!(t_step > 0.0) || !(t_end >= t_start))
        throw ConfigError("invalid schedule: need t_step > 0 and t_end >= t_start");
    const auto count = static_cast<std::size_t>(std::floor((t_end - t_start) / t_step + 1e-9)) + 1;
    std::vector<double> schedule(count);
    for (std::size_t k = 0; k < count; ++k)
    {
        // Round away the representation noise of k * t_step (0.30000000000000004 -> 0.3).
        const double t = std::round((t_start + static_cast<double>(k) * t_step) * 1e12) / 1e12;
        schedule[k] = std::min(t, t_end);
    }
    if (std::abs(schedule.back() - t_end) <= 1e-9)
        schedule.back() = t_end;
    schedule.front() = t_start;
    return schedule;
}

fitting::MorphableModel load_model(const PipelineConfig& config)
{
    if (!config.model.empty())
        return fitting::load_model(config.model);
    return fitting::synthesize_model(config.synth.seed, config.synth.components, config.synth.vertices);
}

} /* namespace pipeline */
} /* namespace facemorph */
