/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/model_io.cpp
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
#include "facemorph/fitting.hpp"

#include "json.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace facemorph {
namespace fitting {

namespace {

constexpr char magic[5] = {'M', 'K', 'M', 'M', '1'};

static_assert(std::endian::native == std::endian::little, "model I/O assumes a little-endian host");

class Writer
{
public:
    void raw(const void* data, std::size_t size)
    {
        const auto* p = static_cast<const std::uint8_t*>(data);
        bytes_.insert(bytes_.end(), p, p + size);
    }

    template <typename T>
    void value(T v)
    {
        raw(&v, sizeof(T));
    }

    void begin_section(const char (&tag)[5])
    {
        raw(tag, 4);
        length_offset_ = bytes_.size();
        value<std::uint64_t>(0);
    }

    void end_section()
    {
        const std::uint64_t length = bytes_.size() - length_offset_ - sizeof(std::uint64_t);
        std::memcpy(bytes_.data() + length_offset_, &length, sizeof(length));
    }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t length_offset_ = 0;
};

class Reader
{
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void raw(void* out, std::size_t size)
    {
        if (size > bytes_.size() - offset_)
            throw FittingError("model file is truncated");
        std::memcpy(out, bytes_.data() + offset_, size);
        offset_ += size;
    }

    template <typename T>
    T value()
    {
        T v;
        raw(&v, sizeof(T));
        return v;
    }

    bool at_end() const { return offset_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - offset_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t offset_ = 0;
};

void expect_length(const std::string& tag, std::uint64_t length, std::uint64_t expected)
{
    if (length != expected)
        throw FittingError("model section " + tag + " has " + std::to_string(length) + " bytes, expected " +
                           std::to_string(expected));
}

} // namespace

std::vector<std::uint8_t> serialize_model(const MorphableModel& model)
{
    validate(model);
    Writer out;
    out.raw(magic, sizeof(magic));

    out.begin_section("DIMS");
    out.value<std::uint64_t>(static_cast<std::uint64_t>(model.num_vertices()));
    out.value<std::uint64_t>(static_cast<std::uint64_t>(model.num_components()));
    out.value<std::uint64_t>(model.faces.size());
    out.value<std::uint64_t>(model.seed);
    out.end_section();

    out.begin_section("MEAN");
    out.raw(model.mean.data(), sizeof(double) * model.mean.size());
    out.end_section();

    out.begin_section("BASE"); // column-major
    out.raw(model.basis.data(), sizeof(double) * model.basis.size());
    out.end_section();

    out.begin_section("SIGM");
    out.raw(model.sigma.data(), sizeof(double) * model.sigma.size());
    out.end_section();

    out.begin_section("FACE");
    for (const auto& f : model.faces)
    {
        for (const int i : f)
            out.value<std::int32_t>(i);
    }
    out.end_section();

    out.begin_section("UVCO");
    for (const auto& uv : model.uvs)
    {
        out.value<double>(uv.x());
        out.value<double>(uv.y());
    }
    out.end_section();

    out.begin_section("LMID");
    for (const int id : model.landmark_vertex_ids)
        out.value<std::int32_t>(id);
    out.end_section();
    return out.take();
}

MorphableModel deserialize_model(std::span<const std::uint8_t> bytes)
{
    Reader in(bytes);
    char header[sizeof(magic)];
    in.raw(header, sizeof(header));
    if (std::memcmp(header, magic, sizeof(magic)) != 0)
        throw FittingError("not a model file (bad magic)");

    MorphableModel model;
    std::uint64_t V = 0, K = 0, F = 0;
    bool have_dims = false;
    unsigned seen = 0;
    const std::string order[] = {"DIMS", "MEAN", "BASE", "SIGM", "FACE", "UVCO", "LMID"};
    while (!in.at_end())
    {
        char tag_chars[4];
        in.raw(tag_chars, 4);
        const std::string tag(tag_chars, 4);
        const auto length = in.value<std::uint64_t>();
        if (length > in.remaining())
            throw FittingError("model section " + tag + " is truncated");
        if (tag != "DIMS" && !have_dims)
            throw FittingError("model section " + tag + " appears before DIMS");

        if (tag == "DIMS")
        {
            expect_length(tag, length, 32);
            V = in.value<std::uint64_t>();
            K = in.value<std::uint64_t>();
            F = in.value<std::uint64_t>();
            model.seed = in.value<std::uint64_t>();
            if (V == 0 || K == 0 || V > (1u << 24) || K > 3 * V || F > (1u << 26))
                throw FittingError("model dimensions are implausible");
            have_dims = true;
        } else if (tag == "MEAN")
        {
            expect_length(tag, length, 3 * V * sizeof(double));
            model.mean.resize(static_cast<Eigen::Index>(3 * V));
            in.raw(model.mean.data(), length);
        } else if (tag == "BASE")
        {
            expect_length(tag, length, 3 * V * K * sizeof(double));
            model.basis.resize(static_cast<Eigen::Index>(3 * V), static_cast<Eigen::Index>(K));
            in.raw(model.basis.data(), length);
        } else if (tag == "SIGM")
        {
            expect_length(tag, length, K * sizeof(double));
            model.sigma.resize(static_cast<Eigen::Index>(K));
            in.raw(model.sigma.data(), length);
        } else if (tag == "FACE")
        {
            expect_length(tag, length, 3 * F * sizeof(std::int32_t));
            model.faces.resize(F);
            for (auto& f : model.faces)
            {
                for (int& i : f)
                    i = in.value<std::int32_t>();
            }
        } else if (tag == "UVCO")
        {
            expect_length(tag, length, 2 * V * sizeof(double));
            model.uvs.resize(V);
            for (auto& uv : model.uvs)
            {
                uv.x() = in.value<double>();
                uv.y() = in.value<double>();
            }
        } else if (tag == "LMID")
        {
            expect_length(tag, length, landmarks::ibug_point_count * sizeof(std::int32_t));
            for (int& id : model.landmark_vertex_ids)
                id = in.value<std::int32_t>();
        } else
        {
            warn("skipping unknown model section " + tag);
            std::vector<std::uint8_t> skipped(length);
            in.raw(skipped.data(), length);
            continue;
        }
        for (unsigned k = 0; k < std::size(order); ++k)
        {
            if (order[k] == tag)
            {
                if (seen & (1u << k))
                    throw FittingError("duplicate model section " + tag);
                seen |= 1u << k;
            }
        }
    }
    for (unsigned k = 0; k < std::size(order); ++k)
    {
        if (!(seen & (1u << k)))
            throw FittingError("model file is missing section " + order[k]);
    }
    validate(model);
    return model;
}

std::string model_metadata_json(const MorphableModel& model)
{
    nlohmann::ordered_json meta;
    meta["format"] = "MKMM1";
    meta["K"] = model.num_components();
    meta["V"] = model.num_vertices();
    meta["faces"] = model.faces.size();
    meta["seed"] = model.seed;
    return meta.dump(2) + "\n";
}

void save_model(const MorphableModel& model, const std::filesystem::path& path)
{
    const auto bytes = serialize_model(model);
    {
        std::ofstream file(path, std::ios::binary);
        if (!file)
            throw FittingError("cannot open " + path.string() + " for writing");
        file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!file)
            throw FittingError("failed to write " + path.string());
    }
    auto sidecar = path;
    sidecar += ".json";
    std::ofstream meta(sidecar);
    if (!meta)
        throw FittingError("cannot open " + sidecar.string() + " for writing");
    meta << model_metadata_json(model);
}

MorphableModel load_model(const std::filesystem::path& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw FittingError("cannot open model " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    try
    {
        return deserialize_model(bytes);
    } catch (const FittingError& e)
    {
        throw FittingError(path.string() + ": " + e.what());
    }
}

} /* namespace fitting */
} /* namespace facemorph */
