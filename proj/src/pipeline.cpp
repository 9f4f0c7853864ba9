/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/pipeline.cpp
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
#include "facemorph/mesh.hpp"
#include "facemorph/morph.hpp"

#include "json.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

namespace facemorph {
namespace pipeline {

namespace {

const char* to_string(MorphSpace space)
{
    return space == MorphSpace::texture ? "texture" : "photo";
}

nlohmann::ordered_json config_json(const PipelineConfig& config)
{
    nlohmann::ordered_json j;
    j["photo_a"] = config.photo_a.string();
    j["photo_b"] = config.photo_b.string();
    j["landmarks_a"] = config.landmarks_a.string();
    j["landmarks_b"] = config.landmarks_b.string();
    if (!config.mesh_a.empty())
        j["mesh_a"] = config.mesh_a.string();
    if (!config.mesh_b.empty())
        j["mesh_b"] = config.mesh_b.string();
    if (config.model.empty())
        j["synth"] = {{"seed", config.synth.seed}, {"K", config.synth.components}, {"V", config.synth.vertices}};
    else
        j["model"] = config.model.string();
    j["t_start"] = config.t_start;
    j["t_end"] = config.t_end;
    j["t_step"] = config.t_step;
    j["morph_space"] = to_string(config.morph_space);
    j["lambda"] = config.lambda;
    j["iterations"] = config.iterations;
    j["texture_size"] = config.texture_size;
    j["resize_b_to_a"] = config.resize_b_to_a;
    j["width"] = config.width;
    j["height"] = config.height;
    j["view"] = config.view == render::ViewDirection::front ? "front" : "side";
    j["light"] = {config.light_direction.x(), config.light_direction.y(), config.light_direction.z()};
    j["material"] = {{"ka", config.material.ka},
                     {"kd", config.material.kd},
                     {"ks", config.material.ks},
                     {"shininess", config.material.shininess}};
    j["background"] = {config.background(0), config.background(1), config.background(2)};
    return j;
}

landmarks::LandmarkSet anchored(landmarks::LandmarkSet set)
{
    return landmarks::add_boundary_anchors(landmarks::nudge_inside(set));
}

std::vector<Vec3> landmark_vertices(const fitting::MorphableModel& model, const mesh::TriangleMesh& mesh)
{
    std::vector<Vec3> points;
    points.reserve(model.landmark_vertex_ids.size());
    for (const int id : model.landmark_vertex_ids)
        points.push_back(mesh.vertices[static_cast<std::size_t>(id)]);
    return points;
}

// Runs one named stage, turning any error into a PipelineError that names
// the stage (and the frame's t, when there is one).
template <typename F>
auto stage(const char* name, std::optional<double> t, F&& body)
{
    try
    {
        return body();
    } catch (const std::exception& e)
    {
        std::string where = std::string("stage '") + name + "'";
        if (t)
        {
            std::ostringstream value;
            value << *t;
            where += " at t=" + value.str();
        }
        throw PipelineError(where + ": " + e.what());
    }
}

} // namespace

FaceData prepare_face(const fitting::MorphableModel& model, const std::filesystem::path& photo_path,
                      const std::filesystem::path& landmarks_path, const std::filesystem::path& prefit_mesh,
                      double lambda, int iterations, int texture_size)
{
    FaceData face;
    face.photo = image::load_image(photo_path);
    face.landmarks = landmarks::read_pts_file(landmarks_path);
    face.landmarks.image_width = face.photo.width();
    face.landmarks.image_height = face.photo.height();
    landmarks::validate(face.landmarks, true);

    if (prefit_mesh.empty())
    {
        face.fit = fitting::fit_from_photo_landmarks(model, face.landmarks, lambda, iterations);
    } else
    {
        auto mesh = mesh::read_obj_file(prefit_mesh);
        if (static_cast<int>(mesh.vertices.size()) != model.num_vertices() || mesh.faces != model.faces)
            throw PipelineError(prefit_mesh.string() + " does not share the model's topology");
        if (mesh.uvs.empty())
            mesh.uvs = model.uvs;
        mesh::compute_vertex_normals_in_place(mesh);
        const auto points3d = landmark_vertices(model, mesh);
        face.fit.camera = fitting::estimate_affine_camera(face.landmarks.points, points3d);
        face.fit.rmse_history.push_back(fitting::reprojection_rmse(face.fit.camera, points3d, face.landmarks.points));
        face.fit.mesh = std::move(mesh);
    }
    face.texture = fitting::extract_texture(face.fit.mesh, face.fit.camera, face.photo, texture_size);
    return face;
}

AnimationResult run_animation(const PipelineConfig& config)
{
    validate(config, true);
    const auto schedule = frame_schedule(config.t_start, config.t_end, config.t_step);
    std::filesystem::create_directories(config.output_dir);

    AnimationResult result;
    result.manifest = config.output_dir / "manifest.json";
    nlohmann::ordered_json manifest;
    manifest["complete"] = false;
    manifest["config"] = config_json(config);
    manifest["frame_count"] = schedule.size();
    manifest["frames"] = nlohmann::ordered_json::array();

    const auto write_manifest = [&]() {
        std::ofstream out(result.manifest);
        if (!out)
            throw PipelineError("cannot write " + result.manifest.string());
        out << manifest.dump(2) << "\n";
    };

    try
    {
        const auto model = stage("model", std::nullopt, [&] { return load_model(config); });
        const auto face_a = stage("fit A", std::nullopt, [&] {
            return prepare_face(model, config.photo_a, config.landmarks_a, config.mesh_a, config.lambda,
                                config.iterations, config.texture_size);
        });
        const auto face_b = stage("fit B", std::nullopt, [&] {
            return prepare_face(model, config.photo_b, config.landmarks_b, config.mesh_b, config.lambda,
                                config.iterations, config.texture_size);
        });

        render::RenderParams params;
        params.width = config.width;
        params.height = config.height;
        params.light_direction = config.light_direction;
        params.material = config.material;
        params.background = config.background;
        params.view = stage("view", std::nullopt, [&] {
            return render::fit_orthographic_view(face_a.fit.mesh, config.width, config.height, config.view);
        });

        // Correspondence for the 2D morph.
        image::Image photo_b = face_b.photo;
        const auto mapping = stage("correspondence", std::nullopt, [&] {
            if (config.morph_space == MorphSpace::texture)
            {
                landmarks::LandmarkSet set;
                set.image_width = config.texture_size;
                set.image_height = config.texture_size;
                for (const int id : model.landmark_vertex_ids)
                    set.points.push_back(fitting::uv_to_texel(model.uvs[static_cast<std::size_t>(id)],
                                                              config.texture_size));
                const auto texture_landmarks = anchored(set);
                return morph::build_correspondence(texture_landmarks, texture_landmarks);
            }
            auto lm_b = face_b.landmarks;
            const int w = face_a.photo.width(), h = face_a.photo.height();
            if (photo_b.width() != w || photo_b.height() != h)
            {
                if (!config.resize_b_to_a)
                    throw PipelineError("photo sizes differ (" + std::to_string(w) + "x" + std::to_string(h) +
                                        " vs " + std::to_string(photo_b.width()) + "x" +
                                        std::to_string(photo_b.height()) + "); enable resize_b_to_a");
                const Vec2 scale(static_cast<double>(w) / photo_b.width(), static_cast<double>(h) / photo_b.height());
                for (auto& p : lm_b.points)
                    p = p.cwiseProduct(scale);
                lm_b.image_width = w;
                lm_b.image_height = h;
                photo_b = image::resize_bilinear(photo_b, w, h);
            }
            return morph::build_correspondence(anchored(face_a.landmarks), anchored(lm_b));
        });

        for (std::size_t k = 0; k < schedule.size(); ++k)
        {
            const double t = schedule[k];
            const auto started = std::chrono::steady_clock::now();

            const auto shape = stage("interpolate", t, [&] {
                return mesh::interpolate_mesh(face_a.fit.mesh, face_b.fit.mesh, t);
            });
            const auto texture = stage("morph", t, [&]() -> image::Image {
                if (t == 0.0)
                    return face_a.texture;
                if (t == 1.0)
                    return face_b.texture;
                if (config.morph_space == MorphSpace::texture)
                    return morph::warp_blend(face_a.texture, face_b.texture, mapping, t);
                const auto photo = morph::warp_blend(face_a.photo, photo_b, mapping, t);
                const auto points = morph::interpolate_landmarks(mapping, t);
                const std::vector<Vec2> face_points(points.begin(), points.begin() + landmarks::ibug_point_count);
                const auto camera = fitting::estimate_affine_camera(face_points, landmark_vertices(model, shape));
                return fitting::extract_texture(shape, camera, photo, config.texture_size);
            });
            const auto frame = stage("render", t, [&] { return render::rasterize(shape, texture, params); });

            const auto name = image::frame_filename(k);
            const auto path = config.output_dir / name;
            stage("write", t, [&] { image::save_image(frame, path); });
            result.frames.push_back(path);

            nlohmann::ordered_json entry;
            entry["index"] = k;
            entry["t"] = t;
            entry["file"] = name;
            if (config.timing)
            {
                const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - started;
                entry["time_ms"] = elapsed.count();
            }
            manifest["frames"].push_back(entry);
        }
    } catch (const std::exception& e)
    {
        manifest["error"] = e.what();
        write_manifest();
        throw;
    }

    manifest["complete"] = true;
    write_manifest();
    return result;
}

} /* namespace pipeline */
} /* namespace facemorph */
