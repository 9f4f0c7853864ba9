/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: tools/facemorph_cli.cpp
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
#include "facemorph/geometry.hpp"
#include "facemorph/image.hpp"
#include "facemorph/landmarks.hpp"
#include "facemorph/mesh.hpp"
#include "facemorph/morph.hpp"
#include "facemorph/pipeline.hpp"
#include "facemorph/render.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

using namespace facemorph;
namespace fs = std::filesystem;

namespace {

fitting::MorphableModel resolve_model(const std::string& model_path, const std::string& synth)
{
    if (!model_path.empty())
        return fitting::load_model(model_path);
    const auto spec = synth.empty() ? pipeline::SynthSpec{} : pipeline::parse_synth_spec(synth);
    return fitting::synthesize_model(spec.seed, spec.components, spec.vertices);
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << text;
}

render::ViewDirection parse_view(const std::string& view)
{
    if (view == "front")
        return render::ViewDirection::front;
    if (view == "side")
        return render::ViewDirection::side;
    throw Error("view must be front or side, got '" + view + "'");
}

} // namespace

int main(int argc, char* argv[])
{
    CLI::App app{"facemorph: 3D facial expression interpolation from landmark-annotated photos"};
    app.require_subcommand(1);

    // synth-model
    std::string synth_spec = "1,10,3448";
    std::string out;
    auto* synth_cmd = app.add_subcommand("synth-model", "Write a synthetic morphable model (MKMM1 + JSON sidecar)");
    synth_cmd->add_option("--synth", synth_spec, "seed,K,V")->capture_default_str();
    synth_cmd->add_option("--out", out, "Output model file")->required();

    // fit
    std::string photo_a, photo_b, landmarks_a, landmarks_b, model_path, synth;
    double lambda = fitting::default_lambda;
    int iterations = fitting::default_iterations;
    int texture_size = 512;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the model to one photo and extract its texture");
    fit_cmd->add_option("--photo-a", photo_a, "Photo")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--landmarks-a", landmarks_a, "68-point .pts file")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--model", model_path, "Model file")->check(CLI::ExistingFile);
    fit_cmd->add_option("--synth", synth, "Synthetic model seed,K,V (default 1,10,3448)");
    fit_cmd->add_option("--lambda", lambda, "Regularization weight")->capture_default_str();
    fit_cmd->add_option("--iterations", iterations, "Camera/shape alternation rounds")->capture_default_str();
    fit_cmd->add_option("--texture-size", texture_size, "Texture edge length")->capture_default_str();
    fit_cmd->add_option("--out", out, "Output directory (fit.obj, texture.png, fit.json)")->required();

    // morph2d
    double t = 0.5;
    std::string dump_triangulation;
    bool resize_b_to_a = false;
    auto* morph_cmd = app.add_subcommand("morph2d", "Landmark-driven 2D morph of two photos");
    morph_cmd->add_option("--photo-a", photo_a, "Photo A")->required()->check(CLI::ExistingFile);
    morph_cmd->add_option("--photo-b", photo_b, "Photo B")->required()->check(CLI::ExistingFile);
    morph_cmd->add_option("--landmarks-a", landmarks_a, "Landmarks of A")->required()->check(CLI::ExistingFile);
    morph_cmd->add_option("--landmarks-b", landmarks_b, "Landmarks of B")->required()->check(CLI::ExistingFile);
    morph_cmd->add_option("--t", t, "Interpolation factor")->capture_default_str();
    morph_cmd->add_option("--out", out, "Output image (.png or .ppm)")->required();
    morph_cmd->add_option("--dump-triangulation", dump_triangulation, "Write the shared triangulation (.tris)");
    morph_cmd->add_flag("--resize-b-to-a", resize_b_to_a, "Resample photo B (and its landmarks) to A's size");

    // interp
    std::string mesh_a, mesh_b;
    auto* interp_cmd = app.add_subcommand("interp", "Interpolate two meshes with shared connectivity");
    interp_cmd->add_option("--mesh-a", mesh_a, "Mesh A (OBJ)")->required()->check(CLI::ExistingFile);
    interp_cmd->add_option("--mesh-b", mesh_b, "Mesh B (OBJ)")->required()->check(CLI::ExistingFile);
    interp_cmd->add_option("--t", t, "Interpolation factor")->capture_default_str();
    interp_cmd->add_option("--out", out, "Output OBJ")->required();

    // render
    std::string mesh_path, texture_path, view = "front";
    int width = 512, height = 512;
    auto* render_cmd = app.add_subcommand("render", "Render a textured mesh with Phong shading");
    render_cmd->add_option("--mesh", mesh_path, "Mesh (OBJ with uvs)")->required()->check(CLI::ExistingFile);
    render_cmd->add_option("--texture", texture_path, "Texture image")->required()->check(CLI::ExistingFile);
    render_cmd->add_option("--width", width, "Frame width")->capture_default_str();
    render_cmd->add_option("--height", height, "Frame height")->capture_default_str();
    render_cmd->add_option("--view", view, "front or side")->capture_default_str();
    render_cmd->add_option("--out", out, "Output image")->required();

    // animate: every option is forwarded as a setting, so that it can
    // override the config file.
    std::string config_path;
    pipeline::Settings flags;
    auto* animate_cmd = app.add_subcommand("animate", "Run the full pipeline and write an animation frame sequence");
    animate_cmd->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    const std::pair<const char*, const char*> animate_options[] = {
        {"--photo-a", "photo_a"},         {"--photo-b", "photo_b"},       {"--landmarks-a", "landmarks_a"},
        {"--landmarks-b", "landmarks_b"}, {"--mesh-a", "mesh_a"},         {"--mesh-b", "mesh_b"},
        {"--model", "model"},             {"--synth", "synth"},           {"--t-start", "t_start"},
        {"--t-end", "t_end"},             {"--t-step", "t_step"},         {"--out", "out"},
        {"--morph-space", "morph_space"}, {"--lambda", "lambda"},         {"--iterations", "iterations"},
        {"--texture-size", "texture_size"}, {"--width", "width"},         {"--height", "height"},
        {"--view", "view"},               {"--light", "light"},
    };
    std::map<std::string, std::string> animate_values;
    for (const auto& [flag, key] : animate_options)
        animate_cmd->add_option(flag, animate_values[key], std::string("Overrides '") + key + "'");
    bool timing = false;
    animate_cmd->add_flag("--resize-b-to-a", resize_b_to_a, "Resample photo B to A's size (photo morph space)");
    animate_cmd->add_flag("--timing", timing, "Record per-frame times in the manifest");

    // bench
    std::string bench_counts = "3448,16759,29587";
    int bench_iters = 50;
    auto* bench_cmd = app.add_subcommand("bench", "Time mesh interpolation at several resolutions");
    bench_cmd->add_option("--bench-counts", bench_counts, "Comma-separated vertex counts")->capture_default_str();
    bench_cmd->add_option("--bench-iters", bench_iters, "Measured iterations per count")->capture_default_str();
    bench_cmd->add_option("--out", out, "Optional CSV output path");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (synth_cmd->parsed())
        {
            const auto spec = pipeline::parse_synth_spec(synth_spec);
            const auto model = fitting::synthesize_model(spec.seed, spec.components, spec.vertices);
            fitting::save_model(model, out);
            std::cout << "wrote " << out << " (K=" << spec.components << ", V=" << spec.vertices << ")\n";
        } else if (fit_cmd->parsed())
        {
            const auto model = resolve_model(model_path, synth);
            const auto face = pipeline::prepare_face(model, photo_a, landmarks_a, {}, lambda, iterations, texture_size);
            fs::create_directories(out);
            mesh::write_obj_file(face.fit.mesh, fs::path(out) / "fit.obj");
            image::save_image(face.texture, fs::path(out) / "texture.png");
            nlohmann::ordered_json report;
            report["camera"] = {{face.fit.camera.P(0, 0), face.fit.camera.P(0, 1), face.fit.camera.P(0, 2),
                                 face.fit.camera.P(0, 3)},
                                {face.fit.camera.P(1, 0), face.fit.camera.P(1, 1), face.fit.camera.P(1, 2),
                                 face.fit.camera.P(1, 3)}};
            report["alpha"] = std::vector<double>(face.fit.coefficients.alpha.data(),
                                                  face.fit.coefficients.alpha.data() +
                                                      face.fit.coefficients.alpha.size());
            report["rmse_history"] = face.fit.rmse_history;
            write_text(fs::path(out) / "fit.json", report.dump(2) + "\n");
            std::cout << "reprojection RMSE " << face.fit.rmse_history.back() << " px\n";
        } else if (morph_cmd->parsed())
        {
            const auto img_a = image::load_image(photo_a);
            auto img_b = image::load_image(photo_b);
            auto lm_a = landmarks::read_pts_file(landmarks_a);
            auto lm_b = landmarks::read_pts_file(landmarks_b);
            lm_a.image_width = img_a.width();
            lm_a.image_height = img_a.height();
            lm_b.image_width = img_b.width();
            lm_b.image_height = img_b.height();
            if (resize_b_to_a && (img_b.width() != img_a.width() || img_b.height() != img_a.height()))
            {
                const Vec2 scale(static_cast<double>(img_a.width()) / img_b.width(),
                                 static_cast<double>(img_a.height()) / img_b.height());
                for (auto& p : lm_b.points)
                    p = p.cwiseProduct(scale);
                lm_b.image_width = img_a.width();
                lm_b.image_height = img_a.height();
                img_b = image::resize_bilinear(img_b, img_a.width(), img_a.height());
            }
            landmarks::validate(lm_a, false);
            landmarks::validate(lm_b, false);
            const auto mapping =
                morph::build_correspondence(landmarks::add_boundary_anchors(landmarks::nudge_inside(lm_a)),
                                            landmarks::add_boundary_anchors(landmarks::nudge_inside(lm_b)));
            if (!dump_triangulation.empty())
            {
                geometry::Triangulation tri;
                tri.points = morph::interpolate_landmarks(mapping, 0.5);
                tri.triangles = mapping.triangles;
                write_text(dump_triangulation, geometry::write_tris(tri));
            }
            image::save_image(morph::warp_blend(img_a, img_b, mapping, t), out);
        } else if (interp_cmd->parsed())
        {
            const auto a = mesh::read_obj_file(mesh_a);
            const auto b = mesh::read_obj_file(mesh_b);
            mesh::write_obj_file(mesh::interpolate_mesh(a, b, t), out);
        } else if (render_cmd->parsed())
        {
            auto shape = mesh::read_obj_file(mesh_path);
            mesh::compute_vertex_normals_in_place(shape);
            const auto texture = image::load_image(texture_path);
            render::RenderParams params;
            params.width = width;
            params.height = height;
            params.view = render::fit_orthographic_view(shape, width, height, parse_view(view));
            image::save_image(render::rasterize(shape, texture, params), out);
        } else if (animate_cmd->parsed())
        {
            for (const auto& [flag, key] : animate_options)
            {
                if (animate_cmd->count(flag) > 0)
                    flags[key] = animate_values[key];
            }
            if (resize_b_to_a)
                flags["resize_b_to_a"] = "true";
            if (timing)
                flags["timing"] = "true";
            const auto config = pipeline::parse_config_file(config_path, flags);
            const auto result = pipeline::run_animation(config);
            std::cout << "wrote " << result.frames.size() << " frames and " << result.manifest.string() << "\n";
        } else if (bench_cmd->parsed())
        {
            const auto report = pipeline::run_bench(pipeline::parse_int_list(bench_counts), bench_iters);
            std::cout << pipeline::format_bench_table(report);
            if (!out.empty())
                write_text(out, pipeline::format_bench_csv(report));
        }
    } catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
