/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: include/facemorph/fitting.hpp
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

#ifndef FACEMORPH_FITTING_HPP
#define FACEMORPH_FITTING_HPP

#include "facemorph/common.hpp"
#include "facemorph/image.hpp"
#include "facemorph/landmarks.hpp"
#include "facemorph/mesh.hpp"

#include "Eigen/Core"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace facemorph {
namespace fitting {

inline constexpr double default_lambda = 0.1;
inline constexpr int default_iterations = 3;
inline constexpr double default_coefficient_cap = 4.0;

class FittingError : public Error
{
public:
    using Error::Error;
};

/**
 * A PCA shape model: S = mean + basis * diag(sigma) * alpha.
 *
 * Shapes are stacked xyz per vertex (3V entries). The K basis columns are
 * orthonormal; alpha is expressed in units of the per-component standard
 * deviations sigma. Every instance shares the faces and the uv atlas.
 */
struct MorphableModel
{
    Eigen::VectorXd mean;
    Eigen::MatrixXd basis;
    Eigen::VectorXd sigma;
    std::vector<TriangleIndices> faces;
    std::vector<Vec2> uvs;
    std::array<int, landmarks::ibug_point_count> landmark_vertex_ids{};
    std::uint64_t seed = 0;

    int num_vertices() const { return static_cast<int>(mean.size() / 3); }
    int num_components() const { return static_cast<int>(basis.cols()); }
};

/// Throws FittingError if the model's dimensions or landmark ids are inconsistent.
void validate(const MorphableModel& model);

/// 2x4 affine projection from homogeneous model coordinates to pixels.
struct AffineCamera
{
    Eigen::Matrix<double, 2, 4> P = Eigen::Matrix<double, 2, 4>::Zero();

    Vec2 project(const Vec3& point) const { return P.leftCols<3>() * point + P.col(3); }
};

struct ShapeCoefficients
{
    Eigen::VectorXd alpha;
};

/**
 * Builds a deterministic stand-in for a statistical face model.
 *
 * The mean is an ellipsoidal head-front surface with nose and eye-socket
 * relief, sampled on a row-staggered grid with exactly `num_vertices`
 * vertices and a uv atlas covering [0, 1]^2. The basis holds
 * `num_components` smooth random deformation fields, made orthogonal to
 * affine motions of the mean (what Procrustes alignment does to real scan
 * data) and then orthonormalized. The 68 landmarks sit at fixed positions
 * of an ibug-like layout in uv space.
 *
 * @throws FittingError if num_components < 1, num_vertices < 68 or
 *         num_components > 3 * num_vertices.
 */
MorphableModel synthesize_model(std::uint64_t seed, int num_components, int num_vertices);

/// Instance mesh (with vertex normals) for the given coefficients.
mesh::TriangleMesh instance_mesh(const MorphableModel& model, const ShapeCoefficients& coefficients);

/// Instance positions of the 68 landmark vertices only.
std::vector<Vec3> landmark_positions(const MorphableModel& model, const ShapeCoefficients& coefficients);

/**
 * Least-squares affine camera from 2D-3D correspondences, solved after
 * normalizing both point sets (zero mean, RMS distance sqrt(2) resp. sqrt(3)).
 *
 * @throws FittingError for fewer than 4 correspondences, coplanar 3D points
 *         or a rank-deficient result.
 */
AffineCamera estimate_affine_camera(std::span<const Vec2> points2d, std::span<const Vec3> points3d);

/**
 * Ridge-regularized shape fit for a fixed camera:
 *
 *   min_alpha sum_i |P (mean_i + B_i diag(sigma) alpha) - x_i|^2 + lambda |alpha|^2
 *
 * evaluated in a normalized landmark frame (zero mean, RMS distance
 * sqrt(2)), so lambda does not depend on the image scale. Coefficients
 * beyond +-coefficient_cap are clamped with a warning.
 *
 * @throws FittingError if lambda is 0 and the system is singular.
 */
ShapeCoefficients fit_shape(const MorphableModel& model, const AffineCamera& camera,
                            std::span<const Vec2> landmarks2d, double lambda,
                            double coefficient_cap = default_coefficient_cap);

struct FitResult
{
    AffineCamera camera;
    ShapeCoefficients coefficients;
    mesh::TriangleMesh mesh;
    /// Reprojection RMSE (pixels) after each iteration.
    std::vector<double> rmse_history;
    /// Pixel-frame objective after every half-step (camera, shape, camera, ...).
    std::vector<double> objective_history;
};

/**
 * Alternates camera estimation (on the current instance's landmark
 * vertices) and shape fitting for `iterations` rounds, starting from the
 * mean shape.
 */
FitResult fit_from_photo_landmarks(const MorphableModel& model, const landmarks::LandmarkSet& landmarks,
                                   double lambda = default_lambda, int iterations = default_iterations,
                                   double coefficient_cap = default_coefficient_cap);

double reprojection_rmse(const AffineCamera& camera, std::span<const Vec3> points3d, std::span<const Vec2> points2d);

/**
 * Unwraps a photo into the mesh's uv atlas: every texel centre is located
 * in the uv triangles (lowest face index wins), lifted to 3D with the
 * barycentric weights, projected with the camera and sampled bilinearly
 * from the photo. Texels outside the atlas copy their nearest covered
 * neighbour.
 */
image::Image extract_texture(const mesh::TriangleMesh& mesh, const AffineCamera& camera, const image::Image& photo,
                             int texture_size);

/// Texel-space position (x right, y down) of a uv coordinate in a square texture.
inline Vec2 uv_to_texel(const Vec2& uv, int texture_size)
{
    return {uv.x() * texture_size, (1.0 - uv.y()) * texture_size};
}

/**
 * Binary model container: magic "MKMM1", then little-endian tagged
 * sections (DIMS, MEAN, BASE, SIGM, FACE, UVCO, LMID), each a 4-byte tag,
 * a u64 payload length and the payload.
 */
std::vector<std::uint8_t> serialize_model(const MorphableModel& model);
MorphableModel deserialize_model(std::span<const std::uint8_t> bytes);

/// JSON sidecar with K, V and seed.
std::string model_metadata_json(const MorphableModel& model);

/// Writes `path` and `path` + ".json".
void save_model(const MorphableModel& model, const std::filesystem::path& path);
MorphableModel load_model(const std::filesystem::path& path);

} /* namespace fitting */
} /* namespace facemorph */

#endif /* FACEMORPH_FITTING_HPP */
