/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/bench.cpp
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
#include "facemorph/mesh.hpp"
#include "facemorph/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace facemorph {
namespace pipeline {

BenchReport run_bench(const std::vector<int>& vertex_counts, int iterations, std::uint64_t seed)
{
    if (iterations < 10)
        throw ConfigError("bench iterations must be at least 10, got " + std::to_string(iterations));
    if (vertex_counts.empty())
        throw ConfigError("bench needs at least one vertex count");
    for (std::size_t i = 1; i < vertex_counts.size(); ++i)
    {
        if (vertex_counts[i] <= vertex_counts[i - 1])
            throw ConfigError("bench vertex counts must be strictly increasing");
    }

    BenchReport report;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> factor(0.05, 0.95);
    for (const int count : vertex_counts)
    {
        const auto model = fitting::synthesize_model(seed, 10, count);
        fitting::ShapeCoefficients alpha_a, alpha_b;
        alpha_a.alpha = Eigen::VectorXd::NullaryExpr(10, [&]() { return normal(rng); });
        alpha_b.alpha = Eigen::VectorXd::NullaryExpr(10, [&]() { return normal(rng); });
        const auto a = fitting::instance_mesh(model, alpha_a);
        const auto b = fitting::instance_mesh(model, alpha_b);

        std::vector<double> factors(static_cast<std::size_t>(bench_warmup_iterations + iterations));
        for (auto& t : factors)
            t = factor(rng);

        // The output buffers are reused across runs, as in a frame loop, so
        // the timings measure interpolation rather than page faults.
        mesh::TriangleMesh result;
        double checksum = 0.0;
        std::vector<double> samples;
        samples.reserve(static_cast<std::size_t>(iterations));
        for (std::size_t run = 0; run < factors.size(); ++run)
        {
            const auto started = std::chrono::steady_clock::now();
            mesh::interpolate_mesh_into(a, b, factors[run], result);
            const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - started;
            checksum += result.vertices.front().x();
            if (run >= static_cast<std::size_t>(bench_warmup_iterations))
                samples.push_back(elapsed.count());
        }
        if (!std::isfinite(checksum))
            warn("bench: non-finite interpolation result");

        double mean = 0.0;
        for (const double s : samples)
            mean += s;
        mean /= static_cast<double>(samples.size());
        double variance = 0.0;
        for (const double s : samples)
            variance += (s - mean) * (s - mean);
        variance /= static_cast<double>(samples.size() - 1);
        report.rows.push_back({count, mean, std::sqrt(variance), iterations});
    }
    return report;
}

std::string format_bench_table(const BenchReport& report)
{
    std::ostringstream out;
    out << std::setw(10) << "vertices" << std::setw(12) << "mean_ms" << std::setw(12) << "std_ms" << std::setw(8)
        << "iters" << "\n";
    out << std::fixed;
    for (const auto& row : report.rows)
    {
        out << std::setw(10) << row.vertices << std::setw(12) << std::setprecision(4) << row.mean_ms
            << std::setw(12) << row.std_ms << std::setw(8) << row.iterations << "\n";
    }
    return out.str();
}

std::string format_bench_csv(const BenchReport& report)
{
    std::ostringstream out;
    out << "vertices,mean_ms,std_ms,iters\n";
    out << std::setprecision(6) << std::fixed;
    for (const auto& row : report.rows)
        out << row.vertices << "," << row.mean_ms << "," << row.std_ms << "," << row.iterations << "\n";
    return out.str();
}

} /* namespace pipeline */
} /* namespace facemorph */
