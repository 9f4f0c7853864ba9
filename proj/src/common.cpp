/*
 * facemorph - 3D facial expression interpolation from landmark-annotated photos.
 *
 * File: src/common.cpp
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
#include "facemorph/common.hpp"

#include <iostream>
#include <mutex>

namespace facemorph {

namespace {

std::mutex warning_mutex;
WarningHandler warning_handler;

} // namespace

void warn(std::string_view message)
{
    std::scoped_lock lock(warning_mutex);
    if (warning_handler)
    {
        warning_handler(message);
        return;
    }
    std::cerr << "warning: " << message << '\n';
}

WarningHandler set_warning_handler(WarningHandler handler)
{
    std::scoped_lock lock(warning_mutex);
    std::swap(handler, warning_handler);
    return handler;
}

BlendWeights blend_weights(double t)
{
    if (t >= 0.5)
    {
        // Sterbenz: 1 - t is exact here.
        return {1.0 - t, t};
    }
    const double from = 1.0 - t;
    return {from, 1.0 - from};
}

} /* namespace facemorph */
