/*
 * Copyright 2026 The gmf Authors
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

#include <functional>
#include <optional>

#include "gmf/fit.hpp"

namespace gmf
{

/// Value of the objective along a search line, with its slope when cheap to
/// evaluate.
struct LinePoint
{
    double value = 0.0;
    std::optional<double> slope;
};

struct LineSearchResult
{
    double step = 0.0;
    double value = 0.0;
    int trials = 0;
    bool curvature_satisfied = false;
    /// No trial met the full conditions; the step is the best Armijo trial,
    /// or the smallest trial when none satisfied Armijo.
    bool fallback = false;
};

/// Backtracking search over s = s0, s0 shrink, s0 shrink^2, ... returning the
/// largest tried step that satisfies the Armijo and curvature conditions.
/// Throws line_search_misuse when slope0 is not negative.
LineSearchResult wolfe_line_search(const std::function<LinePoint(double)>& line, double value0,
                                   double slope0, const LineSearchConfig& config,
                                   double initial_step = 1.0);

/// Y with unobserved cells replaced by the fitted means.
MatrixXd impute_missing(const ResponseData& data, const ModelParams& params);

struct SweepReport
{
    double u_step = 0.0;
    double coef_step = 0.0;
    bool stationary = false;
    int floored_diagonals = 0;
    int line_search_fallbacks = 0;
};

inline constexpr double hessian_floor = 1e-10;

/// One diagonal quasi-Newton sweep: a U block step, then a coefficient block
/// step, each with its own line search, then normalization unless
/// `normalize` is false. `max_step` caps both line searches.
std::pair<ModelParams, SweepReport> newton_sweep(const ResponseData& data,
                                                 const ModelParams& params,
                                                 const FitConfig& config,
                                                 WorkPool* pool = nullptr,
                                                 double max_step = 1.0,
                                                 bool normalize = true);

FitResult fit_newton(const ResponseData& data, const FitConfig& config,
                     const std::optional<ModelParams>& init = std::nullopt);

}  // namespace gmf
