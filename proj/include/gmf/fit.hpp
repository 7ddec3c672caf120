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
#include <vector>

#include "gmf/data.hpp"
#include "gmf/parallel.hpp"

namespace gmf
{

struct FitResult
{
    ModelParams params;
    FitReport report;
};

/// Default starting point: intercepts at the link of the observed column
/// means, B = 0, U and Lambda drawn i.i.d. N(0, 0.01) from the seed.
ModelParams initial_params(const ResponseData& data, const FitConfig& config);

/// Fits with the method named in the config. Input problems throw; numerical
/// breakdown is reported through FitReport::numerical_failure.
FitResult fit(const ResponseData& data, const FitConfig& config,
              const std::optional<ModelParams>& init = std::nullopt);

/// Fitted means g^-1(eta) for every cell.
MatrixXd predict_mean(const ResponseData& data, const ModelParams& params);

/// Columns whose observed cells all sit on the eta clamp or where v(mu) is
/// below variance_floor: the signature of quasi- or complete separation.
std::vector<Index> saturated_columns(const ResponseData& data, const ModelParams& params);

namespace detail
{

/// One outer iteration body: moves `params` with the given step scale and
/// returns normalized parameters.
using SweepFn = std::function<ModelParams(const ModelParams& params, double step_scale,
                                          FitDiagnostics& diagnostics)>;

/// Shared outer loop: step-halving safeguard, normalization, dispersion
/// refresh and the relative-objective stopping rule.
FitResult run_fit_loop(const ResponseData& data, const FitConfig& config,
                       const std::optional<ModelParams>& init, WorkPool* pool,
                       const SweepFn& sweep);

}  // namespace detail

}  // namespace gmf
