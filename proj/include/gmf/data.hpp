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

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gmf/family.hpp"

namespace gmf
{

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Observation mask; true marks an observed cell.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Response matrix with its mask and covariates. The intercept is not part
/// of `x`.
struct ResponseData
{
    MatrixXd y;
    Mask mask;
    MatrixXd x;
    Family family;

    [[nodiscard]] Index n() const noexcept { return y.rows(); }
    [[nodiscard]] Index m() const noexcept { return y.cols(); }
    [[nodiscard]] Index d() const noexcept { return x.cols(); }
};

/// Builds a ResponseData and checks every invariant; an empty `x` means
/// intercept only.
ResponseData make_response_data(MatrixXd y, Mask mask, MatrixXd x, Family family);

/// Throws when a shape, mask or response-domain invariant is violated.
void validate(const ResponseData& data);

/// Same data restricted to `mask` (cells outside the original mask stay
/// unobserved).
ResponseData with_mask(const ResponseData& data, const Mask& mask);

[[nodiscard]] Mask full_mask(Index rows, Index cols);

/// Per-column GLM coefficients plus the latent factorization.
struct ModelParams
{
    VectorXd beta0;  ///< m intercepts
    MatrixXd b;      ///< d x m covariate coefficients
    MatrixXd lambda; ///< p x m loadings
    MatrixXd u;      ///< n x p latent scores
    VectorXd phi;    ///< m dispersions

    [[nodiscard]] Index rank() const noexcept { return lambda.rows(); }
    [[nodiscard]] Index n() const noexcept { return u.rows(); }
    [[nodiscard]] Index m() const noexcept { return beta0.size(); }
    [[nodiscard]] Index d() const noexcept { return b.rows(); }
};

/// All-zero parameters with unit dispersions.
ModelParams zero_params(Index n, Index m, Index d, Index p);

void check_shapes(const ResponseData& data, const ModelParams& params);

enum class FitMethod
{
    airwls,
    newton,
};

std::string_view method_token(FitMethod method) noexcept;
FitMethod method_from_token(std::string_view token);

struct LineSearchConfig
{
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    double shrink = 0.5;
    int max_trials = 30;
};

enum class InitMethod
{
    /// Truncated SVD of link-scale residuals from the intercept-only fit,
    /// plus the seeded random draws.
    svd,
    /// Seeded random draws only.
    random,
};

std::string_view init_token(InitMethod init) noexcept;
InitMethod init_from_token(std::string_view token);

struct FitConfig
{
    FitMethod method = FitMethod::airwls;
    /// Latent dimension; 0 fits the fixed-effects-only model.
    int rank = 2;
    double gamma_u = 1.0;
    double gamma_lambda = 0.0;
    double tol = 1e-3;
    int max_iter = 500;
    LineSearchConfig line_search;
    std::uint64_t seed = 0;
    InitMethod init = InitMethod::svd;
    /// Size of the work pool; 1 runs everything on the calling thread.
    int threads = 1;
    /// Refresh Gaussian dispersions once per outer iteration.
    bool update_dispersion = true;
    /// Halvings of the sweep step tried before the iteration is declared
    /// stationary.
    int max_step_halvings = 10;
    /// Called with the accepted parameters after every outer iteration.
    std::function<void(int iteration, const ModelParams& params)> observer;
};

void validate(const FitConfig& config);

struct FitDiagnostics
{
    int step_halvings = 0;
    int floored_diagonals = 0;
    int line_search_fallbacks = 0;
    /// Columns whose observed cells are all numerically saturated
    /// (quasi- or complete separation).
    std::vector<Index> saturated_columns;
    /// The last sweep could not decrease the objective at any tried step.
    bool stationary = false;
};

struct FitReport
{
    FitMethod method = FitMethod::airwls;
    Family family;
    std::vector<double> objective_trace;
    double deviance = 0.0;
    int iterations = 0;
    double wall_seconds = 0.0;
    VectorXd scree;
    bool converged = false;
    bool numerical_failure = false;
    std::string failure_message;
    FitDiagnostics diagnostics;
};

/// Draws test cells uniformly without replacement from the observed cells.
/// Every row and column keeps at least one training cell.
std::pair<Mask, Mask> holdout_split(const ResponseData& data, double fraction,
                                    std::uint64_t seed);

/// Result of dropping sparse rows and columns.
struct FilteredData
{
    ResponseData data;
    std::vector<Index> kept_rows;
    std::vector<Index> kept_cols;
};

/// Drops rows and columns whose fraction of non-zero observed responses is
/// below `min_fraction`.
FilteredData filter_min_positive(const ResponseData& data, double min_fraction);

}  // namespace gmf
