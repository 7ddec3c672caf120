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

#include <optional>

#include "gmf/fit.hpp"

namespace gmf
{

/// One penalized IRWLS step for a row's latent scores: a weighted ridge
/// regression of the working response on Lambda'. `offset_row` holds
/// beta0_j + x_i' beta_j. Returns u_old + step (ridge - u_old).
VectorXd row_update(Family family, const VectorXd& y_row,
                    const Eigen::Array<bool, Eigen::Dynamic, 1>& mask_row,
                    const MatrixXd& lambda, const VectorXd& phi, const VectorXd& offset_row,
                    const VectorXd& u_old, double gamma_u, double step);

/// One IRWLS step for a column's GLM on the design [1, X, U]. Only the
/// trailing `penalized` coefficients (the loadings) get the gamma_lambda
/// ridge. Throws column_degenerate naming `column`.
VectorXd col_update(Family family, const VectorXd& y_col,
                    const Eigen::Array<bool, Eigen::Dynamic, 1>& mask_col,
                    const MatrixXd& design, double phi_j, const VectorXd& coef_old,
                    double gamma_lambda, Index penalized, double step, Index column = 0);

/// Jacobi row sweep, Jacobi column sweep, then normalization unless
/// `normalize` is false.
ModelParams airwls_sweep(const ResponseData& data, const ModelParams& params,
                         const FitConfig& config, double step, WorkPool* pool = nullptr,
                         bool normalize = true);

/// Alternating IRWLS fit.
FitResult fit_airwls(const ResponseData& data, const FitConfig& config,
                     const std::optional<ModelParams>& init = std::nullopt);

}  // namespace gmf
