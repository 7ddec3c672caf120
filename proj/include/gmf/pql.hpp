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

#include "gmf/data.hpp"
#include "gmf/parallel.hpp"

namespace gmf
{

/// Linear predictors, means and iterative weights at the current parameters.
struct WorkingState
{
    MatrixXd eta; ///< clamped linear predictors
    MatrixXd mu;
    MatrixXd w;   ///< v(mu) / phi at observed cells, 0 elsewhere
    double objective = 0.0;
};

/// eta = 1 beta0' + X B + U Lambda, clamped per family.
MatrixXd linear_predictor(const ResponseData& data, const ModelParams& params);

/// The fixed-effect part 1 beta0' + X B (unclamped).
MatrixXd fixed_offset(const ResponseData& data, const ModelParams& params);

/// Inverse link applied elementwise.
MatrixXd mean_matrix(Family family, const MatrixXd& eta);

WorkingState working_state(const ResponseData& data, const ModelParams& params,
                           double gamma_u, double gamma_lambda, WorkPool* pool = nullptr);

/// -sum over observed cells of (y eta - b(eta)) / phi_j.
double pql_data_term(const ResponseData& data, const ModelParams& params,
                     WorkPool* pool = nullptr);

/// The data term at the saturated fit (mu = y at every observed cell). The
/// data term minus this value is half the scaled deviance.
double pql_saturated_data_term(const ResponseData& data, const VectorXd& phi);

double pql_penalty(const ModelParams& params, double gamma_u, double gamma_lambda);

/// Penalized quasi-likelihood criterion (minimized). Throws
/// numerical_overflow when the value is not finite.
double pql_objective(const ResponseData& data, const ModelParams& params, double gamma_u,
                     double gamma_lambda, WorkPool* pool = nullptr);

/// Gradient of the objective with respect to the latent scores (n x p).
MatrixXd grad_u(const ResponseData& data, const ModelParams& params, double gamma_u);

/// Same, with the means already computed.
MatrixXd grad_u(const ResponseData& data, const ModelParams& params, const MatrixXd& mu,
                double gamma_u);

/// Per-column gradients of the objective for intercepts, covariate
/// coefficients and loadings.
struct CoefGradient
{
    VectorXd beta0;  ///< m
    MatrixXd b;      ///< d x m
    MatrixXd lambda; ///< p x m
};

CoefGradient grad_coef(const ResponseData& data, const ModelParams& params,
                       double gamma_lambda);
CoefGradient grad_coef(const ResponseData& data, const ModelParams& params, const MatrixXd& mu,
                       double gamma_lambda);

/// Lambda diag(w / phi) Lambda' + gamma_u I. `w_row` holds v(mu) with
/// unobserved cells set to 0.
MatrixXd hess_u_full(const MatrixXd& lambda, const VectorXd& w_row, const VectorXd& phi,
                     double gamma_u);

/// Diagonal of hess_u_full, i.e. (Lambda o Lambda) v / phi + gamma_u.
VectorXd hess_diag_u(const MatrixXd& lambda, const VectorXd& v_row, const VectorXd& phi,
                     double gamma_u);

/// Per-column Fisher block D' diag(v / phi_j) D + gamma I for design D.
MatrixXd coef_fisher_block(const MatrixXd& design, const VectorXd& v_col, double phi_j,
                           double gamma);

/// Diagonal of coef_fisher_block, i.e. (D' o D') v / phi_j + gamma.
VectorXd hess_diag_coef(const MatrixXd& design, const VectorXd& v_col, double phi_j,
                        double gamma);

/// Column design [1, X] for the unpenalized block.
MatrixXd augmented_covariates(const ResponseData& data);

/// Variance function at the means, zeroed at unobserved cells.
MatrixXd masked_variance(const ResponseData& data, const MatrixXd& mu);

/// 1/2 log det(Lambda diag(w / phi) Lambda' + I): the Laplace term that
/// PQL drops. Reported as a diagnostic only.
double laplace_logdet(const MatrixXd& lambda, const VectorXd& w_row, const VectorXd& phi);

/// Rotates (U, Lambda) so that the sample covariance of U is the identity
/// and Lambda' has a lower-triangular leading block with positive diagonal.
/// The mean of U is folded into the intercepts, so eta is unchanged.
/// Throws degenerate_latent when U is rank deficient.
ModelParams identifiability_transform(const ModelParams& params);

/// Centers U and rebalances the factors so that the penalty
/// gamma_u |U|^2 + gamma_lambda |Lambda|^2 is minimal for the current
/// product U Lambda. Latent axes follow the singular vectors of U Lambda in
/// descending order. Requires both penalties positive.
ModelParams balance_factors(const ModelParams& params, double gamma_u, double gamma_lambda);

/// The per-iteration normalization used by the fitters: balance_factors
/// when both penalties are positive, identifiability_transform otherwise.
ModelParams normalize_factors(const ModelParams& params, double gamma_u, double gamma_lambda);

}  // namespace gmf
