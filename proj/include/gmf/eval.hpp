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
#include <optional>
#include <vector>

#include "gmf/data.hpp"
#include "gmf/fit.hpp"

namespace gmf
{

/// Sum over the cells in `mask` of unit_deviance(y, mu) / phi_j. The
/// saturated model shares the fitted dispersions.
double deviance(const ResponseData& data, const MatrixXd& mu_hat, const VectorXd& phi_hat,
                const Mask& mask);

/// Intercept-only null means: the column mean of y over the cells in
/// `mask`, moved into the interior of the mean domain.
VectorXd null_means(const ResponseData& data, const Mask& mask);

/// 1 - D(fit) / D(null). Throws undefined_fraction when D(null) = 0.
double null_deviance_fraction(const ResponseData& data, const MatrixXd& mu_hat,
                              const VectorXd& phi_hat, const Mask& mask);

/// min over orthogonal Omega of |lambda_true - Omega lambda_hat|_F.
double procrustes_error(const MatrixXd& lambda_true, const MatrixXd& lambda_hat);

/// |b_true - b_hat|^2 / (m d).
double coef_mse(const MatrixXd& b_true, const MatrixXd& b_hat);

/// Mann-Whitney estimate with half credit for ties.
double auc(const std::vector<bool>& labels, const std::vector<double>& scores);

/// Square roots of diag(Lambda Lambda'), sorted descending.
VectorXd scree_values(const MatrixXd& lambda);

/// Deviance over `test` divided by the number of test cells.
double mean_holdout_deviance(const ResponseData& data, const ModelParams& params,
                             const Mask& test);

/// Partitions the observed cells into `folds` test masks. Every training
/// complement keeps a cell in each row and column.
std::vector<Mask> cell_folds(const ResponseData& data, int folds, std::uint64_t seed);

struct CvRow
{
    FitConfig config;
    double mean = 0.0;
    double sd = 0.0;
    std::vector<double> fold_values; ///< NaN where the fit failed
    int failures = 0;
};

struct CvTable
{
    std::vector<CvRow> rows;
    std::size_t best = 0; ///< index of the smallest mean holdout deviance
};

/// k-fold cell-wise cross-validation of every config in `grid`. Fold x config
/// fits run on a pool of `threads` workers; each fit is single-threaded.
CvTable cross_validate(const ResponseData& data, const std::vector<FitConfig>& grid, int folds,
                       std::uint64_t seed, int threads = 1);

enum class BootstrapScheme
{
    parametric,
    row_resample,
    cell_holdout,
};

BootstrapScheme bootstrap_scheme_from_token(std::string_view token);

struct BootstrapResult
{
    std::vector<ModelParams> replicates;
    /// Per replicate: in-sample mean deviance, or mean holdout deviance for
    /// the cell-holdout scheme.
    std::vector<double> metric;
    int failures = 0;
    VectorXd beta0_sd; ///< per-coefficient empirical standard deviation
    MatrixXd b_sd;
};

/// Refits on resampled data. Replicates start from `base` (fitted here when
/// absent). Failed replicates are counted; half or more failing throws
/// bootstrap_unstable.
BootstrapResult bootstrap_refit(const ResponseData& data, const FitConfig& config,
                                BootstrapScheme scheme, int replicates, std::uint64_t seed,
                                const std::optional<ModelParams>& base = std::nullopt,
                                double holdout_fraction = 0.1, int threads = 1);

}  // namespace gmf
