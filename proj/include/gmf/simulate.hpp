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

#include "gmf/data.hpp"

namespace gmf
{

struct SimulationSpec
{
    Index n = 100;
    Index m = 100;
    Index p = 2;
    Index d = 0;
    Family family = poisson_family;
    /// Covariance of the covariate rows (d x d); empty means identity.
    MatrixXd sigma_x;
    /// Covariance of the loading columns (p x p); empty means identity.
    MatrixXd sigma_lambda;
    /// Common intercept for every column.
    double intercept = 0.0;
    std::uint64_t seed = 0;
};

struct SimulatedDataset
{
    ResponseData data;
    /// Generating parameters after the identifiability transform.
    ModelParams truth;
};

/// Draws X rows from N(0, sigma_x), Lambda columns from N(0, sigma_lambda),
/// U and B entries from N(0, 1), then Y from the family at g^-1(eta) with
/// unit dispersion. Throws non_spd for covariances that are not positive
/// definite.
SimulatedDataset simulate_dataset(const SimulationSpec& spec);

/// Draws a response matrix from the family at the given means and
/// dispersions.
MatrixXd sample_responses(Family family, const MatrixXd& mu, const VectorXd& phi,
                          std::uint64_t seed);

}  // namespace gmf
