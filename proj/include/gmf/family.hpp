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

#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace gmf
{

enum class FamilyKind
{
    gaussian_identity,
    poisson_log,
    bernoulli_logit,
};

/// Exponential-family kernel with its canonical link.
struct Family
{
    FamilyKind kind = FamilyKind::gaussian_identity;

    /// Poisson and Bernoulli have phi = 1; only the Gaussian estimates it.
    [[nodiscard]] bool dispersion_fixed() const noexcept
    {
        return kind != FamilyKind::gaussian_identity;
    }

    friend bool operator==(const Family&, const Family&) = default;
};

inline constexpr Family gaussian_family{FamilyKind::gaussian_identity};
inline constexpr Family poisson_family{FamilyKind::poisson_log};
inline constexpr Family bernoulli_family{FamilyKind::bernoulli_logit};

/// Linear predictors of the log and logit families are kept inside
/// [-eta_clamp, eta_clamp] before the inverse link is applied.
inline constexpr double eta_clamp = 30.0;

/// Parses the CLI token (`gaussian`, `poisson`, `bernoulli`).
Family family_from_token(std::string_view token);
std::string_view family_token(Family family) noexcept;

/// Clamps eta according to the family contract (identity link: unchanged).
double clamp_eta(Family family, double eta) noexcept;

double link(Family family, double mu);
double link_inverse(Family family, double eta) noexcept;
double variance(Family family, double mu);
double cumulant(Family family, double eta) noexcept;

/// Per-cell deviance 2[log f(y|y) - log f(y|mu)] at unit dispersion.
double unit_deviance(Family family, double y, double mu);

/// sup over eta of y eta - b(eta), i.e. the kernel at the saturated fit mu = y.
double saturated_kernel(Family family, double y) noexcept;

/// True when y lies in the support of the family.
bool valid_response(Family family, double y) noexcept;

/// Moves a mean into the open interior of the family's mean domain.
double clamp_mean(Family family, double mu) noexcept;

/// Pearson moment estimate over observed cells; 1 for fixed-dispersion
/// families.
double estimate_dispersion(Family family,
                           const Eigen::Ref<const Eigen::VectorXd>& y_col,
                           const Eigen::Ref<const Eigen::VectorXd>& mu_col,
                           const Eigen::Ref<const Eigen::Array<bool, Eigen::Dynamic, 1>>& mask_col);

inline constexpr double dispersion_floor = 1e-8;

/// IRWLS weights v(mu) are floored here before inverting; a cell whose
/// variance falls below it is numerically saturated.
inline constexpr double variance_floor = 1e-10;

}  // namespace gmf
