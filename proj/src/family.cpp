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

#include "gmf/family.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gmf/error.hpp"

namespace gmf
{

namespace
{

// y log(y / mu) with the 0 log 0 = 0 convention.
double xlogx_ratio(double y, double mu)
{
    return y == 0.0 ? 0.0 : y * std::log(y / mu);
}

[[noreturn]] void throw_invalid_mean(Family family, double mu)
{
    throw Error(ErrorCode::invalid_mean,
                "mean " + std::to_string(mu) + " outside the domain of the "
                    + std::string(family_token(family)) + " family");
}

}  // namespace

Family family_from_token(std::string_view token)
{
    if (token == "gaussian") return gaussian_family;
    if (token == "poisson") return poisson_family;
    if (token == "bernoulli" || token == "binomial") return bernoulli_family;
    throw Error(ErrorCode::unsupported_family,
                "unsupported family '" + std::string(token) + "'");
}

std::string_view family_token(Family family) noexcept
{
    switch (family.kind)
    {
        case FamilyKind::gaussian_identity: return "gaussian";
        case FamilyKind::poisson_log: return "poisson";
        case FamilyKind::bernoulli_logit: return "bernoulli";
    }
    return "gaussian";
}

double clamp_eta(Family family, double eta) noexcept
{
    if (family.kind == FamilyKind::gaussian_identity) return eta;
    return std::clamp(eta, -eta_clamp, eta_clamp);
}

double link(Family family, double mu)
{
    switch (family.kind)
    {
        case FamilyKind::gaussian_identity:
            return mu;
        case FamilyKind::poisson_log:
            if (!(mu > 0.0)) throw_invalid_mean(family, mu);
            return std::log(mu);
        case FamilyKind::bernoulli_logit:
            if (!(mu > 0.0 && mu < 1.0)) throw_invalid_mean(family, mu);
            return std::log(mu) - std::log1p(-mu);
    }
    return mu;
}

double link_inverse(Family family, double eta) noexcept
{
    switch (family.kind)
    {
        case FamilyKind::gaussian_identity:
            return eta;
        case FamilyKind::poisson_log:
            return std::exp(eta);
        case FamilyKind::bernoulli_logit:
            if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
            {
                const double e = std::exp(eta);
                return e / (1.0 + e);
            }
    }
    return eta;
}

double variance(Family family, double mu)
{
    switch (family.kind)
    {
        case FamilyKind::gaussian_identity:
            return 1.0;
        case FamilyKind::poisson_log:
            if (!(mu > 0.0)) throw_invalid_mean(family, mu);
            return mu;
        case FamilyKind::bernoulli_logit:
            if (!(mu > 0.0 && mu < 1.0)) throw_invalid_mean(family, mu);
            return mu * (1.0 - mu);
    }
    return 1.0;
}

double cumulant(Family family, double eta) noexcept
{
    switch (family.kind)
    {
        case FamilyKind::gaussian_identity:
            return 0.5 * eta * eta;
        case FamilyKind::poisson_log:
            return std::exp(eta);
        case FamilyKind::bernoulli_logit:
            return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta)));
    }
    return 0.0;
}

bool valid_response(Family family, double y) noexcept
{
    switch (family.kind)
    {
        case FamilyKind::gaussian_identity: return std::isfinite(y);
        case FamilyKind::poisson_log: return std::isfinite(y) && y >= 0.0;
        case FamilyKind::bernoulli_logit: return y == 0.0 || y == 1.0;
    }
    return false;
}

double clamp_mean(Family family, double mu) noexcept
{
    constexpr double eps = 1e-6;
    switch (family.kind)
    {
        case FamilyKind::gaussian_identity: return mu;
        case FamilyKind::poisson_log: return std::max(mu, eps);
        case FamilyKind::bernoulli_logit: return std::clamp(mu, eps, 1.0 - eps);
    }
    return mu;
}

double unit_deviance(Family family, double y, double mu)
{
    if (!valid_response(family, y))
    {
        throw Error(ErrorCode::invalid_response,
                    "response " + std::to_string(y) + " invalid for the "
                        + std::string(family_token(family)) + " family");
    }
    switch (family.kind)
    {
        case FamilyKind::gaussian_identity:
            if (!std::isfinite(mu)) throw_invalid_mean(family, mu);
            return (y - mu) * (y - mu);
        case FamilyKind::poisson_log:
            if (mu == 0.0 && y == 0.0) return 0.0;
            if (!(mu > 0.0) || !std::isfinite(mu)) throw_invalid_mean(family, mu);
            return std::max(0.0, 2.0 * (xlogx_ratio(y, mu) - (y - mu)));
        case FamilyKind::bernoulli_logit:
            if (mu == y) return 0.0;
            if (!(mu > 0.0 && mu < 1.0)) throw_invalid_mean(family, mu);
            return y == 1.0 ? -2.0 * std::log(mu) : -2.0 * std::log1p(-mu);
    }
    return 0.0;
}

double saturated_kernel(Family family, double y) noexcept
{
    switch (family.kind)
    {
        case FamilyKind::gaussian_identity:
            return 0.5 * y * y;
        case FamilyKind::poisson_log:
            return y > 0.0 ? y * std::log(y) - y : 0.0;
        case FamilyKind::bernoulli_logit:
            // y log y + (1 - y) log(1 - y); zero for binary y, general for
            // imputed fractional cells.
            return (y > 0.0 ? y * std::log(y) : 0.0) + (y < 1.0 ? (1.0 - y) * std::log1p(-y) : 0.0);
    }
    return 0.0;
}

double estimate_dispersion(Family family,
                           const Eigen::Ref<const Eigen::VectorXd>& y_col,
                           const Eigen::Ref<const Eigen::VectorXd>& mu_col,
                           const Eigen::Ref<const Eigen::Array<bool, Eigen::Dynamic, 1>>& mask_col)
{
    if (family.dispersion_fixed()) return 1.0;
    double pearson = 0.0;
    Eigen::Index observed = 0;
    for (Eigen::Index i = 0; i < y_col.size(); ++i)
    {
        if (!mask_col(i)) continue;
        const double r = y_col(i) - mu_col(i);
        pearson += r * r / variance(family, mu_col(i));
        ++observed;
    }
    if (observed < 2)
    {
        throw Error(ErrorCode::insufficient_data,
                    "dispersion needs at least 2 observed cells, got "
                        + std::to_string(observed));
    }
    return std::max(pearson / static_cast<double>(observed), dispersion_floor);
}

}  // namespace gmf
