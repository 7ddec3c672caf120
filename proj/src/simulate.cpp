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

#include "gmf/simulate.hpp"

#include <cmath>
#include <random>
#include <string>

#include "gmf/error.hpp"
#include "gmf/pql.hpp"

namespace gmf
{

namespace
{

MatrixXd cholesky_factor(const MatrixXd& sigma, Index dim, const char* name)
{
    if (sigma.size() == 0) return MatrixXd::Identity(dim, dim);
    if (sigma.rows() != dim || sigma.cols() != dim)
    {
        throw Error(ErrorCode::shape_mismatch,
                    std::string(name) + " must be " + std::to_string(dim) + "x"
                        + std::to_string(dim));
    }
    if (!sigma.isApprox(sigma.transpose(), 1e-12))
    {
        throw Error(ErrorCode::non_spd, std::string(name) + " is not symmetric");
    }
    const Eigen::LLT<MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
    {
        throw Error(ErrorCode::non_spd, std::string(name) + " is not positive definite");
    }
    return llt.matrixL();
}

}  // namespace

MatrixXd sample_responses(Family family, const MatrixXd& mu, const VectorXd& phi,
                          std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    MatrixXd y(mu.rows(), mu.cols());
    for (Index j = 0; j < mu.cols(); ++j)
    {
        for (Index i = 0; i < mu.rows(); ++i)
        {
            const double mean = mu(i, j);
            switch (family.kind)
            {
                case FamilyKind::gaussian_identity:
                    y(i, j) = mean + std::sqrt(phi(j)) * normal(rng);
                    break;
                case FamilyKind::poisson_log:
                    y(i, j) = static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
                    break;
                case FamilyKind::bernoulli_logit:
                    y(i, j) = uniform(rng) < mean ? 1.0 : 0.0;
                    break;
            }
        }
    }
    return y;
}

SimulatedDataset simulate_dataset(const SimulationSpec& spec)
{
    if (spec.n <= spec.p || spec.m < 1 || spec.p < 0 || spec.d < 0)
    {
        throw Error(ErrorCode::invalid_argument,
                    "simulation needs n > p >= 0, m >= 1 and d >= 0");
    }
    const MatrixXd lx = cholesky_factor(spec.sigma_x, spec.d, "sigma_x");
    const MatrixXd ll = cholesky_factor(spec.sigma_lambda, spec.p, "sigma_lambda");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](Index rows, Index cols) {
        MatrixXd z(rows, cols);
        for (Index c = 0; c < cols; ++c)
        {
            for (Index r = 0; r < rows; ++r) z(r, c) = normal(rng);
        }
        return z;
    };

    const MatrixXd x = draw(spec.n, spec.d) * lx.transpose();
    ModelParams truth;
    truth.lambda = ll * draw(spec.p, spec.m);
    truth.u = draw(spec.n, spec.p);
    truth.b = draw(spec.d, spec.m);
    truth.beta0 = VectorXd::Constant(spec.m, spec.intercept);
    truth.phi = VectorXd::Ones(spec.m);

    MatrixXd eta = x * truth.b + truth.u * truth.lambda;
    eta.rowwise() += truth.beta0.transpose();
    const MatrixXd mu = eta.unaryExpr(
        [&](double e) { return link_inverse(spec.family, clamp_eta(spec.family, e)); });
    const std::uint64_t response_seed = rng();
    MatrixXd y = sample_responses(spec.family, mu, truth.phi, response_seed);

    SimulatedDataset out{
        make_response_data(std::move(y), full_mask(spec.n, spec.m), x, spec.family),
        identifiability_transform(truth)};
    return out;
}

}  // namespace gmf
