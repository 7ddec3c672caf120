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

#include "gmf/fit.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "gmf/airwls.hpp"
#include "gmf/error.hpp"
#include "gmf/eval.hpp"
#include "gmf/newton.hpp"
#include "gmf/pql.hpp"

namespace gmf
{

namespace
{

void refresh_dispersion(const ResponseData& data, ModelParams& params)
{
    const MatrixXd mu = predict_mean(data, params);
    for (Index j = 0; j < data.m(); ++j)
    {
        params.phi(j) = estimate_dispersion(data.family, data.y.col(j), mu.col(j),
                                            data.mask.col(j));
    }
}

// Leading singular pairs of the column-centered empirical link transform of
// Y: log(y + 1/2) for counts and logit((y + 1/2) / 2) for binary responses.
void svd_start(const ResponseData& data, ModelParams& params)
{
    const Index p = params.rank();
    MatrixXd z = MatrixXd::Zero(data.n(), data.m());
    for (Index j = 0; j < data.m(); ++j)
    {
        double sum = 0.0;
        double count = 0.0;
        for (Index i = 0; i < data.n(); ++i)
        {
            if (!data.mask(i, j)) continue;
            const double y = data.y(i, j);
            switch (data.family.kind)
            {
                case FamilyKind::gaussian_identity:
                    z(i, j) = y;
                    break;
                case FamilyKind::poisson_log:
                    z(i, j) = std::log(y + 0.5);
                    break;
                case FamilyKind::bernoulli_logit:
                    z(i, j) = link(data.family, 0.5 * (y + 0.5));
                    break;
            }
            sum += z(i, j);
            count += 1.0;
        }
        for (Index i = 0; i < data.n(); ++i)
        {
            if (data.mask(i, j)) z(i, j) -= sum / count;
        }
    }
    const Eigen::BDCSVD<MatrixXd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index k = std::min<Index>(p, svd.singularValues().size());
    const VectorXd root = svd.singularValues().head(k).cwiseSqrt();
    params.u.leftCols(k) = svd.matrixU().leftCols(k) * root.asDiagonal();
    params.lambda.topRows(k) = root.asDiagonal() * svd.matrixV().leftCols(k).transpose();
}

}  // namespace

ModelParams initial_params(const ResponseData& data, const FitConfig& config)
{
    validate(config);
    const Index p = config.rank;
    ModelParams params = zero_params(data.n(), data.m(), data.d(), p);
    for (Index j = 0; j < data.m(); ++j)
    {
        double sum = 0.0;
        double count = 0.0;
        for (Index i = 0; i < data.n(); ++i)
        {
            if (!data.mask(i, j)) continue;
            sum += data.y(i, j);
            count += 1.0;
        }
        const double mean = count > 0.0 ? sum / count : 0.0;
        params.beta0(j) = clamp_eta(data.family, link(data.family, clamp_mean(data.family, mean)));
    }
    std::mt19937_64 rng(config.seed);
    if (config.init == InitMethod::svd && p > 0) svd_start(data, params);
    std::normal_distribution<double> normal(0.0, 0.1);
    for (Index k = 0; k < p; ++k)
    {
        for (Index i = 0; i < data.n(); ++i) params.u(i, k) += normal(rng);
    }
    for (Index j = 0; j < data.m(); ++j)
    {
        for (Index k = 0; k < p; ++k) params.lambda(k, j) += normal(rng);
    }
    return params;
}

MatrixXd predict_mean(const ResponseData& data, const ModelParams& params)
{
    return mean_matrix(data.family, linear_predictor(data, params));
}

std::vector<Index> saturated_columns(const ResponseData& data, const ModelParams& params)
{
    std::vector<Index> out;
    if (data.family.kind == FamilyKind::gaussian_identity) return out;
    MatrixXd eta = fixed_offset(data, params);
    if (params.rank() > 0) eta.noalias() += params.u * params.lambda;
    for (Index j = 0; j < data.m(); ++j)
    {
        bool all_saturated = true;
        for (Index i = 0; i < data.n() && all_saturated; ++i)
        {
            if (!data.mask(i, j) || std::abs(eta(i, j)) >= eta_clamp) continue;
            const double mu = link_inverse(data.family, eta(i, j));
            if (variance(data.family, mu) > variance_floor) all_saturated = false;
        }
        if (all_saturated) out.push_back(j);
    }
    return out;
}

FitResult fit(const ResponseData& data, const FitConfig& config,
              const std::optional<ModelParams>& init)
{
    return config.method == FitMethod::airwls ? fit_airwls(data, config, init)
                                              : fit_newton(data, config, init);
}

namespace detail
{

FitResult run_fit_loop(const ResponseData& data, const FitConfig& config,
                       const std::optional<ModelParams>& init, WorkPool* pool,
                       const SweepFn& sweep)
{
    validate(config);
    validate(data);
    const auto start = std::chrono::steady_clock::now();

    FitResult result;
    FitReport& report = result.report;
    report.method = config.method;
    report.family = data.family;

    ModelParams params = init ? *init : initial_params(data, config);
    check_shapes(data, params);
    if (params.rank() != config.rank)
    {
        throw Error(ErrorCode::shape_mismatch,
                    "initial parameters have rank " + std::to_string(params.rank())
                        + " but the config asks for " + std::to_string(config.rank));
    }
    const double gu = config.gamma_u;
    const double gl = config.gamma_lambda;
    const bool refresh = config.update_dispersion && !data.family.dispersion_fixed();

    try
    {
        params = normalize_factors(params, gu, gl);
        if (refresh && !init) refresh_dispersion(data, params);
        double current = pql_objective(data, params, gu, gl, pool);
        report.objective_trace.push_back(current);

        for (int iter = 1; iter <= config.max_iter; ++iter)
        {
            double step = 1.0;
            std::optional<ModelParams> accepted;
            double accepted_value = 0.0;
            std::optional<Error> last_error;
            bool evaluated = false;
            for (int halving = 0; halving <= config.max_step_halvings; ++halving)
            {
                try
                {
                    ModelParams candidate = sweep(params, step, report.diagnostics);
                    const double value = pql_objective(data, candidate, gu, gl, pool);
                    evaluated = true;
                    if (value <= current)
                    {
                        accepted = std::move(candidate);
                        accepted_value = value;
                        break;
                    }
                }
                catch (const Error& e)
                {
                    if (!e.is_numerical()) throw;
                    last_error = e;
                }
                step *= 0.5;
                ++report.diagnostics.step_halvings;
            }
            report.iterations = iter;
            if (!accepted)
            {
                if (!evaluated && last_error) throw *last_error;
                // No tried step decreases the objective: a stationary point
                // of the safeguarded iteration.
                report.diagnostics.stationary = true;
                report.converged = true;
                break;
            }
            params = std::move(*accepted);
            report.objective_trace.push_back(accepted_value);
            if (config.observer) config.observer(iter, params);
            // Relative to the gap from the saturated fit, so constants in the
            // data term do not loosen the rule.
            const double change = std::abs(current - accepted_value);
            const double scale =
                std::abs(accepted_value - pql_saturated_data_term(data, params.phi));
            const bool done = scale > 0.0 ? change / scale < config.tol : change == 0.0;
            if (refresh)
            {
                refresh_dispersion(data, params);
                current = pql_objective(data, params, gu, gl, pool);
            }
            else
            {
                current = accepted_value;
            }
            if (done)
            {
                report.converged = true;
                break;
            }
        }
    }
    catch (const Error& e)
    {
        if (!e.is_numerical()) throw;
        report.numerical_failure = true;
        report.failure_message = e.what();
    }

    result.params = params;
    try
    {
        report.deviance = deviance(data, predict_mean(data, params), params.phi, data.mask);
    }
    catch (const Error& e)
    {
        report.deviance = std::nan("");
        report.numerical_failure = true;
        if (report.failure_message.empty()) report.failure_message = e.what();
    }
    report.scree = scree_values(params.lambda);
    report.diagnostics.saturated_columns = saturated_columns(data, params);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace detail

}  // namespace gmf
