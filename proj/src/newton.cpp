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

#include "gmf/newton.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "gmf/error.hpp"
#include "gmf/pql.hpp"

namespace gmf
{

namespace
{

// Data term and its derivative along eta(s) = eta0 + s delta, summed per
// column in index order.
LinePoint data_line(const ResponseData& data, const VectorXd& phi, const MatrixXd& eta0,
                    const MatrixXd& delta, double s, WorkPool* pool)
{
    const bool clamped = data.family.kind != FamilyKind::gaussian_identity;
    std::vector<double> values(static_cast<std::size_t>(data.m()), 0.0);
    std::vector<double> slopes(static_cast<std::size_t>(data.m()), 0.0);
    parallel_for(pool, data.m(), [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
        for (Index j = begin; j < end; ++j)
        {
            double value = 0.0;
            double slope = 0.0;
            for (Index i = 0; i < data.n(); ++i)
            {
                if (!data.mask(i, j)) continue;
                const double raw = eta0(i, j) + s * delta(i, j);
                const double eta = clamp_eta(data.family, raw);
                const double y = data.y(i, j);
                value += y * eta - cumulant(data.family, eta);
                if (!clamped || std::abs(raw) < eta_clamp)
                {
                    slope += (y - link_inverse(data.family, eta)) * delta(i, j);
                }
            }
            values[static_cast<std::size_t>(j)] = -value / phi(j);
            slopes[static_cast<std::size_t>(j)] = -slope / phi(j);
        }
    });
    LinePoint point;
    double slope = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j)
    {
        point.value += values[j];
        slope += slopes[j];
    }
    point.slope = slope;
    return point;
}

// Elementwise -g / h with the floor applied to h.
MatrixXd scaled_direction(const MatrixXd& g, MatrixXd h, int& floored)
{
    for (Index k = 0; k < h.size(); ++k)
    {
        if (!(h(k) > hessian_floor))
        {
            h(k) = hessian_floor;
            ++floored;
        }
    }
    return -g.cwiseQuotient(h);
}

struct BlockStep
{
    double step = 0.0;
    bool fallback = false;
};

// Line search for a block whose move changes eta by s * delta and whose
// penalty is gamma/2 |x + s dx|^2.
BlockStep search_block(const ResponseData& data, const VectorXd& phi, const MatrixXd& eta0,
                       const MatrixXd& delta, const MatrixXd& x, const MatrixXd& dx, double gamma,
                       double value0, double slope0, const LineSearchConfig& config,
                       double max_step, WorkPool* pool)
{
    const double xx = x.squaredNorm();
    const double xd = (x.array() * dx.array()).sum();
    const double dd = dx.squaredNorm();
    const auto line = [&](double s) {
        LinePoint point = data_line(data, phi, eta0, delta, s, pool);
        point.value += 0.5 * gamma * (xx + 2.0 * s * xd + s * s * dd);
        point.slope = *point.slope + gamma * (xd + s * dd);
        if (!std::isfinite(point.value)) point.value = std::numeric_limits<double>::infinity();
        return point;
    };
    const LineSearchResult result = wolfe_line_search(line, value0, slope0, config, max_step);
    return {result.step, result.fallback};
}

}  // namespace

LineSearchResult wolfe_line_search(const std::function<LinePoint(double)>& line, double value0,
                                   double slope0, const LineSearchConfig& config,
                                   double initial_step)
{
    if (!(slope0 < 0.0))
    {
        throw Error(ErrorCode::line_search_misuse, "search direction is not a descent direction");
    }
    LineSearchResult best;
    bool have_best = false;
    LineSearchResult last;
    double s = initial_step;
    for (int trial = 1; trial <= config.max_trials; ++trial)
    {
        const LinePoint point = line(s);
        last = {s, point.value, trial, false, true};
        const bool armijo =
            std::isfinite(point.value) && point.value <= value0 + config.wolfe_c1 * s * slope0;
        if (armijo)
        {
            if (!point.slope || std::abs(*point.slope) <= config.wolfe_c2 * std::abs(slope0))
            {
                return {s, point.value, trial, point.slope.has_value(), false};
            }
            // Still descending: shorter steps cannot do better on curvature.
            if (*point.slope < 0.0) return {s, point.value, trial, false, false};
            if (!have_best || point.value < best.value)
            {
                best = {s, point.value, trial, false, true};
                have_best = true;
            }
        }
        s *= config.shrink;
    }
    if (have_best)
    {
        best.trials = config.max_trials;
        return best;
    }
    return last;
}

MatrixXd impute_missing(const ResponseData& data, const ModelParams& params)
{
    const MatrixXd mu = predict_mean(data, params);
    return data.mask.select(data.y, mu);
}

std::pair<ModelParams, SweepReport> newton_sweep(const ResponseData& data,
                                                 const ModelParams& params,
                                                 const FitConfig& config, WorkPool* pool,
                                                 double max_step, bool normalize)
{
    const double gu = config.gamma_u;
    const double gl = config.gamma_lambda;
    SweepReport report;
    ModelParams out = params;
    bool moved = false;

    // Dense copy with unobserved cells imputed: their scores vanish exactly.
    ResponseData dense{MatrixXd(), full_mask(data.n(), data.m()), data.x, data.family};

    if (params.rank() > 0)
    {
        const MatrixXd eta0_clamped = linear_predictor(data, out);
        const MatrixXd mu = mean_matrix(data.family, eta0_clamped);
        dense.y = data.mask.select(data.y, mu);
        const MatrixXd g = grad_u(dense, out, mu, gu);
        if (g.cwiseAbs().maxCoeff() > 0.0)
        {
            const MatrixXd v = masked_variance(data, mu);
            MatrixXd h(data.n(), out.rank());
            for (Index i = 0; i < data.n(); ++i)
            {
                h.row(i) = hess_diag_u(out.lambda, v.row(i).transpose(), out.phi, gu).transpose();
            }
            const MatrixXd dir = scaled_direction(g, h, report.floored_diagonals);
            const double slope0 = (g.array() * dir.array()).sum();
            MatrixXd eta0 = fixed_offset(data, out);
            eta0.noalias() += out.u * out.lambda;
            const MatrixXd delta = dir * out.lambda;
            const double value0 = pql_objective(data, out, gu, gl, pool);
            const BlockStep step = search_block(data, out.phi, eta0, delta, out.u, dir, gu,
                                                value0 - 0.5 * gl * out.lambda.squaredNorm(),
                                                slope0, config.line_search, max_step, pool);
            report.u_step = step.step;
            report.line_search_fallbacks += step.fallback ? 1 : 0;
            out.u += step.step * dir;
            moved = true;
        }
    }

    {
        const MatrixXd mu = predict_mean(data, out);
        dense.y = data.mask.select(data.y, mu);
        const CoefGradient g = grad_coef(dense, out, mu, gl);
        const double gmax = std::max({g.beta0.size() ? g.beta0.cwiseAbs().maxCoeff() : 0.0,
                                      g.b.size() ? g.b.cwiseAbs().maxCoeff() : 0.0,
                                      g.lambda.size() ? g.lambda.cwiseAbs().maxCoeff() : 0.0});
        if (gmax > 0.0)
        {
            const MatrixXd v = masked_variance(data, mu);
            const MatrixXd fixed_design = augmented_covariates(data);
            const Index d = data.d();
            const Index p = out.rank();
            VectorXd h_beta0(data.m());
            MatrixXd h_b(d, data.m());
            MatrixXd h_lambda(p, data.m());
            for (Index j = 0; j < data.m(); ++j)
            {
                const VectorXd hf = hess_diag_coef(fixed_design, v.col(j), out.phi(j), 0.0);
                h_beta0(j) = hf(0);
                h_b.col(j) = hf.tail(d);
                h_lambda.col(j) = hess_diag_coef(out.u, v.col(j), out.phi(j), gl);
            }
            const MatrixXd d_beta0 =
                scaled_direction(g.beta0, h_beta0, report.floored_diagonals);
            const MatrixXd d_b = scaled_direction(g.b, h_b, report.floored_diagonals);
            const MatrixXd d_lambda = scaled_direction(g.lambda, h_lambda, report.floored_diagonals);
            const double slope0 = (g.beta0.array() * d_beta0.array()).sum()
                + (g.b.array() * d_b.array()).sum() + (g.lambda.array() * d_lambda.array()).sum();

            MatrixXd eta0 = fixed_offset(data, out);
            if (p > 0) eta0.noalias() += out.u * out.lambda;
            MatrixXd delta = data.x * d_b;
            delta.rowwise() += d_beta0.col(0).transpose();
            if (p > 0) delta.noalias() += out.u * d_lambda;
            const double value0 = pql_objective(data, out, gu, gl, pool);
            const BlockStep step =
                search_block(data, out.phi, eta0, delta, out.lambda, d_lambda, gl,
                             value0 - 0.5 * gu * out.u.squaredNorm(), slope0, config.line_search,
                             max_step, pool);
            report.coef_step = step.step;
            report.line_search_fallbacks += step.fallback ? 1 : 0;
            out.beta0 += step.step * d_beta0.col(0);
            out.b += step.step * d_b;
            out.lambda += step.step * d_lambda;
            moved = true;
        }
    }

    if (!moved)
    {
        report.stationary = true;
        return {params, report};
    }
    if (!normalize) return {out, report};
    return {normalize_factors(out, gu, gl), report};
}

FitResult fit_newton(const ResponseData& data, const FitConfig& config,
                     const std::optional<ModelParams>& init)
{
    WorkPool pool(resolve_thread_count(config.threads));
    return detail::run_fit_loop(
        data, config, init, &pool,
        [&](const ModelParams& params, double step, FitDiagnostics& diagnostics) {
            auto [next, sweep] = newton_sweep(data, params, config, &pool, step);
            diagnostics.floored_diagonals += sweep.floored_diagonals;
            diagnostics.line_search_fallbacks += sweep.line_search_fallbacks;
            return next;
        });
}

}  // namespace gmf
