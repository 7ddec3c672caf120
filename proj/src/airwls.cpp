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

#include "gmf/airwls.hpp"

#include <cmath>
#include <string>

#include "gmf/error.hpp"
#include "gmf/pql.hpp"

namespace gmf
{

namespace
{

constexpr double min_rcond = 1e-14;

// Weighted ridge solve shared by the row and column updates. `rows` holds the
// regressors, one per observation.
VectorXd irwls_step(Family family, const VectorXd& y, const Eigen::Array<bool, Eigen::Dynamic, 1>& mask,
                    const MatrixXd& rows, const VectorXd& offset, const VectorXd& phi,
                    const VectorXd& coef_old, const VectorXd& ridge, double step,
                    bool& singular)
{
    const Index k = rows.cols();
    MatrixXd h = MatrixXd::Zero(k, k);
    VectorXd rhs = VectorXd::Zero(k);
    for (Index t = 0; t < rows.rows(); ++t)
    {
        if (!mask(t)) continue;
        const double linear = rows.row(t).dot(coef_old);
        const double eta = clamp_eta(family, offset(t) + linear);
        const double mu = link_inverse(family, eta);
        const double v = std::max(variance(family, mu), variance_floor);
        const double w = v / phi(t);
        const double z = linear + (y(t) - mu) / v;
        h.selfadjointView<Eigen::Lower>().rankUpdate(rows.row(t).transpose(), w);
        rhs.noalias() += (w * z) * rows.row(t).transpose();
    }
    h.diagonal() += ridge;
    const Eigen::LDLT<MatrixXd> ldlt(h.selfadjointView<Eigen::Lower>());
    // LDLT skips zero pivots when solving, so rcond alone misses them.
    const VectorXd pivots = ldlt.vectorD().cwiseAbs();
    singular = ldlt.info() != Eigen::Success || !(ldlt.rcond() > min_rcond)
        || !(pivots.minCoeff() > min_rcond * pivots.maxCoeff());
    if (singular) return coef_old;
    const VectorXd solution = ldlt.solve(rhs);
    return coef_old + step * (solution - coef_old);
}

}  // namespace

VectorXd row_update(Family family, const VectorXd& y_row,
                    const Eigen::Array<bool, Eigen::Dynamic, 1>& mask_row,
                    const MatrixXd& lambda, const VectorXd& phi, const VectorXd& offset_row,
                    const VectorXd& u_old, double gamma_u, double step)
{
    bool singular = false;
    VectorXd out = irwls_step(family, y_row, mask_row, lambda.transpose(), offset_row, phi, u_old,
                              VectorXd::Constant(lambda.rows(), gamma_u), step, singular);
    if (singular)
    {
        throw Error(ErrorCode::ridge_singular, "latent score system is singular");
    }
    return out;
}

VectorXd col_update(Family family, const VectorXd& y_col,
                    const Eigen::Array<bool, Eigen::Dynamic, 1>& mask_col,
                    const MatrixXd& design, double phi_j, const VectorXd& coef_old,
                    double gamma_lambda, Index penalized, double step, Index column)
{
    VectorXd ridge = VectorXd::Zero(design.cols());
    ridge.tail(penalized).setConstant(gamma_lambda);
    bool singular = false;
    VectorXd out = irwls_step(family, y_col, mask_col, design, VectorXd::Zero(design.rows()),
                              VectorXd::Constant(design.rows(), phi_j), coef_old, ridge, step,
                              singular);
    if (singular)
    {
        throw Error(ErrorCode::column_degenerate,
                    "weighted normal equations of column " + std::to_string(column)
                        + " are singular");
    }
    return out;
}

ModelParams airwls_sweep(const ResponseData& data, const ModelParams& params,
                         const FitConfig& config, double step, WorkPool* pool,
                         bool normalize)
{
    const Index n = data.n();
    const Index m = data.m();
    const Index d = data.d();
    const Index p = params.rank();
    ModelParams out = params;

    if (p > 0)
    {
        const MatrixXd offset = fixed_offset(data, params);
        parallel_for(pool, n, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
            for (Index i = begin; i < end; ++i)
            {
                out.u.row(i) = row_update(data.family, data.y.row(i).transpose(),
                                          data.mask.row(i).transpose(), params.lambda,
                                          params.phi, offset.row(i).transpose(),
                                          params.u.row(i).transpose(), config.gamma_u, step)
                                   .transpose();
            }
        });
    }

    MatrixXd design(n, 1 + d + p);
    design.col(0).setOnes();
    design.middleCols(1, d) = data.x;
    design.rightCols(p) = out.u;
    parallel_for(pool, m, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
        for (Index j = begin; j < end; ++j)
        {
            VectorXd coef(1 + d + p);
            coef(0) = params.beta0(j);
            coef.segment(1, d) = params.b.col(j);
            coef.tail(p) = params.lambda.col(j);
            const VectorXd next = col_update(data.family, data.y.col(j), data.mask.col(j), design,
                                             params.phi(j), coef, config.gamma_lambda, p, step, j);
            out.beta0(j) = next(0);
            out.b.col(j) = next.segment(1, d);
            out.lambda.col(j) = next.tail(p);
        }
    });

    return normalize ? normalize_factors(out, config.gamma_u, config.gamma_lambda) : out;
}

FitResult fit_airwls(const ResponseData& data, const FitConfig& config,
                     const std::optional<ModelParams>& init)
{
    WorkPool pool(resolve_thread_count(config.threads));
    return detail::run_fit_loop(
        data, config, init, &pool,
        [&](const ModelParams& params, double step, FitDiagnostics&) {
            return airwls_sweep(data, params, config, step, &pool);
        });
}

}  // namespace gmf
