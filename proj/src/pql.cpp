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

#include "gmf/pql.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gmf/error.hpp"

namespace gmf
{

namespace
{

// Scaled residuals (y - mu) / phi_j at observed cells, 0 elsewhere.
MatrixXd scaled_residuals(const ResponseData& data, const ModelParams& params,
                          const MatrixXd& mu)
{
    MatrixXd r(data.n(), data.m());
    for (Index j = 0; j < data.m(); ++j)
    {
        for (Index i = 0; i < data.n(); ++i)
        {
            r(i, j) = data.mask(i, j) ? (data.y(i, j) - mu(i, j)) / params.phi(j) : 0.0;
        }
    }
    return r;
}

// Column sums of the data term, added in column order so the result does not
// depend on how columns were distributed over threads.
double data_term_from_eta(const ResponseData& data, const ModelParams& params,
                          const MatrixXd& eta, WorkPool* pool)
{
    std::vector<double> partial(static_cast<std::size_t>(data.m()), 0.0);
    parallel_for(pool, data.m(), [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
        for (Index j = begin; j < end; ++j)
        {
            double sum = 0.0;
            for (Index i = 0; i < data.n(); ++i)
            {
                if (!data.mask(i, j)) continue;
                const double e = eta(i, j);
                sum += data.y(i, j) * e - cumulant(data.family, e);
            }
            partial[static_cast<std::size_t>(j)] = -sum / params.phi(j);
        }
    });
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

void sign_fix_columns(MatrixXd& vectors)
{
    for (Index k = 0; k < vectors.cols(); ++k)
    {
        const double scale = vectors.col(k).cwiseAbs().maxCoeff();
        for (Index r = 0; r < vectors.rows(); ++r)
        {
            if (std::abs(vectors(r, k)) > 1e-12 * scale)
            {
                if (vectors(r, k) < 0.0) vectors.col(k) *= -1.0;
                break;
            }
        }
    }
}

// Moves the column mean of U into the intercepts.
void center_scores(ModelParams& params)
{
    if (params.rank() == 0 || params.u.rows() == 0) return;
    const VectorXd mean = params.u.colwise().mean().transpose();
    params.u.rowwise() -= mean.transpose();
    params.beta0 += params.lambda.transpose() * mean;
}

}  // namespace

MatrixXd fixed_offset(const ResponseData& data, const ModelParams& params)
{
    MatrixXd offset = data.x * params.b;
    offset.rowwise() += params.beta0.transpose();
    return offset;
}

MatrixXd linear_predictor(const ResponseData& data, const ModelParams& params)
{
    check_shapes(data, params);
    MatrixXd eta = fixed_offset(data, params);
    if (params.rank() > 0) eta.noalias() += params.u * params.lambda;
    if (data.family.kind != FamilyKind::gaussian_identity)
    {
        eta = eta.cwiseMax(-eta_clamp).cwiseMin(eta_clamp);
    }
    return eta;
}

MatrixXd mean_matrix(Family family, const MatrixXd& eta)
{
    return eta.unaryExpr([family](double e) { return link_inverse(family, e); });
}

MatrixXd masked_variance(const ResponseData& data, const MatrixXd& mu)
{
    MatrixXd v(data.n(), data.m());
    for (Index j = 0; j < data.m(); ++j)
    {
        for (Index i = 0; i < data.n(); ++i)
        {
            v(i, j) = data.mask(i, j) ? variance(data.family, mu(i, j)) : 0.0;
        }
    }
    return v;
}

WorkingState working_state(const ResponseData& data, const ModelParams& params,
                           double gamma_u, double gamma_lambda, WorkPool* pool)
{
    WorkingState state;
    state.eta = linear_predictor(data, params);
    state.mu.resize(data.n(), data.m());
    state.w.resize(data.n(), data.m());
    parallel_for(pool, data.m(), [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
        for (Index j = begin; j < end; ++j)
        {
            for (Index i = 0; i < data.n(); ++i)
            {
                const double mu = link_inverse(data.family, state.eta(i, j));
                state.mu(i, j) = mu;
                state.w(i, j) =
                    data.mask(i, j) ? variance(data.family, mu) / params.phi(j) : 0.0;
            }
        }
    });
    state.objective = data_term_from_eta(data, params, state.eta, pool)
        + pql_penalty(params, gamma_u, gamma_lambda);
    if (!std::isfinite(state.objective))
    {
        throw Error(ErrorCode::numerical_overflow, "objective is not finite");
    }
    return state;
}

double pql_data_term(const ResponseData& data, const ModelParams& params, WorkPool* pool)
{
    return data_term_from_eta(data, params, linear_predictor(data, params), pool);
}

double pql_saturated_data_term(const ResponseData& data, const VectorXd& phi)
{
    double total = 0.0;
    for (Index j = 0; j < data.m(); ++j)
    {
        double column = 0.0;
        for (Index i = 0; i < data.n(); ++i)
        {
            if (data.mask(i, j)) column += saturated_kernel(data.family, data.y(i, j));
        }
        total -= column / phi(j);
    }
    return total;
}

double pql_penalty(const ModelParams& params, double gamma_u, double gamma_lambda)
{
    return 0.5 * gamma_u * params.u.squaredNorm() + 0.5 * gamma_lambda * params.lambda.squaredNorm();
}

double pql_objective(const ResponseData& data, const ModelParams& params, double gamma_u,
                     double gamma_lambda, WorkPool* pool)
{
    const double value =
        pql_data_term(data, params, pool) + pql_penalty(params, gamma_u, gamma_lambda);
    if (!std::isfinite(value))
    {
        throw Error(ErrorCode::numerical_overflow, "objective is not finite");
    }
    return value;
}

MatrixXd grad_u(const ResponseData& data, const ModelParams& params, double gamma_u)
{
    return grad_u(data, params, mean_matrix(data.family, linear_predictor(data, params)),
                  gamma_u);
}

MatrixXd grad_u(const ResponseData& data, const ModelParams& params, const MatrixXd& mu,
                double gamma_u)
{
    const MatrixXd r = scaled_residuals(data, params, mu);
    MatrixXd g = gamma_u * params.u;
    if (params.rank() > 0) g.noalias() -= r * params.lambda.transpose();
    return g;
}

CoefGradient grad_coef(const ResponseData& data, const ModelParams& params,
                       double gamma_lambda)
{
    return grad_coef(data, params, mean_matrix(data.family, linear_predictor(data, params)),
                     gamma_lambda);
}

CoefGradient grad_coef(const ResponseData& data, const ModelParams& params, const MatrixXd& mu,
                       double gamma_lambda)
{
    const MatrixXd r = scaled_residuals(data, params, mu);
    CoefGradient g;
    g.beta0 = -r.colwise().sum().transpose();
    g.b = -(data.x.transpose() * r);
    g.lambda = gamma_lambda * params.lambda;
    if (params.rank() > 0) g.lambda.noalias() -= params.u.transpose() * r;
    return g;
}

MatrixXd hess_u_full(const MatrixXd& lambda, const VectorXd& w_row, const VectorXd& phi,
                     double gamma_u)
{
    const Index p = lambda.rows();
    MatrixXd h = MatrixXd::Zero(p, p);
    for (Index j = 0; j < lambda.cols(); ++j)
    {
        const double wj = w_row(j) / phi(j);
        for (Index a = 0; a < p; ++a)
        {
            for (Index b = 0; b < p; ++b)
            {
                h(a, b) += wj * lambda(a, j) * lambda(b, j);
            }
        }
    }
    h.diagonal().array() += gamma_u;
    return h;
}

VectorXd hess_diag_u(const MatrixXd& lambda, const VectorXd& v_row, const VectorXd& phi,
                     double gamma_u)
{
    const Index p = lambda.rows();
    VectorXd h = VectorXd::Zero(p);
    for (Index j = 0; j < lambda.cols(); ++j)
    {
        const double wj = v_row(j) / phi(j);
        for (Index a = 0; a < p; ++a)
        {
            h(a) += wj * lambda(a, j) * lambda(a, j);
        }
    }
    h.array() += gamma_u;
    return h;
}

MatrixXd coef_fisher_block(const MatrixXd& design, const VectorXd& v_col, double phi_j,
                           double gamma)
{
    const Index k = design.cols();
    MatrixXd h = MatrixXd::Zero(k, k);
    for (Index i = 0; i < design.rows(); ++i)
    {
        const double wi = v_col(i) / phi_j;
        for (Index a = 0; a < k; ++a)
        {
            for (Index b = 0; b < k; ++b)
            {
                h(a, b) += wi * design(i, a) * design(i, b);
            }
        }
    }
    h.diagonal().array() += gamma;
    return h;
}

VectorXd hess_diag_coef(const MatrixXd& design, const VectorXd& v_col, double phi_j,
                        double gamma)
{
    const Index k = design.cols();
    VectorXd h = VectorXd::Zero(k);
    for (Index i = 0; i < design.rows(); ++i)
    {
        const double wi = v_col(i) / phi_j;
        for (Index a = 0; a < k; ++a)
        {
            h(a) += wi * design(i, a) * design(i, a);
        }
    }
    h.array() += gamma;
    return h;
}

MatrixXd augmented_covariates(const ResponseData& data)
{
    MatrixXd design(data.n(), 1 + data.d());
    design.col(0).setOnes();
    design.rightCols(data.d()) = data.x;
    return design;
}

double laplace_logdet(const MatrixXd& lambda, const VectorXd& w_row, const VectorXd& phi)
{
    if (lambda.rows() == 0) return 0.0;
    const Eigen::LLT<MatrixXd> llt(hess_u_full(lambda, w_row, phi, 1.0));
    const MatrixXd& l = llt.matrixLLT();
    return l.diagonal().array().log().sum();
}

ModelParams identifiability_transform(const ModelParams& params)
{
    const Index p = params.rank();
    ModelParams out = params;
    if (p == 0) return out;
    const Index n = params.u.rows();
    if (n <= p)
    {
        throw Error(ErrorCode::degenerate_latent,
                    "identifiability needs more rows (" + std::to_string(n)
                        + ") than latent dimensions (" + std::to_string(p) + ")");
    }
    center_scores(out);

    const MatrixXd cov = (out.u.transpose() * out.u) / static_cast<double>(n - 1);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
    {
        throw Error(ErrorCode::degenerate_latent, "eigendecomposition of Cov(U) failed");
    }
    // Descending eigenvalues, eigenvector signs fixed for determinism.
    const VectorXd values = eig.eigenvalues().reverse();
    MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
    sign_fix_columns(vectors);
    if (!(values(p - 1) > 1e-12 * std::max(values(0), 1e-300)))
    {
        throw Error(ErrorCode::degenerate_latent,
                    "latent scores are rank deficient (smallest variance "
                        + std::to_string(values(p - 1)) + ")");
    }
    const VectorXd root = values.cwiseSqrt();
    const MatrixXd whitening = vectors * root.cwiseInverse().asDiagonal();
    const MatrixXd u0 = out.u * whitening;
    const MatrixXd lambda0 = root.asDiagonal() * (vectors.transpose() * out.lambda);

    // lambda0 = Q R with R upper trapezoidal: Lambda <- R, U <- U0 Q.
    const Eigen::HouseholderQR<MatrixXd> qr(lambda0);
    MatrixXd q = qr.householderQ();
    MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index k = 0; k < std::min(p, r.cols()); ++k)
    {
        if (r(k, k) < 0.0)
        {
            r.row(k) *= -1.0;
            q.col(k) *= -1.0;
        }
    }
    out.lambda = r;
    out.u = u0 * q;
    return out;
}

ModelParams balance_factors(const ModelParams& params, double gamma_u, double gamma_lambda)
{
    if (!(gamma_u > 0.0 && gamma_lambda > 0.0))
    {
        throw Error(ErrorCode::invalid_argument, "balancing needs both penalties positive");
    }
    const Index p = params.rank();
    ModelParams out = params;
    if (p == 0) return out;
    center_scores(out);

    // U Lambda = (Qu Ru)(Ql Rl)' with a p x p core; its SVD gives the balanced
    // factors without forming the n x m product.
    const Eigen::HouseholderQR<MatrixXd> qr_u(out.u);
    const Eigen::HouseholderQR<MatrixXd> qr_l(out.lambda.transpose());
    const Index ku = std::min(out.u.rows(), p);
    const Index kl = std::min(out.lambda.cols(), p);
    const MatrixXd qu = qr_u.householderQ() * MatrixXd::Identity(out.u.rows(), ku);
    const MatrixXd ql = qr_l.householderQ() * MatrixXd::Identity(out.lambda.cols(), kl);
    const MatrixXd ru = qr_u.matrixQR().topRows(ku).triangularView<Eigen::Upper>();
    const MatrixXd rl = qr_l.matrixQR().topRows(kl).triangularView<Eigen::Upper>();
    const Eigen::JacobiSVD<MatrixXd> svd(ru * rl.transpose(),
                                         Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd& s = svd.singularValues();
    const double c = std::pow(gamma_lambda / gamma_u, 0.25);
    VectorXd root = VectorXd::Zero(p);
    root.head(s.size()) = s.cwiseSqrt();

    MatrixXd u_new = MatrixXd::Zero(out.u.rows(), p);
    MatrixXd l_new = MatrixXd::Zero(p, out.lambda.cols());
    const Index r = s.size();
    u_new.leftCols(r) = qu * svd.matrixU().leftCols(r) * (c * root.head(r)).asDiagonal();
    l_new.topRows(r) = (root.head(r) / c).asDiagonal() * (ql * svd.matrixV().leftCols(r)).transpose();
    for (Index k = 0; k < r; ++k)
    {
        Index arg = 0;
        l_new.row(k).cwiseAbs().maxCoeff(&arg);
        if (l_new(k, arg) < 0.0)
        {
            l_new.row(k) *= -1.0;
            u_new.col(k) *= -1.0;
        }
    }
    out.u = u_new;
    out.lambda = l_new;
    return out;
}

ModelParams normalize_factors(const ModelParams& params, double gamma_u, double gamma_lambda)
{
    if (gamma_u > 0.0 && gamma_lambda > 0.0)
    {
        return balance_factors(params, gamma_u, gamma_lambda);
    }
    return identifiability_transform(params);
}

}  // namespace gmf
