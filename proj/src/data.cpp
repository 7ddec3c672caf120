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

#include "gmf/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "gmf/error.hpp"

namespace gmf
{

namespace
{

std::string dims(Index rows, Index cols)
{
    return std::to_string(rows) + "x" + std::to_string(cols);
}

bool train_covers_all(const Mask& train, const Mask& original)
{
    for (Index i = 0; i < original.rows(); ++i)
    {
        if (original.row(i).any() && !train.row(i).any()) return false;
    }
    for (Index j = 0; j < original.cols(); ++j)
    {
        if (original.col(j).any() && !train.col(j).any()) return false;
    }
    return true;
}

}  // namespace

Mask full_mask(Index rows, Index cols)
{
    return Mask::Constant(rows, cols, true);
}

ResponseData make_response_data(MatrixXd y, Mask mask, MatrixXd x, Family family)
{
    if (x.size() == 0) x.resize(y.rows(), 0);
    ResponseData data{std::move(y), std::move(mask), std::move(x), family};
    validate(data);
    return data;
}

void validate(const ResponseData& data)
{
    if (data.n() == 0 || data.m() == 0)
    {
        throw Error(ErrorCode::empty_input, "response matrix is empty");
    }
    if (data.mask.rows() != data.n() || data.mask.cols() != data.m())
    {
        throw Error(ErrorCode::shape_mismatch,
                    "mask is " + dims(data.mask.rows(), data.mask.cols())
                        + " but responses are " + dims(data.n(), data.m()));
    }
    if (data.x.rows() != data.n())
    {
        throw Error(ErrorCode::shape_mismatch,
                    "covariates have " + std::to_string(data.x.rows())
                        + " rows, responses have " + std::to_string(data.n()));
    }
    for (Index i = 0; i < data.n(); ++i)
    {
        if (!data.mask.row(i).any())
        {
            throw Error(ErrorCode::insufficient_data,
                        "row " + std::to_string(i) + " has no observed cell");
        }
    }
    for (Index j = 0; j < data.m(); ++j)
    {
        if (!data.mask.col(j).any())
        {
            throw Error(ErrorCode::insufficient_data,
                        "column " + std::to_string(j) + " has no observed cell");
        }
        for (Index i = 0; i < data.n(); ++i)
        {
            if (data.mask(i, j) && !valid_response(data.family, data.y(i, j)))
            {
                throw Error(ErrorCode::invalid_response,
                            "response at (" + std::to_string(i) + ", " + std::to_string(j)
                                + ") is invalid for the "
                                + std::string(family_token(data.family)) + " family");
            }
        }
    }
    if (!data.x.allFinite())
    {
        throw Error(ErrorCode::invalid_argument, "covariates contain non-finite values");
    }
    if (data.n() > 1)
    {
        for (Index k = 0; k < data.d(); ++k)
        {
            if (data.x.col(k).maxCoeff() == data.x.col(k).minCoeff())
            {
                throw Error(ErrorCode::invalid_argument,
                            "covariate column " + std::to_string(k)
                                + " is constant; the intercept is added automatically");
            }
        }
    }
}

ResponseData with_mask(const ResponseData& data, const Mask& mask)
{
    ResponseData out = data;
    out.mask = data.mask && mask;
    return out;
}

ModelParams zero_params(Index n, Index m, Index d, Index p)
{
    ModelParams params;
    params.beta0 = VectorXd::Zero(m);
    params.b = MatrixXd::Zero(d, m);
    params.lambda = MatrixXd::Zero(p, m);
    params.u = MatrixXd::Zero(n, p);
    params.phi = VectorXd::Ones(m);
    return params;
}

void check_shapes(const ResponseData& data, const ModelParams& params)
{
    const Index p = params.rank();
    const bool ok = params.beta0.size() == data.m() && params.phi.size() == data.m()
        && params.b.rows() == data.d() && params.b.cols() == data.m()
        && params.lambda.cols() == data.m() && params.u.rows() == data.n()
        && params.u.cols() == p;
    if (!ok)
    {
        throw Error(ErrorCode::shape_mismatch,
                    "parameters (n=" + std::to_string(params.u.rows())
                        + ", m=" + std::to_string(params.beta0.size())
                        + ", d=" + std::to_string(params.b.rows())
                        + ", p=" + std::to_string(p) + ") do not match data "
                        + dims(data.n(), data.m()) + " with d=" + std::to_string(data.d()));
    }
}

std::string_view method_token(FitMethod method) noexcept
{
    return method == FitMethod::airwls ? "airwls" : "newton";
}

FitMethod method_from_token(std::string_view token)
{
    if (token == "airwls") return FitMethod::airwls;
    if (token == "newton") return FitMethod::newton;
    throw Error(ErrorCode::invalid_argument, "unknown method '" + std::string(token) + "'");
}

std::string_view init_token(InitMethod init) noexcept
{
    return init == InitMethod::svd ? "svd" : "random";
}

InitMethod init_from_token(std::string_view token)
{
    if (token == "svd") return InitMethod::svd;
    if (token == "random") return InitMethod::random;
    throw Error(ErrorCode::invalid_argument, "unknown init '" + std::string(token) + "'");
}

void validate(const FitConfig& config)
{
    auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_argument, what); };
    if (config.rank < 0) fail("rank must be non-negative");
    if (!(config.gamma_u >= 0.0) || !(config.gamma_lambda >= 0.0))
    {
        fail("penalties must be non-negative");
    }
    if (!(config.tol > 0.0)) fail("tol must be positive");
    if (config.max_iter < 1) fail("max_iter must be at least 1");
    const auto& ls = config.line_search;
    if (!(ls.wolfe_c1 > 0.0 && ls.wolfe_c1 < ls.wolfe_c2 && ls.wolfe_c2 < 1.0))
    {
        fail("line search needs 0 < c1 < c2 < 1");
    }
    if (!(ls.shrink > 0.0 && ls.shrink < 1.0)) fail("line search shrink must be in (0, 1)");
    if (ls.max_trials < 1) fail("line search needs at least one trial");
    if (config.threads < 1) fail("threads must be at least 1");
    if (config.max_step_halvings < 0) fail("max_step_halvings must be non-negative");
}

std::pair<Mask, Mask> holdout_split(const ResponseData& data, double fraction,
                                    std::uint64_t seed)
{
    if (!(fraction > 0.0 && fraction < 1.0))
    {
        throw Error(ErrorCode::invalid_argument, "holdout fraction must be in (0, 1)");
    }
    std::vector<Index> observed;
    for (Index j = 0; j < data.m(); ++j)
    {
        for (Index i = 0; i < data.n(); ++i)
        {
            if (data.mask(i, j)) observed.push_back(j * data.n() + i);
        }
    }
    const auto n_test = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(observed.size())));
    if (n_test == 0)
    {
        throw Error(ErrorCode::split_infeasible, "holdout fraction selects no cell");
    }

    std::mt19937_64 rng(seed);
    constexpr int max_attempts = 100;
    for (int attempt = 0; attempt < max_attempts && n_test < observed.size(); ++attempt)
    {
        // Partial Fisher-Yates: the first n_test entries form the test set.
        std::vector<Index> cells = observed;
        for (std::size_t k = 0; k < n_test; ++k)
        {
            std::uniform_int_distribution<std::size_t> pick(k, cells.size() - 1);
            std::swap(cells[k], cells[pick(rng)]);
        }
        Mask test = Mask::Constant(data.n(), data.m(), false);
        for (std::size_t k = 0; k < n_test; ++k)
        {
            test(cells[k] % data.n(), cells[k] / data.n()) = true;
        }
        Mask train = data.mask && !test;
        if (train_covers_all(train, data.mask)) return {train, test};
    }
    throw Error(ErrorCode::split_infeasible,
                "could not hold out " + std::to_string(n_test)
                    + " cells while keeping a training cell in every row and column");
}

FilteredData filter_min_positive(const ResponseData& data, double min_fraction)
{
    auto positive_fraction = [&](auto&& ys, auto&& ms) {
        double positives = 0.0;
        double observed = 0.0;
        for (Index k = 0; k < ys.size(); ++k)
        {
            if (!ms(k)) continue;
            observed += 1.0;
            if (ys(k) != 0.0) positives += 1.0;
        }
        return observed > 0.0 ? positives / observed : 0.0;
    };
    FilteredData out;
    for (Index i = 0; i < data.n(); ++i)
    {
        if (positive_fraction(data.y.row(i), data.mask.row(i)) >= min_fraction)
        {
            out.kept_rows.push_back(i);
        }
    }
    for (Index j = 0; j < data.m(); ++j)
    {
        if (positive_fraction(data.y.col(j), data.mask.col(j)) >= min_fraction)
        {
            out.kept_cols.push_back(j);
        }
    }
    if (out.kept_rows.empty() || out.kept_cols.empty())
    {
        throw Error(ErrorCode::empty_input, "filter removed every row or column");
    }
    MatrixXd y = data.y(out.kept_rows, out.kept_cols);
    Mask mask = data.mask(out.kept_rows, out.kept_cols);
    MatrixXd x = data.x(out.kept_rows, Eigen::placeholders::all);
    out.data = make_response_data(std::move(y), std::move(mask), std::move(x), data.family);
    return out;
}

}  // namespace gmf
