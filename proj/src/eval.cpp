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

#include "gmf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "gmf/error.hpp"
#include "gmf/parallel.hpp"
#include "gmf/pql.hpp"
#include "gmf/simulate.hpp"

namespace gmf
{

namespace
{

bool covers_rows_and_cols(const Mask& train, const Mask& original)
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

double sample_sd(const std::vector<double>& values)
{
    if (values.size() < 2) return 0.0;
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

double deviance(const ResponseData& data, const MatrixXd& mu_hat, const VectorXd& phi_hat,
                const Mask& mask)
{
    double total = 0.0;
    for (Index j = 0; j < data.m(); ++j)
    {
        double column = 0.0;
        for (Index i = 0; i < data.n(); ++i)
        {
            if (mask(i, j)) column += unit_deviance(data.family, data.y(i, j), mu_hat(i, j));
        }
        total += column / phi_hat(j);
    }
    return total;
}

VectorXd null_means(const ResponseData& data, const Mask& mask)
{
    VectorXd means = VectorXd::Zero(data.m());
    for (Index j = 0; j < data.m(); ++j)
    {
        double sum = 0.0;
        double count = 0.0;
        for (Index i = 0; i < data.n(); ++i)
        {
            if (!mask(i, j)) continue;
            sum += data.y(i, j);
            count += 1.0;
        }
        means(j) = clamp_mean(data.family, count > 0.0 ? sum / count : 0.0);
    }
    return means;
}

double null_deviance_fraction(const ResponseData& data, const MatrixXd& mu_hat,
                              const VectorXd& phi_hat, const Mask& mask)
{
    const VectorXd means = null_means(data, mask);
    const MatrixXd mu_null = means.transpose().replicate(data.n(), 1);
    const double d_null = deviance(data, mu_null, phi_hat, mask);
    if (!(d_null > 0.0))
    {
        throw Error(ErrorCode::undefined_fraction,
                    "null deviance is zero; the fraction explained is undefined");
    }
    return 1.0 - deviance(data, mu_hat, phi_hat, mask) / d_null;
}

double procrustes_error(const MatrixXd& lambda_true, const MatrixXd& lambda_hat)
{
    if (lambda_true.rows() != lambda_hat.rows() || lambda_true.cols() != lambda_hat.cols())
    {
        throw Error(ErrorCode::shape_mismatch, "Procrustes needs loadings of equal shape");
    }
    if (lambda_true.size() == 0) return 0.0;
    const Eigen::JacobiSVD<MatrixXd> svd(lambda_true * lambda_hat.transpose(),
                                         Eigen::ComputeFullU | Eigen::ComputeFullV);
    const MatrixXd omega = svd.matrixU() * svd.matrixV().transpose();
    return (lambda_true - omega * lambda_hat).norm();
}

double coef_mse(const MatrixXd& b_true, const MatrixXd& b_hat)
{
    if (b_true.rows() != b_hat.rows() || b_true.cols() != b_hat.cols())
    {
        throw Error(ErrorCode::shape_mismatch, "coefficient matrices differ in shape");
    }
    if (b_true.size() == 0) return 0.0;
    return (b_true - b_hat).squaredNorm() / static_cast<double>(b_true.size());
}

double auc(const std::vector<bool>& labels, const std::vector<double>& scores)
{
    if (labels.size() != scores.size())
    {
        throw Error(ErrorCode::shape_mismatch, "labels and scores differ in length");
    }
    const auto positives = static_cast<double>(std::count(labels.begin(), labels.end(), true));
    const double negatives = static_cast<double>(labels.size()) - positives;
    if (positives == 0.0 || negatives == 0.0)
    {
        throw Error(ErrorCode::undefined_auc, "AUC needs both classes");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Average ranks over runs of tied scores.
    double positive_rank_sum = 0.0;
    std::size_t start = 0;
    while (start < order.size())
    {
        std::size_t end = start + 1;
        while (end < order.size() && scores[order[end]] == scores[order[start]]) ++end;
        const double rank = 0.5 * static_cast<double>(start + 1 + end);
        for (std::size_t k = start; k < end; ++k)
        {
            if (labels[order[k]]) positive_rank_sum += rank;
        }
        start = end;
    }
    return (positive_rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

VectorXd scree_values(const MatrixXd& lambda)
{
    VectorXd values = lambda.rowwise().norm();
    std::sort(values.begin(), values.end(), std::greater<>());
    return values;
}

double mean_holdout_deviance(const ResponseData& data, const ModelParams& params,
                             const Mask& test)
{
    const auto count = static_cast<double>(test.count());
    if (count == 0.0) throw Error(ErrorCode::insufficient_data, "holdout mask is empty");
    return deviance(data, predict_mean(data, params), params.phi, test) / count;
}

std::vector<Mask> cell_folds(const ResponseData& data, int folds, std::uint64_t seed)
{
    if (folds < 2) throw Error(ErrorCode::invalid_argument, "cross-validation needs >= 2 folds");
    std::vector<Index> observed;
    for (Index j = 0; j < data.m(); ++j)
    {
        for (Index i = 0; i < data.n(); ++i)
        {
            if (data.mask(i, j)) observed.push_back(j * data.n() + i);
        }
    }
    if (observed.size() < static_cast<std::size_t>(folds))
    {
        throw Error(ErrorCode::split_infeasible, "fewer observed cells than folds");
    }
    std::mt19937_64 rng(seed);
    constexpr int max_attempts = 100;
    for (int attempt = 0; attempt < max_attempts; ++attempt)
    {
        std::vector<Index> cells = observed;
        for (std::size_t k = cells.size() - 1; k > 0; --k)
        {
            std::uniform_int_distribution<std::size_t> pick(0, k);
            std::swap(cells[k], cells[pick(rng)]);
        }
        std::vector<Mask> tests(static_cast<std::size_t>(folds),
                                Mask::Constant(data.n(), data.m(), false));
        for (std::size_t k = 0; k < cells.size(); ++k)
        {
            tests[k % static_cast<std::size_t>(folds)](cells[k] % data.n(), cells[k] / data.n()) =
                true;
        }
        const bool feasible = std::all_of(tests.begin(), tests.end(), [&](const Mask& test) {
            return covers_rows_and_cols(data.mask && !test, data.mask);
        });
        if (feasible) return tests;
    }
    throw Error(ErrorCode::split_infeasible,
                "no fold assignment keeps a training cell in every row and column");
}

CvTable cross_validate(const ResponseData& data, const std::vector<FitConfig>& grid, int folds,
                       std::uint64_t seed, int threads)
{
    if (grid.empty()) throw Error(ErrorCode::invalid_argument, "empty configuration grid");
    for (const auto& config : grid) validate(config);
    const std::vector<Mask> tests = cell_folds(data, folds, seed);

    const auto n_folds = static_cast<std::size_t>(folds);
    const std::size_t jobs = grid.size() * n_folds;
    std::vector<double> values(jobs, std::numeric_limits<double>::quiet_NaN());
    WorkPool pool(threads);
    pool.parallel_for(static_cast<std::ptrdiff_t>(jobs), [&](std::ptrdiff_t begin,
                                                              std::ptrdiff_t end) {
        for (std::ptrdiff_t job = begin; job < end; ++job)
        {
            const auto uj = static_cast<std::size_t>(job);
            FitConfig config = grid[uj / n_folds];
            config.threads = 1;
            const Mask& test = tests[uj % n_folds];
            try
            {
                const FitResult result = fit(with_mask(data, data.mask && !test), config);
                if (!result.report.numerical_failure)
                {
                    values[uj] = mean_holdout_deviance(data, result.params, test);
                }
            }
            catch (const Error& e)
            {
                if (!e.is_numerical()) throw;
            }
        }
    });

    CvTable table;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g)
    {
        CvRow row;
        row.config = grid[g];
        std::vector<double> ok;
        for (std::size_t f = 0; f < n_folds; ++f)
        {
            const double v = values[g * n_folds + f];
            row.fold_values.push_back(v);
            if (std::isfinite(v))
            {
                ok.push_back(v);
            }
            else
            {
                ++row.failures;
            }
        }
        row.mean = ok.empty() ? std::numeric_limits<double>::quiet_NaN()
                              : std::accumulate(ok.begin(), ok.end(), 0.0)
                / static_cast<double>(ok.size());
        row.sd = sample_sd(ok);
        if (std::isfinite(row.mean) && row.mean < best)
        {
            best = row.mean;
            table.best = g;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

BootstrapScheme bootstrap_scheme_from_token(std::string_view token)
{
    if (token == "parametric") return BootstrapScheme::parametric;
    if (token == "row-resample") return BootstrapScheme::row_resample;
    if (token == "cell-holdout") return BootstrapScheme::cell_holdout;
    throw Error(ErrorCode::invalid_argument, "unknown bootstrap scheme '" + std::string(token) + "'");
}

BootstrapResult bootstrap_refit(const ResponseData& data, const FitConfig& config,
                                BootstrapScheme scheme, int replicates, std::uint64_t seed,
                                const std::optional<ModelParams>& base, double holdout_fraction,
                                int threads)
{
    if (replicates < 1) throw Error(ErrorCode::invalid_argument, "replicates must be >= 1");
    FitConfig job_config = config;
    job_config.threads = 1;
    const ModelParams start = base ? *base : fit(data, job_config).params;
    check_shapes(data, start);
    const MatrixXd mu_hat = predict_mean(data, start);

    std::mt19937_64 seeder(seed);
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(replicates));
    for (auto& s : seeds) s = seeder();

    const auto count = static_cast<std::size_t>(replicates);
    std::vector<std::optional<ModelParams>> fits(count);
    std::vector<double> metrics(count, std::numeric_limits<double>::quiet_NaN());

    WorkPool pool(threads);
    pool.parallel_for(static_cast<std::ptrdiff_t>(count), [&](std::ptrdiff_t begin,
                                                               std::ptrdiff_t end) {
        for (std::ptrdiff_t r = begin; r < end; ++r)
        {
            const auto ur = static_cast<std::size_t>(r);
            try
            {
                switch (scheme)
                {
                    case BootstrapScheme::parametric:
                    {
                        ResponseData resampled = data;
                        resampled.y = sample_responses(data.family, mu_hat, start.phi, seeds[ur]);
                        resampled.y = resampled.mask.select(resampled.y, 0.0);
                        const FitResult result = fit(resampled, job_config, start);
                        if (result.report.numerical_failure) break;
                        metrics[ur] = result.report.deviance
                            / static_cast<double>(resampled.mask.count());
                        fits[ur] = result.params;
                        break;
                    }
                    case BootstrapScheme::row_resample:
                    {
                        std::mt19937_64 rng(seeds[ur]);
                        std::uniform_int_distribution<Index> pick(0, data.n() - 1);
                        std::vector<Index> rows(static_cast<std::size_t>(data.n()));
                        for (auto& row : rows) row = pick(rng);
                        ResponseData resampled{data.y(rows, Eigen::placeholders::all),
                                               data.mask(rows, Eigen::placeholders::all),
                                               data.x(rows, Eigen::placeholders::all),
                                               data.family};
                        validate(resampled);
                        ModelParams init = start;
                        init.u = start.u(rows, Eigen::placeholders::all);
                        const FitResult result = fit(resampled, job_config, init);
                        if (result.report.numerical_failure) break;
                        metrics[ur] = result.report.deviance
                            / static_cast<double>(resampled.mask.count());
                        fits[ur] = result.params;
                        break;
                    }
                    case BootstrapScheme::cell_holdout:
                    {
                        const auto [train, test] = holdout_split(data, holdout_fraction, seeds[ur]);
                        const FitResult result = fit(with_mask(data, train), job_config, start);
                        if (result.report.numerical_failure) break;
                        metrics[ur] = mean_holdout_deviance(data, result.params, test);
                        fits[ur] = result.params;
                        break;
                    }
                }
            }
            catch (const Error&)
            {
                // Recorded as a failed replicate below.
            }
        }
    });

    BootstrapResult out;
    for (std::size_t r = 0; r < count; ++r)
    {
        if (fits[r])
        {
            out.replicates.push_back(*fits[r]);
            out.metric.push_back(metrics[r]);
        }
        else
        {
            ++out.failures;
        }
    }
    if (2 * out.failures >= replicates && out.failures > 0)
    {
        throw Error(ErrorCode::bootstrap_unstable,
                    std::to_string(out.failures) + " of " + std::to_string(replicates)
                        + " bootstrap replicates failed");
    }
    const Index m = data.m();
    const Index d = data.d();
    out.beta0_sd = VectorXd::Zero(m);
    out.b_sd = MatrixXd::Zero(d, m);
    std::vector<double> sample(out.replicates.size());
    for (Index j = 0; j < m; ++j)
    {
        for (std::size_t r = 0; r < out.replicates.size(); ++r) sample[r] = out.replicates[r].beta0(j);
        out.beta0_sd(j) = sample_sd(sample);
        for (Index k = 0; k < d; ++k)
        {
            for (std::size_t r = 0; r < out.replicates.size(); ++r) sample[r] = out.replicates[r].b(k, j);
            out.b_sd(k, j) = sample_sd(sample);
        }
    }
    return out;
}

}  // namespace gmf
