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

#include "gmf/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "gmf/error.hpp"
#include "gmf/eval.hpp"
#include "gmf/fit.hpp"
#include "gmf/io.hpp"
#include "gmf/pql.hpp"
#include "gmf/simulate.hpp"

namespace gmf::cli
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

struct InputFlags
{
    std::string y_path;
    std::string x_path;
    std::string family = "poisson";
    std::string na_token = "NA";
};

struct FitFlags
{
    std::string method = "airwls";
    int rank = 2;
    double gamma_u = 1.0;
    double gamma_lambda = 0.0;
    double tol = 1e-3;
    int max_iter = 500;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string init = "svd";
};

void add_input_flags(CLI::App* cmd, InputFlags& flags, bool need_family)
{
    cmd->add_option("--y", flags.y_path, "Response CSV")->required();
    cmd->add_option("--x", flags.x_path, "Covariate CSV (no intercept column)");
    auto* family = cmd->add_option("--family", flags.family, "gaussian, poisson or bernoulli");
    if (need_family) family->required();
    cmd->add_option("--na-token", flags.na_token, "Token marking missing cells");
}

void add_fit_flags(CLI::App* cmd, FitFlags& flags)
{
    cmd->add_option("--method", flags.method, "airwls or newton");
    cmd->add_option("--gamma-u", flags.gamma_u, "Penalty on latent scores");
    cmd->add_option("--gamma-lambda", flags.gamma_lambda, "Penalty on loadings");
    cmd->add_option("--tol", flags.tol, "Relative objective tolerance");
    cmd->add_option("--max-iter", flags.max_iter, "Iteration cap");
    cmd->add_option("--seed", flags.seed, "Random seed");
    cmd->add_option("--threads", flags.threads, "Worker threads (0 = all)");
    cmd->add_option("--init", flags.init, "Starting point: svd or random");
}

ResponseData read_data(const InputFlags& flags, std::optional<Family> family = std::nullopt)
{
    const CsvMatrix y = load_csv_matrix(flags.y_path, flags.na_token);
    MatrixXd x(y.values.rows(), 0);
    if (!flags.x_path.empty())
    {
        const CsvMatrix xs = load_csv_matrix(flags.x_path, flags.na_token);
        if (!xs.mask.all())
        {
            throw Error(ErrorCode::invalid_argument, "covariates must not contain missing cells");
        }
        x = xs.values;
    }
    return make_response_data(y.values, y.mask, x,
                              family ? *family : family_from_token(flags.family));
}

FitConfig make_config(const FitFlags& flags, int threads)
{
    FitConfig config;
    config.method = method_from_token(flags.method);
    config.rank = flags.rank;
    config.gamma_u = flags.gamma_u;
    config.gamma_lambda = flags.gamma_lambda;
    config.tol = flags.tol;
    config.max_iter = flags.max_iter;
    config.seed = flags.seed;
    config.threads = threads;
    config.init = init_from_token(flags.init);
    return config;
}

MatrixXd mask_to_matrix(const Mask& mask)
{
    return mask.cast<double>().matrix();
}

Mask matrix_to_mask(const CsvMatrix& csv)
{
    return csv.mask && (csv.values.array() != 0.0);
}

fs::path default_report_path(const fs::path& model_path)
{
    fs::path report = model_path;
    report.replace_extension(".report.json");
    return report;
}

std::string config_label(const FitConfig& config)
{
    std::ostringstream label;
    label << "rank=" << config.rank << " gamma_u=" << config.gamma_u
          << " gamma_lambda=" << config.gamma_lambda;
    return label.str();
}

int exit_for_report(const FitReport& report)
{
    if (report.numerical_failure) return exit_numerical_failure;
    return report.converged ? exit_ok : exit_max_iter;
}

ResponseData data_for_model(const InputFlags& flags, Family family)
{
    return read_data(flags, family);
}

}  // namespace

std::vector<int> parse_int_grid(const std::string& text)
{
    std::vector<int> out;
    const auto colon = text.find(':');
    try
    {
        if (colon != std::string::npos)
        {
            std::size_t used_a = 0;
            std::size_t used_b = 0;
            const std::string a = text.substr(0, colon);
            const std::string b = text.substr(colon + 1);
            const int lo = std::stoi(a, &used_a);
            const int hi = std::stoi(b, &used_b);
            if (used_a != a.size() || used_b != b.size() || hi < lo) throw std::invalid_argument(text);
            for (int v = lo; v <= hi; ++v) out.push_back(v);
            return out;
        }
        std::stringstream stream(text);
        std::string item;
        while (std::getline(stream, item, ','))
        {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        }
    }
    catch (const std::logic_error&)
    {
        throw Error(ErrorCode::invalid_argument, "cannot parse integer grid '" + text + "'");
    }
    if (out.empty()) throw Error(ErrorCode::invalid_argument, "empty grid '" + text + "'");
    return out;
}

std::vector<double> parse_real_grid(const std::string& text)
{
    std::vector<double> out;
    std::stringstream stream(text);
    std::string item;
    try
    {
        while (std::getline(stream, item, ','))
        {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        }
    }
    catch (const std::logic_error&)
    {
        throw Error(ErrorCode::invalid_argument, "cannot parse real grid '" + text + "'");
    }
    if (out.empty()) throw Error(ErrorCode::invalid_argument, "empty grid '" + text + "'");
    return out;
}

int thread_setting(int flag_value, bool flag_given)
{
    int requested = 1;
    if (flag_given)
    {
        requested = flag_value;
    }
    else if (const char* env = std::getenv("GMF_THREADS"); env != nullptr && *env != '\0')
    {
        try
        {
            requested = std::stoi(env);
        }
        catch (const std::logic_error&)
        {
            throw Error(ErrorCode::invalid_argument, "GMF_THREADS is not an integer");
        }
    }
    if (requested < 0) throw Error(ErrorCode::invalid_argument, "thread count must be >= 0");
    return resolve_thread_count(requested);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Generalized matrix factorization by penalized quasi-likelihood", "gmf"};
    app.require_subcommand(1);

    // fit
    InputFlags fit_in;
    FitFlags fit_flags;
    std::string fit_out;
    std::string fit_report;
    double holdout_fraction = 0.0;
    std::string holdout_out;
    double filter_min_positive_value = 0.0;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a model");
    add_input_flags(fit_cmd, fit_in, true);
    add_fit_flags(fit_cmd, fit_flags);
    fit_cmd->add_option("--rank", fit_flags.rank, "Latent dimension (>= 1)")->required();
    fit_cmd->add_option("--out", fit_out, "Model JSON")->required();
    fit_cmd->add_option("--report", fit_report, "Fit report JSON (default: <out>.report.json)");
    fit_cmd->add_option("--holdout-fraction", holdout_fraction,
                        "Hold out this fraction of observed cells");
    fit_cmd->add_option("--holdout-out", holdout_out, "CSV of the held-out cells (1 = held out)");
    fit_cmd->add_option("--filter-min-positive", filter_min_positive_value,
                        "Drop rows and columns with a lower fraction of non-zero responses");

    // predict
    std::string predict_model;
    std::string predict_x;
    std::string predict_out;
    std::string predict_eta;
    auto* predict_cmd = app.add_subcommand("predict", "Write fitted means");
    predict_cmd->add_option("--model", predict_model, "Model JSON")->required();
    predict_cmd->add_option("--x", predict_x, "Covariate CSV used for the fit");
    predict_cmd->add_option("--out", predict_out, "Mean CSV")->required();
    predict_cmd->add_option("--link-scale", predict_eta, "Also write linear predictors here");

    // eval
    InputFlags eval_in;
    std::string eval_model;
    std::string eval_mask;
    std::string eval_out;
    auto* eval_cmd = app.add_subcommand("eval", "Deviance metrics of a model against data");
    add_input_flags(eval_cmd, eval_in, false);
    eval_cmd->add_option("--model", eval_model, "Model JSON")->required();
    eval_cmd->add_option("--mask", eval_mask, "CSV of cells to evaluate (1 = include)");
    eval_cmd->add_option("--out", eval_out, "Metrics JSON (default: stdout)");

    // cv
    InputFlags cv_in;
    FitFlags cv_flags;
    std::string grid_rank;
    std::string grid_gamma;
    int folds = 5;
    std::string cv_out;
    auto* cv_cmd = app.add_subcommand("cv", "Cell-wise k-fold cross-validation over a grid");
    add_input_flags(cv_cmd, cv_in, true);
    add_fit_flags(cv_cmd, cv_flags);
    cv_cmd->add_option("--rank", cv_flags.rank, "Working rank for gamma grids");
    cv_cmd->add_option("--grid-rank", grid_rank, "Ranks, as a:b or a comma list");
    cv_cmd->add_option("--grid-gamma", grid_gamma,
                       "Equal penalties gamma_u = gamma_lambda, comma list");
    cv_cmd->add_option("--folds", folds, "Number of folds");
    cv_cmd->add_option("--out", cv_out, "CV table CSV")->required();

    // simulate
    SimulationSpec sim;
    std::string sim_family = "poisson";
    std::string sim_dir;
    std::string sigma_x_path;
    std::string sigma_lambda_path;
    auto* sim_cmd = app.add_subcommand("simulate", "Draw a synthetic dataset");
    sim_cmd->add_option("--n", sim.n, "Rows");
    sim_cmd->add_option("--m", sim.m, "Columns");
    sim_cmd->add_option("--rank", sim.p, "True latent dimension");
    sim_cmd->add_option("--d", sim.d, "Covariates");
    sim_cmd->add_option("--family", sim_family, "gaussian, poisson or bernoulli");
    sim_cmd->add_option("--intercept", sim.intercept, "Common intercept");
    sim_cmd->add_option("--seed", sim.seed, "Random seed");
    sim_cmd->add_option("--sigma-x", sigma_x_path, "Covariate covariance CSV (d x d)");
    sim_cmd->add_option("--sigma-lambda", sigma_lambda_path, "Loading covariance CSV (p x p)");
    sim_cmd->add_option("--out-dir", sim_dir, "Directory for y.csv, x.csv, truth.json")
        ->required();

    // scree
    std::string scree_model;
    std::string scree_out;
    auto* scree_cmd = app.add_subcommand("scree", "Write sorted scree values");
    scree_cmd->add_option("--model", scree_model, "Model JSON")->required();
    scree_cmd->add_option("--out", scree_out, "CSV (default: stdout)");

    // bootstrap
    InputFlags boot_in;
    FitFlags boot_flags;
    std::string boot_scheme = "parametric";
    int boot_replicates = 20;
    std::string boot_out;
    auto* boot_cmd = app.add_subcommand("bootstrap", "Refit on resampled data");
    add_input_flags(boot_cmd, boot_in, true);
    add_fit_flags(boot_cmd, boot_flags);
    boot_cmd->add_option("--rank", boot_flags.rank, "Latent dimension (>= 1)")->required();
    boot_cmd->add_option("--scheme", boot_scheme, "parametric, row-resample or cell-holdout");
    boot_cmd->add_option("--replicates", boot_replicates, "Number of replicates");
    boot_cmd->add_option("--out", boot_out, "Per-coefficient sd CSV")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e, out, err);
        err << app.help();
        return exit_input_error;
    }

    try
    {
        if (fit_cmd->parsed())
        {
            if (fit_flags.rank < 1) throw Error(ErrorCode::invalid_argument, "rank >= 1 required");
            const int threads = thread_setting(fit_flags.threads, fit_cmd->count("--threads") > 0);
            ResponseData data = read_data(fit_in);
            json extra = json::object();
            if (fit_cmd->count("--filter-min-positive") > 0)
            {
                FilteredData filtered = filter_min_positive(data, filter_min_positive_value);
                extra["kept_rows"] = filtered.kept_rows;
                extra["kept_cols"] = filtered.kept_cols;
                data = std::move(filtered.data);
            }
            ResponseData train = data;
            std::optional<Mask> test;
            if (fit_cmd->count("--holdout-fraction") > 0)
            {
                auto [train_mask, test_mask] = holdout_split(data, holdout_fraction, fit_flags.seed);
                train = with_mask(data, train_mask);
                test = test_mask;
                if (!holdout_out.empty()) write_csv_matrix(holdout_out, mask_to_matrix(test_mask));
            }
            const FitResult result = fit(train, make_config(fit_flags, threads));
            save_model(result.params, result.report, fit_out);
            json report = report_to_json(result.report);
            report.update(extra);
            if (test && !result.report.numerical_failure)
            {
                report["holdout_mean_deviance"] =
                    mean_holdout_deviance(data, result.params, *test);
            }
            write_text(fit_report.empty() ? default_report_path(fit_out) : fs::path(fit_report),
                       report.dump(1) + "\n");
            if (result.report.numerical_failure)
            {
                err << "gmf: numerical failure: " << result.report.failure_message << "\n";
            }
            else if (!result.report.converged)
            {
                err << "gmf: reached max-iter without converging\n";
            }
            return exit_for_report(result.report);
        }

        if (predict_cmd->parsed())
        {
            const ModelFile model = load_model(predict_model);
            const Index n = model.params.n();
            const Index m = model.params.m();
            MatrixXd x(n, 0);
            if (!predict_x.empty()) x = load_csv_matrix(predict_x).values;
            const ResponseData shape{MatrixXd::Zero(n, m), full_mask(n, m), x, model.report.family};
            check_shapes(shape, model.params);
            const MatrixXd eta = linear_predictor(shape, model.params);
            write_csv_matrix(predict_out, mean_matrix(shape.family, eta));
            if (!predict_eta.empty()) write_csv_matrix(predict_eta, eta);
            return exit_ok;
        }

        if (eval_cmd->parsed())
        {
            const ModelFile model = load_model(eval_model);
            const ResponseData data = data_for_model(eval_in, model.report.family);
            if (eval_cmd->count("--family") > 0
                && family_from_token(eval_in.family) != model.report.family)
            {
                throw Error(ErrorCode::invalid_argument, "--family disagrees with the model file");
            }
            check_shapes(data, model.params);
            Mask cells = data.mask;
            if (!eval_mask.empty())
            {
                const CsvMatrix selected = load_csv_matrix(eval_mask);
                if (selected.values.rows() != data.n() || selected.values.cols() != data.m())
                {
                    throw Error(ErrorCode::shape_mismatch, "mask shape differs from the responses");
                }
                cells = cells && matrix_to_mask(selected);
            }
            const MatrixXd mu = predict_mean(data, model.params);
            json metrics = {
                {"cells", cells.count()},
                {"deviance", deviance(data, mu, model.params.phi, cells)},
                {"null_deviance_fraction", null_deviance_fraction(data, mu, model.params.phi, cells)},
            };
            if (data.family.kind == FamilyKind::bernoulli_logit)
            {
                std::vector<bool> labels;
                std::vector<double> scores;
                for (Index j = 0; j < data.m(); ++j)
                {
                    for (Index i = 0; i < data.n(); ++i)
                    {
                        if (!cells(i, j)) continue;
                        labels.push_back(data.y(i, j) > 0.5);
                        scores.push_back(mu(i, j));
                    }
                }
                metrics["auc"] = auc(labels, scores);
            }
            if (eval_out.empty())
            {
                out << metrics.dump(1) << "\n";
            }
            else
            {
                write_text(eval_out, metrics.dump(1) + "\n");
            }
            return exit_ok;
        }

        if (cv_cmd->parsed())
        {
            const int threads = thread_setting(cv_flags.threads, cv_cmd->count("--threads") > 0);
            const ResponseData data = read_data(cv_in);
            const FitConfig base = make_config(cv_flags, 1);
            std::vector<int> ranks{base.rank};
            if (!grid_rank.empty()) ranks = parse_int_grid(grid_rank);
            std::vector<FitConfig> grid;
            for (int rank : ranks)
            {
                FitConfig config = base;
                config.rank = rank;
                if (grid_gamma.empty())
                {
                    grid.push_back(config);
                    continue;
                }
                for (double gamma : parse_real_grid(grid_gamma))
                {
                    config.gamma_u = gamma;
                    config.gamma_lambda = gamma;
                    grid.push_back(config);
                }
            }
            for (const auto& config : grid)
            {
                if (config.rank < 1) throw Error(ErrorCode::invalid_argument, "rank >= 1 required");
            }
            const CvTable table = cross_validate(data, grid, folds, cv_flags.seed, threads);
            std::ostringstream csv;
            csv << std::setprecision(17);
            csv << "rank,gamma_u,gamma_lambda,mean_holdout_deviance,sd,failures\n";
            for (const auto& row : table.rows)
            {
                csv << row.config.rank << ',' << row.config.gamma_u << ','
                    << row.config.gamma_lambda << ',' << row.mean << ',' << row.sd << ','
                    << row.failures << '\n';
            }
            write_text(cv_out, csv.str());
            const CvRow& best = table.rows[table.best];
            out << "best: " << config_label(best.config) << " mean_holdout_deviance=" << best.mean
                << "\n";
            return exit_ok;
        }

        if (sim_cmd->parsed())
        {
            sim.family = family_from_token(sim_family);
            if (!sigma_x_path.empty()) sim.sigma_x = load_csv_matrix(sigma_x_path).values;
            if (!sigma_lambda_path.empty())
            {
                sim.sigma_lambda = load_csv_matrix(sigma_lambda_path).values;
            }
            const SimulatedDataset dataset = simulate_dataset(sim);
            fs::create_directories(sim_dir);
            const fs::path dir(sim_dir);
            write_csv_matrix(dir / "y.csv", dataset.data.y);
            if (dataset.data.d() > 0) write_csv_matrix(dir / "x.csv", dataset.data.x);
            FitReport truth_report;
            truth_report.family = sim.family;
            truth_report.converged = true;
            save_model(dataset.truth, truth_report, dir / "truth.json");
            return exit_ok;
        }

        if (scree_cmd->parsed())
        {
            const ModelFile model = load_model(scree_model);
            const VectorXd scree = scree_values(model.params.lambda);
            if (scree_out.empty())
            {
                out << std::setprecision(17);
                for (Index k = 0; k < scree.size(); ++k) out << scree(k) << "\n";
            }
            else
            {
                write_csv_matrix(scree_out, scree);
            }
            return exit_ok;
        }

        if (boot_cmd->parsed())
        {
            if (boot_flags.rank < 1) throw Error(ErrorCode::invalid_argument, "rank >= 1 required");
            const int threads =
                thread_setting(boot_flags.threads, boot_cmd->count("--threads") > 0);
            const ResponseData data = read_data(boot_in);
            const BootstrapResult result =
                bootstrap_refit(data, make_config(boot_flags, 1),
                                bootstrap_scheme_from_token(boot_scheme), boot_replicates,
                                boot_flags.seed, std::nullopt, 0.1, threads);
            std::ostringstream csv;
            csv << std::setprecision(17) << "parameter,row,column,sd\n";
            for (Index j = 0; j < result.beta0_sd.size(); ++j)
            {
                csv << "beta0,0," << j << ',' << result.beta0_sd(j) << '\n';
            }
            for (Index j = 0; j < result.b_sd.cols(); ++j)
            {
                for (Index k = 0; k < result.b_sd.rows(); ++k)
                {
                    csv << "b," << k << ',' << j << ',' << result.b_sd(k, j) << '\n';
                }
            }
            write_text(boot_out, csv.str());
            out << "replicates: " << result.replicates.size() << " failures: " << result.failures
                << "\n";
            return exit_ok;
        }
    }
    catch (const Error& e)
    {
        err << "gmf: " << to_string(e.code()) << ": " << e.what() << "\n";
        return e.is_numerical() ? exit_numerical_failure : exit_input_error;
    }
    catch (const std::exception& e)
    {
        err << "gmf: " << e.what() << "\n";
        return exit_input_error;
    }
    return exit_input_error;
}

}  // namespace gmf::cli
