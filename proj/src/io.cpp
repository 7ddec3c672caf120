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

#include "gmf/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "gmf/error.hpp"

namespace gmf
{

using nlohmann::json;

namespace
{

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true)
    {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos
                                                                                : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_double(std::string_view text, double& value)
{
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    return ec == std::errc() && ptr == text.data() + text.size();
}

json matrix_to_json(const MatrixXd& m)
{
    json values = json::array();
    for (Index k = 0; k < m.size(); ++k) values.push_back(m.data()[k]);
    return values;
}

MatrixXd matrix_from_json(const json& doc, const char* key, Index rows, Index cols)
{
    if (!doc.contains(key) || !doc.at(key).is_array())
    {
        throw Error(ErrorCode::malformed_json, std::string("model file lacks array '") + key + "'");
    }
    const json& values = doc.at(key);
    if (static_cast<Index>(values.size()) != rows * cols)
    {
        throw Error(ErrorCode::shape_mismatch,
                    std::string("array '") + key + "' has " + std::to_string(values.size())
                        + " entries, expected " + std::to_string(rows) + " x "
                        + std::to_string(cols));
    }
    MatrixXd m(rows, cols);
    for (Index k = 0; k < m.size(); ++k)
    {
        if (!values[static_cast<std::size_t>(k)].is_number())
        {
            throw Error(ErrorCode::malformed_json,
                        std::string("array '") + key + "' holds a non-numeric entry");
        }
        m.data()[k] = values[static_cast<std::size_t>(k)].get<double>();
    }
    return m;
}

Index dimension(const json& doc, const char* key)
{
    if (!doc.contains(key) || !doc.at(key).is_number_integer() || doc.at(key).get<long long>() < 0)
    {
        throw Error(ErrorCode::malformed_json,
                    std::string("model file lacks a valid '") + key + "' dimension");
    }
    return static_cast<Index>(doc.at(key).get<long long>());
}

}  // namespace

CsvMatrix load_csv_matrix(const std::filesystem::path& path, const std::string& na_token)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<bool>> observed;
    std::string line;
    std::size_t width = 0;
    std::size_t line_number = 0;
    bool header = false;
    while (std::getline(in, line))
    {
        ++line_number;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        std::vector<double> values(fields.size(), 0.0);
        std::vector<bool> present(fields.size(), false);
        bool numeric = true;
        for (std::size_t k = 0; k < fields.size(); ++k)
        {
            if (fields[k].empty() || fields[k] == na_token) continue;
            if (parse_double(fields[k], values[k]))
            {
                present[k] = true;
            }
            else
            {
                numeric = false;
            }
        }
        if (rows.empty() && !header && !numeric)
        {
            header = true;
            width = fields.size();
            continue;
        }
        if (!numeric)
        {
            throw Error(ErrorCode::parse, "non-numeric cell in row " + std::to_string(line_number)
                                              + " of '" + path.string() + "'");
        }
        if (width == 0) width = fields.size();
        if (fields.size() != width)
        {
            throw Error(ErrorCode::parse, "row " + std::to_string(line_number) + " of '"
                                              + path.string() + "' has " + std::to_string(fields.size())
                                              + " cells, expected " + std::to_string(width));
        }
        rows.push_back(std::move(values));
        observed.push_back(std::move(present));
    }
    if (rows.empty()) throw Error(ErrorCode::empty_input, "'" + path.string() + "' has no data rows");

    CsvMatrix out;
    out.had_header = header;
    out.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
    out.mask.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        for (std::size_t j = 0; j < width; ++j)
        {
            out.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
            out.mask(static_cast<Index>(i), static_cast<Index>(j)) = observed[i][j];
        }
    }
    return out;
}

void write_csv_matrix(const std::filesystem::path& path, const MatrixXd& values, const Mask* mask,
                      const std::string& na_token)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    char buffer[32];
    for (Index i = 0; i < values.rows(); ++i)
    {
        for (Index j = 0; j < values.cols(); ++j)
        {
            if (j > 0) out << ',';
            if (mask != nullptr && !(*mask)(i, j))
            {
                out << na_token;
                continue;
            }
            std::snprintf(buffer, sizeof buffer, "%.17g", values(i, j));
            out << buffer;
        }
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::io, "write to '" + path.string() + "' failed");
}

json report_to_json(const FitReport& report)
{
    json trace = json::array();
    for (double v : report.objective_trace) trace.push_back(v);
    json scree = json::array();
    for (Index k = 0; k < report.scree.size(); ++k) scree.push_back(report.scree(k));
    json saturated = json::array();
    for (Index j : report.diagnostics.saturated_columns) saturated.push_back(j);
    return {
        {"method", std::string(method_token(report.method))},
        {"family", std::string(family_token(report.family))},
        {"objective_trace", trace},
        {"deviance", std::isfinite(report.deviance) ? json(report.deviance) : json(nullptr)},
        {"iterations", report.iterations},
        {"wall_seconds", report.wall_seconds},
        {"scree", scree},
        {"converged", report.converged},
        {"numerical_failure", report.numerical_failure},
        {"failure_message", report.failure_message},
        {"diagnostics",
         {{"step_halvings", report.diagnostics.step_halvings},
          {"floored_diagonals", report.diagnostics.floored_diagonals},
          {"line_search_fallbacks", report.diagnostics.line_search_fallbacks},
          {"saturated_columns", saturated},
          {"stationary", report.diagnostics.stationary}}},
    };
}

void save_model(const ModelParams& params, const FitReport& report,
                const std::filesystem::path& path)
{
    const json doc = {
        {"format", "gmf-model"},
        {"version", model_format_version},
        {"family", std::string(family_token(report.family))},
        {"n", params.n()},
        {"m", params.m()},
        {"d", params.d()},
        {"p", params.rank()},
        {"beta0", matrix_to_json(params.beta0)},
        {"b", matrix_to_json(params.b)},
        {"lambda", matrix_to_json(params.lambda)},
        {"u", matrix_to_json(params.u)},
        {"phi", matrix_to_json(params.phi)},
        {"report", report_to_json(report)},
    };
    write_text(path, doc.dump(1) + "\n");
}

ModelFile load_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
    json doc;
    try
    {
        doc = json::parse(in);
    }
    catch (const json::exception& e)
    {
        throw Error(ErrorCode::malformed_json, "'" + path.string() + "': " + e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || !doc.at("version").is_number_integer())
    {
        throw Error(ErrorCode::malformed_json, "'" + path.string() + "' is not a model file");
    }
    if (doc.at("version").get<int>() != model_format_version)
    {
        throw Error(ErrorCode::version_mismatch,
                    "model file version " + std::to_string(doc.at("version").get<int>())
                        + " is not supported (expected " + std::to_string(model_format_version)
                        + ")");
    }
    if (!doc.contains("family") || !doc.at("family").is_string())
    {
        throw Error(ErrorCode::malformed_json, "model file lacks a family tag");
    }

    ModelFile out;
    out.report.family = family_from_token(doc.at("family").get<std::string>());
    const Index n = dimension(doc, "n");
    const Index m = dimension(doc, "m");
    const Index d = dimension(doc, "d");
    const Index p = dimension(doc, "p");
    try
    {
        out.params.beta0 = matrix_from_json(doc, "beta0", m, 1);
        out.params.b = matrix_from_json(doc, "b", d, m);
        out.params.lambda = matrix_from_json(doc, "lambda", p, m);
        out.params.u = matrix_from_json(doc, "u", n, p);
        out.params.phi = matrix_from_json(doc, "phi", m, 1);

        if (doc.contains("report") && doc.at("report").is_object())
        {
            const json& r = doc.at("report");
            out.report.method = method_from_token(r.value("method", std::string("airwls")));
            for (const auto& v : r.value("objective_trace", json::array()))
            {
                out.report.objective_trace.push_back(v.get<double>());
            }
            out.report.deviance = r.contains("deviance") && r.at("deviance").is_number()
                ? r.at("deviance").get<double>()
                : std::nan("");
            out.report.iterations = r.value("iterations", 0);
            out.report.wall_seconds = r.value("wall_seconds", 0.0);
            out.report.converged = r.value("converged", false);
            out.report.numerical_failure = r.value("numerical_failure", false);
            out.report.failure_message = r.value("failure_message", std::string());
        }
    }
    catch (const json::exception& e)
    {
        throw Error(ErrorCode::malformed_json, "'" + path.string() + "': " + e.what());
    }
    out.report.scree = scree_values(out.params.lambda);
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error(ErrorCode::io, "write to '" + path.string() + "' failed");
}

}  // namespace gmf
