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

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "gmf/data.hpp"
#include "gmf/eval.hpp"

namespace gmf
{

struct CsvMatrix
{
    MatrixXd values; ///< NA cells hold 0
    Mask mask;
    bool had_header = false;
};

/// Reads a numeric CSV. Cells equal to `na_token` or empty are missing. A
/// first row with any non-numeric cell is treated as a header.
CsvMatrix load_csv_matrix(const std::filesystem::path& path, const std::string& na_token = "NA");

/// Writes with 17 significant digits; cells outside `mask` (when given) are
/// written as `na_token`.
void write_csv_matrix(const std::filesystem::path& path, const MatrixXd& values,
                      const Mask* mask = nullptr, const std::string& na_token = "NA");

inline constexpr int model_format_version = 1;

struct ModelFile
{
    ModelParams params;
    FitReport report;
};

nlohmann::json report_to_json(const FitReport& report);

void save_model(const ModelParams& params, const FitReport& report,
                const std::filesystem::path& path);

/// Throws version_mismatch, shape_mismatch, unsupported_family or
/// malformed_json.
ModelFile load_model(const std::filesystem::path& path);

/// Plain-text helpers used by the CLI.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gmf
