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

#include "gmf/error.hpp"

namespace gmf
{

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code)
    {
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::invalid_mean: return "invalid-mean";
        case ErrorCode::invalid_response: return "invalid-response";
        case ErrorCode::insufficient_data: return "insufficient-data";
        case ErrorCode::parse: return "parse";
        case ErrorCode::empty_input: return "empty-input";
        case ErrorCode::io: return "io";
        case ErrorCode::version_mismatch: return "version-mismatch";
        case ErrorCode::shape_mismatch: return "shape-mismatch";
        case ErrorCode::malformed_json: return "malformed-json";
        case ErrorCode::unsupported_family: return "unsupported-family";
        case ErrorCode::split_infeasible: return "split-infeasible";
        case ErrorCode::numerical_overflow: return "numerical-overflow";
        case ErrorCode::degenerate_latent: return "degenerate-latent";
        case ErrorCode::ridge_singular: return "ridge-singular";
        case ErrorCode::column_degenerate: return "column-degenerate";
        case ErrorCode::line_search_misuse: return "line-search-misuse";
        case ErrorCode::undefined_fraction: return "undefined-fraction";
        case ErrorCode::undefined_auc: return "undefined-auc";
        case ErrorCode::bootstrap_unstable: return "bootstrap-unstable";
        case ErrorCode::non_spd: return "non-spd";
    }
    return "unknown";
}

bool Error::is_numerical() const noexcept
{
    switch (code_)
    {
        case ErrorCode::numerical_overflow:
        case ErrorCode::degenerate_latent:
        case ErrorCode::ridge_singular:
        case ErrorCode::column_degenerate:
        case ErrorCode::line_search_misuse:
        case ErrorCode::bootstrap_unstable:
            return true;
        default:
            return false;
    }
}

}  // namespace gmf
