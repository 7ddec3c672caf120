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

#include <stdexcept>
#include <string>
#include <string_view>

namespace gmf
{

enum class ErrorCode
{
    invalid_argument,
    invalid_mean,
    invalid_response,
    insufficient_data,
    parse,
    empty_input,
    io,
    version_mismatch,
    shape_mismatch,
    malformed_json,
    unsupported_family,
    split_infeasible,
    numerical_overflow,
    degenerate_latent,
    ridge_singular,
    column_degenerate,
    line_search_misuse,
    undefined_fraction,
    undefined_auc,
    bootstrap_unstable,
    non_spd,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code)
    {
    }

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

    /// True for failures caused by the numbers rather than by the inputs.
    [[nodiscard]] bool is_numerical() const noexcept;

private:
    ErrorCode code_;
};

}  // namespace gmf
