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

#include <iosfwd>
#include <string>
#include <vector>

namespace gmf::cli
{

enum ExitCode : int
{
    exit_ok = 0,
    exit_input_error = 1,
    exit_numerical_failure = 2,
    exit_max_iter = 3,
};

/// `a:b` (inclusive) or a comma list of integers.
std::vector<int> parse_int_grid(const std::string& text);

/// Comma list of reals.
std::vector<double> parse_real_grid(const std::string& text);

/// Thread count from the flag, falling back to GMF_THREADS, then 1.
int thread_setting(int flag_value, bool flag_given);

/// Runs the `gmf` command line and returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gmf::cli
