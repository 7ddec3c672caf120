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

#include <gtest/gtest.h>

#include "gmf/data.hpp"
#include "gmf/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace gmf
{
namespace
{

using test::code_of;

ResponseData dense(Index n, Index m, Family family = poisson_family)
{
    return make_response_data(MatrixXd::Ones(n, m), full_mask(n, m), MatrixXd(), family);
}

TEST(Data, MakeResponseDataValidates)
{
    const ResponseData ok = dense(3, 2);
    EXPECT_EQ(ok.d(), 0);
    EXPECT_EQ(ok.x.rows(), 3);

    Mask empty_row = full_mask(3, 2);
    empty_row.row(1).setConstant(false);
    EXPECT_EQ(code_of([&] {
                  make_response_data(MatrixXd::Ones(3, 2), empty_row, MatrixXd(), poisson_family);
              }),
              ErrorCode::insufficient_data);

    MatrixXd bad = MatrixXd::Ones(3, 2);
    bad(0, 0) = 0.5;
    EXPECT_EQ(code_of([&] { make_response_data(bad, full_mask(3, 2), MatrixXd(), bernoulli_family); }),
              ErrorCode::invalid_response);
    // Invalid values at unobserved cells are ignored.
    Mask hide = full_mask(3, 2);
    hide(0, 0) = false;
    EXPECT_NO_THROW(make_response_data(bad, hide, MatrixXd(), bernoulli_family));

    EXPECT_EQ(code_of([] {
                  make_response_data(MatrixXd::Ones(3, 2), full_mask(3, 2),
                                     MatrixXd::Constant(3, 1, 2.0), poisson_family);
              }),
              ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([] {
                  make_response_data(MatrixXd::Ones(3, 2), full_mask(2, 2), MatrixXd(),
                                     poisson_family);
              }),
              ErrorCode::shape_mismatch);
}

TEST(Data, ConfigValidation)
{
    FitConfig config;
    EXPECT_NO_THROW(validate(config));
    config.tol = 0.0;
    EXPECT_EQ(code_of([&] { validate(config); }), ErrorCode::invalid_argument);
    config = FitConfig{};
    config.line_search.wolfe_c1 = 0.95;
    EXPECT_EQ(code_of([&] { validate(config); }), ErrorCode::invalid_argument);
    config = FitConfig{};
    config.rank = -1;
    EXPECT_EQ(code_of([&] { validate(config); }), ErrorCode::invalid_argument);
    config = FitConfig{};
    config.gamma_u = -1.0;
    EXPECT_EQ(code_of([&] { validate(config); }), ErrorCode::invalid_argument);
}

TEST(Data, Tokens)
{
    EXPECT_EQ(method_from_token(method_token(FitMethod::newton)), FitMethod::newton);
    EXPECT_EQ(method_from_token("airwls"), FitMethod::airwls);
    EXPECT_EQ(init_from_token(init_token(InitMethod::random)), InitMethod::random);
    EXPECT_EQ(code_of([] { method_from_token("bfgs"); }), ErrorCode::invalid_argument);
}

TEST(Data, CheckShapes)
{
    const ResponseData data = dense(4, 3);
    EXPECT_NO_THROW(check_shapes(data, zero_params(4, 3, 0, 2)));
    EXPECT_EQ(code_of([&] { check_shapes(data, zero_params(4, 3, 1, 2)); }),
              ErrorCode::shape_mismatch);
    EXPECT_EQ(code_of([&] { check_shapes(data, zero_params(5, 3, 0, 2)); }),
              ErrorCode::shape_mismatch);
}

TEST(Data, HoldoutExamples)
{
    const ResponseData data = dense(10, 10);
    const auto [train, test] = holdout_split(data, 0.1, 7);
    EXPECT_EQ(test.count(), 10);
    EXPECT_FALSE((train && test).any());
    EXPECT_TRUE(((train || test) == data.mask).all());

    const auto [train2, test2] = holdout_split(data, 0.1, 7);
    EXPECT_TRUE((train2 == train).all());
    EXPECT_TRUE((test2 == test).all());

    EXPECT_EQ(code_of([] { holdout_split(dense(2, 2), 0.9, 1); }), ErrorCode::split_infeasible);
    EXPECT_EQ(code_of([&] { holdout_split(data, 1.0, 1); }), ErrorCode::invalid_argument);
}

TEST(Data, HoldoutMaskAlgebra)
{
    for (std::uint64_t seed = 0; seed < 30; ++seed)
    {
        const auto inst = oracle::random_instance(poisson_family, 12, 9, 0, 2, 0.2, seed);
        const double fraction = 0.05 + 0.01 * static_cast<double>(seed);
        const auto [train, test] = holdout_split(inst.data, fraction, seed);
        EXPECT_EQ(train.count() + test.count(), inst.data.mask.count());
        EXPECT_FALSE((train && test).any());
        EXPECT_FALSE((test && !inst.data.mask).any());
        for (Index i = 0; i < train.rows(); ++i) EXPECT_TRUE(train.row(i).any());
        for (Index j = 0; j < train.cols(); ++j) EXPECT_TRUE(train.col(j).any());
    }
}

TEST(Data, WithMaskIntersects)
{
    const auto inst = oracle::random_instance(poisson_family, 6, 5, 0, 1, 0.3, 4);
    const Mask other = full_mask(6, 5);
    EXPECT_TRUE((with_mask(inst.data, other).mask == inst.data.mask).all());
}

TEST(Data, FilterMinPositive)
{
    MatrixXd y = MatrixXd::Zero(4, 3);
    y.col(0) << 1, 1, 0, 0;
    y.col(1) << 1, 0, 0, 1;
    y.col(2) << 0, 0, 0, 1;  // 25% positive
    y(2, 0) = 1;             // row 2: one positive of three
    const ResponseData data = make_response_data(y, full_mask(4, 3), MatrixXd(), bernoulli_family);
    const FilteredData kept = filter_min_positive(data, 0.3);
    EXPECT_EQ(kept.kept_cols, (std::vector<Index>{0, 1}));
    EXPECT_EQ(kept.kept_rows, (std::vector<Index>{0, 1, 2, 3}));
    EXPECT_EQ(kept.data.m(), 2);
    EXPECT_EQ(code_of([&] { filter_min_positive(data, 0.99); }), ErrorCode::empty_input);
}

}  // namespace
}  // namespace gmf
