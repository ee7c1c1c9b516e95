//
// Copyright 2026 The watermod Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "test_support.hpp"
#include "watermod/error.hpp"
#include "watermod/stats.hpp"
#include "watermod/zerobit.hpp"

namespace watermod
{
namespace
{

using testing::balanced_model;
using testing::join;

TEST(ZeroBitStep, SharpLogitsKeepTheArgmax)
{
    const LogitVector l({10, 0, 0, 0});
    const ZeroBitConfig cfg;
    for (std::uint64_t k = 1; k <= 20; ++k)
    {
        const ZeroBitStep s = zerobit_step(l, 2, WatermarkKey{k}, cfg);
        ASSERT_LT(s.p_odd, 1e-3);
        if (s.u < s.p_odd)
            continue; // vanishingly rare; the parity rule is then exercised elsewhere
        EXPECT_EQ(s.green_parity, 0);
        EXPECT_EQ(s.chosen, 0u);
        EXPECT_EQ(s.biased_logits[0], 11.0);
        EXPECT_EQ(s.biased_logits[1], 0.0);
        EXPECT_EQ(s.biased_logits[2], 1.0);
        EXPECT_EQ(s.biased_logits[3], 0.0);
    }
}

TEST(ZeroBitStep, UniformLogitsForceOddParity)
{
    const LogitVector l({0.3, 0.3, 0.3, 0.3});
    for (std::uint64_t k = 0; k < 50; ++k)
    {
        const ZeroBitStep s = zerobit_step(l, 1, WatermarkKey{k}, ZeroBitConfig{});
        EXPECT_EQ(s.p_odd, 1.0);
        EXPECT_EQ(s.green_parity, 1);
        EXPECT_EQ(s.chosen, 1u);
        EXPECT_EQ(s.biased_logits[1], 0.3 + 1.0);
        EXPECT_EQ(s.biased_logits[3], 0.3 + 1.0);
        EXPECT_EQ(s.biased_logits[0], 0.3);
    }
}

TEST(ZeroBitStep, OddBiasOvertakesCloseRunnerUp)
{
    const LogitVector l({2.0, 1.9, -5, -5});
    const ZeroBitConfig cfg;
    std::uint64_t k = 0;
    while (zerobit_step(l, 3, WatermarkKey{k}, cfg).green_parity != 1)
        ++k;
    const ZeroBitStep s = zerobit_step(l, 3, WatermarkKey{k}, cfg);
    EXPECT_EQ(s.biased_logits[1], 1.9 + 1.0);
    EXPECT_EQ(s.biased_logits[0], 2.0);
    EXPECT_EQ(s.chosen, 1u);
}

TEST(ZeroBitStep, BiasLocalityAndFluencyGuard)
{
    std::mt19937_64 rng(42);
    std::normal_distribution<double> n(0.0, 3.0);
    const ZeroBitConfig cfg;
    for (int i = 0; i < 500; ++i)
    {
        std::vector<double> s(2 + i % 63);
        for (double &x : s)
            x = n(rng);
        const LogitVector l(s);
        const ZeroBitStep step = zerobit_step(l, static_cast<TokenId>(i), WatermarkKey{rng()}, cfg);
        const RankPermutation perm = rank_sort(l);
        std::size_t changed = 0;
        for (std::size_t t = 0; t < l.size(); ++t)
        {
            const bool green = static_cast<int>(perm.rank_of(static_cast<TokenId>(t)) % 2) == step.green_parity;
            if (green)
            {
                EXPECT_EQ(step.biased_logits[t], l[t] + cfg.delta);
                ++changed;
            }
            else
            {
                EXPECT_EQ(step.biased_logits[t], l[t]);
            }
        }
        EXPECT_TRUE(changed == l.size() / 2 || changed == (l.size() + 1) / 2);
        // One of the two top-ranked tokens is always green.
        const bool top_green = step.biased_logits[perm.at_rank(0)] != l[perm.at_rank(0)] ||
                               step.biased_logits[perm.at_rank(1)] != l[perm.at_rank(1)];
        EXPECT_TRUE(top_green);
        // Greedy keeps rank 0 or moves to the best green token.
        const std::size_t chosen_rank = perm.rank_of(step.chosen);
        EXPECT_TRUE(chosen_rank == 0 || static_cast<int>(chosen_rank % 2) == step.green_parity);
    }
}

TEST(ZeroBitConfig, Validation)
{
    ZeroBitConfig cfg;
    cfg.delta = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.delta = 1.0;
    cfg.gate.h_scale = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ZeroBitZ, Arithmetic)
{
    EXPECT_DOUBLE_EQ(zerobit_z(60, 100), 2.0);
    EXPECT_DOUBLE_EQ(zerobit_z(50, 100), 0.0);
    EXPECT_DOUBLE_EQ(zerobit_z(4, 4), 2.0);
    EXPECT_THROW(zerobit_z(0, 0), InsufficientDataError);
}

TEST(ZeroBitGenerate, EdgeCasesAndDeterminism)
{
    const ToyModel &model = balanced_model();
    const std::vector<TokenId> prompt = {11, 12, 13};
    const ZeroBitConfig cfg;
    EXPECT_TRUE(zerobit_generate(model, prompt, WatermarkKey{1}, cfg, 0).tokens.empty());
    EXPECT_THROW(zerobit_generate(model, {}, WatermarkKey{1}, cfg, 5), InvalidInputError);
    const auto a = zerobit_generate(model, prompt, WatermarkKey{5}, cfg, 64);
    const auto b = zerobit_generate(model, prompt, WatermarkKey{5}, cfg, 64);
    EXPECT_EQ(a.tokens, b.tokens);
    EXPECT_EQ(a.green_parity, b.green_parity);
    EXPECT_EQ(a.tokens.size(), 64u);
}

TEST(ZeroBitGenerate, KeysChangeTheOutput)
{
    const ToyModel &model = balanced_model();
    const auto prompts = random_prompts(100, 4, model.vocab_size(), 3);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < prompts.size(); ++i)
    {
        const auto a = zerobit_generate(model, prompts[i], WatermarkKey{2 * i + 1}, ZeroBitConfig{}, 30).tokens;
        const auto b = zerobit_generate(model, prompts[i], WatermarkKey{2 * i + 2}, ZeroBitConfig{}, 30).tokens;
        differ += a != b ? 1 : 0;
    }
    EXPECT_GE(differ, 99u);
}

TEST(ZeroBitDetect, InputErrors)
{
    const ToyModel &model = balanced_model();
    const std::vector<TokenId> seq = {1, 2, 3};
    EXPECT_THROW(zerobit_detect(model, seq, 3, WatermarkKey{1}, ZeroBitConfig{}), InsufficientDataError);
    EXPECT_THROW(zerobit_detect(model, seq, 0, WatermarkKey{1}, ZeroBitConfig{}), InvalidInputError);
    const std::vector<TokenId> bad = {1, 2, 5000};
    EXPECT_THROW(zerobit_detect(model, bad, 1, WatermarkKey{1}, ZeroBitConfig{}), InvalidInputError);
}

TEST(ZeroBitDetect, GeneratedTextIsFullyGreen)
{
    const ToyModel &model = balanced_model();
    const ZeroBitConfig cfg;
    const auto prompts = random_prompts(100, 4, model.vocab_size(), 77);
    std::size_t all_green = 0;
    for (std::size_t i = 0; i < prompts.size(); ++i)
    {
        const WatermarkKey key{0x1000 + i};
        const auto gen = zerobit_generate(model, prompts[i], key, cfg, 100);
        const auto report = zerobit_detect(model, join(prompts[i], gen.tokens), prompts[i].size(), key, cfg);
        EXPECT_EQ(report.positions, 100u);
        EXPECT_GT(report.z, 4.0);
        EXPECT_TRUE(report.watermarked);
        EXPECT_EQ(report.green_parity, gen.green_parity);
        all_green += report.green_hits == report.positions ? 1 : 0;
    }
    // delta = 1 dwarfs the gap between the two top logits of this model.
    EXPECT_EQ(all_green, 100u);
}

TEST(ZeroBitDetect, ParityRoundTripOnSmallVocabulary)
{
    ToyModelConfig mc;
    mc.vocab_size = 64;
    mc.beta = 6.0;
    const ToyModel model(mc);
    const ZeroBitConfig cfg;
    const auto prompts = random_prompts(20, 3, 64, 8);
    for (std::size_t i = 0; i < prompts.size(); ++i)
    {
        const WatermarkKey key{splitmix64(i)};
        const auto gen = zerobit_generate(model, prompts[i], key, cfg, 200);
        const auto report = zerobit_detect(model, join(prompts[i], gen.tokens), prompts[i].size(), key, cfg);
        EXPECT_EQ(report.green_parity, gen.green_parity);
    }
}

TEST(ZeroBitDetect, SeparatesFromCleanText)
{
    const ToyModel &model = balanced_model();
    CorpusConfig corpus;
    corpus.sequences = 40;
    corpus.length = 200;
    const ZeroBitBench bench = zerobit_bench(model, corpus, ZeroBitConfig{});
    const double min_marked = *std::min_element(bench.watermarked_z.begin(), bench.watermarked_z.end());
    const double max_clean = *std::max_element(bench.clean_z.begin(), bench.clean_z.end());
    EXPECT_GT(min_marked - max_clean, 0.0);
    EXPECT_EQ(bench.roc.auroc, 1.0);
}

} // namespace
} // namespace watermod
