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

#include <random>

#include "test_support.hpp"
#include "watermod/error.hpp"
#include "watermod/multibit.hpp"
#include "watermod/stats.hpp"

namespace watermod
{
namespace
{

using testing::balanced_model;
using testing::join;

Bits bits_of(std::uint64_t v, std::size_t b)
{
    Bits out(b);
    for (std::size_t i = 0; i < b; ++i)
        out[i] = static_cast<std::uint8_t>((v >> (b - 1 - i)) & 1u);
    return out;
}

// Independent base conversion through native 64-bit arithmetic.
std::vector<Digit> oracle_digits(std::uint64_t v, std::size_t k, std::size_t n)
{
    std::vector<Digit> d(n);
    for (std::size_t i = n; i-- > 0;)
    {
        d[i] = static_cast<Digit>(v % k);
        v /= k;
    }
    return d;
}

TEST(DigitCount, CeilOfBitsOverLog2K)
{
    EXPECT_EQ(digit_count(16, 4), 8u);
    EXPECT_EQ(digit_count(16, 2), 16u);
    EXPECT_EQ(digit_count(16, 16), 4u);
    EXPECT_EQ(digit_count(16, 3), 11u); // 3^10 < 2^16 <= 3^11
    EXPECT_EQ(digit_count(5, 4), 3u);
    EXPECT_EQ(digit_count(1, 2), 1u);
    EXPECT_EQ(digit_count(64, 1u << 16), 4u);
    EXPECT_THROW(digit_count(0, 4), ConfigError);
    EXPECT_THROW(digit_count(8, 1), ConfigError);
}

TEST(PayloadEncode, Examples)
{
    EXPECT_EQ(payload_encode(Bits(16, 0), 4), std::vector<Digit>(8, 0));
    EXPECT_EQ(payload_encode(Bits(16, 1), 4), std::vector<Digit>(8, 3));
    EXPECT_EQ(payload_encode(bits_of(0x1234, 16), 4), (std::vector<Digit>{0, 1, 0, 2, 0, 3, 1, 0}));
}

TEST(PayloadEncode, ExhaustiveSixteenBit)
{
    for (std::size_t k : {2u, 3u, 4u, 16u})
    {
        const std::size_t n = digit_count(16, k);
        for (std::uint64_t v = 0; v < 65536; ++v)
        {
            const Bits bits = bits_of(v, 16);
            const auto digits = payload_encode(bits, k);
            ASSERT_EQ(digits, oracle_digits(v, k, n)) << "v=" << v << " k=" << k;
            ASSERT_EQ(payload_decode(digits, k, 16), bits);
        }
    }
}

TEST(PayloadDecode, MasksOverflowAndRejectsBadDigits)
{
    // 333 in base 4 is 63; only the low 5 bits survive.
    EXPECT_EQ(payload_decode(std::vector<Digit>{3, 3, 3}, 4, 5), Bits(5, 1));
    EXPECT_THROW(payload_decode(std::vector<Digit>{4}, 4, 2), InvalidInputError);
}

TEST(PayloadEncode, LongPayloadsRoundTrip)
{
    std::mt19937_64 rng(6);
    for (std::size_t k : {2u, 5u, 4u, 7u, 256u})
    {
        for (std::size_t b : {1u, 31u, 64u, 100u, 257u})
        {
            Bits bits(b);
            for (auto &x : bits)
                x = static_cast<std::uint8_t>(rng() & 1u);
            const auto digits = payload_encode(bits, k);
            EXPECT_EQ(digits.size(), digit_count(b, k));
            EXPECT_EQ(payload_decode(digits, k, b), bits);
        }
    }
}

TEST(Hex, ParseAndFormat)
{
    EXPECT_EQ(hex_to_bits("0xBEEF", 16), bits_of(0xBEEF, 16));
    EXPECT_EQ(hex_to_bits("beef", 16), bits_of(0xBEEF, 16));
    EXPECT_EQ(hex_to_bits("0x1", 16), bits_of(1, 16));
    EXPECT_EQ(hex_to_bits("0x00ff", 8), bits_of(0xFF, 8));
    EXPECT_EQ(hex_to_bits("0x1f", 5), bits_of(0x1F, 5));
    EXPECT_THROW(hex_to_bits("0x1FFFF", 16), ConfigError);
    EXPECT_THROW(hex_to_bits("0x2f", 5), ConfigError);
    EXPECT_THROW(hex_to_bits("0xZZ", 16), ConfigError);
    EXPECT_THROW(hex_to_bits("0x", 16), ConfigError);
    EXPECT_EQ(bits_to_hex(bits_of(0xBEEF, 16)), "0xbeef");
    EXPECT_EQ(bits_to_hex(bits_of(0, 16)), "0x0000");
    EXPECT_EQ(bits_to_hex(bits_of(0x1F, 5)), "0x1f");
    EXPECT_EQ(Payload::from_hex("0x1234", 16, 4).digits(), (std::vector<Digit>{0, 1, 0, 2, 0, 3, 1, 0}));
}

TEST(DigitPosition, ClampsUpperEdge)
{
    EXPECT_EQ(digit_position(0.99, 8), 7u);
    EXPECT_EQ(digit_position(1.0 - 0x1.0p-53, 8), 7u);
    EXPECT_EQ(digit_position(0x1.0p-53, 8), 0u);
    EXPECT_EQ(digit_position(0.5, 8), 4u);
}

TEST(MultiBitStep, SharpLogitsWithZeroDigit)
{
    MultiBitConfig cfg;
    cfg.payload = Payload(Bits(16, 0), 4);
    const MultiBitStep s = multibit_step(LogitVector({0, 9, 1, 2, 0.5, 0, 0, 0}), 4, WatermarkKey{3}, cfg);
    EXPECT_EQ(s.digit, 0u);
    EXPECT_EQ(s.chosen, 1u);
    EXPECT_EQ(s.biased_logits[1], 9 + 2.5);
}

TEST(MultiBitStep, TargetColourOvertakesTop)
{
    MultiBitConfig cfg;
    cfg.payload = Payload::from_hex("0xAAAA", 16, 4); // every digit is 2
    const LogitVector l({5, 4, 3, 2, 1, 0, -1, -2});
    const MultiBitStep s = multibit_step(l, 1, WatermarkKey{99}, cfg);
    EXPECT_EQ(s.digit, 2u);
    EXPECT_EQ(s.biased_logits[2], 5.5);
    EXPECT_EQ(s.biased_logits[6], 1.5);
    for (TokenId t : {0u, 1u, 3u, 4u, 5u, 7u})
        EXPECT_EQ(s.biased_logits[t], l[t]);
    EXPECT_EQ(s.chosen, 2u);
}

TEST(MultiBitStep, BiasLocality)
{
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n(0.0, 2.0);
    for (std::size_t k : {2u, 3u, 4u, 8u})
    {
        MultiBitConfig cfg;
        cfg.k = k;
        cfg.payload = Payload(bits_of(rng() & 0xFFFF, 16), k);
        for (int i = 0; i < 100; ++i)
        {
            std::vector<double> s(k + static_cast<std::size_t>(i));
            for (double &x : s)
                x = n(rng);
            const LogitVector l(s);
            const MultiBitStep step = multibit_step(l, static_cast<TokenId>(i), WatermarkKey{rng()}, cfg);
            EXPECT_EQ(step.digit, cfg.payload.digits()[step.position]);
            const RankPermutation perm = rank_sort(l);
            for (std::size_t t = 0; t < l.size(); ++t)
            {
                const bool target = perm.rank_of(static_cast<TokenId>(t)) % k == step.digit;
                EXPECT_EQ(step.biased_logits[t], target ? l[t] + cfg.delta : l[t]);
            }
        }
    }
}

TEST(MultiBitStep, Errors)
{
    MultiBitConfig cfg;
    cfg.k = 8;
    cfg.payload = Payload(Bits(16, 0), 8);
    EXPECT_THROW(multibit_step(LogitVector({1, 2, 3, 4}), 0, WatermarkKey{1}, cfg), ConfigError);
    cfg.k = 4; // payload still in base 8
    EXPECT_THROW(multibit_step(LogitVector({1, 2, 3, 4}), 0, WatermarkKey{1}, cfg), ConfigError);
}

TEST(MultiBitZ, Arithmetic)
{
    EXPECT_DOUBLE_EQ(multibit_z(75, 300, 4), 0.0);
    EXPECT_DOUBLE_EQ(multibit_z(150, 300, 4), 10.0);
    EXPECT_DOUBLE_EQ(multibit_z(50, 100, 2), 0.0);
    EXPECT_THROW(multibit_z(0, 0, 4), InsufficientDataError);
}

TEST(MultiBitGenerate, EdgeCasesAndDeterminism)
{
    const ToyModel &model = balanced_model();
    MultiBitConfig cfg;
    cfg.payload = Payload::from_hex("0xBEEF", 16, 4);
    const std::vector<TokenId> prompt = {100, 200};
    EXPECT_TRUE(multibit_generate(model, prompt, WatermarkKey{1}, cfg, 0).tokens.empty());
    EXPECT_THROW(multibit_generate(model, {}, WatermarkKey{1}, cfg, 4), InvalidInputError);
    const auto a = multibit_generate(model, prompt, WatermarkKey{4}, cfg, 50);
    EXPECT_EQ(a.tokens, multibit_generate(model, prompt, WatermarkKey{4}, cfg, 50).tokens);
    EXPECT_EQ(a.positions.size(), a.tokens.size());
}

TEST(MultiBitGenerate, OneDigitChangeDiverges)
{
    const ToyModel &model = balanced_model();
    MultiBitConfig a;
    a.payload = Payload::from_hex("0xBEEF", 16, 4);
    MultiBitConfig b = a;
    b.payload = Payload::from_hex("0xBEEC", 16, 4); // last digit 3 -> 0
    const auto prompts = random_prompts(100, 4, model.vocab_size(), 44);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < prompts.size(); ++i)
    {
        const WatermarkKey key{i * 31 + 7};
        differ += multibit_generate(model, prompts[i], key, a, 60).tokens !=
                          multibit_generate(model, prompts[i], key, b, 60).tokens
                      ? 1
                      : 0;
    }
    // Diverges as soon as position 7 is drawn: 1 - (7/8)^60 per run.
    EXPECT_GE(differ, 95u);
}

TEST(MultiBitRecover, RoundTripTallyAndCoverage)
{
    const ToyModel &model = balanced_model();
    MultiBitConfig cfg;
    cfg.payload = Payload::from_hex("0x1234", 16, 4);
    RecoverConfig rc;
    rc.expected = cfg.payload;
    const auto prompts = random_prompts(100, 4, model.vocab_size(), 55);
    std::size_t covered = 0;
    for (std::size_t i = 0; i < prompts.size(); ++i)
    {
        const WatermarkKey key{splitmix64(i + 1000)};
        const auto gen = multibit_generate(model, prompts[i], key, cfg, 200);
        const auto seq = join(prompts[i], gen.tokens);
        try
        {
            const MultiBitReport r = multibit_recover(model, seq, prompts[i].size(), key, rc);
            ++covered;
            EXPECT_EQ(r.tally.total(), r.positions);
            EXPECT_EQ(r.positions, 200u);
            EXPECT_EQ(r.bits, cfg.payload.bits());
            EXPECT_FALSE(r.self_referential);
            EXPECT_GT(r.z, 8.0);
            // Positions recorded by the embedder match the tally rows.
            std::vector<std::size_t> per_row(8, 0);
            for (std::size_t p : gen.positions)
                ++per_row[p];
            for (std::size_t p = 0; p < 8; ++p)
            {
                std::size_t row = 0;
                for (std::size_t c : r.tally.counts[p])
                    row += c;
                EXPECT_EQ(row, per_row[p]);
            }
        }
        catch (const RecoveryIncompleteError &)
        {
        }
    }
    EXPECT_GE(covered, 99u);
}

TEST(MultiBitRecover, SelfReferentialWithoutExpectedPayload)
{
    const ToyModel &model = balanced_model();
    MultiBitConfig cfg;
    cfg.payload = Payload::from_hex("0xBEEF", 16, 4);
    const std::vector<TokenId> prompt = {5, 6, 7, 8};
    const auto seq = join(prompt, multibit_generate(model, prompt, WatermarkKey{77}, cfg, 300).tokens);
    const MultiBitReport r = multibit_recover(model, seq, prompt.size(), WatermarkKey{77}, RecoverConfig{});
    EXPECT_TRUE(r.self_referential);
    EXPECT_EQ(bits_to_hex(r.bits), "0xbeef");
    EXPECT_TRUE(r.tied_positions.empty());
}

TEST(MultiBitRecover, IncompleteCoverageListsPositions)
{
    const ToyModel &model = balanced_model();
    MultiBitConfig cfg;
    cfg.payload = Payload::from_hex("0xBEEF", 16, 4);
    const std::vector<TokenId> prompt = {5, 6, 7, 8};
    const auto seq = join(prompt, multibit_generate(model, prompt, WatermarkKey{77}, cfg, 2).tokens);
    try
    {
        multibit_recover(model, seq, prompt.size(), WatermarkKey{77}, RecoverConfig{});
        FAIL() << "expected RecoveryIncompleteError";
    }
    catch (const RecoveryIncompleteError &e)
    {
        EXPECT_GE(e.uncovered().size(), 6u);
        EXPECT_STREQ(e.code(), "recovery_incomplete");
    }
    EXPECT_THROW(multibit_recover(model, prompt, 4, WatermarkKey{1}, RecoverConfig{}), InsufficientDataError);
    RecoverConfig mismatched;
    mismatched.expected = Payload::from_hex("0xBEEF", 16, 2);
    EXPECT_THROW(multibit_recover(model, seq, 4, WatermarkKey{1}, mismatched), ConfigError);
}

// Scripted model whose rank order is the identity, so the observed colour of
// token t is t mod k.
class IdentityRankModel final : public Generator
{
public:
    std::size_t vocab_size() const override { return 16; }
    TokenId eos() const override { return 15; }
    LogitVector next_logits(std::span<const TokenId>) const override
    {
        std::vector<double> s(16);
        for (std::size_t i = 0; i < 16; ++i)
            s[i] = 16.0 - static_cast<double>(i);
        return LogitVector(s);
    }
};

TEST(MultiBitRecover, MajorityTiesGoToSmallestDigit)
{
    const IdentityRankModel model;
    RecoverConfig rc;
    rc.k = 4;
    rc.bits = 2; // a single digit position
    // Colours observed: 3, 1, 1, 3 -> tie between 1 and 3.
    const std::vector<TokenId> seq = {0, 3, 1, 5, 7};
    const MultiBitReport r = multibit_recover(model, seq, 1, WatermarkKey{0}, rc);
    ASSERT_EQ(r.digits.size(), 1u);
    EXPECT_EQ(r.digits[0], 1u);
    EXPECT_EQ(r.tied_positions, (std::vector<std::size_t>{0}));
    EXPECT_EQ(r.tally.counts[0], (std::vector<std::size_t>{0, 2, 0, 2}));
    EXPECT_EQ(r.hits, 2u);
}

TEST(MultiBitRecover, NullWithBalancedReferencePayload)
{
    // Clean greedy text always shows colour 0. 0x1b1b has every digit twice,
    // so a hit (digit 0 at the drawn position) has probability exactly 1/k.
    const ToyModel &model = balanced_model();
    RecoverConfig rc;
    rc.expected = Payload::from_hex("0x1b1b", 16, 4);
    const auto prompts = random_prompts(500, 4, model.vocab_size(), 66);
    const auto keys = random_keys(500, 67);
    std::vector<double> z(prompts.size());
    for (std::size_t i = 0; i < prompts.size(); ++i)
    {
        const auto seq = join(prompts[i], unwatermarked_generate(model, prompts[i], 200));
        z[i] = multibit_recover(model, seq, prompts[i].size(), keys[i], rc).z;
    }
    const Moments m = summarize(z);
    EXPECT_GE(m.mean, -0.15);
    EXPECT_LE(m.mean, 0.15);
}

} // namespace
} // namespace watermod
