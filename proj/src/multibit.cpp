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

#include "watermod/multibit.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "watermod/error.hpp"

namespace watermod
{

namespace
{

// Little-endian base-2^32 unsigned integer, just enough for digit conversion.
using Limbs = std::vector<std::uint32_t>;

Limbs limbs_from_bits(std::span<const std::uint8_t> bits)
{
    Limbs v((bits.size() + 31) / 32, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
    {
        const std::size_t pos = bits.size() - 1 - i; // significance of bits[i]
        if (bits[i])
        {
            v[pos / 32] |= std::uint32_t{1} << (pos % 32);
        }
    }
    return v;
}

bool is_zero(const Limbs &v)
{
    return std::all_of(v.begin(), v.end(), [](std::uint32_t x) { return x == 0; });
}

// v /= divisor, returns the remainder.
std::uint64_t divmod_small(Limbs &v, std::uint64_t divisor)
{
    std::uint64_t rem = 0;
    for (std::size_t i = v.size(); i-- > 0;)
    {
        const std::uint64_t cur = (rem << 32) | v[i];
        v[i] = static_cast<std::uint32_t>(cur / divisor);
        rem = cur % divisor;
    }
    return rem;
}

// v = v * factor + addend.
void muladd_small(Limbs &v, std::uint64_t factor, std::uint64_t addend)
{
    std::uint64_t carry = addend;
    for (std::uint32_t &limb : v)
    {
        const std::uint64_t cur = static_cast<std::uint64_t>(limb) * factor + carry;
        limb = static_cast<std::uint32_t>(cur);
        carry = cur >> 32;
    }
    if (carry != 0)
    {
        v.push_back(static_cast<std::uint32_t>(carry));
    }
}

void check_base(std::size_t k)
{
    if (k < 2 || k > 0xFFFFFFFFull)
    {
        throw ConfigError("payload base k must satisfy 2 <= k < 2^32 (k=" + std::to_string(k) + ")");
    }
}

int hex_value(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

} // namespace

std::size_t digit_count(std::size_t bits, std::size_t k)
{
    check_base(k);
    if (bits == 0)
    {
        throw ConfigError("payload must have at least one bit");
    }
    Limbs v = limbs_from_bits(Bits(bits, 1));
    std::size_t n = 0;
    while (!is_zero(v))
    {
        divmod_small(v, k);
        ++n;
    }
    return n;
}

std::vector<Digit> payload_encode(std::span<const std::uint8_t> bits, std::size_t k)
{
    const std::size_t n = digit_count(bits.size(), k);
    Limbs v = limbs_from_bits(bits);
    std::vector<Digit> digits(n, 0);
    for (std::size_t i = n; i-- > 0;)
    {
        digits[i] = static_cast<Digit>(divmod_small(v, k));
    }
    return digits;
}

Bits payload_decode(std::span<const Digit> digits, std::size_t k, std::size_t bits)
{
    check_base(k);
    if (bits == 0)
    {
        throw ConfigError("payload must have at least one bit");
    }
    Limbs v{0};
    for (Digit d : digits)
    {
        if (d >= k)
        {
            throw InvalidInputError("digit " + std::to_string(d) + " is not valid in base " + std::to_string(k));
        }
        muladd_small(v, k, d);
    }
    Bits out(bits, 0);
    for (std::size_t i = 0; i < bits; ++i)
    {
        const std::size_t pos = bits - 1 - i;
        if (pos / 32 < v.size())
        {
            out[i] = static_cast<std::uint8_t>((v[pos / 32] >> (pos % 32)) & 1u);
        }
    }
    return out;
}

Bits hex_to_bits(std::string_view hex, std::size_t bits)
{
    if (hex.starts_with("0x") || hex.starts_with("0X"))
    {
        hex.remove_prefix(2);
    }
    if (hex.empty())
    {
        throw ConfigError("empty hex payload");
    }
    Bits all;
    all.reserve(hex.size() * 4);
    for (char c : hex)
    {
        const int v = hex_value(c);
        if (v < 0)
        {
            throw ConfigError(std::string("invalid hex digit '") + c + "' in payload");
        }
        for (int b = 3; b >= 0; --b)
        {
            all.push_back(static_cast<std::uint8_t>((v >> b) & 1));
        }
    }
    Bits out(bits, 0);
    for (std::size_t i = 0; i < all.size(); ++i)
    {
        const std::size_t pos = all.size() - 1 - i;
        if (pos < bits)
        {
            out[bits - 1 - pos] = all[i];
        }
        else if (all[i])
        {
            throw ConfigError("payload 0x" + std::string(hex) + " does not fit in " + std::to_string(bits) + " bits");
        }
    }
    return out;
}

std::string bits_to_hex(std::span<const std::uint8_t> bits)
{
    static constexpr char kHex[] = "0123456789abcdef";
    const std::size_t n = (bits.size() + 3) / 4;
    const std::size_t pad = n * 4 - bits.size();
    std::string out = "0x";
    for (std::size_t j = 0; j < n; ++j)
    {
        int v = 0;
        for (std::size_t b = 0; b < 4; ++b)
        {
            const std::size_t idx = j * 4 + b; // index into the padded bit string
            v = (v << 1) | (idx >= pad ? bits[idx - pad] : 0);
        }
        out.push_back(kHex[v]);
    }
    return out;
}

Payload::Payload(Bits bits, std::size_t k) : bits_(std::move(bits)), k_(k)
{
    for (std::uint8_t b : bits_)
    {
        if (b > 1)
        {
            throw InvalidInputError("payload bits must be 0 or 1");
        }
    }
    digits_ = payload_encode(bits_, k_);
}

Payload Payload::from_hex(std::string_view hex, std::size_t bits, std::size_t k)
{
    return Payload(hex_to_bits(hex, bits), k);
}

void MultiBitConfig::validate() const
{
    if (!(delta > 0.0 && std::isfinite(delta)))
    {
        throw ConfigError("multi-bit delta must be > 0");
    }
    check_base(k);
    if (payload.base() != k)
    {
        throw ConfigError("payload was encoded in base " + std::to_string(payload.base()) + " but k=" +
                          std::to_string(k));
    }
}

void RecoverConfig::validate() const
{
    check_base(k);
    if (bits == 0)
    {
        throw ConfigError("payload must have at least one bit");
    }
    if (!std::isfinite(tau))
    {
        throw ConfigError("tau must be finite");
    }
    if (expected && (expected->base() != k || expected->bit_length() != bits))
    {
        throw ConfigError("expected payload does not match k/bits of the recovery config");
    }
}

std::size_t TallyTable::total() const
{
    std::size_t sum = 0;
    for (const auto &row : counts)
    {
        for (std::size_t c : row)
        {
            sum += c;
        }
    }
    return sum;
}

std::size_t digit_position(double u, std::size_t n)
{
    const auto p = static_cast<std::size_t>(std::floor(u * static_cast<double>(n)));
    return std::min(p, n - 1);
}

MultiBitStep multibit_step(const LogitVector &logits, TokenId prev_token, WatermarkKey key,
                           const MultiBitConfig &cfg)
{
    cfg.validate();
    if (cfg.k > logits.size())
    {
        throw ConfigError("k=" + std::to_string(cfg.k) + " exceeds vocabulary size " + std::to_string(logits.size()));
    }
    const auto &digits = cfg.payload.digits();
    const double u = hash_to_uniform(prf_seed(prev_token), key);
    const std::size_t position = digit_position(u, digits.size());
    const Digit digit = digits[position];

    const RankPermutation perm = rank_sort(logits);
    LogitVector biased = logits;
    for (std::size_t r = digit; r < perm.size(); r += cfg.k)
    {
        biased.add(perm.at_rank(r), cfg.delta);
    }
    const TokenId chosen = argmax(biased);
    return {chosen, position, digit, std::move(biased)};
}

MultiBitGeneration multibit_generate(const Generator &model, std::span<const TokenId> prompt, WatermarkKey key,
                                     const MultiBitConfig &cfg, std::size_t max_tokens)
{
    cfg.validate();
    check_prompt(model, prompt);
    if (cfg.k > model.vocab_size())
    {
        throw ConfigError("k exceeds vocabulary size");
    }
    std::vector<TokenId> seq(prompt.begin(), prompt.end());
    seq.reserve(prompt.size() + max_tokens);
    MultiBitGeneration out;
    for (std::size_t i = 0; i < max_tokens; ++i)
    {
        const MultiBitStep step = multibit_step(model.next_logits(seq), seq.back(), key, cfg);
        seq.push_back(step.chosen);
        out.tokens.push_back(step.chosen);
        out.positions.push_back(step.position);
        if (step.chosen == model.eos())
        {
            break;
        }
    }
    return out;
}

MultiBitReport multibit_recover(const Generator &model, std::span<const TokenId> tokens, std::size_t prompt_len,
                                WatermarkKey key, const RecoverConfig &cfg)
{
    cfg.validate();
    if (cfg.k > model.vocab_size())
    {
        throw ConfigError("k exceeds vocabulary size");
    }
    if (prompt_len < 1)
    {
        throw InvalidInputError("prompt_len must be >= 1 so every inspected token has a predecessor");
    }
    if (tokens.size() <= prompt_len)
    {
        throw InsufficientDataError("no generated positions to inspect");
    }
    check_tokens(model, tokens);

    const std::size_t n_digits = digit_count(cfg.bits, cfg.k);
    MultiBitReport report;
    report.tau = cfg.tau;
    report.tally.counts.assign(n_digits, std::vector<std::size_t>(cfg.k, 0));

    // Observed (position, colour) per step; hits are scored after the vote
    // when no expected payload is given.
    std::vector<std::pair<std::size_t, Digit>> observed;
    observed.reserve(tokens.size() - prompt_len);
    for (std::size_t t = prompt_len; t < tokens.size(); ++t)
    {
        const LogitVector logits = model.next_logits(tokens.first(t));
        const double u = hash_to_uniform(prf_seed(tokens[t - 1]), key);
        const std::size_t p = digit_position(u, n_digits);
        const auto colour = static_cast<Digit>(rank_sort(logits).rank_of(tokens[t]) % cfg.k);
        ++report.tally.counts[p][colour];
        observed.emplace_back(p, colour);
    }
    report.positions = observed.size();

    std::vector<std::size_t> uncovered;
    report.digits.resize(n_digits);
    for (std::size_t p = 0; p < n_digits; ++p)
    {
        const auto &row = report.tally.counts[p];
        const auto best = std::max_element(row.begin(), row.end()); // first max: smallest digit wins ties
        if (*best == 0)
        {
            uncovered.push_back(p);
            continue;
        }
        report.digits[p] = static_cast<Digit>(best - row.begin());
        if (std::count(row.begin(), row.end(), *best) > 1)
        {
            report.tied_positions.push_back(p);
        }
    }
    if (!uncovered.empty())
    {
        std::string list;
        for (std::size_t p : uncovered)
        {
            list += (list.empty() ? "" : ",") + std::to_string(p);
        }
        throw RecoveryIncompleteError("digit positions without observations: " + list, std::move(uncovered));
    }
    report.bits = payload_decode(report.digits, cfg.k, cfg.bits);

    const std::vector<Digit> &reference = cfg.expected ? cfg.expected->digits() : report.digits;
    report.self_referential = !cfg.expected.has_value();
    for (const auto &[p, colour] : observed)
    {
        if (colour == reference[p])
        {
            ++report.hits;
        }
    }
    report.z = multibit_z(report.hits, report.positions, cfg.k);
    report.watermarked = report.z > report.tau;
    return report;
}

double multibit_z(std::size_t hits, std::size_t positions, std::size_t k)
{
    if (positions == 0)
    {
        throw InsufficientDataError("z-score needs at least one inspected position");
    }
    check_base(k);
    const double t = static_cast<double>(positions);
    const double p0 = 1.0 / static_cast<double>(k);
    return (static_cast<double>(hits) - t * p0) / std::sqrt(t * p0 * (1.0 - p0));
}

} // namespace watermod
