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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "watermod/core.hpp"
#include "watermod/model.hpp"

namespace watermod
{

using Digit = std::uint32_t;
using Bits = std::vector<std::uint8_t>; // one 0/1 entry per bit, most significant first

// Number of base-k digits needed for a b-bit message: ceil(b / log2 k),
// computed exactly as the digit length of 2^b - 1.
std::size_t digit_count(std::size_t bits, std::size_t k);

// Big-endian bits -> b̃ base-k digits, most significant first, zero padded.
std::vector<Digit> payload_encode(std::span<const std::uint8_t> bits, std::size_t k);

// Inverse of payload_encode. Values that overflow b bits are masked back to
// the low b bits.
Bits payload_decode(std::span<const Digit> digits, std::size_t k, std::size_t bits);

// Hex text (optional 0x prefix) to exactly `bits` bits. Throws ConfigError if
// the value does not fit.
Bits hex_to_bits(std::string_view hex, std::size_t bits);
// "0x" followed by ceil(b/4) lowercase hex digits.
std::string bits_to_hex(std::span<const std::uint8_t> bits);

/// A b-bit message together with its base-k digit string.
class Payload
{
public:
    Payload() : Payload(Bits(16, 0), 4) {}
    Payload(Bits bits, std::size_t k);

    static Payload from_hex(std::string_view hex, std::size_t bits, std::size_t k);

    const Bits &bits() const noexcept { return bits_; }
    const std::vector<Digit> &digits() const noexcept { return digits_; }
    std::size_t base() const noexcept { return k_; }
    std::size_t bit_length() const noexcept { return bits_.size(); }
    std::string hex() const { return bits_to_hex(bits_); }

    friend bool operator==(const Payload &, const Payload &) = default;

private:
    Bits bits_;
    std::size_t k_ = 4;
    std::vector<Digit> digits_;
};

struct MultiBitConfig
{
    double delta = 2.5;
    std::size_t k = 4;
    Payload payload;

    void validate() const;
};

// Detector-side parameters: everything but the payload itself.
struct RecoverConfig
{
    std::size_t k = 4;
    std::size_t bits = 16;
    double tau = 4.0;
    // Known payload to score against; without it z is computed against the
    // recovered digits and flagged as self-referential.
    std::optional<Payload> expected;

    void validate() const;
};

struct MultiBitStep
{
    TokenId chosen = 0;
    std::size_t position = 0;
    Digit digit = 0;
    LogitVector biased_logits;
};

struct MultiBitGeneration
{
    std::vector<TokenId> tokens;        // continuation only
    std::vector<std::size_t> positions; // digit position used at each step
};

// counts[p][d]: how often colour d was observed at digit position p.
struct TallyTable
{
    std::vector<std::vector<std::size_t>> counts;

    std::size_t total() const;
};

struct MultiBitReport
{
    std::vector<Digit> digits;
    Bits bits;
    std::size_t hits = 0;      // G
    std::size_t positions = 0; // T
    double z = 0.0;
    double tau = 0.0;
    bool watermarked = false;
    bool self_referential = false;
    TallyTable tally;
    std::vector<std::size_t> tied_positions; // majority vote needed the tie rule
};

// min(floor(u * n), n - 1).
std::size_t digit_position(double u, std::size_t n);

MultiBitStep multibit_step(const LogitVector &logits, TokenId prev_token, WatermarkKey key,
                           const MultiBitConfig &cfg);

MultiBitGeneration multibit_generate(const Generator &model, std::span<const TokenId> prompt, WatermarkKey key,
                                     const MultiBitConfig &cfg, std::size_t max_tokens);

/// Recovers the payload from `tokens` (prompt followed by continuation) by
/// majority vote per digit position. Throws RecoveryIncompleteError when some
/// position was never observed.
MultiBitReport multibit_recover(const Generator &model, std::span<const TokenId> tokens, std::size_t prompt_len,
                                WatermarkKey key, const RecoverConfig &cfg);

// (G - T/k) / sqrt(T (1/k) (1 - 1/k)).
double multibit_z(std::size_t hits, std::size_t positions, std::size_t k);

} // namespace watermod
