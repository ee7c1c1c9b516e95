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
#include <span>
#include <vector>

#include "watermod/core.hpp"
#include "watermod/entropy.hpp"
#include "watermod/model.hpp"

namespace watermod
{

struct ZeroBitConfig
{
    double delta = 1.0;
    GateConfig gate;
    double tau = 4.0;

    void validate() const;
};

// Gate decision for one step, derived from unbiased logits.
struct ParityDecision
{
    double p_odd = 0.0;
    double u = 0.0;
    int green_parity = 0; // 1: odd ranks are green
};

struct ZeroBitStep
{
    TokenId chosen = 0;
    int green_parity = 0;
    LogitVector biased_logits;
    double p_odd = 0.0;
    double u = 0.0;
};

struct ZeroBitGeneration
{
    std::vector<TokenId> tokens;             // continuation only
    std::vector<std::uint8_t> green_parity;  // one per generated token
};

struct ZeroBitReport
{
    std::size_t green_hits = 0; // G
    std::size_t positions = 0;  // N
    double z = 0.0;
    double tau = 0.0;
    bool watermarked = false;
    std::vector<std::uint8_t> green_parity; // reconstructed, one per position
};

ParityDecision green_parity(const LogitVector &logits, TokenId prev_token, WatermarkKey key, const GateConfig &gate);

ZeroBitStep zerobit_step(const LogitVector &logits, TokenId prev_token, WatermarkKey key, const ZeroBitConfig &cfg);

ZeroBitGeneration zerobit_generate(const Generator &model, std::span<const TokenId> prompt, WatermarkKey key,
                                   const ZeroBitConfig &cfg, std::size_t max_tokens);

/// Detects a zero-bit watermark in `tokens` (prompt followed by the
/// continuation). Positions prompt_len .. T-1 are inspected; the prompt is
/// context only. Throws InsufficientDataError when nothing is inspected.
ZeroBitReport zerobit_detect(const Generator &model, std::span<const TokenId> tokens, std::size_t prompt_len,
                             WatermarkKey key, const ZeroBitConfig &cfg);

// (G - N/2) / sqrt(N/4).
double zerobit_z(std::size_t green_hits, std::size_t positions);

} // namespace watermod
