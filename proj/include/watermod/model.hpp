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

namespace watermod
{

/// Autoregressive scorer consumed by the embedders and detectors.
///
/// `next_logits` must be a pure function of the prefix: detection recomputes
/// the embedding-time logits and relies on them being bit-identical.
class Generator
{
public:
    virtual ~Generator() = default;

    virtual std::size_t vocab_size() const = 0;
    virtual TokenId eos() const = 0;
    virtual LogitVector next_logits(std::span<const TokenId> prefix) const = 0;
};

struct ToyModelConfig
{
    std::size_t vocab_size = 4096;
    std::size_t order = 2; // tokens of history that feed the context hash
    double beta = 1.0;     // logit scale; 0 gives a uniform distribution
    std::uint64_t seed = 0x5EEDull;
    // Constant subtracted from the end-of-sequence logit so that generations
    // normally run to their token budget.
    double eos_penalty = 8.0;

    void validate() const;
};

/// Hash-based n-gram scorer with tunable sharpness.
///
/// The last `order` tokens are folded into a context hash c; token i then
/// scores beta * hash_to_uniform(splitmix64(c ^ i), seed). Token 0 is EOS.
class ToyModel final : public Generator
{
public:
    explicit ToyModel(ToyModelConfig cfg);

    const ToyModelConfig &config() const noexcept { return cfg_; }

    std::size_t vocab_size() const override { return cfg_.vocab_size; }
    TokenId eos() const override { return 0; }
    LogitVector next_logits(std::span<const TokenId> prefix) const override;

private:
    ToyModelConfig cfg_;
};

LogitVector toy_next_logits(const ToyModelConfig &cfg, std::span<const TokenId> prefix);

/// Greedy decoding without any watermark. Returns only the continuation;
/// generation stops after `max_tokens` tokens or right after EOS is emitted.
std::vector<TokenId> unwatermarked_generate(const Generator &model, std::span<const TokenId> prompt,
                                            std::size_t max_tokens);

// Shared argument checks for the generation loops.
void check_prompt(const Generator &model, std::span<const TokenId> prompt);
void check_tokens(const Generator &model, std::span<const TokenId> tokens);

} // namespace watermod
