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

#include "watermod/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "watermod/error.hpp"

namespace watermod
{

void ToyModelConfig::validate() const
{
    if (vocab_size < 8)
    {
        throw ConfigError("toy model vocabulary must be >= 8 (got " + std::to_string(vocab_size) + ")");
    }
    if (vocab_size > (std::size_t{1} << 31))
    {
        throw ConfigError("toy model vocabulary is too large");
    }
    if (order < 1)
    {
        throw ConfigError("toy model context order must be >= 1");
    }
    if (!(beta >= 0.0 && std::isfinite(beta)))
    {
        throw ConfigError("toy model beta must be finite and >= 0");
    }
    if (!(eos_penalty >= 0.0 && std::isfinite(eos_penalty)))
    {
        throw ConfigError("toy model eos_penalty must be finite and >= 0");
    }
}

ToyModel::ToyModel(ToyModelConfig cfg) : cfg_(std::move(cfg))
{
    cfg_.validate();
}

LogitVector ToyModel::next_logits(std::span<const TokenId> prefix) const
{
    return toy_next_logits(cfg_, prefix);
}

LogitVector toy_next_logits(const ToyModelConfig &cfg, std::span<const TokenId> prefix)
{
    if (prefix.empty())
    {
        throw InvalidInputError("toy model needs a non-empty prefix");
    }
    const std::size_t n = std::min(cfg.order, prefix.size());
    std::uint64_t c = splitmix64(cfg.seed);
    for (TokenId t : prefix.subspan(prefix.size() - n))
    {
        c = splitmix64(c ^ t);
    }
    const WatermarkKey model_key{cfg.seed};
    std::vector<double> scores(cfg.vocab_size);
    for (std::size_t i = 0; i < scores.size(); ++i)
    {
        scores[i] = cfg.beta * hash_to_uniform(splitmix64(c ^ i), model_key);
    }
    scores[0] -= cfg.eos_penalty;
    return LogitVector(std::move(scores));
}

void check_tokens(const Generator &model, std::span<const TokenId> tokens)
{
    const std::size_t v = model.vocab_size();
    for (std::size_t i = 0; i < tokens.size(); ++i)
    {
        if (tokens[i] >= v)
        {
            throw InvalidInputError("token " + std::to_string(tokens[i]) + " at index " + std::to_string(i) +
                                    " is outside the vocabulary (V=" + std::to_string(v) + ")");
        }
    }
}

void check_prompt(const Generator &model, std::span<const TokenId> prompt)
{
    if (prompt.empty())
    {
        throw InvalidInputError("prompt must contain at least one token");
    }
    if (model.vocab_size() < 2)
    {
        throw ConfigError("vocabulary must contain at least 2 tokens");
    }
    check_tokens(model, prompt);
}

std::vector<TokenId> unwatermarked_generate(const Generator &model, std::span<const TokenId> prompt,
                                            std::size_t max_tokens)
{
    check_prompt(model, prompt);
    std::vector<TokenId> seq(prompt.begin(), prompt.end());
    seq.reserve(prompt.size() + max_tokens);
    for (std::size_t i = 0; i < max_tokens; ++i)
    {
        const TokenId next = argmax(model.next_logits(seq));
        seq.push_back(next);
        if (next == model.eos())
        {
            break;
        }
    }
    return {seq.begin() + static_cast<std::ptrdiff_t>(prompt.size()), seq.end()};
}

} // namespace watermod
