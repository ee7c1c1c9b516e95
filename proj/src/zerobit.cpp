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

#include "watermod/zerobit.hpp"

#include <cmath>
#include <string>

#include "watermod/error.hpp"

namespace watermod
{

void ZeroBitConfig::validate() const
{
    if (!(delta > 0.0 && std::isfinite(delta)))
    {
        throw ConfigError("zero-bit delta must be > 0");
    }
    if (!std::isfinite(tau))
    {
        throw ConfigError("tau must be finite");
    }
    gate.validate();
}

ParityDecision green_parity(const LogitVector &logits, TokenId prev_token, WatermarkKey key, const GateConfig &gate)
{
    const ProbVector probs = softmax(logits);
    ParityDecision d;
    d.p_odd = p_odd(probs, gate);
    d.u = hash_to_uniform(prf_seed(prev_token), key);
    d.green_parity = d.u < d.p_odd ? 1 : 0;
    return d;
}

ZeroBitStep zerobit_step(const LogitVector &logits, TokenId prev_token, WatermarkKey key, const ZeroBitConfig &cfg)
{
    if (logits.size() < 2)
    {
        throw ConfigError("vocabulary must contain at least 2 tokens");
    }
    const ParityDecision gate = green_parity(logits, prev_token, key, cfg.gate);
    const RankPermutation perm = rank_sort(logits);

    LogitVector biased = logits;
    for (std::size_t r = static_cast<std::size_t>(gate.green_parity); r < perm.size(); r += 2)
    {
        biased.add(perm.at_rank(r), cfg.delta);
    }
    const TokenId chosen = argmax(biased);
    return {chosen, gate.green_parity, std::move(biased), gate.p_odd, gate.u};
}

ZeroBitGeneration zerobit_generate(const Generator &model, std::span<const TokenId> prompt, WatermarkKey key,
                                   const ZeroBitConfig &cfg, std::size_t max_tokens)
{
    cfg.validate();
    check_prompt(model, prompt);
    std::vector<TokenId> seq(prompt.begin(), prompt.end());
    seq.reserve(prompt.size() + max_tokens);
    ZeroBitGeneration out;
    for (std::size_t i = 0; i < max_tokens; ++i)
    {
        const ZeroBitStep step = zerobit_step(model.next_logits(seq), seq.back(), key, cfg);
        seq.push_back(step.chosen);
        out.tokens.push_back(step.chosen);
        out.green_parity.push_back(static_cast<std::uint8_t>(step.green_parity));
        if (step.chosen == model.eos())
        {
            break;
        }
    }
    return out;
}

ZeroBitReport zerobit_detect(const Generator &model, std::span<const TokenId> tokens, std::size_t prompt_len,
                             WatermarkKey key, const ZeroBitConfig &cfg)
{
    cfg.validate();
    if (prompt_len < 1)
    {
        throw InvalidInputError("prompt_len must be >= 1 so every inspected token has a predecessor");
    }
    if (tokens.size() <= prompt_len)
    {
        throw InsufficientDataError("no generated positions to inspect (T=" + std::to_string(tokens.size()) +
                                    ", prompt_len=" + std::to_string(prompt_len) + ")");
    }
    check_tokens(model, tokens);

    ZeroBitReport report;
    report.tau = cfg.tau;
    report.green_parity.reserve(tokens.size() - prompt_len);
    for (std::size_t t = prompt_len; t < tokens.size(); ++t)
    {
        const LogitVector logits = model.next_logits(tokens.first(t));
        const ParityDecision gate = green_parity(logits, tokens[t - 1], key, cfg.gate);
        const std::size_t rank = rank_sort(logits).rank_of(tokens[t]);
        if (static_cast<int>(rank % 2) == gate.green_parity)
        {
            ++report.green_hits;
        }
        report.green_parity.push_back(static_cast<std::uint8_t>(gate.green_parity));
        ++report.positions;
    }
    report.z = zerobit_z(report.green_hits, report.positions);
    report.watermarked = report.z > report.tau;
    return report;
}

double zerobit_z(std::size_t green_hits, std::size_t positions)
{
    if (positions == 0)
    {
        throw InsufficientDataError("z-score needs at least one inspected position");
    }
    const double n = static_cast<double>(positions);
    return (static_cast<double>(green_hits) - n / 2.0) / std::sqrt(n / 4.0);
}

} // namespace watermod
