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

#include "watermod/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "watermod/error.hpp"

namespace watermod
{

RocResult auroc(std::span<const double> positives, std::span<const double> negatives)
{
    if (positives.empty() || negatives.empty())
    {
        throw InvalidInputError("AUROC needs at least one positive and one negative score");
    }
    // (score, is_positive), highest score first.
    std::vector<std::pair<double, bool>> all;
    all.reserve(positives.size() + negatives.size());
    for (double z : positives)
        all.emplace_back(z, true);
    for (double z : negatives)
        all.emplace_back(z, false);
    for (const auto &[z, pos] : all)
    {
        if (!std::isfinite(z))
        {
            throw InvalidInputError("AUROC scores must be finite");
        }
    }
    std::sort(all.begin(), all.end(), [](const auto &a, const auto &b) { return a.first > b.first; });

    const auto n_pos = static_cast<double>(positives.size());
    const auto n_neg = static_cast<double>(negatives.size());
    RocResult out;
    out.curve.push_back({0.0, 0.0});
    double tp = 0.0;
    double fp = 0.0;
    double wins = 0.0; // pairs (p, n) with p > n, ties counted as 1/2
    for (std::size_t i = 0; i < all.size();)
    {
        double pos_group = 0.0;
        double neg_group = 0.0;
        std::size_t j = i;
        for (; j < all.size() && all[j].first == all[i].first; ++j)
        {
            (all[j].second ? pos_group : neg_group) += 1.0;
        }
        const double neg_below = n_neg - fp - neg_group;
        wins += pos_group * (neg_below + 0.5 * neg_group);
        tp += pos_group;
        fp += neg_group;
        out.curve.push_back({fp / n_neg, tp / n_pos});
        i = j;
    }
    out.auroc = wins / (n_pos * n_neg);
    return out;
}

RocResult auroc(std::span<const ScoreSample> samples)
{
    std::vector<double> pos;
    std::vector<double> neg;
    for (const ScoreSample &s : samples)
    {
        (s.label == SampleLabel::watermarked ? pos : neg).push_back(s.z);
    }
    return auroc(pos, neg);
}

double trapezoid_area(std::span<const RocPoint> curve)
{
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i)
    {
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
    }
    return area;
}

Moments summarize(std::span<const double> values)
{
    Moments m;
    m.n = values.size();
    if (values.empty())
    {
        return m;
    }
    m.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(m.n);
    double ss = 0.0;
    for (double v : values)
    {
        ss += (v - m.mean) * (v - m.mean);
        m.max_abs = std::max(m.max_abs, std::abs(v));
    }
    m.stddev = m.n > 1 ? std::sqrt(ss / static_cast<double>(m.n - 1)) : 0.0;
    return m;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn)
{
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
    {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
            {
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard lock(failure_mu);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto &t : pool)
    {
        t.join();
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }
}

std::vector<std::vector<TokenId>> random_prompts(std::size_t count, std::size_t length, std::size_t vocab_size,
                                                 std::uint64_t seed)
{
    if (length == 0)
    {
        throw InvalidInputError("prompt length must be >= 1");
    }
    if (vocab_size < 2)
    {
        throw ConfigError("vocabulary must contain at least 2 tokens");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<TokenId> dist(1, static_cast<TokenId>(vocab_size - 1));
    std::vector<std::vector<TokenId>> prompts(count, std::vector<TokenId>(length));
    for (auto &p : prompts)
    {
        for (TokenId &t : p)
        {
            t = dist(rng);
        }
    }
    return prompts;
}

std::vector<WatermarkKey> random_keys(std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<WatermarkKey> keys(count);
    for (auto &k : keys)
    {
        k.value = rng();
    }
    return keys;
}

std::vector<TokenId> substitution_attack(std::span<const TokenId> tokens, std::size_t prompt_len, double fraction,
                                         std::size_t vocab_size, std::uint64_t rng_seed)
{
    if (!(fraction >= 0.0 && fraction <= 1.0))
    {
        throw InvalidInputError("substitution fraction must lie in [0, 1]");
    }
    if (vocab_size < 2)
    {
        throw ConfigError("vocabulary must contain at least 2 tokens");
    }
    std::vector<TokenId> out(tokens.begin(), tokens.end());
    if (prompt_len >= out.size())
    {
        return out;
    }
    const std::size_t generated = out.size() - prompt_len;
    const auto replace = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(generated)));

    std::mt19937_64 rng(rng_seed);
    std::vector<std::size_t> idx(generated);
    std::iota(idx.begin(), idx.end(), prompt_len);
    // Partial Fisher-Yates: idx[0, replace) is a uniform sample without replacement.
    for (std::size_t i = 0; i < replace; ++i)
    {
        std::uniform_int_distribution<std::size_t> pick(i, generated - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    std::uniform_int_distribution<TokenId> other(0, static_cast<TokenId>(vocab_size - 2));
    for (std::size_t i = 0; i < replace; ++i)
    {
        TokenId &t = out[idx[i]];
        TokenId r = other(rng);
        t = r >= t ? r + 1 : r;
    }
    return out;
}

namespace
{

std::vector<TokenId> concat(std::span<const TokenId> a, std::span<const TokenId> b)
{
    std::vector<TokenId> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

} // namespace

NullSummary null_calibration(const Generator &model, const CorpusConfig &corpus, const ZeroBitConfig &cfg)
{
    if (corpus.sequences < 2)
    {
        throw InvalidInputError("null calibration needs at least 2 sequences");
    }
    const auto prompts = random_prompts(corpus.sequences, corpus.prompt_len, model.vocab_size(), corpus.prompt_seed);
    const auto keys = random_keys(corpus.sequences, corpus.key_seed);
    NullSummary out;
    out.z.resize(corpus.sequences);
    parallel_for(corpus.sequences, [&](std::size_t i) {
        const auto seq = concat(prompts[i], unwatermarked_generate(model, prompts[i], corpus.length));
        out.z[i] = zerobit_detect(model, seq, corpus.prompt_len, keys[i], cfg).z;
    });
    out.moments = summarize(out.z);
    return out;
}

double mean_gate(const ToyModelConfig &model, const GateConfig &gate, std::size_t contexts, std::uint64_t seed)
{
    const auto prefixes = random_prompts(contexts, model.order, model.vocab_size, seed);
    double total = 0.0;
    for (const auto &prefix : prefixes)
    {
        total += p_odd(softmax(toy_next_logits(model, prefix)), gate);
    }
    return total / static_cast<double>(contexts);
}

double gate_balanced_beta(const ToyModelConfig &model, const GateConfig &gate, double target, std::size_t contexts,
                          std::uint64_t seed)
{
    model.validate();
    gate.validate();
    if (!(target > 0.0 && target < 1.0))
    {
        throw InvalidInputError("target gate must lie in (0, 1)");
    }
    ToyModelConfig probe = model;
    double lo = 0.0;    // flat: gate near 1
    double hi = 1000.0; // sharp: gate near 0
    for (int it = 0; it < 60; ++it)
    {
        probe.beta = 0.5 * (lo + hi);
        (mean_gate(probe, gate, contexts, seed) > target ? lo : hi) = probe.beta;
    }
    return 0.5 * (lo + hi);
}

ZeroBitBench zerobit_bench(const Generator &model, const CorpusConfig &corpus, const ZeroBitConfig &cfg)
{
    const auto prompts = random_prompts(corpus.sequences, corpus.prompt_len, model.vocab_size(), corpus.prompt_seed);
    const auto keys = random_keys(corpus.sequences, corpus.key_seed);
    ZeroBitBench out;
    out.watermarked_z.resize(corpus.sequences);
    out.clean_z.resize(corpus.sequences);
    parallel_for(corpus.sequences, [&](std::size_t i) {
        const auto marked = concat(prompts[i], zerobit_generate(model, prompts[i], keys[i], cfg, corpus.length).tokens);
        const auto clean = concat(prompts[i], unwatermarked_generate(model, prompts[i], corpus.length));
        out.watermarked_z[i] = zerobit_detect(model, marked, corpus.prompt_len, keys[i], cfg).z;
        out.clean_z[i] = zerobit_detect(model, clean, corpus.prompt_len, keys[i], cfg).z;
    });
    out.roc = auroc(out.watermarked_z, out.clean_z);
    return out;
}

MultiBitBench multibit_bench(const Generator &model, const CorpusConfig &corpus, const MultiBitConfig &cfg)
{
    const auto prompts = random_prompts(corpus.sequences, corpus.prompt_len, model.vocab_size(), corpus.prompt_seed);
    const auto keys = random_keys(corpus.sequences, corpus.key_seed);
    RecoverConfig rc;
    rc.k = cfg.k;
    rc.bits = cfg.payload.bit_length();
    rc.expected = cfg.payload;

    std::vector<int> status(corpus.sequences, 0); // 0 incomplete, 1 wrong bits, 2 exact
    std::vector<double> z(corpus.sequences, 0.0);
    parallel_for(corpus.sequences, [&](std::size_t i) {
        const auto seq = concat(prompts[i], multibit_generate(model, prompts[i], keys[i], cfg, corpus.length).tokens);
        try
        {
            const MultiBitReport r = multibit_recover(model, seq, corpus.prompt_len, keys[i], rc);
            z[i] = r.z;
            status[i] = r.bits == cfg.payload.bits() ? 2 : 1;
        }
        catch (const RecoveryIncompleteError &)
        {
            status[i] = 0;
        }
    });

    MultiBitBench out;
    out.runs = corpus.sequences;
    for (std::size_t i = 0; i < corpus.sequences; ++i)
    {
        if (status[i] == 0)
        {
            ++out.incomplete;
            continue;
        }
        out.z.push_back(z[i]);
        out.recovered.push_back(status[i] == 2);
        out.exact += status[i] == 2 ? 1 : 0;
    }
    return out;
}

std::vector<RobustnessPoint> robustness_sweep(const Generator &model, const CorpusConfig &corpus,
                                              const ZeroBitConfig &cfg, std::span<const double> fractions,
                                              std::uint64_t attack_seed)
{
    const auto prompts = random_prompts(corpus.sequences, corpus.prompt_len, model.vocab_size(), corpus.prompt_seed);
    const auto keys = random_keys(corpus.sequences, corpus.key_seed);
    std::vector<std::vector<TokenId>> marked(corpus.sequences);
    parallel_for(corpus.sequences, [&](std::size_t i) {
        marked[i] = concat(prompts[i], zerobit_generate(model, prompts[i], keys[i], cfg, corpus.length).tokens);
    });

    std::vector<RobustnessPoint> out;
    for (std::size_t f = 0; f < fractions.size(); ++f)
    {
        RobustnessPoint point;
        point.fraction = fractions[f];
        point.z.resize(corpus.sequences);
        parallel_for(corpus.sequences, [&](std::size_t i) {
            const std::uint64_t seed = splitmix64(attack_seed ^ splitmix64(i * 0x100 + f));
            const auto attacked =
                substitution_attack(marked[i], corpus.prompt_len, fractions[f], model.vocab_size(), seed);
            point.z[i] = zerobit_detect(model, attacked, corpus.prompt_len, keys[i], cfg).z;
        });
        point.moments = summarize(point.z);
        point.above_tau = static_cast<std::size_t>(
            std::count_if(point.z.begin(), point.z.end(), [&](double z) { return z > cfg.tau; }));
        out.push_back(std::move(point));
    }
    return out;
}

} // namespace watermod
