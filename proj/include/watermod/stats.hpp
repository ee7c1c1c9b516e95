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
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "watermod/core.hpp"
#include "watermod/entropy.hpp"
#include "watermod/model.hpp"
#include "watermod/multibit.hpp"
#include "watermod/zerobit.hpp"

namespace watermod
{

enum class SampleLabel
{
    watermarked,
    clean,
};

struct ScoreSample
{
    double z = 0.0;
    SampleLabel label = SampleLabel::clean;
    std::map<std::string, std::string> meta;
};

struct RocPoint
{
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocResult
{
    double auroc = 0.0;
    std::vector<RocPoint> curve; // (0,0) .. (1,1), one step per distinct score
};

// Mann-Whitney AUROC with ties counted as 1/2, plus the threshold-sweep curve.
// Throws InvalidInputError if either list is empty or holds a non-finite score.
RocResult auroc(std::span<const double> positives, std::span<const double> negatives);
RocResult auroc(std::span<const ScoreSample> samples);

double trapezoid_area(std::span<const RocPoint> curve);

struct Moments
{
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation (n - 1)
    double max_abs = 0.0;
};

Moments summarize(std::span<const double> values);

// Runs fn(i) for i in [0, n) on a small worker pool. Each index is visited
// exactly once; callers write into preallocated slots, so results do not
// depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn);

// `count` random prompts of `length` tokens drawn from [1, V); token 0 (EOS)
// is never used.
std::vector<std::vector<TokenId>> random_prompts(std::size_t count, std::size_t length, std::size_t vocab_size,
                                                 std::uint64_t seed);

// Stream of fresh keys for experiments.
std::vector<WatermarkKey> random_keys(std::size_t count, std::uint64_t seed);

/// Replaces floor(fraction * N) distinct, uniformly chosen generated
/// positions (index >= prompt_len) with a different uniformly drawn token.
std::vector<TokenId> substitution_attack(std::span<const TokenId> tokens, std::size_t prompt_len, double fraction,
                                         std::size_t vocab_size, std::uint64_t rng_seed);

struct CorpusConfig
{
    std::size_t sequences = 200;
    std::size_t length = 200;     // generated tokens per sequence
    std::size_t prompt_len = 4;
    std::uint64_t prompt_seed = 1;
    std::uint64_t key_seed = 2;
};

struct NullSummary
{
    Moments moments;
    std::vector<double> z;
};

/// Detects unwatermarked greedy generations, each with a fresh random key.
NullSummary null_calibration(const Generator &model, const CorpusConfig &corpus, const ZeroBitConfig &cfg);

// Mean p_odd of the toy model over `contexts` random prefixes.
double mean_gate(const ToyModelConfig &model, const GateConfig &gate, std::size_t contexts, std::uint64_t seed);

/// Toy-model sharpness beta at which the mean gate equals `target`.
///
/// Greedy unwatermarked text always takes the rank-0 token, which is green
/// exactly when the gate picks even ranks, so its null hit rate is
/// 1 - E[p_odd]. A beta with E[p_odd] = 1/2 makes clean toy text a faithful
/// binomial(N, 1/2) null. Solved by bisection on beta in [0, 1000].
double gate_balanced_beta(const ToyModelConfig &model, const GateConfig &gate, double target = 0.5,
                          std::size_t contexts = 256, std::uint64_t seed = 7);

struct ZeroBitBench
{
    std::vector<double> watermarked_z;
    std::vector<double> clean_z;
    RocResult roc;
};

// Paired corpora: sequence i is generated with and without the watermark
// from the same prompt, and both are detected with key i.
ZeroBitBench zerobit_bench(const Generator &model, const CorpusConfig &corpus, const ZeroBitConfig &cfg);

struct MultiBitBench
{
    std::size_t runs = 0;
    std::size_t exact = 0;      // runs whose recovered bits equal the payload
    std::size_t incomplete = 0; // runs with an uncovered digit position
    std::vector<double> z;      // known-payload z, one per complete run
    std::vector<bool> recovered;
};

MultiBitBench multibit_bench(const Generator &model, const CorpusConfig &corpus, const MultiBitConfig &cfg);

struct RobustnessPoint
{
    double fraction = 0.0;
    Moments moments;
    std::size_t above_tau = 0;
    std::vector<double> z;
};

// Zero-bit detection after substitution at each fraction, on one shared
// watermarked corpus.
std::vector<RobustnessPoint> robustness_sweep(const Generator &model, const CorpusConfig &corpus,
                                              const ZeroBitConfig &cfg, std::span<const double> fractions,
                                              std::uint64_t attack_seed);

} // namespace watermod
