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

namespace watermod
{

using TokenId = std::uint32_t;

// Secret watermark key. Kept as a distinct type so it cannot be confused
// with seeds or token ids at call sites.
struct WatermarkKey
{
    std::uint64_t value = 0;

    friend bool operator==(WatermarkKey, WatermarkKey) = default;
};

/// Unnormalized token scores for one decoding step.
///
/// Construction validates that there are at least two entries and that all
/// of them are finite; an InvalidInputError is thrown otherwise.
class LogitVector
{
public:
    LogitVector() = default;
    explicit LogitVector(std::vector<double> scores);

    std::size_t size() const noexcept { return scores_.size(); }
    double operator[](std::size_t i) const noexcept { return scores_[i]; }
    std::span<const double> scores() const noexcept { return scores_; }

    // Adds `amount` to the score of `token`. The result must stay finite.
    void add(TokenId token, double amount);

private:
    std::vector<double> scores_;
};

using ProbVector = std::vector<double>;

/// Descending-score ordering of the vocabulary. Equal scores are ordered by
/// ascending token id so that embedder and detector agree bit for bit.
class RankPermutation
{
public:
    explicit RankPermutation(std::vector<TokenId> order);

    std::size_t size() const noexcept { return order_.size(); }
    TokenId at_rank(std::size_t rank) const noexcept { return order_[rank]; }
    std::size_t rank_of(TokenId token) const noexcept { return inverse_[token]; }
    std::span<const TokenId> order() const noexcept { return order_; }

private:
    std::vector<TokenId> order_;
    std::vector<std::size_t> inverse_;
};

struct ResidueClass
{
    std::size_t modulus = 0;
    std::size_t residue = 0;
    std::vector<TokenId> members; // in rank order
};

// Numerically stable softmax.
ProbVector softmax(const LogitVector &logits);

RankPermutation rank_sort(const LogitVector &logits);

// Partitions ranks by `rank mod k`. Throws ConfigError unless 2 <= k <= V.
std::vector<ResidueClass> residue_partition(const RankPermutation &perm, std::size_t k);

// Index of the largest score; ties go to the lowest token id.
TokenId argmax(const LogitVector &logits);

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    std::uint64_t z = x + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Per-step seed derived from the previous token only.
constexpr std::uint64_t prf_seed(TokenId prev_token) noexcept
{
    return splitmix64(prev_token);
}

/// Keyed uniform draw strictly inside (0, 1).
///
/// The top 52 bits of splitmix64(seed ^ key) are mapped to
/// (h52 + 0.5) / 2^52. That value needs at most 53 significant bits, so it
/// is exact in a double: the result is bit-identical on every IEEE-754
/// platform and lies in [2^-53, 1 - 2^-53].
constexpr double hash_to_uniform(std::uint64_t seed, WatermarkKey key) noexcept
{
    const std::uint64_t h = splitmix64(seed ^ key.value) >> 12;
    return (static_cast<double>(h) + 0.5) * 0x1.0p-52;
}

} // namespace watermod
