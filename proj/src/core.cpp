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

#include "watermod/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "watermod/error.hpp"

namespace watermod
{

LogitVector::LogitVector(std::vector<double> scores) : scores_(std::move(scores))
{
    if (scores_.size() < 2)
    {
        throw InvalidInputError("logit vector needs at least 2 entries, got " + std::to_string(scores_.size()));
    }
    for (std::size_t i = 0; i < scores_.size(); ++i)
    {
        if (!std::isfinite(scores_[i]))
        {
            throw InvalidInputError("logit " + std::to_string(i) + " is not finite");
        }
    }
}

void LogitVector::add(TokenId token, double amount)
{
    double &s = scores_.at(token);
    s += amount;
    if (!std::isfinite(s))
    {
        throw InvalidInputError("biased logit " + std::to_string(token) + " is not finite");
    }
}

RankPermutation::RankPermutation(std::vector<TokenId> order) : order_(std::move(order)), inverse_(order_.size())
{
    std::vector<bool> seen(order_.size(), false);
    for (std::size_t r = 0; r < order_.size(); ++r)
    {
        const TokenId t = order_[r];
        if (t >= order_.size() || seen[t])
        {
            throw InvalidInputError("rank order is not a permutation");
        }
        seen[t] = true;
        inverse_[t] = r;
    }
}

ProbVector softmax(const LogitVector &logits)
{
    const auto s = logits.scores();
    const double top = *std::max_element(s.begin(), s.end());
    ProbVector p(s.size());
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        p[i] = std::exp(s[i] - top);
        total += p[i];
    }
    for (double &v : p)
    {
        v /= total;
    }
    return p;
}

RankPermutation rank_sort(const LogitVector &logits)
{
    // Sorting (score, id) pairs keeps the comparator cache friendly.
    std::vector<std::pair<double, TokenId>> keyed(logits.size());
    for (std::size_t i = 0; i < keyed.size(); ++i)
    {
        keyed[i] = {logits[i], static_cast<TokenId>(i)};
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto &a, const auto &b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    std::vector<TokenId> order(keyed.size());
    std::transform(keyed.begin(), keyed.end(), order.begin(), [](const auto &e) { return e.second; });
    return RankPermutation(std::move(order));
}

std::vector<ResidueClass> residue_partition(const RankPermutation &perm, std::size_t k)
{
    if (k < 2 || k > perm.size())
    {
        throw ConfigError("modulus k must satisfy 2 <= k <= V (k=" + std::to_string(k) +
                          ", V=" + std::to_string(perm.size()) + ")");
    }
    std::vector<ResidueClass> classes(k);
    for (std::size_t d = 0; d < k; ++d)
    {
        classes[d].modulus = k;
        classes[d].residue = d;
        classes[d].members.reserve(perm.size() / k + 1);
    }
    for (std::size_t r = 0; r < perm.size(); ++r)
    {
        classes[r % k].members.push_back(perm.at_rank(r));
    }
    return classes;
}

TokenId argmax(const LogitVector &logits)
{
    const auto s = logits.scores();
    // max_element returns the first maximum, i.e. the lowest id on ties.
    return static_cast<TokenId>(std::max_element(s.begin(), s.end()) - s.begin());
}

} // namespace watermod
