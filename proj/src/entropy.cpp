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

#include "watermod/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "watermod/error.hpp"

namespace watermod
{
namespace
{

// Neumaier-compensated sum: over a uniform distribution every term is the
// same, and plain accumulation drifts far enough from the exact total to
// keep the gate from reaching 1.
class CompensatedSum
{
public:
    void add(double x)
    {
        const double t = sum_ + x;
        carry_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

// Equal entries are the uniform distribution, whose entropy is the maximum
// by definition. 1/V is not representable for most V, so the summed value
// can land an ulp short of log2 V; this keeps the gate exact at 1.
bool all_equal(std::span<const double> probs)
{
    return std::adjacent_find(probs.begin(), probs.end(), std::not_equal_to<>()) == probs.end();
}

} // namespace

void EntropyConfig::validate() const
{
    if (kind == EntropyKind::spike && !(eta > 0.0 && std::isfinite(eta)))
    {
        throw ConfigError("spike entropy requires eta > 0 (eta=" + std::to_string(eta) + ")");
    }
}

void GateConfig::validate() const
{
    if (!(h_scale > 0.0 && std::isfinite(h_scale)))
    {
        throw ConfigError("h_scale must be > 0 (h_scale=" + std::to_string(h_scale) + ")");
    }
    entropy.validate();
}

EntropyValue shannon_entropy(std::span<const double> probs)
{
    const double h_max = std::log2(static_cast<double>(probs.size()));
    if (all_equal(probs))
    {
        return {h_max, h_max};
    }
    CompensatedSum sum;
    for (double p : probs)
    {
        if (p > 0.0)
        {
            sum.add(-p * std::log2(p));
        }
    }
    const double h = sum.value();
    // Rounding can push a uniform distribution a hair above log2 V.
    return {std::clamp(h, 0.0, h_max), h_max};
}

EntropyValue spike_entropy(std::span<const double> probs, double eta)
{
    const double h_max = 1.0 / (1.0 + eta / static_cast<double>(probs.size()));
    if (all_equal(probs))
    {
        return {h_max, h_max};
    }
    CompensatedSum sum;
    for (double p : probs)
    {
        sum.add(p / (1.0 + eta * p));
    }
    return {std::min(sum.value(), h_max), h_max};
}

EntropyValue entropy(std::span<const double> probs, const EntropyConfig &cfg)
{
    switch (cfg.kind)
    {
    case EntropyKind::spike:
        return spike_entropy(probs, cfg.eta);
    case EntropyKind::shannon:
        break;
    }
    return shannon_entropy(probs);
}

double p_odd(double h, double h_max, double h_scale)
{
    if (!(h_max > 0.0))
    {
        throw ConfigError("h_max must be > 0 (vocabulary needs at least 2 tokens)");
    }
    if (!(h_scale > 0.0))
    {
        throw ConfigError("h_scale must be > 0");
    }
    const double ratio = std::clamp(h / h_max, 0.0, 1.0);
    return std::clamp(std::pow(ratio, h_scale), 0.0, 1.0);
}

double p_odd(std::span<const double> probs, const GateConfig &cfg)
{
    const EntropyValue e = entropy(probs, cfg.entropy);
    return p_odd(e.value, e.max, cfg.h_scale);
}

} // namespace watermod
