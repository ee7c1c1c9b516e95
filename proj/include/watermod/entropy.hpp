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

#include <span>

namespace watermod
{

enum class EntropyKind
{
    shannon,
    spike,
};

struct EntropyConfig
{
    EntropyKind kind = EntropyKind::shannon;
    double eta = 1.0; // spike only

    void validate() const;
};

// Parameters of the entropy gate p_odd = (H / H_max)^h_scale.
struct GateConfig
{
    double h_scale = 1.2;
    EntropyConfig entropy;

    void validate() const;
};

struct EntropyValue
{
    double value = 0.0;
    double max = 0.0;
};

// Shannon entropy in bits, with H_max = log2 V. Terms with p = 0 contribute 0.
EntropyValue shannon_entropy(std::span<const double> probs);

// Spike entropy sum p / (1 + eta p), with H_max = 1 / (1 + eta / V).
EntropyValue spike_entropy(std::span<const double> probs, double eta);

EntropyValue entropy(std::span<const double> probs, const EntropyConfig &cfg);

// (H / h_max)^h_scale clamped to [0, 1]. Throws ConfigError for h_max <= 0
// or h_scale <= 0.
double p_odd(double h, double h_max, double h_scale);

// Gate probability straight from a probability vector.
double p_odd(std::span<const double> probs, const GateConfig &cfg);

} // namespace watermod
