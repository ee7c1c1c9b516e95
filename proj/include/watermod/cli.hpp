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
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "watermod/entropy.hpp"
#include "watermod/model.hpp"
#include "watermod/multibit.hpp"
#include "watermod/zerobit.hpp"

namespace watermod::cli
{

enum class Mode
{
    zero_bit,
    multi_bit,
};

const char *mode_name(Mode mode);

// Raw settings keyed by long flag name without dashes ("delta", "h-scale",
// "model-vocab", ...). Layers are merged defaults < record meta < config
// file < flags.
using Settings = std::map<std::string, std::string>;

// Names accepted in config files, record metadata and as flags.
const std::vector<std::string> &setting_names();

Settings default_settings();

// key=value lines; '#' starts a comment. Throws ConfigError on unknown keys,
// and on "key": the secret key is only taken from --key or WATERMOD_KEY.
Settings parse_config_file(std::istream &in, const std::string &name);

// Overlays `top` onto `base`, keeping only known setting names from `top`.
void overlay(Settings &base, const Settings &top);

struct RunConfig
{
    Mode mode = Mode::zero_bit;
    double delta = 1.0;
    GateConfig gate;
    std::size_t k = 4;
    std::size_t bits = 16;
    std::optional<std::string> payload_hex;
    std::size_t max_tokens = 200;
    double tau = 4.0;
    ToyModelConfig model;
    bool beta_auto = true; // beta is solved with gate_balanced_beta

    ZeroBitConfig zerobit() const;
    MultiBitConfig multibit() const; // requires payload_hex
    RecoverConfig recover() const;
};

RunConfig resolve(const Settings &settings);

// Settings that reproduce `cfg` exactly (beta resolved to a number). The key
// is never part of it.
Settings echo(const RunConfig &cfg);

/// Entry point used by the `watermod` tool. Reads `--in -` from `in`,
/// writes results to `out` unless --out is given, and reports failures as
/// {"error": {"code": ..., "message": ...}} on `err`. Returns the exit status.
int run(const std::vector<std::string> &args, std::istream &in, std::ostream &out, std::ostream &err);

} // namespace watermod::cli
