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
#include <stdexcept>
#include <string>
#include <vector>

namespace watermod
{

// Base for every error raised by the library. `code()` is a stable,
// machine-readable identifier used in CLI error JSON.
class Error : public std::runtime_error
{
public:
    explicit Error(const std::string &message) : std::runtime_error(message) {}
    virtual const char *code() const noexcept = 0;
};

// Malformed values: non-finite logits, empty prompts, out-of-range tokens.
class InvalidInputError : public Error
{
public:
    using Error::Error;
    const char *code() const noexcept override { return "invalid_input"; }
};

// Parameters that violate a configuration constraint (k > V, delta <= 0, ...).
class ConfigError : public Error
{
public:
    using Error::Error;
    const char *code() const noexcept override { return "config_error"; }
};

// Not enough inspected positions to compute a statistic.
class InsufficientDataError : public Error
{
public:
    using Error::Error;
    const char *code() const noexcept override { return "insufficient_data"; }
};

// Payload recovery left one or more digit positions without observations.
class RecoveryIncompleteError : public InsufficientDataError
{
public:
    RecoveryIncompleteError(const std::string &message, std::vector<std::size_t> uncovered)
        : InsufficientDataError(message), uncovered_(std::move(uncovered))
    {
    }
    const char *code() const noexcept override { return "recovery_incomplete"; }
    const std::vector<std::size_t> &uncovered() const noexcept { return uncovered_; }

private:
    std::vector<std::size_t> uncovered_;
};

// Unreadable or malformed input files (bad JSONL line, bad hex, ...).
class DataError : public Error
{
public:
    using Error::Error;
    const char *code() const noexcept override { return "data_error"; }
};

} // namespace watermod
