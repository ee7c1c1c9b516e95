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
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "watermod/core.hpp"
#include "watermod/multibit.hpp"
#include "watermod/zerobit.hpp"

namespace watermod::io
{

// One JSONL line: {"tokens": [...], "prompt_len": n, "meta": {"k": "v", ...}}.
struct SequenceRecord
{
    std::vector<TokenId> tokens;
    std::size_t prompt_len = 0;
    std::map<std::string, std::string> meta;

    friend bool operator==(const SequenceRecord &, const SequenceRecord &) = default;
};

nlohmann::json to_json(const SequenceRecord &record);
// Throws DataError on schema violations; `where` prefixes the message.
SequenceRecord record_from_json(const nlohmann::json &j, const std::string &where);

// Reads every non-blank line. Errors name the 1-based line number.
std::vector<SequenceRecord> read_jsonl(std::istream &in);
void write_jsonl(std::ostream &out, const std::vector<SequenceRecord> &records);
void write_record(std::ostream &out, const SequenceRecord &record);

// Report objects with the frozen field set
// {"mode","G","N","z","tau","watermarked","digits","bits_hex","tally"}.
nlohmann::json report_json(const ZeroBitReport &report);
nlohmann::json report_json(const MultiBitReport &report);

// Lossless text form for doubles stored in string metadata.
std::string format_double(double v);

std::string hex64(std::uint64_t v);
// Accepts decimal or 0x-prefixed hex. Throws ConfigError.
std::uint64_t parse_u64(const std::string &text, const std::string &what);

} // namespace watermod::io
