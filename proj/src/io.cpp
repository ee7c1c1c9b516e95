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

#include "watermod/io.hpp"

#include <charconv>
#include <cstdio>
#include <limits>

#include "watermod/error.hpp"

namespace watermod::io
{

using nlohmann::json;

json to_json(const SequenceRecord &record)
{
    return json{{"tokens", record.tokens}, {"prompt_len", record.prompt_len}, {"meta", record.meta}};
}

SequenceRecord record_from_json(const json &j, const std::string &where)
{
    if (!j.is_object())
    {
        throw DataError(where + ": record must be a JSON object");
    }
    SequenceRecord r;
    const auto tokens = j.find("tokens");
    if (tokens == j.end() || !tokens->is_array())
    {
        throw DataError(where + ": missing \"tokens\" array");
    }
    r.tokens.reserve(tokens->size());
    for (const json &t : *tokens)
    {
        if (!t.is_number_integer() || t.get<std::int64_t>() < 0 ||
            t.get<std::uint64_t>() > std::numeric_limits<TokenId>::max())
        {
            throw DataError(where + ": tokens must be non-negative integers");
        }
        r.tokens.push_back(t.get<TokenId>());
    }
    if (const auto pl = j.find("prompt_len"); pl != j.end())
    {
        if (!pl->is_number_integer() || pl->get<std::int64_t>() < 0)
        {
            throw DataError(where + ": \"prompt_len\" must be a non-negative integer");
        }
        r.prompt_len = pl->get<std::size_t>();
    }
    if (r.prompt_len > r.tokens.size())
    {
        throw DataError(where + ": \"prompt_len\" exceeds the number of tokens");
    }
    if (const auto meta = j.find("meta"); meta != j.end() && !meta->is_null())
    {
        if (!meta->is_object())
        {
            throw DataError(where + ": \"meta\" must be an object");
        }
        for (const auto &[k, v] : meta->items())
        {
            r.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
    }
    return r;
}

std::vector<SequenceRecord> read_jsonl(std::istream &in)
{
    std::vector<SequenceRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
        {
            continue;
        }
        const std::string where = "line " + std::to_string(line_no);
        json j;
        try
        {
            j = json::parse(line);
        }
        catch (const json::parse_error &e)
        {
            throw DataError(where + ": malformed JSON (" + e.what() + ")");
        }
        records.push_back(record_from_json(j, where));
    }
    return records;
}

void write_record(std::ostream &out, const SequenceRecord &record)
{
    out << to_json(record).dump() << '\n';
}

void write_jsonl(std::ostream &out, const std::vector<SequenceRecord> &records)
{
    for (const auto &r : records)
    {
        write_record(out, r);
    }
}

json report_json(const ZeroBitReport &report)
{
    return json{{"mode", "zero-bit"},
                {"G", report.green_hits},
                {"N", report.positions},
                {"z", report.z},
                {"tau", report.tau},
                {"watermarked", report.watermarked},
                {"digits", nullptr},
                {"bits_hex", nullptr},
                {"tally", nullptr}};
}

json report_json(const MultiBitReport &report)
{
    return json{{"mode", "multi-bit"},
                {"G", report.hits},
                {"N", report.positions},
                {"z", report.z},
                {"tau", report.tau},
                {"watermarked", report.watermarked},
                {"digits", report.digits},
                {"bits_hex", bits_to_hex(report.bits)},
                {"tally", report.tally.counts},
                {"self_referential", report.self_referential}};
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_u64(const std::string &text, const std::string &what)
{
    std::string_view s = text;
    int base = 10;
    if (s.starts_with("0x") || s.starts_with("0X"))
    {
        s.remove_prefix(2);
        base = 16;
    }
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    {
        throw ConfigError(what + ": '" + text + "' is not a valid 64-bit unsigned integer");
    }
    return v;
}

} // namespace watermod::io
