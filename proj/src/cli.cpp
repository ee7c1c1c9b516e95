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

#include "watermod/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "watermod/error.hpp"
#include "watermod/io.hpp"
#include "watermod/stats.hpp"

namespace watermod::cli
{

using nlohmann::json;

namespace
{

constexpr const char *kKeyEnv = "WATERMOD_KEY";

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
    {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string &text, const std::string &what)
{
    double v = 0.0;
    const char *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v))
    {
        throw ConfigError(what + ": '" + text + "' is not a finite number");
    }
    return v;
}

std::size_t to_size(const std::string &text, const std::string &what)
{
    return static_cast<std::size_t>(io::parse_u64(text, what));
}

// Re-raises `e` with the same error code and a context prefix.
[[noreturn]] void rethrow_with_context(const Error &e, const std::string &ctx)
{
    const std::string msg = ctx + ": " + e.what();
    if (const auto *ri = dynamic_cast<const RecoveryIncompleteError *>(&e))
        throw RecoveryIncompleteError(msg, ri->uncovered());
    if (dynamic_cast<const InsufficientDataError *>(&e))
        throw InsufficientDataError(msg);
    if (dynamic_cast<const ConfigError *>(&e))
        throw ConfigError(msg);
    if (dynamic_cast<const InvalidInputError *>(&e))
        throw InvalidInputError(msg);
    throw DataError(msg);
}

struct Options
{
    std::string config_path;
    std::string in_path;
    std::string out_path;
    std::string roc_csv;
    std::string key_text;
    std::size_t count = 100;
    std::size_t prompt_len = 4;
    std::uint64_t prompt_seed = 1;
    std::uint64_t key_seed = 2;
    Settings flags;
};

class Session
{
public:
    Session(Options opts, std::istream &in, std::ostream &out) : opts_(std::move(opts)), in_(in), out_(out)
    {
        if (!opts_.config_path.empty())
        {
            std::ifstream f(opts_.config_path);
            if (!f)
            {
                throw ConfigError("cannot open config file " + opts_.config_path);
            }
            file_ = parse_config_file(f, opts_.config_path);
        }
    }

    RunConfig config_for(const std::map<std::string, std::string> *meta) const
    {
        Settings s = default_settings();
        if (meta != nullptr)
        {
            overlay(s, *meta);
        }
        overlay(s, file_);
        overlay(s, opts_.flags);
        return resolve(s);
    }

    // Resolves an automatic beta in place and returns the (cached) model.
    const ToyModel &model_for(RunConfig &cfg)
    {
        if (cfg.beta_auto)
        {
            const std::string key = "beta|" + io::format_double(cfg.gate.h_scale) + "|" +
                                    std::to_string(static_cast<int>(cfg.gate.entropy.kind)) + "|" +
                                    io::format_double(cfg.gate.entropy.eta) + "|" + model_key(cfg.model);
            auto it = betas_.find(key);
            if (it == betas_.end())
            {
                it = betas_.emplace(key, gate_balanced_beta(cfg.model, cfg.gate)).first;
            }
            cfg.model.beta = it->second;
            cfg.beta_auto = false;
        }
        const std::string key = model_key(cfg.model);
        auto it = models_.find(key);
        if (it == models_.end())
        {
            it = models_.emplace(key, std::make_unique<ToyModel>(cfg.model)).first;
        }
        return *it->second;
    }

    WatermarkKey key() const
    {
        std::string text = opts_.key_text;
        if (text.empty())
        {
            if (const char *env = std::getenv(kKeyEnv))
            {
                text = env;
            }
        }
        if (text.empty())
        {
            throw ConfigError(std::string("a watermark key is required: pass --key or set ") + kKeyEnv);
        }
        return WatermarkKey{io::parse_u64(text, "key")};
    }

    bool has_key() const { return !opts_.key_text.empty() || std::getenv(kKeyEnv) != nullptr; }

    std::vector<io::SequenceRecord> read_input()
    {
        if (opts_.in_path == "-")
        {
            return io::read_jsonl(in_);
        }
        std::ifstream f(opts_.in_path);
        if (!f)
        {
            throw DataError("cannot open input file " + opts_.in_path);
        }
        return io::read_jsonl(f);
    }

    // Prompt records: from --in (whole token list is the prompt) or random.
    std::vector<io::SequenceRecord> prompts(const RunConfig &cfg)
    {
        std::vector<io::SequenceRecord> out;
        if (!opts_.in_path.empty())
        {
            out = read_input();
            for (auto &r : out)
            {
                r.prompt_len = r.tokens.size();
                r.meta.erase("mode");
                r.meta.erase("key_fingerprint");
                r.meta.erase("label");
            }
            return out;
        }
        for (auto &p : random_prompts(opts_.count, opts_.prompt_len, cfg.model.vocab_size, opts_.prompt_seed))
        {
            io::SequenceRecord r;
            r.prompt_len = p.size();
            r.tokens = std::move(p);
            out.push_back(std::move(r));
        }
        return out;
    }

    std::ostream &sink()
    {
        if (opts_.out_path.empty())
        {
            return out_;
        }
        if (!file_out_)
        {
            file_out_ = std::make_unique<std::ofstream>(opts_.out_path);
            if (!*file_out_)
            {
                throw DataError("cannot open output file " + opts_.out_path);
            }
        }
        return *file_out_;
    }

    bool has_sink() const { return !opts_.out_path.empty(); }
    std::ostream &out() { return out_; }
    const Options &opts() const { return opts_; }

private:
    static std::string model_key(const ToyModelConfig &m)
    {
        return std::to_string(m.vocab_size) + "|" + std::to_string(m.order) + "|" + io::format_double(m.beta) + "|" +
               std::to_string(m.seed) + "|" + io::format_double(m.eos_penalty);
    }

    Options opts_;
    std::istream &in_;
    std::ostream &out_;
    Settings file_;
    std::map<std::string, double> betas_;
    std::map<std::string, std::unique_ptr<ToyModel>> models_;
    std::unique_ptr<std::ofstream> file_out_;
};

void add_echo(std::map<std::string, std::string> &meta, const RunConfig &cfg)
{
    for (const auto &[k, v] : echo(cfg))
    {
        meta[k] = v;
    }
}

std::vector<TokenId> joined(std::span<const TokenId> a, std::span<const TokenId> b)
{
    std::vector<TokenId> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

json summary_of(std::span<const double> z)
{
    const Moments m = summarize(z);
    return json{{"mean_z", m.mean}, {"std_z", m.stddev}, {"max_abs_z", m.max_abs}};
}

void print_summary(Session &s, json summary)
{
    s.sink().flush();
    s.out() << json{{"summary", std::move(summary)}}.dump() << '\n';
}

int cmd_generate(Session &s)
{
    RunConfig cfg = s.config_for(nullptr);
    const ToyModel &model = s.model_for(cfg);
    std::size_t n = 0;
    for (auto &rec : s.prompts(cfg))
    {
        rec.tokens = joined(rec.tokens, unwatermarked_generate(model, rec.tokens, cfg.max_tokens));
        Settings e = echo(cfg);
        for (const char *k : {"model-vocab", "model-order", "model-beta", "model-seed", "model-eos-penalty", "max-tokens"})
        {
            rec.meta[k] = e.at(k);
        }
        rec.meta["label"] = "clean";
        io::write_record(s.sink(), rec);
        ++n;
    }
    print_summary(s, {{"command", "generate"}, {"records", n}});
    return 0;
}

int cmd_embed(Session &s)
{
    RunConfig cfg = s.config_for(nullptr);
    const ToyModel &model = s.model_for(cfg);
    const WatermarkKey key = s.key();
    std::size_t n = 0;
    const auto prompts = s.prompts(cfg);
    std::optional<MultiBitConfig> mb;
    if (cfg.mode == Mode::multi_bit)
    {
        mb = cfg.multibit();
    }
    for (auto rec : prompts)
    {
        const std::vector<TokenId> cont = mb ? multibit_generate(model, rec.tokens, key, *mb, cfg.max_tokens).tokens
                                             : zerobit_generate(model, rec.tokens, key, cfg.zerobit(), cfg.max_tokens).tokens;
        rec.tokens = joined(rec.tokens, cont);
        add_echo(rec.meta, cfg);
        rec.meta["key_fingerprint"] = io::hex64(splitmix64(key.value));
        rec.meta["label"] = "watermarked";
        io::write_record(s.sink(), rec);
        ++n;
    }
    print_summary(s, {{"command", "embed"}, {"mode", mode_name(cfg.mode)}, {"records", n}});
    return 0;
}

int cmd_detect(Session &s, bool recover_only)
{
    const char *command = recover_only ? "recover" : "detect";
    if (s.opts().in_path.empty())
    {
        throw ConfigError(std::string(command) + " needs --in (a JSONL file or - for stdin)");
    }
    const auto records = s.read_input();
    const WatermarkKey key = s.key();
    std::vector<double> z;
    std::size_t flagged = 0;
    std::size_t matches = 0;
    std::size_t with_expected = 0;
    std::string mode_seen;
    for (std::size_t i = 0; i < records.size(); ++i)
    {
        const auto &rec = records[i];
        json report;
        try
        {
            RunConfig cfg = s.config_for(&rec.meta);
            if (recover_only && cfg.mode != Mode::multi_bit)
            {
                throw ConfigError("recover needs multi-bit data but the record is configured as zero-bit");
            }
            const ToyModel &model = s.model_for(cfg);
            if (cfg.mode == Mode::zero_bit)
            {
                const ZeroBitReport r = zerobit_detect(model, rec.tokens, rec.prompt_len, key, cfg.zerobit());
                z.push_back(r.z);
                flagged += r.watermarked ? 1 : 0;
                report = io::report_json(r);
            }
            else
            {
                const RecoverConfig rc = cfg.recover();
                const MultiBitReport r = multibit_recover(model, rec.tokens, rec.prompt_len, key, rc);
                z.push_back(r.z);
                flagged += r.watermarked ? 1 : 0;
                if (rc.expected)
                {
                    ++with_expected;
                    matches += r.bits == rc.expected->bits() ? 1 : 0;
                }
                report = io::report_json(r);
            }
            const std::string m = mode_name(cfg.mode);
            mode_seen = mode_seen.empty() || mode_seen == m ? m : "mixed";
        }
        catch (const Error &e)
        {
            rethrow_with_context(e, "record " + std::to_string(i + 1));
        }
        s.sink() << report.dump() << '\n';
    }
    json summary = {{"command", command}, {"mode", mode_seen}, {"records", records.size()}, {"watermarked", flagged}};
    if (!z.empty())
    {
        summary.update(summary_of(z));
    }
    if (with_expected > 0)
    {
        summary["payload_checked"] = with_expected;
        summary["payload_matches"] = matches;
    }
    print_summary(s, std::move(summary));
    return 0;
}

void write_roc_csv(const std::string &path, const RocResult &roc)
{
    std::ofstream f(path);
    if (!f)
    {
        throw DataError("cannot open ROC output file " + path);
    }
    f << "fpr,tpr\n";
    for (const RocPoint &p : roc.curve)
    {
        f << io::format_double(p.fpr) << ',' << io::format_double(p.tpr) << '\n';
    }
}

int cmd_bench(Session &s)
{
    RunConfig cfg = s.config_for(nullptr);
    const ToyModel &model = s.model_for(cfg);
    const auto prompts = s.prompts(cfg);
    const auto keys = s.has_key() ? std::vector<WatermarkKey>(prompts.size(), s.key())
                                  : random_keys(prompts.size(), s.opts().key_seed);
    std::optional<MultiBitConfig> mb;
    if (cfg.mode == Mode::multi_bit)
    {
        mb = cfg.multibit();
    }
    const RecoverConfig rc = cfg.recover();

    std::vector<double> marked_z(prompts.size());
    std::vector<double> clean_z(prompts.size());
    std::size_t exact = 0;
    for (std::size_t i = 0; i < prompts.size(); ++i)
    {
        io::SequenceRecord marked = prompts[i];
        io::SequenceRecord clean = prompts[i];
        clean.tokens = joined(clean.tokens, unwatermarked_generate(model, clean.tokens, cfg.max_tokens));
        try
        {
            if (mb)
            {
                marked.tokens =
                    joined(marked.tokens, multibit_generate(model, marked.tokens, keys[i], *mb, cfg.max_tokens).tokens);
                const MultiBitReport r = multibit_recover(model, marked.tokens, marked.prompt_len, keys[i], rc);
                marked_z[i] = r.z;
                exact += r.bits == mb->payload.bits() ? 1 : 0;
                clean_z[i] = multibit_recover(model, clean.tokens, clean.prompt_len, keys[i], rc).z;
            }
            else
            {
                marked.tokens = joined(marked.tokens,
                                       zerobit_generate(model, marked.tokens, keys[i], cfg.zerobit(), cfg.max_tokens).tokens);
                marked_z[i] = zerobit_detect(model, marked.tokens, marked.prompt_len, keys[i], cfg.zerobit()).z;
                clean_z[i] = zerobit_detect(model, clean.tokens, clean.prompt_len, keys[i], cfg.zerobit()).z;
            }
        }
        catch (const Error &e)
        {
            rethrow_with_context(e, "bench pair " + std::to_string(i + 1));
        }
        if (s.has_sink())
        {
            add_echo(marked.meta, cfg);
            add_echo(clean.meta, cfg);
            marked.meta["key_fingerprint"] = io::hex64(splitmix64(keys[i].value));
            marked.meta["label"] = "watermarked";
            clean.meta["label"] = "clean";
            io::write_record(s.sink(), marked);
            io::write_record(s.sink(), clean);
        }
    }
    const RocResult roc = auroc(marked_z, clean_z);
    if (!s.opts().roc_csv.empty())
    {
        write_roc_csv(s.opts().roc_csv, roc);
    }
    json summary = {{"command", "bench"},
                    {"mode", mode_name(cfg.mode)},
                    {"pairs", prompts.size()},
                    {"length", cfg.max_tokens},
                    {"model_beta", cfg.model.beta},
                    {"auroc", roc.auroc},
                    {"watermarked", summary_of(marked_z)},
                    {"clean", summary_of(clean_z)}};
    if (mb)
    {
        summary["payload_matches"] = exact;
    }
    print_summary(s, std::move(summary));
    return 0;
}

int cmd_calibrate(Session &s)
{
    RunConfig cfg = s.config_for(nullptr);
    const ToyModel &model = s.model_for(cfg);
    CorpusConfig corpus;
    corpus.sequences = s.opts().count;
    corpus.length = cfg.max_tokens;
    corpus.prompt_len = s.opts().prompt_len;
    corpus.prompt_seed = s.opts().prompt_seed;
    corpus.key_seed = s.opts().key_seed;

    std::vector<double> z;
    if (cfg.mode == Mode::zero_bit)
    {
        z = null_calibration(model, corpus, cfg.zerobit()).z;
    }
    else
    {
        if (corpus.sequences < 2)
        {
            throw InvalidInputError("null calibration needs at least 2 sequences");
        }
        const RecoverConfig rc = cfg.recover();
        if (!rc.expected)
        {
            throw ConfigError("multi-bit calibration needs a reference --payload");
        }
        const auto prompts = random_prompts(corpus.sequences, corpus.prompt_len, model.vocab_size(), corpus.prompt_seed);
        const auto keys = random_keys(corpus.sequences, corpus.key_seed);
        z.resize(corpus.sequences);
        parallel_for(corpus.sequences, [&](std::size_t i) {
            const auto seq = joined(prompts[i], unwatermarked_generate(model, prompts[i], corpus.length));
            z[i] = multibit_recover(model, seq, corpus.prompt_len, keys[i], rc).z;
        });
    }
    json summary = {{"command", "calibrate"},
                    {"mode", mode_name(cfg.mode)},
                    {"sequences", corpus.sequences},
                    {"length", corpus.length},
                    {"model_beta", cfg.model.beta}};
    summary.update(summary_of(z));
    print_summary(s, std::move(summary));
    return 0;
}

std::string setting_help(const std::string &name)
{
    static const std::map<std::string, std::string> help = {
        {"mode", "zero-bit or multi-bit"},
        {"delta", "logit bonus for green tokens (default 1.0 zero-bit, 2.5 multi-bit)"},
        {"h-scale", "entropy gate exponent"},
        {"entropy", "gate entropy measure: shannon or spike"},
        {"eta", "spike entropy parameter"},
        {"k", "number of rank residue classes (payload digit base)"},
        {"payload", "multi-bit payload as hex"},
        {"bits", "payload length in bits"},
        {"max-tokens", "tokens generated per prompt"},
        {"tau", "detection threshold on z"},
        {"model-beta", "toy model sharpness, or auto for the gate-balanced value"},
        {"model-order", "toy model context length"},
        {"model-vocab", "toy model vocabulary size"},
        {"model-seed", "toy model seed"},
        {"model-eos-penalty", "constant subtracted from the end-of-sequence logit"},
    };
    const auto it = help.find(name);
    return it == help.end() ? std::string() : it->second;
}

void add_common(CLI::App *app, Options &o)
{
    app->add_option("--config", o.config_path, "key=value config file");
    app->add_option("--key", o.key_text, "secret key, decimal or 0x hex (or set WATERMOD_KEY)");
    app->add_option("--in", o.in_path, "input JSONL file, - for stdin");
    app->add_option("--out", o.out_path, "output JSONL file (default stdout)");
    app->add_option("--count", o.count, "number of random prompts when --in is absent");
    app->add_option("--prompt-len", o.prompt_len, "length of random prompts");
    app->add_option("--prompt-seed", o.prompt_seed, "seed for random prompts");
    app->add_option("--key-seed", o.key_seed, "seed for per-sequence keys (bench, calibrate)");
    app->add_option("--roc-csv", o.roc_csv, "write ROC points as CSV (bench)");
    for (const std::string &name : setting_names())
    {
        app->add_option_function<std::string>(
            "--" + name, [&o, name](const std::string &v) { o.flags[name] = v; }, setting_help(name));
    }
}

void write_error(std::ostream &err, const std::string &code, const std::string &message)
{
    err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

} // namespace

const char *mode_name(Mode mode)
{
    return mode == Mode::multi_bit ? "multi-bit" : "zero-bit";
}

const std::vector<std::string> &setting_names()
{
    static const std::vector<std::string> names = {
        "mode",        "delta",       "h-scale",     "entropy",    "eta",        "k",
        "payload",     "bits",        "max-tokens",  "tau",        "model-beta", "model-order",
        "model-vocab", "model-seed",  "model-eos-penalty",
    };
    return names;
}

Settings default_settings()
{
    return {
        {"mode", "zero-bit"},     {"h-scale", "1.2"},      {"entropy", "shannon"},   {"eta", "1.0"},
        {"k", "4"},               {"bits", "16"},          {"max-tokens", "200"},    {"tau", "4.0"},
        {"model-beta", "auto"},   {"model-order", "2"},    {"model-vocab", "4096"},  {"model-seed", "0x5eed"},
        {"model-eos-penalty", "8"},
    };
}

Settings parse_config_file(std::istream &in, const std::string &name)
{
    const auto &names = setting_names();
    Settings s;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
        {
            line.erase(hash);
        }
        const std::string body = trim(line);
        if (body.empty())
        {
            continue;
        }
        const std::string where = name + ":" + std::to_string(line_no);
        const auto eq = body.find('=');
        if (eq == std::string::npos)
        {
            throw ConfigError(where + ": expected key=value");
        }
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key == "key")
        {
            throw ConfigError(where + ": the watermark key may not be stored in a config file");
        }
        if (std::find(names.begin(), names.end(), key) == names.end())
        {
            throw ConfigError(where + ": unknown setting '" + key + "'");
        }
        s[key] = value;
    }
    return s;
}

void overlay(Settings &base, const Settings &top)
{
    const auto &names = setting_names();
    for (const auto &[k, v] : top)
    {
        if (std::find(names.begin(), names.end(), k) != names.end())
        {
            base[k] = v;
        }
    }
}

RunConfig resolve(const Settings &s)
{
    auto get = [&](const char *k) -> std::optional<std::string> {
        const auto it = s.find(k);
        return it == s.end() || it->second.empty() ? std::nullopt : std::optional<std::string>(it->second);
    };
    auto need = [&](const char *k) {
        auto v = get(k);
        if (!v)
        {
            throw ConfigError(std::string("missing setting '") + k + "'");
        }
        return *v;
    };

    RunConfig c;
    const std::string mode = need("mode");
    if (mode == "zero-bit")
        c.mode = Mode::zero_bit;
    else if (mode == "multi-bit")
        c.mode = Mode::multi_bit;
    else
        throw ConfigError("mode must be zero-bit or multi-bit (got '" + mode + "')");

    c.delta = get("delta") ? to_double(*get("delta"), "delta") : (c.mode == Mode::multi_bit ? 2.5 : 1.0);
    c.gate.h_scale = to_double(need("h-scale"), "h-scale");
    const std::string ent = need("entropy");
    if (ent == "shannon")
        c.gate.entropy.kind = EntropyKind::shannon;
    else if (ent == "spike")
        c.gate.entropy.kind = EntropyKind::spike;
    else
        throw ConfigError("entropy must be shannon or spike (got '" + ent + "')");
    c.gate.entropy.eta = to_double(need("eta"), "eta");
    c.k = to_size(need("k"), "k");
    c.bits = to_size(need("bits"), "bits");
    c.payload_hex = get("payload");
    c.max_tokens = to_size(need("max-tokens"), "max-tokens");
    c.tau = to_double(need("tau"), "tau");

    c.model.vocab_size = to_size(need("model-vocab"), "model-vocab");
    c.model.order = to_size(need("model-order"), "model-order");
    c.model.seed = io::parse_u64(need("model-seed"), "model-seed");
    c.model.eos_penalty = to_double(need("model-eos-penalty"), "model-eos-penalty");
    const std::string beta = need("model-beta");
    c.beta_auto = beta == "auto";
    c.model.beta = c.beta_auto ? 1.0 : to_double(beta, "model-beta");

    c.model.validate();
    c.gate.validate();
    // Every setting is checked, including those the selected mode ignores,
    // so that an echo stays valid if only the mode is changed.
    c.zerobit().validate();
    if (c.k > c.model.vocab_size)
    {
        throw ConfigError("k=" + std::to_string(c.k) + " exceeds model-vocab");
    }
    c.recover().validate();
    if (c.payload_hex)
    {
        c.multibit().validate();
    }
    return c;
}

ZeroBitConfig RunConfig::zerobit() const
{
    ZeroBitConfig z;
    z.delta = delta;
    z.gate = gate;
    z.tau = tau;
    return z;
}

MultiBitConfig RunConfig::multibit() const
{
    if (!payload_hex)
    {
        throw ConfigError("multi-bit embedding needs --payload");
    }
    MultiBitConfig m;
    m.delta = delta;
    m.k = k;
    m.payload = Payload::from_hex(*payload_hex, bits, k);
    return m;
}

RecoverConfig RunConfig::recover() const
{
    RecoverConfig r;
    r.k = k;
    r.bits = bits;
    r.tau = tau;
    if (payload_hex)
    {
        r.expected = Payload::from_hex(*payload_hex, bits, k);
    }
    return r;
}

Settings echo(const RunConfig &c)
{
    Settings s = {
        {"mode", mode_name(c.mode)},
        {"delta", io::format_double(c.delta)},
        {"h-scale", io::format_double(c.gate.h_scale)},
        {"entropy", c.gate.entropy.kind == EntropyKind::spike ? "spike" : "shannon"},
        {"eta", io::format_double(c.gate.entropy.eta)},
        {"k", std::to_string(c.k)},
        {"bits", std::to_string(c.bits)},
        {"max-tokens", std::to_string(c.max_tokens)},
        {"tau", io::format_double(c.tau)},
        {"model-beta", c.beta_auto ? "auto" : io::format_double(c.model.beta)},
        {"model-order", std::to_string(c.model.order)},
        {"model-vocab", std::to_string(c.model.vocab_size)},
        {"model-seed", io::hex64(c.model.seed)},
        {"model-eos-penalty", io::format_double(c.model.eos_penalty)},
    };
    if (c.payload_hex)
    {
        s["payload"] = Payload::from_hex(*c.payload_hex, c.bits, c.k).hex();
    }
    return s;
}

int run(const std::vector<std::string> &args, std::istream &in, std::ostream &out, std::ostream &err)
{
    CLI::App app{"watermod: rank-residue watermark embedding and detection for token streams"};
    app.require_subcommand(1);
    Options opts;
    struct Command
    {
        const char *name;
        const char *help;
    };
    const Command commands[] = {
        {"generate", "unwatermarked greedy generations (JSONL)"},
        {"embed", "watermarked generations (JSONL) with config echo"},
        {"detect", "one report per record plus a corpus summary"},
        {"recover", "multi-bit payload recovery reports"},
        {"bench", "paired watermarked/clean corpora and AUROC"},
        {"calibrate", "null z moments on clean generations"},
    };
    for (const Command &c : commands)
    {
        add_common(app.add_subcommand(c.name, c.help), opts);
    }

    std::vector<std::string> argv(args.rbegin(), args.rend()); // CLI11 takes them reversed
    try
    {
        app.parse(argv);
    }
    catch (const CLI::CallForHelp &)
    {
        out << app.help();
        return 0;
    }
    catch (const CLI::ParseError &e)
    {
        write_error(err, "usage_error", e.what());
        return 2;
    }

    try
    {
        Session session(opts, in, out);
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "generate")
            return cmd_generate(session);
        if (name == "embed")
            return cmd_embed(session);
        if (name == "detect")
            return cmd_detect(session, false);
        if (name == "recover")
            return cmd_detect(session, true);
        if (name == "bench")
            return cmd_bench(session);
        return cmd_calibrate(session);
    }
    catch (const ConfigError &e)
    {
        write_error(err, e.code(), e.what());
        return 2;
    }
    catch (const Error &e)
    {
        write_error(err, e.code(), e.what());
        return 3;
    }
    catch (const std::exception &e)
    {
        write_error(err, "internal_error", e.what());
        return 1;
    }
}

} // namespace watermod::cli
