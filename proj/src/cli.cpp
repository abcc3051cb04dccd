#include "semcomp/cli.hpp"

#include "semcomp/benchmarks.hpp"
#include "semcomp/gateway.hpp"
#include "semcomp/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace semcomp::cli {

using nlohmann::json;

namespace {

// Bad invocation: missing file, malformed config, bad flag values.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool is_stdio(const std::string& path) { return path.empty() || path == "-"; }

std::string read_all(const std::string& path, std::istream& in, const std::string& what) {
    std::ostringstream buf;
    if (is_stdio(path)) {
        buf << in.rdbuf();
        return buf.str();
    }
    std::ifstream file(path, std::ios::binary);
    if (!file) throw UsageError("cannot open " + what + " file '" + path + "'");
    buf << file.rdbuf();
    return buf.str();
}

void write_all(const std::string& path, std::ostream& out, const std::string& content, const std::string& what) {
    if (is_stdio(path)) {
        out << content;
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw UsageError("cannot write " + what + " file '" + path + "'");
    file << content;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

// Flags mirroring PipelineConfig keys. Values land here and are applied only
// when the flag was actually given.
struct ConfigFlags {
    std::size_t target_block_len = 0, gamma1 = 0, gamma2 = 0, s_max = 0, max_depth = 0, k = 0, embed_dim = 0,
                passthrough_threshold = 0, workers = 0;
    double alpha = 0, dedup_threshold = 0;
    bool contiguous_chunks = false;
    std::string embedder, compressor, separator, length_unit, gateway_url;
    std::uint64_t seed = 0;
    int gateway_timeout_ms = 0;
    std::vector<std::pair<std::string, CLI::Option*>> options;

    void add(CLI::App& app) {
        auto opt = [&](const std::string& key, auto& target, const std::string& help) {
            std::string dashed = key;
            std::replace(dashed.begin(), dashed.end(), '_', '-');
            std::string names = "--" + dashed;
            if (dashed != key) names += ",--" + key;
            options.emplace_back(key, app.add_option(names, target, help));
        };
        opt("target_block_len", target_block_len, "Words per sentence-level block");
        opt("gamma1", gamma1, "Minimum compressor input length");
        opt("gamma2", gamma2, "Maximum compressor input length");
        opt("alpha", alpha, "Target compression ratio");
        opt("s_max", s_max, "Per-chunk summary cap");
        opt("max_depth", max_depth, "Maximum chunk tree depth");
        opt("k", k, "Fixed root cluster count");
        opt("embedder", embedder, "stub | gateway");
        opt("embed_dim", embed_dim, "Stub embedding dimension");
        opt("compressor", compressor, "fallback | identity | external");
        opt("dedup_threshold", dedup_threshold, "Near-duplicate cosine threshold");
        opt("seed", seed, "Seed for the stub embedder");
        opt("passthrough_threshold", passthrough_threshold, "Inputs up to this length pass through");
        opt("separator", separator, "Segment separator");
        opt("length_unit", length_unit, "words | chars");
        opt("workers", workers, "Parallel chunk compressions");
        opt("gateway_url", gateway_url, "Model gateway URL");
        opt("gateway_timeout_ms", gateway_timeout_ms, "Model gateway timeout");
        auto* flag = app.add_flag("--contiguous-chunks,--contiguous_chunks", contiguous_chunks,
                                  "Split clusters into contiguous runs");
        options.emplace_back("contiguous_chunks", flag);
    }

    bool given(const std::string& key) const {
        for (const auto& [name, o] : options) {
            if (name == key) return o->count() > 0;
        }
        return false;
    }

    void apply(PipelineConfig& c) const {
        if (given("target_block_len")) c.target_block_len = target_block_len;
        if (given("gamma1")) c.gamma1 = gamma1;
        if (given("gamma2")) c.gamma2 = gamma2;
        if (given("alpha")) c.alpha = alpha;
        if (given("s_max")) c.s_max = s_max;
        if (given("max_depth")) c.max_depth = max_depth;
        if (given("k")) c.k = k;
        if (given("embedder")) c.embedder = embedder;
        if (given("embed_dim")) c.embed_dim = embed_dim;
        if (given("compressor")) c.compressor = compressor;
        if (given("dedup_threshold")) c.dedup_threshold = dedup_threshold;
        if (given("seed")) c.seed = seed;
        if (given("passthrough_threshold")) c.passthrough_threshold = passthrough_threshold;
        if (given("separator")) c.separator = separator;
        if (given("length_unit")) c.length_unit = length_unit;
        if (given("workers")) c.workers = workers;
        if (given("gateway_url")) c.gateway_url = gateway_url;
        if (given("gateway_timeout_ms")) c.gateway_timeout_ms = gateway_timeout_ms;
        if (given("contiguous_chunks")) c.contiguous_chunks = contiguous_chunks;
    }
};

PipelineConfig load_config(const std::string& config_path, const ConfigFlags& flags, std::istream& in) {
    PipelineConfig config;
    if (!config_path.empty()) {
        const std::string text = read_all(config_path, in, "config");
        try {
            config = config_from_json(json::parse(text));
        } catch (const std::exception& e) {
            throw UsageError("malformed config '" + config_path + "': " + e.what());
        }
    }
    GatewayOptions gw{config.gateway_url, config.gateway_timeout_ms};
    try {
        gw = gateway_options_from_env(gw);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    config.gateway_url = gw.url;
    config.gateway_timeout_ms = gw.timeout_ms;
    flags.apply(config);
    try {
        config.validate();
    } catch (const std::exception& e) {
        throw UsageError(std::string("invalid configuration: ") + e.what());
    }
    return config;
}

std::vector<std::size_t> parse_lengths(const std::string& csv) {
    std::vector<std::size_t> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(item, &pos);
            if (pos != item.size() || v <= 0) throw std::invalid_argument(item);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw UsageError("--lengths: '" + item + "' is not a positive integer");
        }
    }
    if (out.empty()) throw UsageError("--lengths: no values");
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Semantic compression of long documents for fixed-context LLMs"};
    app.require_subcommand(1, 1);

    std::string input, output, report, config_path;
    bool timings = false;
    ConfigFlags flags;
    auto* compress = app.add_subcommand("compress", "Compress a document and emit a run report");
    compress->add_option("--input,-i", input, "Input text file (default stdin)");
    compress->add_option("--output,-o", output, "Compressed text output (default stdout)");
    compress->add_option("--report", report, "Run report path (default <output>.report.json, or stderr)");
    compress->add_option("--config,-c", config_path, "Flat JSON config file");
    compress->add_flag("--timings", timings, "Record stage timings in the report");
    flags.add(*compress);

    std::string lengths_csv;
    double a_alpha = 0.15;
    std::size_t a_gamma1 = 60, a_gamma2 = 600;
    std::string a_output;
    auto* analyze = app.add_subcommand("analyze", "Cost report for a list of chunk lengths");
    analyze->add_option("--lengths", lengths_csv, "Comma-separated chunk lengths")->required();
    analyze->add_option("--alpha", a_alpha, "Compression ratio");
    analyze->add_option("--gamma1", a_gamma1, "Minimum compressor input length");
    analyze->add_option("--gamma2", a_gamma2, "Maximum compressor input length");
    analyze->add_option("--output,-o", a_output, "Output path (default stdout)");

    std::uint64_t g_seed = 0;
    std::size_t g_count = 1, g_target = 30000, g_digits = 5;
    std::string g_output;
    auto* gen = app.add_subcommand("passkey-gen", "Generate passkey retrieval cases as JSONL");
    gen->add_option("--seed", g_seed, "First seed");
    gen->add_option("--count", g_count, "Number of cases (seeds seed..seed+count-1)");
    gen->add_option("--target-len,--target_len", g_target, "Prompt length in words");
    gen->add_option("--digits", g_digits, "Passkey digits");
    gen->add_option("--output,-o", g_output, "Output path (default stdout)");

    std::string e_cases, e_answers, e_output;
    auto* eval = app.add_subcommand("passkey-eval", "Score answers against passkey cases");
    eval->add_option("--cases", e_cases, "Cases JSONL file")->required();
    eval->add_option("--answers", e_answers, "Answers, one per line")->required();
    eval->add_option("--output,-o", e_output, "Output path (default stdout)");

    std::string p_input, p_output;
    auto* ppl = app.add_subcommand("ppl", "Perplexity from per-token log-probabilities");
    ppl->add_option("--input,-i", p_input, "One log-probability per line (default stdin)");
    ppl->add_option("--output,-o", p_output, "Output path (default stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (compress->parsed()) {
            if (!is_stdio(report) && !is_stdio(output) && report == output) {
                throw UsageError("invalid flag combination: --report and --output name the same file");
            }
            PipelineConfig config = load_config(config_path, flags, in);
            if (flags.given("gateway_url") && config.embedder != "gateway" &&
                parse_compressor_kind(config.compressor) != CompressorKind::external_abstractive) {
                throw UsageError("invalid flag combination: --gateway-url given but no gateway backend selected");
            }
            config.record_timings = timings;
            const std::string text = read_all(input, in, "input");
            if (normalize_whitespace(text).empty()) throw UsageError("input is empty");

            const BackendSet backends = make_backends(config);
            const PipelineResult result = compress_document(text, config, backends.view());
            std::string body = result.document.text;
            if (body.empty() || body.back() != '\n') body.push_back('\n');
            write_all(output, out, body, "output");

            const std::string report_text = run_report(result).dump(2) + "\n";
            if (!is_stdio(report)) {
                write_all(report, out, report_text, "report");
            } else if (!is_stdio(output)) {
                write_all(output + ".report.json", out, report_text, "report");
            } else {
                err << report_text;
            }
            if (result.degraded) {
                for (const auto& w : result.warnings) err << "warning: " << w << "\n";
                return kDegraded;
            }
            return kOk;
        }
        if (analyze->parsed()) {
            const auto lengths = parse_lengths(lengths_csv);
            CostReport r;
            try {
                r = complexity_report(lengths, a_alpha, a_gamma1, a_gamma2);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            write_all(a_output, out, to_json(r).dump(2) + "\n", "output");
            return kOk;
        }
        if (gen->parsed()) {
            std::vector<PasskeyCase> cases;
            try {
                for (std::size_t i = 0; i < g_count; ++i) {
                    cases.push_back(generate_passkey_case(g_seed + i, g_target, g_digits));
                }
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            std::ostringstream buf;
            write_cases_jsonl(buf, cases);
            write_all(g_output, out, buf.str(), "output");
            return kOk;
        }
        if (eval->parsed()) {
            std::istringstream cases_in(read_all(e_cases, in, "cases"));
            std::vector<PasskeyCase> cases;
            try {
                cases = read_cases_jsonl(cases_in);
            } catch (const std::invalid_argument& e) {
                throw UsageError(std::string("malformed cases file: ") + e.what());
            }
            auto answers = split_lines(read_all(e_answers, in, "answers"));
            // Trailing blank lines are not answers.
            while (answers.size() > cases.size() && !answers.empty() && answers.back().empty()) answers.pop_back();
            if (answers.size() != cases.size()) {
                throw UsageError("answers file has " + std::to_string(answers.size()) + " lines for " +
                                 std::to_string(cases.size()) + " cases");
            }
            write_all(e_output, out, to_json(score_retrieval(cases, answers)).dump(2) + "\n", "output");
            return kOk;
        }
        if (ppl->parsed()) {
            std::vector<double> logprobs;
            std::size_t line_no = 0;
            for (const auto& line : split_lines(read_all(p_input, in, "input"))) {
                ++line_no;
                const std::string trimmed = normalize_whitespace(line);
                if (trimmed.empty()) continue;
                try {
                    std::size_t pos = 0;
                    logprobs.push_back(std::stod(trimmed, &pos));
                    if (pos != trimmed.size()) throw std::invalid_argument(trimmed);
                } catch (const std::exception&) {
                    throw UsageError("logprobs line " + std::to_string(line_no) + " is not a number: '" + trimmed + "'");
                }
            }
            if (logprobs.empty()) throw UsageError("no log-probabilities in input");
            const json j{{"perplexity", perplexity(logprobs)}, {"n_tokens", logprobs.size()}};
            write_all(p_output, out, j.dump(2) + "\n", "output");
            return kOk;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "backend failure: " << e.what() << "\n";
        return kDegraded;
    }
    return kUsage;
}

}  // namespace semcomp::cli
