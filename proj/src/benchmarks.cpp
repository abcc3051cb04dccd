#include "semcomp/benchmarks.hpp"

#include "semcomp/segmentation.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace semcomp {

using nlohmann::json;

namespace {

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
    return s;
}

// Bounded draw without std distributions.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

}  // namespace

const PasskeyTemplate& default_passkey_template() {
    static const PasskeyTemplate tmpl{
        "A secret number is hidden somewhere in the long text below. Find it and keep it in mind, "
        "because you will be asked for it at the end.",
        {"The river runs past the old mill.", "Clouds drift slowly over the green hills.",
         "A dog sleeps in the warm afternoon light.", "The market opens early on weekdays.",
         "Children walk home along the quiet road."},
        "The pass key is {key}. Remember it. {key} is the pass key.",
        "What is the pass key? The pass key is",
    };
    return tmpl;
}

PasskeyCase generate_passkey_case(std::uint64_t seed, std::size_t target_len, std::size_t digits,
                                  const PasskeyTemplate& tmpl) {
    if (digits == 0) throw std::invalid_argument("passkey needs at least one digit");
    if (tmpl.filler.empty()) throw std::invalid_argument("passkey template has no filler");

    std::mt19937_64 rng(seed);
    PasskeyCase c;
    c.seed = seed;
    c.target_len = target_len;
    c.passkey.push_back(static_cast<char>('1' + draw_below(rng, 9)));
    for (std::size_t i = 1; i < digits; ++i) c.passkey.push_back(static_cast<char>('0' + draw_below(rng, 10)));

    const std::string key_line = replace_all(tmpl.passkey_line, "{key}", c.passkey);
    const std::size_t fixed = count_length(tmpl.preamble) + count_length(key_line) + count_length(tmpl.query);
    if (target_len < fixed) {
        throw std::invalid_argument("target_len " + std::to_string(target_len) + " cannot hold the " +
                                    std::to_string(fixed) + "-word preamble, passkey line and query");
    }

    std::size_t total = fixed;
    while (total < target_len) {
        total += count_length(tmpl.filler[c.filler_count % tmpl.filler.size()]);
        ++c.filler_count;
    }
    c.insertion_position = static_cast<std::size_t>(draw_below(rng, c.filler_count + 1));

    c.context = tmpl.preamble;
    for (std::size_t i = 0; i <= c.filler_count; ++i) {
        if (i == c.insertion_position) c.context += " " + key_line;
        if (i < c.filler_count) c.context += " " + tmpl.filler[i % tmpl.filler.size()];
    }
    c.context += " " + tmpl.query;
    c.query = tmpl.query;
    c.answer = c.passkey;
    return c;
}

std::optional<std::string> extract_passkey(std::string_view answer_text) {
    auto is_digit = [](char ch) { return ch >= '0' && ch <= '9'; };
    std::size_t i = 0;
    while (i < answer_text.size() && !is_digit(answer_text[i])) ++i;
    if (i == answer_text.size()) return std::nullopt;
    std::size_t j = i;
    while (j < answer_text.size() && is_digit(answer_text[j])) ++j;
    return std::string(answer_text.substr(i, j - i));
}

RetrievalScore score_retrieval(std::span<const PasskeyCase> cases, std::span<const std::string> answers) {
    if (cases.size() != answers.size()) {
        throw std::invalid_argument("score_retrieval: " + std::to_string(cases.size()) + " cases but " +
                                    std::to_string(answers.size()) + " answers");
    }
    RetrievalScore s;
    s.n_cases = cases.size();
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto got = extract_passkey(answers[i]);
        if (got && *got == cases[i].answer) ++s.n_correct;
    }
    s.accuracy = s.n_cases == 0 ? 0.0 : static_cast<double>(s.n_correct) / static_cast<double>(s.n_cases);
    return s;
}

double perplexity(std::span<const double> token_logprobs) {
    if (token_logprobs.empty()) throw std::invalid_argument("perplexity: no log-probabilities");
    long double sum = 0.0L;
    for (double lp : token_logprobs) sum += lp;
    return static_cast<double>(std::exp(-sum / static_cast<long double>(token_logprobs.size())));
}

json to_json(const PasskeyCase& c) {
    return json{{"seed", c.seed},       {"target_len", c.target_len}, {"passkey", c.passkey},
                {"context", c.context}, {"query", c.query},           {"answer", c.answer}};
}

PasskeyCase passkey_case_from_json(const json& j) {
    PasskeyCase c;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.target_len = j.at("target_len").get<std::size_t>();
    c.passkey = j.at("passkey").get<std::string>();
    c.context = j.at("context").get<std::string>();
    c.query = j.at("query").get<std::string>();
    c.answer = j.at("answer").get<std::string>();
    return c;
}

json to_json(const RetrievalScore& s) {
    return json{{"n_cases", s.n_cases}, {"n_correct", s.n_correct}, {"accuracy", s.accuracy}};
}

void write_cases_jsonl(std::ostream& out, std::span<const PasskeyCase> cases) {
    for (const auto& c : cases) out << to_json(c).dump() << '\n';
}

std::vector<PasskeyCase> read_cases_jsonl(std::istream& in) {
    std::vector<PasskeyCase> cases;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_whitespace(line).empty()) continue;
        try {
            cases.push_back(passkey_case_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw std::invalid_argument("cases line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cases;
}

}  // namespace semcomp
