#pragma once

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semcomp {

/// Fixed strings a passkey prompt is assembled from. The passkey line must
/// contain "{key}" exactly twice.
struct PasskeyTemplate {
    std::string preamble;
    std::vector<std::string> filler;  // cycled in order
    std::string passkey_line;
    std::string query;
};

const PasskeyTemplate& default_passkey_template();

struct PasskeyCase {
    std::uint64_t seed = 0;
    std::size_t target_len = 0;
    std::string passkey;
    std::string context;  // preamble, filler, passkey line, filler, query
    std::string query;
    std::string answer;
    std::size_t insertion_position = 0;  // filler sentences before the passkey line
    std::size_t filler_count = 0;
};

/// Builds a prompt of about target_len words (never shorter, at most one
/// filler sentence longer) with the passkey line after a seeded number of
/// filler sentences. Throws std::invalid_argument when target_len cannot hold
/// the fixed parts or digits is 0.
PasskeyCase generate_passkey_case(std::uint64_t seed, std::size_t target_len, std::size_t digits = 5,
                                  const PasskeyTemplate& tmpl = default_passkey_template());

/// First maximal run of ASCII digits, if any.
std::optional<std::string> extract_passkey(std::string_view answer_text);

struct RetrievalScore {
    std::size_t n_cases = 0;
    std::size_t n_correct = 0;
    double accuracy = 0.0;
};

RetrievalScore score_retrieval(std::span<const PasskeyCase> cases, std::span<const std::string> answers);

/// exp(-mean(logprobs)). Throws std::invalid_argument on an empty list.
double perplexity(std::span<const double> token_logprobs);

nlohmann::json to_json(const PasskeyCase& c);
PasskeyCase passkey_case_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RetrievalScore& s);

void write_cases_jsonl(std::ostream& out, std::span<const PasskeyCase> cases);
/// Throws std::invalid_argument naming the offending line on malformed input.
std::vector<PasskeyCase> read_cases_jsonl(std::istream& in);

}  // namespace semcomp
