#include "semcomp/benchmarks.hpp"
#include "semcomp/segmentation.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

using namespace semcomp;

namespace {

std::size_t occurrences(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("passkey case for seed 17") {
    const auto c = generate_passkey_case(17, 500);
    CHECK(c.passkey.size() == 5);
    CHECK(c.passkey[0] != '0');
    CHECK(occurrences(c.context, c.passkey) == 2);
    CHECK(c.answer == c.passkey);
    CHECK(c.context.rfind(c.query) == c.context.size() - c.query.size());
    CHECK(count_length(c.context) >= 500);
    const auto again = generate_passkey_case(17, 500);
    CHECK(again.context == c.context);
    CHECK(again.passkey == c.passkey);
}

TEST_CASE("passkey layout holds for 500 seeds") {
    const auto& tmpl = default_passkey_template();
    std::size_t longest_filler = 0;
    for (const auto& f : tmpl.filler) longest_filler = std::max(longest_filler, count_length(f));
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const std::size_t target = 60 + seed * 7;
        const auto c = generate_passkey_case(seed, target);
        CHECK(occurrences(c.context, c.passkey) == 2);
        CHECK(c.context.find_first_of("0123456789") == c.context.find(c.passkey));
        const std::size_t len = count_length(c.context);
        CHECK(len >= target);
        CHECK(len < target + longest_filler);
        CHECK(c.insertion_position <= c.filler_count);
        CHECK(generate_passkey_case(seed, target).context == c.context);
        CHECK(c.context.rfind(tmpl.preamble, 0) == 0);
    }
}

TEST_CASE("passkey generator rejects impossible requests") {
    CHECK_THROWS_AS(generate_passkey_case(1, 10), std::invalid_argument);
    CHECK_THROWS_AS(generate_passkey_case(1, 500, 0), std::invalid_argument);
    CHECK(generate_passkey_case(1, 500, 9).passkey.size() == 9);
}

TEST_CASE("insertion positions spread over the filler") {
    std::set<std::size_t> positions;
    std::size_t low = 0, high = 0, filler = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto c = generate_passkey_case(seed, 30000);
        filler = c.filler_count;
        positions.insert(c.insertion_position);
        if (c.insertion_position < filler / 4) ++low;
        if (c.insertion_position > 3 * filler / 4) ++high;
    }
    CHECK(filler > 4000);
    CHECK(positions.size() >= 95);
    CHECK(low >= 10);
    CHECK(high >= 10);
}

TEST_CASE("extract_passkey") {
    CHECK(extract_passkey("The pass key is 42.") == std::optional<std::string>("42"));
    CHECK_FALSE(extract_passkey("no digits here"));
    CHECK(extract_passkey("maybe 123 or 456") == std::optional<std::string>("123"));
    CHECK(extract_passkey("7") == std::optional<std::string>("7"));
    CHECK_FALSE(extract_passkey(""));
}

TEST_CASE("score_retrieval") {
    std::vector<PasskeyCase> cases;
    std::vector<std::string> answers;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cases.push_back(generate_passkey_case(seed, 200));
        answers.push_back("It is " + cases.back().passkey + ".");
    }
    CHECK(score_retrieval(cases, answers).accuracy == 1.0);
    answers[3] = "I forgot.";
    const auto s = score_retrieval(cases, answers);
    CHECK(s.n_correct == 9);
    CHECK(s.accuracy == 0.9);
    std::vector<std::string> wrong(10, "0");
    CHECK(score_retrieval(cases, wrong).accuracy == 0.0);
    answers[0] = cases[0].passkey + "9";  // digits must match exactly
    CHECK(score_retrieval(cases, answers).n_correct == 8);
    answers.pop_back();
    CHECK_THROWS_AS(score_retrieval(cases, answers), std::invalid_argument);
}

TEST_CASE("perplexity") {
    std::vector<double> halves(37, -std::log(2.0));
    CHECK(std::fabs(perplexity(halves) - 2.0) < 1e-12);
    std::vector<double> zeros(5, 0.0);
    CHECK(perplexity(zeros) == 1.0);
    std::vector<double> pair{-1.0, -3.0};
    CHECK(std::fabs(perplexity(pair) - 7.38905609893065) < 1e-6);
    CHECK_THROWS_AS(perplexity(std::vector<double>{}), std::invalid_argument);

    std::mt19937_64 rng(4);
    std::vector<double> lps(200);
    for (auto& lp : lps) lp = -static_cast<double>(rng() % 10000) / 1000.0;
    const double base = perplexity(lps);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(lps.begin(), lps.end(), rng);
        CHECK(perplexity(lps) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("cases round-trip through JSONL") {
    std::vector<PasskeyCase> cases{generate_passkey_case(1, 300), generate_passkey_case(2, 400)};
    std::stringstream buf;
    write_cases_jsonl(buf, cases);
    const auto line = buf.str().substr(0, buf.str().find('\n'));
    const auto j = nlohmann::json::parse(line);
    CHECK(j.size() == 6);
    for (const char* key : {"seed", "target_len", "passkey", "context", "query", "answer"}) CHECK(j.contains(key));

    const auto back = read_cases_jsonl(buf);
    REQUIRE(back.size() == 2);
    CHECK(back[1].context == cases[1].context);
    CHECK(back[1].passkey == cases[1].passkey);
    CHECK(back[0].seed == 1);

    std::stringstream bad("{\"seed\": 1}\n");
    CHECK_THROWS_AS(read_cases_jsonl(bad), std::invalid_argument);
}
