#include "semcomp/cli.hpp"

#include "support/synthetic_corpus.hpp"

#include <doctest.h>

#include <stdexcept>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using semcomp::testing::make_topic_document;

namespace {

struct Invocation {
    int code = -1;
    std::string out;
    std::string err;
};

Invocation invoke(const std::vector<std::string>& args, const std::string& stdin_text = "") {
    std::istringstream in(stdin_text);
    std::ostringstream out, err;
    Invocation r;
    r.code = semcomp::cli::run(args, in, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("semcomp_cli_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& content) const {
        const auto p = path / name;
        std::ofstream(p, std::ios::binary) << content;
        return p.string();
    }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("compress writes text and a sidecar report") {
    TempDir dir;
    const auto doc = make_topic_document(2, 3, 6000);
    const auto input = dir.file("doc.txt", doc.text);
    const auto output = dir / "out.txt";
    const auto r = invoke({"compress", "--input", input, "--output", output, "--alpha", "0.15", "--embedder", "stub",
                           "--compressor", "fallback"});
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    const auto text = slurp(output);
    CHECK_FALSE(text.empty());
    const auto report = nlohmann::json::parse(slurp(output + ".report.json"));
    CHECK(report["input_length"] == doc.words);
    CHECK(report["ratio"].get<double>() < 0.3);
    CHECK(report["degraded"] == false);
}

TEST_CASE("compress over stdin and stdout puts the report on stderr") {
    const auto doc = make_topic_document(5, 2, 5000);
    const auto r = invoke({"compress"}, doc.text);
    CHECK(r.code == 0);
    CHECK_FALSE(r.out.empty());
    CHECK(nlohmann::json::parse(r.err)["input_length"] == doc.words);
}

TEST_CASE("compress with an explicit report path") {
    TempDir dir;
    const auto doc = make_topic_document(6, 2, 5000);
    const auto report = dir / "r.json";
    const auto r = invoke({"compress", "-i", dir.file("d.txt", doc.text), "--report", report});
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(slurp(report)).contains("cost"));
    CHECK_FALSE(r.out.empty());
}

TEST_CASE("identical invocations are byte-identical") {
    TempDir dir;
    const auto input = dir.file("doc.txt", make_topic_document(7, 4, 9000).text);
    invoke({"compress", "-i", input, "-o", dir / "a.txt"});
    invoke({"compress", "-i", input, "-o", dir / "b.txt"});
    CHECK(slurp(dir / "a.txt") == slurp(dir / "b.txt"));
    CHECK(slurp(dir / "a.txt.report.json") == slurp(dir / "b.txt.report.json"));
}

TEST_CASE("config file, then flags, take precedence over defaults") {
    TempDir dir;
    const auto doc = make_topic_document(8, 2, 5000);
    const auto input = dir.file("doc.txt", doc.text);
    const auto config = dir.file("c.json", R"({"passthrough_threshold": 100000, "alpha": 0.2})");

    auto r = invoke({"compress", "-i", input, "-c", config});
    CHECK(r.code == 0);
    CHECK(r.out == doc.text + "\n");

    r = invoke({"compress", "-i", input, "-c", config, "--passthrough-threshold", "10"});
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.err)["ratio"].get<double>() < 0.5);

    r = invoke({"compress", "-i", input, "--passthrough_threshold", "100000"});
    CHECK(r.out == doc.text + "\n");
}

TEST_CASE("analyze example") {
    const auto r = invoke({"analyze", "--lengths", "150,150", "--alpha", "0.5", "--gamma1", "100", "--gamma2", "200"});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["sum_sq"] == 45000.0);
    CHECK(j["compress_bound"] == 120000.0);
    CHECK(j["bound_satisfied"] == true);
    CHECK(j["units"] == "model cost units");

    CHECK(invoke({"analyze", "--lengths", "150,abc"}).code == 1);
    CHECK(invoke({"analyze", "--lengths", "150", "--alpha", "2"}).code == 1);
    CHECK(invoke({"analyze"}).code == 1);
}

TEST_CASE("passkey-gen and passkey-eval") {
    TempDir dir;
    const auto cases = dir / "cases.jsonl";
    auto r = invoke({"passkey-gen", "--seed", "3", "--count", "10", "--target-len", "300", "-o", cases});
    REQUIRE(r.code == 0);

    std::ifstream in(cases);
    std::string line, answers;
    int i = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        answers += (i++ == 4 ? std::string("no idea") : "The key is " + j["passkey"].get<std::string>()) + "\n";
    }
    CHECK(i == 10);
    const auto answers_path = dir.file("answers.txt", answers);
    r = invoke({"passkey-eval", "--cases", cases, "--answers", answers_path});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["accuracy"] == 0.9);
    CHECK(j["n_correct"] == 9);

    const auto short_answers = dir.file("short.txt", "1\n2\n");
    r = invoke({"passkey-eval", "--cases", cases, "--answers", short_answers});
    CHECK(r.code == 1);
    CHECK(r.err.find("answers file") != std::string::npos);

    CHECK(invoke({"passkey-gen", "--target-len", "5"}).code == 1);
}

TEST_CASE("ppl") {
    auto r = invoke({"ppl"}, "-0.6931471805599453\n-0.6931471805599453\n\n");
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["perplexity"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(j["n_tokens"] == 2);
    CHECK(invoke({"ppl"}, "").code == 1);
    CHECK(invoke({"ppl"}, "-1\nbanana\n").code == 1);
}

TEST_CASE("usage errors have distinct diagnostics") {
    TempDir dir;
    const auto input = dir.file("doc.txt", "Some words here.");

    auto r = invoke({"compress", "-i", dir / "missing.txt"});
    CHECK(r.code == 1);
    CHECK(r.err.find("cannot open input file") != std::string::npos);

    r = invoke({"compress", "-i", input, "-c", dir.file("bad.json", "{not json")});
    CHECK(r.code == 1);
    CHECK(r.err.find("malformed config") != std::string::npos);

    r = invoke({"compress", "-i", input, "-c", dir.file("unknown.json", R"({"alpah": 1})")});
    CHECK(r.code == 1);
    CHECK(r.err.find("malformed config") != std::string::npos);

    r = invoke({"compress", "-i", input, "-o", dir / "x", "--report", dir / "x"});
    CHECK(r.code == 1);
    CHECK(r.err.find("invalid flag combination") != std::string::npos);

    r = invoke({"compress", "-i", input, "--gateway-url", "http://example.invalid"});
    CHECK(r.code == 1);
    CHECK(r.err.find("invalid flag combination") != std::string::npos);

    r = invoke({"compress", "-i", dir.file("empty.txt", "  \n")});
    CHECK(r.code == 1);
    CHECK(r.err.find("input is empty") != std::string::npos);

    r = invoke({"compress", "-i", input, "--alpha", "0"});
    CHECK(r.code == 1);
    CHECK(r.err.find("invalid configuration") != std::string::npos);

    CHECK(invoke({}).code == 1);
    CHECK(invoke({"frobnicate"}).code == 1);
    CHECK(invoke({"compress", "analyze"}).code == 1);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("unreachable gateway degrades with exit code 2") {
    const auto doc = make_topic_document(9, 2, 5000);
    const auto r = invoke({"compress", "--embedder", "gateway", "--gateway-url", "http://127.0.0.1:1",
                           "--gateway-timeout-ms", "300"},
                          doc.text);
    CHECK(r.code == 2);
    CHECK(r.err.find("warning:") != std::string::npos);
    CHECK_FALSE(r.out.empty());
}
