#include "semcomp/gateway.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <future>

namespace semcomp {

using nlohmann::json;

namespace {

httplib::Client make_client(const GatewayOptions& options) {
    httplib::Client cli(options.url);
    const auto timeout = std::chrono::milliseconds(options.timeout_ms);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    return cli;
}

json parse_body(const httplib::Result& res, const std::string& endpoint) {
    if (!res) {
        throw GatewayError(0, endpoint + ": no response (" + httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
        throw GatewayError(res->status, endpoint + ": HTTP " + std::to_string(res->status) + " " + res->body);
    }
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw GatewayError(res->status, endpoint + ": malformed response body: " + e.what());
    }
}

json post(const GatewayOptions& options, const std::string& endpoint, const json& body) {
    auto cli = make_client(options);
    return parse_body(cli.Post(endpoint, body.dump(), "application/json"), endpoint);
}

}  // namespace

GatewayOptions gateway_options_from_env(GatewayOptions base) {
    if (const char* url = std::getenv("SEMCOMP_GATEWAY_URL"); url != nullptr && *url != '\0') base.url = url;
    if (const char* t = std::getenv("SEMCOMP_GATEWAY_TIMEOUT_MS"); t != nullptr && *t != '\0') {
        try {
            base.timeout_ms = std::stoi(t);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("SEMCOMP_GATEWAY_TIMEOUT_MS is not an integer: ") + t);
        }
    }
    return base;
}

EmbedResponse GatewayClient::embed_batch(std::span<const std::string> texts) const {
    const json body = post(options_, "/embed", json{{"texts", std::vector<std::string>(texts.begin(), texts.end())}});
    EmbedResponse out;
    try {
        out.dim = body.at("dim").get<std::size_t>();
        for (const auto& v : body.at("vectors")) out.vectors.emplace_back(v.get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw GatewayError(200, std::string("/embed: unexpected response shape: ") + e.what());
    }
    if (out.vectors.size() != texts.size()) {
        throw GatewayError(200, "/embed: got " + std::to_string(out.vectors.size()) + " vectors for " +
                                    std::to_string(texts.size()) + " texts");
    }
    for (const auto& v : out.vectors) {
        if (v.dim() != out.dim) throw GatewayError(200, "/embed: vector dimension does not match dim");
    }
    return out;
}

std::vector<EmbeddingVector> GatewayClient::embed(std::span<const std::string> texts) const {
    if (texts.empty()) return {};
    const std::size_t cap = std::max<std::size_t>(1, options_.batch_cap);
    std::vector<std::future<EmbedResponse>> pending;
    for (std::size_t start = 0; start < texts.size(); start += cap) {
        const auto batch = texts.subspan(start, std::min(cap, texts.size() - start));
        pending.push_back(std::async(std::launch::async, [this, batch] { return embed_batch(batch); }));
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    std::size_t dim = 0;
    for (auto& f : pending) {
        auto res = f.get();
        if (dim == 0) dim = res.dim;
        if (res.dim != dim) throw GatewayError(200, "/embed: dimension changed between batches");
        for (auto& v : res.vectors) out.push_back(std::move(v));
    }
    return out;
}

SummarizeResponse GatewayClient::summarize(std::string_view text, std::size_t max_len, std::size_t min_len) const {
    const json body = post(options_, "/summarize",
                           json{{"text", std::string(text)}, {"max_len", max_len}, {"min_len", min_len}});
    try {
        return SummarizeResponse{body.at("summary").get<std::string>(), body.at("input_len").get<std::size_t>(),
                                 body.at("output_len").get<std::size_t>()};
    } catch (const json::exception& e) {
        throw GatewayError(200, std::string("/summarize: unexpected response shape: ") + e.what());
    }
}

HealthResponse GatewayClient::health() const {
    auto cli = make_client(options_);
    const json body = parse_body(cli.Get("/health"), "/health");
    try {
        return HealthResponse{body.at("status").get<std::string>(),
                              body.at("models").at("embedder").get<std::string>(),
                              body.at("models").at("summarizer").get<std::string>(), body.at("dim").get<std::size_t>()};
    } catch (const json::exception& e) {
        throw GatewayError(200, std::string("/health: unexpected response shape: ") + e.what());
    }
}

std::string truncate_to_budget(std::string_view text, std::size_t budget) {
    const auto sentences = split_sentences(text);
    std::string out;
    std::size_t used = 0;
    for (const auto& s : sentences) {
        if (used + s.length > budget) break;
        if (!out.empty()) out.push_back(' ');
        out += s.text;
        used += s.length;
    }
    if (!out.empty() || sentences.empty()) return out;

    // First sentence alone is over budget: cut it at a word boundary.
    const std::string& first = sentences.front().text;
    std::size_t words = 0;
    std::size_t pos = 0;
    while (pos < first.size() && words < budget) {
        const std::size_t next = first.find(' ', pos);
        ++words;
        pos = next == std::string::npos ? first.size() : next + 1;
    }
    out = first.substr(0, pos);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::string GatewayCompressor::compress(const TopicChunk& chunk, const ChunkContext&, std::size_t budget) {
    const auto res = client_.summarize(chunk.text, budget, 1);
    if (res.summary.empty()) throw GatewayError(200, "/summarize: empty summary for non-empty input");
    return truncate_to_budget(res.summary, budget);
}

std::vector<ConformanceCheck> run_conformance(const GatewayClient& client) {
    std::vector<ConformanceCheck> checks;
    auto check = [&](const std::string& name, auto&& body) {
        ConformanceCheck c{name, false, {}};
        try {
            c.detail = body();
            c.passed = c.detail.empty();
        } catch (const std::exception& e) {
            c.detail = e.what();
        }
        checks.push_back(std::move(c));
    };

    std::size_t health_dim = 0;
    check("health reports model identities", [&]() -> std::string {
        const auto h = client.health();
        health_dim = h.dim;
        if (h.status != "ok") return "status is '" + h.status + "'";
        if (h.embedder.empty() || h.summarizer.empty()) return "missing model identity";
        if (h.dim == 0) return "dim is 0";
        return {};
    });

    const std::vector<std::string> texts = {"the river runs past the old mill",
                                            "interest rates rose again this quarter",
                                            "the river runs past the old mill", ""};
    check("embed preserves order", [&]() -> std::string {
        const auto fwd = client.embed_batch(texts);
        std::vector<std::string> rev(texts.rbegin(), texts.rend());
        const auto bwd = client.embed_batch(rev);
        const std::size_t n = texts.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (fwd.vectors[i].values().size() != bwd.vectors[n - 1 - i].values().size()) return "dimension differs";
            for (std::size_t d = 0; d < fwd.vectors[i].dim(); ++d) {
                if (std::abs(fwd.vectors[i][d] - bwd.vectors[n - 1 - i][d]) > 1e-6) {
                    return "vector " + std::to_string(i) + " changed when the batch was reversed";
                }
            }
        }
        if (cosine_similarity(fwd.vectors[0], fwd.vectors[2]) < 1.0 - 1e-6) return "identical texts differ";
        return {};
    });
    check("embed vectors are unit norm, empty text is zero", [&]() -> std::string {
        const auto res = client.embed_batch(texts);
        if (health_dim != 0 && res.dim != health_dim) {
            return "dim " + std::to_string(res.dim) + " differs from /health dim " + std::to_string(health_dim);
        }
        for (std::size_t i = 0; i + 1 < texts.size(); ++i) {
            if (std::abs(res.vectors[i].norm() - 1.0) > 1e-6) return "vector " + std::to_string(i) + " is not unit norm";
        }
        if (!res.vectors.back().is_zero()) return "empty text did not map to the zero vector";
        return {};
    });
    check("embed rejects batches over the cap with 413", [&]() -> std::string {
        const std::vector<std::string> big(client.options().batch_cap + 44, "x");
        try {
            client.embed_batch(big);
        } catch (const GatewayError& e) {
            return e.status() == 413 ? std::string{} : "expected 413, got " + std::to_string(e.status());
        }
        return "oversized batch was accepted";
    });

    std::string long_text;
    for (int i = 0; i < 60; ++i) {
        long_text += "Sentence number " + std::to_string(i) + " talks about the harbor and its ships. ";
    }
    check("summarize respects max_len", [&]() -> std::string {
        const auto res = client.summarize(long_text, 50, 10);
        if (res.output_len > 50) return "output_len " + std::to_string(res.output_len) + " > 50";
        if (res.summary.empty()) return "empty summary";
        return {};
    });
    check("summarize is deterministic", [&]() -> std::string {
        const auto a = client.summarize(long_text, 40, 5);
        const auto b = client.summarize(long_text, 40, 5);
        return a.summary == b.summary ? std::string{} : "two identical requests gave different summaries";
    });
    check("summarize rejects min_len > max_len with 422", [&]() -> std::string {
        try {
            client.summarize(long_text, 10, 20);
        } catch (const GatewayError& e) {
            return e.status() == 422 ? std::string{} : "expected 422, got " + std::to_string(e.status());
        }
        return "request was accepted";
    });
    return checks;
}

}  // namespace semcomp
