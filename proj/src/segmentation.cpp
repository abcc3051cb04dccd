#include "semcomp/segmentation.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace semcomp {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_terminator(char c) {
    return c == '.' || c == '!' || c == '?' || c == ';' || c == ':';
}

std::size_t count_chars(std::string_view text) {
    std::size_t n = 0;
    for (char c : text) {
        if (!is_space(c)) ++n;
    }
    return n;
}

struct CounterRegistry {
    std::mutex mutex;
    std::map<std::string, LengthCounter> counters{
        {"words", count_length},
        {"chars", count_chars},
    };
};

CounterRegistry& registry() {
    static CounterRegistry instance;
    return instance;
}

}  // namespace

std::size_t count_length(std::string_view text) {
    std::size_t words = 0;
    bool in_word = false;
    for (char c : text) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return words;
}

void register_length_counter(const std::string& name, LengthCounter counter) {
    if (!counter) throw std::invalid_argument("length counter '" + name + "' is empty");
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    reg.counters[name] = std::move(counter);
}

LengthCounter find_length_counter(const std::string& name) {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    auto it = reg.counters.find(name);
    if (it == reg.counters.end()) throw std::invalid_argument("unknown length counter '" + name + "'");
    return it->second;
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::vector<Sentence> split_sentences(std::string_view text, const LengthCounter& counter) {
    const std::string normalized = normalize_whitespace(text);
    std::vector<Sentence> sentences;
    std::size_t start = 0;
    auto emit = [&](std::size_t end) {
        Sentence s;
        s.index = sentences.size();
        s.text = normalized.substr(start, end - start);
        s.length = counter(s.text);
        sentences.push_back(std::move(s));
    };
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        if (!is_terminator(normalized[i])) continue;
        const bool at_end = i + 1 == normalized.size();
        if (at_end || normalized[i + 1] == ' ') {
            emit(i + 1);
            // Skip the single separating space.
            start = i + 2;
            ++i;
        }
    }
    if (start < normalized.size()) emit(normalized.size());
    return sentences;
}

std::string join_sentences(const std::vector<Sentence>& sentences) {
    std::string out;
    for (const auto& s : sentences) {
        if (!out.empty()) out.push_back(' ');
        out += s.text;
    }
    return out;
}

std::vector<SentenceBlock> build_blocks(const std::vector<Sentence>& sentences,
                                        std::size_t target_block_len) {
    if (target_block_len == 0) throw std::invalid_argument("target_block_len must be at least 1");

    std::vector<SentenceBlock> blocks;
    SentenceBlock current;
    current.sentence_span = {0, 0};
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (current.sentence_span.size() == 0) current.sentence_span.begin = i;
        if (!current.text.empty()) current.text.push_back(' ');
        current.text += sentences[i].text;
        current.length += sentences[i].length;
        current.sentence_span.end = i + 1;
        if (current.length >= target_block_len) {
            current.index = blocks.size();
            blocks.push_back(std::move(current));
            current = SentenceBlock{};
        }
    }
    if (current.sentence_span.size() > 0) {
        current.index = blocks.size();
        blocks.push_back(std::move(current));
    }
    return blocks;
}

}  // namespace semcomp
