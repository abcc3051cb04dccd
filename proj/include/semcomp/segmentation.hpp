#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace semcomp {

/// Maps a piece of text to its length in the pipeline's length unit.
using LengthCounter = std::function<std::size_t(std::string_view)>;

/// Number of whitespace-delimited words. This is the default length unit.
std::size_t count_length(std::string_view text);

/// Registers (or replaces) a named length counter. "words" and "chars" are
/// always present.
void register_length_counter(const std::string& name, LengthCounter counter);

/// Throws std::invalid_argument for an unknown name.
LengthCounter find_length_counter(const std::string& name);

struct Sentence {
    std::size_t index = 0;
    std::string text;
    std::size_t length = 0;
};

/// Half-open range [begin, end) of sentence indices.
struct SentenceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const SentenceSpan&) const = default;
};

struct SentenceBlock {
    std::size_t index = 0;
    SentenceSpan sentence_span;
    std::string text;
    std::size_t length = 0;
};

/// Collapses every whitespace run to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

/// Splits on the terminators . ! ? ; : when followed by whitespace or end of
/// text. No abbreviation handling: "Dr. Smith" yields two sentences.
std::vector<Sentence> split_sentences(std::string_view text,
                                      const LengthCounter& counter = count_length);

/// Joins sentence texts with single spaces.
std::string join_sentences(const std::vector<Sentence>& sentences);

/// Greedy sequential packing. A block is closed as soon as its length
/// reaches target_block_len; only the last block may fall short.
std::vector<SentenceBlock> build_blocks(const std::vector<Sentence>& sentences,
                                        std::size_t target_block_len);

}  // namespace semcomp
