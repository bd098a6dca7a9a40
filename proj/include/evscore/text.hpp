#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace evscore::text {

/// One whitespace-delimited word of an essay.
///
/// `begin`/`end` are byte offsets of `surface` in the tokenized text, so a
/// run of tokens maps back to a highlightable character span.
struct Token {
  std::string surface;
  std::string norm;  // lowercased, leading/trailing punctuation stripped
  std::string stem;  // stem(norm)
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Lowercases ASCII letters and strips leading/trailing punctuation
/// (ASCII and common typographic quotes/dashes). Interior hyphens and
/// apostrophes are kept; a typographic apostrophe becomes `'`.
std::string normalize(std::string_view word);

/// Splits on whitespace and normalizes. Tokens whose norm is empty
/// (pure punctuation) are dropped.
std::vector<Token> tokenize(std::string_view text);

struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Sentence boundaries: `.`, `!` or `?` followed by whitespace or end of
/// text. Spans are trimmed of surrounding whitespace and never empty.
std::vector<SentenceSpan> sentence_spans(std::string_view text);
std::vector<std::string> split_sentences(std::string_view text);

/// A single pass of the Porter (1980) suffix-stripping algorithm over a
/// lowercase word. Non-alphabetic words are returned unchanged.
std::string porter_stem_once(std::string_view word);

/// Porter stemming iterated to a fixed point, so stem(stem(w)) == stem(w).
/// A single pass is not idempotent ("agreed" -> "agre" -> "agr").
std::string stem(std::string_view word);

}  // namespace evscore::text
