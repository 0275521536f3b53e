#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace consum::text {

// Lowercase (ASCII) and split on non-alphanumeric characters. Bytes >= 0x80
// are kept inside tokens so multi-byte UTF-8 sequences survive intact.
// This is the single tokenization used by the hashed encoder, the
// token-alignment similarity, and the ROUGE metrics.
std::vector<std::string> tokenize(std::string_view text);

// Split on ASCII whitespace, preserving token case and punctuation.
std::vector<std::string> whitespace_tokens(std::string_view text);

std::string join(const std::vector<std::string>& tokens, std::string_view sep);

std::string_view trim(std::string_view text);

}  // namespace consum::text
