#pragma once

#include <string>
#include <vector>

namespace swe2 {

struct RawMessage {
    std::string text;  // UTF-8
};

// Normalized token sequence: lower-case [a-z0-9] tokens plus the two
// upper-case sentinels "USER" and "URL".
using TokenSeq = std::vector<std::string>;

inline const std::string kUserSentinel = "USER";
inline const std::string kUrlSentinel = "URL";

inline bool is_sentinel(const std::string& token) {
    return token == kUserSentinel || token == kUrlSentinel;
}

// Canonical cleaning pipeline: mentions -> USER, links -> URL, hashtags
// keep their content, everything lower-cased, punctuation and non-ASCII
// dropped, whitespace-split. A message may normalize to zero tokens.
TokenSeq normalize(const RawMessage& raw);

std::string join_tokens(const TokenSeq& tokens);

}  // namespace swe2
