#include "swe2/textnorm.hpp"

#include <cctype>
#include <sstream>

namespace swe2 {

namespace {

bool is_url_token(const std::string& t) {
    auto starts_with_ci = [&](const char* prefix) {
        std::size_t n = std::string(prefix).size();
        if (t.size() < n) return false;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::tolower(static_cast<unsigned char>(t[i])) != prefix[i]) return false;
        }
        return true;
    };
    return starts_with_ci("http://") || starts_with_ci("https://") || starts_with_ci("www.");
}

bool has_alnum(const std::string& t) {
    for (unsigned char c : t) {
        if (c < 0x80 && std::isalnum(c)) return true;
    }
    return false;
}

}  // namespace

TokenSeq normalize(const RawMessage& raw) {
    TokenSeq out;
    std::istringstream in(raw.text);
    std::string word;
    while (in >> word) {
        if (word[0] == '@' && has_alnum(word)) {
            out.push_back(kUserSentinel);
            continue;
        }
        if (is_url_token(word)) {
            out.push_back(kUrlSentinel);
            continue;
        }
        // Re-normalizing already clean text must be a no-op.
        if (is_sentinel(word)) {
            out.push_back(word);
            continue;
        }
        std::size_t start = 0;
        while (start < word.size() && word[start] == '#') ++start;
        std::string token;
        for (std::size_t i = start; i < word.size(); ++i) {
            unsigned char c = static_cast<unsigned char>(word[i]);
            if (c < 0x80 && std::isalnum(c)) token.push_back(static_cast<char>(std::tolower(c)));
            // Punctuation, symbols and non-ASCII bytes are dropped.
        }
        if (!token.empty()) out.push_back(std::move(token));
    }
    return out;
}

std::string join_tokens(const TokenSeq& tokens) {
    std::string s;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) s.push_back(' ');
        s += tokens[i];
    }
    return s;
}

}  // namespace swe2
