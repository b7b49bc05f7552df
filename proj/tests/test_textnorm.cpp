#include <doctest.h>

#include "swe2/textnorm.hpp"

using namespace swe2;

TEST_CASE("normalize handles mentions, hashtags and links") {
    TokenSeq t = normalize({"@Bob I LOVE #Winning http://t.co/x"});
    CHECK(t == TokenSeq{"USER", "i", "love", "winning", "URL"});
}

TEST_CASE("normalize of empty input is empty") {
    CHECK(normalize({""}).empty());
    CHECK(normalize({"   \t \n"}).empty());
    CHECK(normalize({"!!! ... ???"}).empty());
}

TEST_CASE("punctuation is deleted, contractions stay one token") {
    CHECK(normalize({"Don't; STOP!!"}) == TokenSeq{"dont", "stop"});
}

TEST_CASE("https and www links become URL") {
    CHECK(normalize({"see https://x.com and www.example.org"}) ==
          TokenSeq{"see", "URL", "and", "URL"});
}

TEST_CASE("digits are kept") {
    CHECK(normalize({"n1gger B4D"}) == TokenSeq{"n1gger", "b4d"});
}

TEST_CASE("emoji and non-ASCII letters are dropped") {
    CHECK(normalize({"so \xF0\x9F\x98\x80 good caf\xC3\xA9"}) == TokenSeq{"so", "good", "caf"});
}

TEST_CASE("normalize is idempotent through join") {
    const char* messages[] = {
        "@Bob I LOVE #Winning http://t.co/x",
        "Don't; STOP!!",
        "plain words only",
        "#tag #tag2 @a @b www.c.d",
        "MiXeD CaSe 123",
    };
    for (const char* msg : messages) {
        TokenSeq once = normalize({msg});
        TokenSeq twice = normalize({join_tokens(once)});
        CHECK(twice == once);
    }
}

TEST_CASE("output tokens are lower-case alnum except sentinels") {
    TokenSeq t = normalize({"@x SHOUTING #Tag99 http://a !!?punct-uation's"});
    for (const auto& tok : t) {
        if (is_sentinel(tok)) continue;
        CHECK(!tok.empty());
        for (char c : tok) CHECK(((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')));
    }
}
