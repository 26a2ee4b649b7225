#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "qx/text.hpp"

using qx::tokenize;
using Terms = std::vector<std::string>;

TEST(Tokenize, LowercasesAndDropsPunctuation) {
    EXPECT_EQ(tokenize("Cricket is a Sport."), (Terms{"cricket", "is", "a", "sport"}));
}

TEST(Tokenize, EmptyText) {
    EXPECT_TRUE(tokenize("").empty());
    EXPECT_TRUE(tokenize("  \t\n ").empty());
    EXPECT_TRUE(tokenize("!!! ... ---").empty());
}

TEST(Tokenize, HyphensAndBangsSeparateWords) {
    EXPECT_EQ(tokenize("state-of-the-art IR!"), (Terms{"state", "of", "the", "art", "ir"}));
}

TEST(Tokenize, DigitsStayInsideWords) {
    EXPECT_EQ(tokenize("COVID-19 in 2024, v2.0"), (Terms{"covid", "19", "in", "2024", "v2", "0"}));
}

TEST(Tokenize, NonAsciiLettersAreWordCharacters) {
    EXPECT_EQ(tokenize("Café ÜBER straße"), (Terms{"café", "über", "straße"}));
    EXPECT_EQ(tokenize("ΑΘΗΝΑ Москва"), (Terms{"αθηνα", "москва"}));
    // CJK punctuation and em-dash separate; ideographs are kept.
    EXPECT_EQ(tokenize("東京、大阪—京都"), (Terms{"東京", "大阪", "京都"}));
}

TEST(Tokenize, InvalidUtf8IsASeparator) {
    const std::string text = std::string("ab") + '\xff' + "cd";
    EXPECT_EQ(tokenize(text), (Terms{"ab", "cd"}));
}

TEST(Tokenize, Deterministic) {
    const std::string text = "The quick brown fox -- jumps over 2 lazy dogs; ÉTÉ";
    EXPECT_EQ(tokenize(text), tokenize(text));
}

TEST(Utf8Prefix, CountsCodePointsAndNeverSplitsSequences) {
    EXPECT_EQ(qx::utf8_prefix("héllo", 2), "hé");
    EXPECT_EQ(qx::utf8_prefix("abc", 10), "abc");
    EXPECT_EQ(qx::utf8_prefix("abc", 0), "");
    EXPECT_EQ(qx::utf8_length("日本語"), 3u);
}

TEST(Trim, StripsAsciiWhitespace) {
    EXPECT_EQ(qx::trim("  a b \n"), "a b");
    EXPECT_TRUE(qx::is_blank(" \t"));
}
