#include <gtest/gtest.h>

#include "qx/reformulation.hpp"
#include "qx/retrieval.hpp"
#include "test_support.hpp"

using namespace qx;
using qx::testing::ScriptedGenerator;
using qx::testing::TempDir;
using Strings = std::vector<std::string>;

namespace {

struct Fixture {
    TempDir dir;
    SessionLog log{dir.path(), {false, system_clock_ms}};
    Session session = log.new_session();
    std::shared_ptr<const InvertedIndex> index = qx::testing::load_fixture_index("cricket.jsonl");
};

}  // namespace

TEST(AppendKeywords, AppendsGeneratedTerm) {
    Fixture f;
    ScriptedGenerator gen({{"cricket"}});
    const auto out = append_keywords({f.session, "bat and ball game", {}, {}}, kReformulationInstruction, gen, f.log);
    EXPECT_EQ(out.query, "bat and ball game cricket");
    ASSERT_EQ(gen.prompts.size(), 1u);
    EXPECT_EQ(gen.prompts[0], build_reformulation_prompt(kReformulationInstruction, "bat and ball game"));

    const auto events = f.log.read_queries();
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].source, QuerySource::reformulator);
    EXPECT_EQ(events[0].log_name, "query_reformulations");
    EXPECT_EQ(events[0].previous_query, std::optional<std::string>("bat and ball game"));
    EXPECT_EQ(events[0].query, "bat and ball game cricket");
}

TEST(AppendKeywords, EmptyGeneratorOutputLeavesQueryAndLogsNothing) {
    Fixture f;
    ScriptedGenerator gen(std::vector<std::vector<std::string>>{{}});
    const auto out = append_keywords({f.session, "q", {}, {}}, kReformulationInstruction, gen, f.log);
    EXPECT_EQ(out.query, "q");
    EXPECT_FALSE(out.recorded);
    EXPECT_TRUE(f.log.read_queries().empty());
}

TEST(AppendKeywords, DropsKeywordsAlreadyInQuery) {
    Fixture f;
    ScriptedGenerator gen({{"solar, panel"}});
    const auto out = append_keywords({f.session, "solar power", {}, {}}, kReformulationInstruction, gen, f.log);
    EXPECT_EQ(out.query, "solar power panel");
    EXPECT_EQ(out.appended, (Strings{"panel"}));
}

TEST(AppendKeywords, AllDuplicatesStillRecordUnchangedQuery) {
    Fixture f;
    ScriptedGenerator gen({{"Solar, POWER"}});
    const auto out = append_keywords({f.session, "solar power", {}, {}}, kReformulationInstruction, gen, f.log);
    EXPECT_EQ(out.query, "solar power");
    EXPECT_TRUE(out.recorded);
    const auto events = f.log.read_queries();
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].query, "solar power");
}

TEST(AppendKeywords, GeneratorFailurePropagatesWithoutEvent) {
    Fixture f;
    ScriptedGenerator gen({{"x"}});
    gen.fail = true;
    EXPECT_THROW(append_keywords({f.session, "q", {}, {}}, kReformulationInstruction, gen, f.log), Error);
    EXPECT_TRUE(f.log.read_queries().empty());
}

TEST(AppendKeywords, RejectsSelectedDocsAndEmptyQuery) {
    Fixture f;
    ScriptedGenerator gen({{"x"}});
    EXPECT_THROW(append_keywords({f.session, "q", {"c1"}, {}}, kReformulationInstruction, gen, f.log), Error);
    EXPECT_THROW(append_keywords({f.session, "  ", {}, {}}, kReformulationInstruction, gen, f.log), Error);
}

TEST(SendFeedback, StubExpandsWithRarestTermsOfSelectedDoc) {
    Fixture f;
    StubGenerator stub(f.index, 7);
    const auto out = send_feedback({f.session, "bat game", {"c7"}, {}}, kFeedbackInstruction, *f.index, stub, f.log);
    // c7's two highest-idf terms are wicket (df 1) then innings (df 2).
    EXPECT_EQ(out.query, "bat game wicket innings");
    const auto events = f.log.read_queries();
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].source, QuerySource::feedback);
    EXPECT_EQ(events[0].log_name, "feedback_query_reformulations");
}

TEST(SendFeedback, UnknownDocIsRejectedBeforeGeneration) {
    Fixture f;
    ScriptedGenerator gen({{"x"}});
    try {
        send_feedback({f.session, "q", {"d9"}, {}}, kFeedbackInstruction, *f.index, gen, f.log);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::not_found);
    }
    EXPECT_TRUE(gen.prompts.empty());
    EXPECT_TRUE(f.log.read_queries().empty());
}

TEST(SendFeedback, OverlappingKeywordsFromTwoDocsAppearOnce) {
    Fixture f;
    ScriptedGenerator gen({{"cricket, wicket"}, {"Cricket, bowler"}});
    const auto out =
        send_feedback({f.session, "bat game", {"c1", "c7"}, {}}, kFeedbackInstruction, *f.index, gen, f.log);
    EXPECT_EQ(out.query, "bat game cricket wicket bowler");
    ASSERT_EQ(gen.prompts.size(), 2u);
    EXPECT_NE(gen.prompts[0].find(f.index->get_doc_text("c1")), std::string::npos);
    EXPECT_NE(gen.prompts[1].find(f.index->get_doc_text("c7")), std::string::npos);
}

TEST(SendFeedback, DocumentIsTruncatedToBudget) {
    Fixture f;
    ScriptedGenerator gen({{"x"}});
    send_feedback({f.session, "q", {"c1"}, {}}, kFeedbackInstruction, *f.index, gen, f.log, {10, 5});
    EXPECT_NE(gen.prompts[0].find("```Crick```"), std::string::npos) << gen.prompts[0];
}

TEST(ComposeExpandedQuery, SplitsMultiWordKeywordsAndCaps) {
    EXPECT_EQ(compose_expanded_query("q", {"wicket innings"}).query, "q wicket innings");
    EXPECT_EQ(compose_expanded_query("Bat Game", {"bat", "GAME", "ball"}).query, "Bat Game ball");
    EXPECT_EQ(compose_expanded_query("q", {"a b c d e f g h i j k l"}).appended.size(), 10u);
    EXPECT_EQ(compose_expanded_query("q", {"-", "!!"}).query, "q");
}

TEST(ComposeExpandedQuery, PropertiesOnRandomInputs) {
    std::mt19937_64 rng(99);
    const Strings vocab{"bat", "Ball", "GAME", "cricket", "wicket", "innings", "solar", "panel", "x-y", "état"};
    for (int trial = 0; trial < 300; ++trial) {
        std::string query;
        for (std::size_t i = 0, n = 1 + rng() % 4; i < n; ++i) query += (i ? " " : "") + vocab[rng() % vocab.size()];
        Strings keywords;
        for (std::size_t i = 0, n = rng() % 15; i < n; ++i) keywords.push_back(to_lower(vocab[rng() % vocab.size()]));
        const auto out = compose_expanded_query(query, keywords);
        EXPECT_EQ(out.query.rfind(query, 0), 0u);
        EXPECT_LE(out.appended.size(), kKeywordCap);
        const auto query_terms = tokenize(query);
        for (const auto& w : out.appended) {
            EXPECT_EQ(std::find(query_terms.begin(), query_terms.end(), w), query_terms.end()) << w;
        }
    }
}
