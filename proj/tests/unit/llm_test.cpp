// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "tulip/error.hpp"
#include "tulip/llm.hpp"

#include <gtest/gtest.h>

#include <random>

namespace tulip {
namespace {

Errc code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return Errc::ConfigError;
}

TEST(ChatMessage, WireShapeRoundTrips)
{
    auto m = ChatMessage::assistant("", {{"call_1", "math_tools__add", {{"a", 1}, {"b", 2.5}}}});
    auto j = to_json(m);
    EXPECT_EQ(j["tool_calls"][0]["type"], "function");
    EXPECT_TRUE(j["tool_calls"][0]["function"]["arguments"].is_string());
    EXPECT_EQ(message_from_json(j), m);

    auto t = ChatMessage::tool("call_1", "3.5");
    EXPECT_EQ(to_json(t)["tool_call_id"], "call_1");
    EXPECT_EQ(message_from_json(to_json(t)), t);
}

TEST(ChatMessage, AcceptsTranscriptShapeAndRejectsBadArguments)
{
    Json j = {{"role", "assistant"},
              {"content", ""},
              {"tool_calls", {{{"id", "x"}, {"name", "f"}, {"arguments", {{"n", 3}}}}}}};
    auto m = message_from_json(j);
    ASSERT_EQ(m.tool_calls.size(), 1u);
    EXPECT_EQ(m.tool_calls[0].arguments["n"], 3);

    Json bad = {{"role", "assistant"},
                {"tool_calls", {{{"id", "x"}, {"function", {{"name", "f"}, {"arguments", "{not json"}}}}}}};
    EXPECT_EQ(code_of([&] { message_from_json(bad); }), Errc::BackendError);
    Json trailing = {{"role", "assistant"},
                     {"tool_calls", {{{"id", "x"}, {"function", {{"name", "f"}, {"arguments", "{\"n\": 1}\n "}}}}}}};
    EXPECT_EQ(message_from_json(trailing).tool_calls[0].arguments["n"], 1);
}

// Property: arbitrary argument objects survive the string-encoded wire form.
TEST(ChatMessageProperty, ArgumentsSurviveEncoding)
{
    std::mt19937 rng(8);
    for (int i = 0; i < 200; ++i) {
        Json args = Json::object();
        for (int k = 0, n = static_cast<int>(rng() % 5); k < n; ++k) {
            const std::string key = "p" + std::to_string(k);
            switch (rng() % 4) {
            case 0: args[key] = static_cast<int>(rng() % 100000) - 50000; break;
            case 1: args[key] = std::uniform_real_distribution<double>(-1e6, 1e6)(rng); break;
            case 2: args[key] = std::string(rng() % 8, static_cast<char>('a' + rng() % 26)); break;
            default: args[key] = Json::array({1, 2.5, "x"}); break;
            }
        }
        auto m = ChatMessage::assistant("", {{"c", "f", args}});
        EXPECT_EQ(message_from_json(to_json(m)), m);
    }
}

ScriptedTranscript two_steps()
{
    return ScriptedTranscript::from_json(Json::parse(R"({
      "model": "gpt-3.5-turbo-0125",
      "steps": [
        {"match": "hello", "response": {"content": "hi"}, "usage": {"prompt_tokens": 5, "completion_tokens": 1}},
        {"response": {"content": "bye"}, "usage": {"prompt_tokens": 7, "completion_tokens": 2}}
      ]})"));
}

TEST(ScriptedBackend, ReplaysInOrder)
{
    ScriptedBackend b(two_steps());
    auto r = b.chat({{ChatMessage::system("s"), ChatMessage::user("well hello there")}});
    EXPECT_EQ(r.message.content, "hi");
    EXPECT_EQ(r.message.role, Role::Assistant);
    EXPECT_EQ(r.usage, (UsageRecord{"gpt-3.5-turbo-0125", 5, 1, 0}));
    EXPECT_EQ(b.chat({{ChatMessage::user("anything")}}).message.content, "bye");
    EXPECT_EQ(b.consumed(), 2u);
    EXPECT_EQ(b.remaining(), 0u);
    EXPECT_EQ(b.requests().size(), 2u);
}

TEST(ScriptedBackend, MismatchAndExhaustionFail)
{
    ScriptedBackend b(two_steps());
    EXPECT_EQ(code_of([&] { b.chat({{ChatMessage::user("goodbye")}}); }), Errc::MatchFailure);

    ScriptedBackend c(two_steps());
    c.chat({{ChatMessage::user("hello")}});
    c.chat({{ChatMessage::user("x")}});
    try {
        c.chat({{ChatMessage::user("x")}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MatchFailure);
        EXPECT_NE(std::string(e.what()).find("request 3"), std::string::npos);
    }
}

TEST(ScriptedTranscript, SchemaErrors)
{
    EXPECT_EQ(code_of([] { ScriptedTranscript::from_json(Json::object()); }), Errc::ConfigError);
    EXPECT_EQ(code_of([] { ScriptedTranscript::from_json(Json::parse(R"({"steps": [{}]})")); }),
              Errc::ConfigError);
    EXPECT_EQ(code_of([] {
                  ScriptedTranscript::from_json(
                      Json::parse(R"({"steps": [{"response": {}, "usage": {"prompt_tokens": -1}}]})"));
              }),
              Errc::ConfigError);
    EXPECT_EQ(code_of([] { ScriptedTranscript::load("/nonexistent/transcript.json"); }), Errc::IoError);
}

TEST(ScriptedTranscript, ShippedGoldenFilesLoad)
{
    for (auto name : {"cot_tulip_golden.json", "naive_tool_golden.json", "auto_tulip_crud.json"}) {
        auto t = test::transcript(name);
        EXPECT_FALSE(t.steps.empty()) << name;
    }
}

TEST(Session, EnforcesInteractionLimit)
{
    ScriptedBackend b(two_steps());
    Session s(b, {1, 0.0});
    s.complete({ChatMessage::user("hello")});
    EXPECT_EQ(code_of([&] { s.complete({ChatMessage::user("x")}); }), Errc::InteractionLimitExceeded);
    // The limit trips before the backend is called.
    EXPECT_EQ(b.consumed(), 1u);
    EXPECT_EQ(s.interactions(), 1);
    EXPECT_EQ(code_of([&] { Session(b, {0, 0.0}); }), Errc::ConfigError);
}

TEST(Session, LedgerRecordsEveryCall)
{
    ScriptedBackend b(two_steps());
    Session s(b);
    s.complete({ChatMessage::user("hello")});
    s.record_embedding({"text-embedding-3-large", 4});
    s.complete({ChatMessage::user("x")});
    ASSERT_EQ(s.ledger().size(), 3u);
    EXPECT_EQ(s.ledger()[1], (UsageRecord{"text-embedding-3-large", 0, 0, 4}));
    UsageRecord total;
    for (const auto& u : s.ledger())
        total += u;
    EXPECT_EQ(total.prompt_tokens, 12u);
    EXPECT_EQ(total.completion_tokens, 3u);
    EXPECT_EQ(total.embedding_tokens, 4u);
    EXPECT_EQ(b.requests()[0].temperature, SessionConfig{}.temperature);
}

TEST(CostTable, ShippedPrices)
{
    auto table = CostTable::load(test::data() / "cost_table.json");
    // Prices per million tokens, copied from the published price list.
    EXPECT_EQ(table.prices("gpt-4-turbo-2024-04-09").input, 10.0);
    EXPECT_EQ(table.prices("gpt-4-turbo-2024-04-09").output, 30.0);
    EXPECT_EQ(table.prices("gpt-3.5-turbo-0125").input, 0.5);
    EXPECT_EQ(table.prices("gpt-3.5-turbo-0125").output, 1.5);
    EXPECT_EQ(table.prices("text-embedding-ada-002").embedding, 0.1);
    EXPECT_EQ(table.prices("text-embedding-3-small").embedding, 0.02);
    EXPECT_EQ(table.prices("text-embedding-3-large").embedding, 0.13);
}

TEST(CostTable, Arithmetic)
{
    auto table = CostTable::load(test::data() / "cost_table.json");
    // 3960 * 0.5 / 1e6 + 19 * 1.5 / 1e6
    EXPECT_NEAR(table.cost(UsageRecord{"gpt-3.5-turbo-0125", 3960, 19, 0}), 0.0020085, 1e-15);
    EXPECT_NEAR(table.cost(UsageRecord{"text-embedding-3-large", 0, 0, 1000000}), 0.13, 1e-15);
    std::vector<UsageRecord> ledger{{"gpt-4-turbo-2024-04-09", 1000, 100, 0}, {"gpt-3.5-turbo-0125", 2000, 0, 0}};
    EXPECT_NEAR(table.cost(ledger), 0.01 + 0.003 + 0.001, 1e-15);
    EXPECT_EQ(code_of([&] { table.cost(UsageRecord{"mystery", 1, 0, 0}); }), Errc::UnknownModel);
    EXPECT_EQ(table.cost(UsageRecord{"mystery", 0, 0, 0}), 0.0);
}

TEST(CostTable, Validation)
{
    EXPECT_EQ(code_of([] { CostTable::from_json(Json::array()); }), Errc::ConfigError);
    EXPECT_EQ(code_of([] { CostTable::from_json(Json::parse(R"({"models": {"m": {"input": -1}}})")); }),
              Errc::ConfigError);
    EXPECT_FALSE(CostTable::from_json(Json::parse(R"({"models": {}})")).contains("m"));
}

} // namespace
} // namespace tulip
