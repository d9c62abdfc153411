// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "tulip/error.hpp"
#include "tulip/tooldef.hpp"

#include <gtest/gtest.h>

#include <random>

namespace tulip {
namespace {

using test::fixtures;
using test::read_file;

ToolDescriptor only(const ToolDefinitionFile& f)
{
    EXPECT_EQ(f.descriptors.size(), 1u);
    return f.descriptors.at(0);
}

TEST(ToolDef, ParsesAddListing)
{
    auto d = only(parse_tool_file("math_tools", read_file(fixtures() / "listings" / "add.tdf")));
    EXPECT_EQ(d.name, "add");
    EXPECT_EQ(d.module, "math_tools");
    EXPECT_EQ(d.qualified_id, "math_tools__add");
    EXPECT_EQ(d.summary, "Add two numbers.");
    ASSERT_EQ(d.parameters.size(), 2u);
    EXPECT_EQ(d.parameters[0], (ToolParameter{"a", ParamKind::Number, "The first number.", std::nullopt}));
    EXPECT_EQ(d.parameters[1], (ToolParameter{"b", ParamKind::Number, "The second number.", std::nullopt}));
    EXPECT_EQ(d.return_description, "The sum of a and b.");
    EXPECT_EQ(d.first_line, 1);
    EXPECT_EQ(d.last_line, 9);
}

TEST(ToolDef, ParsesMultiplyListing)
{
    auto d = only(parse_tool_file("math_tools", read_file(fixtures() / "listings" / "multiply.tdf")));
    EXPECT_EQ(d.summary, "Multiply two numbers.");
    ASSERT_EQ(d.parameters.size(), 2u);
    EXPECT_EQ(d.parameters[0].description, "The first multiplicand.");
    EXPECT_EQ(d.return_description, "The product of a and b.");
}

TEST(ToolDef, ListAnnotationBecomesArrayOfNumbers)
{
    auto d = only(
        parse_tool_file("statistics", read_file(fixtures() / "listings" / "coefficient_of_variation.tdf")));
    ASSERT_EQ(d.parameters.size(), 1u);
    EXPECT_EQ(d.parameters[0].kind, ParamKind::Array);
    EXPECT_EQ(d.parameters[0].item_kind, ParamKind::Number);
    auto schema = descriptor_schema(d);
    EXPECT_EQ(schema["function"]["parameters"]["properties"]["numbers"]["items"]["type"], "number");
}

TEST(ToolDef, MultiLineBodyWithFStringsIsSkipped)
{
    auto text = read_file(fixtures() / "listings" / "pour_into.tdf");
    auto d = only(parse_tool_file("robot", text));
    EXPECT_EQ(d.summary,
              "You get a source container, pour it into a target container, and put it back on the table.");
    ASSERT_EQ(d.parameters.size(), 2u);
    EXPECT_EQ(d.parameters[0].kind, ParamKind::String);
    EXPECT_EQ(d.return_description, "Result message.");
    EXPECT_EQ(d.last_line, 20);
    EXPECT_EQ(definition_text(text, d), text);
}

TEST(ToolDef, SchemaShape)
{
    auto d = only(parse_tool_file("math_tools", read_file(fixtures() / "listings" / "add.tdf")));
    auto schema = descriptor_schema(d);
    EXPECT_EQ(schema["type"], "function");
    EXPECT_EQ(schema["function"]["name"], "math_tools__add");
    EXPECT_EQ(schema["function"]["description"], "Add two numbers.");
    EXPECT_EQ(schema["function"]["parameters"]["required"], Json::array({"a", "b"}));
    EXPECT_EQ(schema["function"]["parameters"]["properties"]["a"]["type"], "number");
}

TEST(ToolDef, EmbeddingDocumentIsNameAndDocstring)
{
    auto d = only(parse_tool_file("math_tools", read_file(fixtures() / "listings" / "add.tdf")));
    auto doc = embedding_document(d);
    EXPECT_EQ(doc.rfind("add:\n", 0), 0u);
    EXPECT_NE(doc.find(":param b: The second number."), std::string::npos);
}

TEST(ToolDef, PrivateAndNestedFunctionsAreNotTools)
{
    const std::string text = "def _helper(x: int) -> int:\n"
                             "    return x\n"
                             "\n"
                             "\n"
                             "def outer(x: int) -> int:\n"
                             "    \"\"\"\n"
                             "    Outer function.\n"
                             "\n"
                             "    :param x: A value.\n"
                             "    :return: The value.\n"
                             "    \"\"\"\n"
                             "    def inner(y):\n"
                             "        return y\n"
                             "    return inner(x)\n";
    auto f = parse_tool_file("m", text);
    ASSERT_EQ(f.descriptors.size(), 1u);
    EXPECT_EQ(f.descriptors[0].name, "outer");
}

struct BadCase {
    const char* label;
    const char* text;
    Errc code;
    int line;
};

void PrintTo(const BadCase& c, std::ostream* os)
{
    *os << c.label;
}

class ToolDefErrors : public ::testing::TestWithParam<BadCase> {};

TEST_P(ToolDefErrors, ReportsCodeAndLine)
{
    const auto& c = GetParam();
    try {
        parse_tool_file("broken", c.text);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.code(), c.code) << e.what();
        EXPECT_EQ(e.line(), c.line) << e.what();
        EXPECT_EQ(e.module(), "broken");
    }
}

INSTANTIATE_TEST_SUITE_P(
    Cases, ToolDefErrors,
    ::testing::Values(
        BadCase{"missing_doc", "import math\n\ndef f(a: int) -> int:\n    return a\n", Errc::MissingDoc, 3},
        BadCase{"undocumented_param",
                "def f(a: int, b: int) -> int:\n    \"\"\"\n    Sum.\n\n    :param a: A.\n    \"\"\"\n    return a\n",
                Errc::DocMismatch, 1},
        BadCase{"extra_param_doc",
                "def f(a: int) -> int:\n    \"\"\"\n    Sum.\n\n    :param a: A.\n    :param z: Z.\n    \"\"\"\n",
                Errc::DocMismatch, 1},
        BadCase{"untyped_param", "def f(a) -> int:\n    \"\"\"\n    S.\n\n    :param a: A.\n    \"\"\"\n",
                Errc::DocMismatch, 1},
        BadCase{"multi_line_signature",
                "\n\ndef f(a: int,\n      b: int) -> int:\n    \"\"\"\n    S.\n    \"\"\"\n", Errc::SyntaxError, 3},
        BadCase{"unterminated_docstring", "def f(a: int) -> int:\n    \"\"\"\n    S.\n", Errc::SyntaxError, 2},
        BadCase{"variadic", "def f(*args: int) -> int:\n    \"\"\"\n    S.\n    \"\"\"\n", Errc::SyntaxError, 1}),
    [](const auto& info) { return std::string(info.param.label); });

TEST(ToolDef, ModuleNameMustBeIdentifier)
{
    EXPECT_THROW(parse_tool_file("not a module", "x = 1\n"), ParseError);
}

// Property: rendering a descriptor as source and parsing it back is lossless.
TEST(ToolDefProperty, RenderedDescriptorsRoundTrip)
{
    std::mt19937 rng(7);
    const std::vector<std::pair<std::string, ParamKind>> types{
        {"int", ParamKind::Integer}, {"float", ParamKind::Number}, {"str", ParamKind::String},
        {"bool", ParamKind::Boolean}, {"dict", ParamKind::Object}};
    const std::vector<std::string> words{"compute", "value", "the", "number", "of", "list", "sum", "angle"};
    auto phrase = [&](int n) {
        std::string s;
        for (int i = 0; i < n; ++i)
            s += (i ? " " : "") + words[rng() % words.size()];
        s[0] = static_cast<char>(std::toupper(s[0]));
        return s + ".";
    };

    for (int iter = 0; iter < 200; ++iter) {
        ToolDescriptor d;
        d.module = "gen";
        d.name = "fn_" + std::to_string(iter);
        d.qualified_id = qualified_id(d.module, d.name);
        d.summary = phrase(1 + static_cast<int>(rng() % 6));
        std::string signature;
        const int n = static_cast<int>(rng() % 5);
        for (int p = 0; p < n; ++p) {
            const auto& [annotation, kind] = types[rng() % types.size()];
            ToolParameter param{"p" + std::to_string(p), kind, phrase(1 + static_cast<int>(rng() % 4)),
                                std::nullopt};
            signature += (p ? ", " : "") + param.name + ": " + annotation;
            d.parameters.push_back(param);
        }
        d.return_description = phrase(2);

        std::string source = "def " + d.name + "(" + signature + ") -> float:\n    \"\"\"\n";
        std::istringstream doc(render_docstring(d));
        for (std::string line; std::getline(doc, line);)
            source += line.empty() ? "\n" : "    " + line + "\n";
        source += "    \"\"\"\n    return 0.0\n";

        auto parsed = only(parse_tool_file("gen", source));
        EXPECT_EQ(parsed.summary, d.summary);
        EXPECT_EQ(parsed.parameters, d.parameters);
        EXPECT_EQ(parsed.return_description, d.return_description);
        EXPECT_EQ(descriptor_schema(parsed), descriptor_schema(d));
    }
}

} // namespace
} // namespace tulip
