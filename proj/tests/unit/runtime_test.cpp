// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "tulip/error.hpp"
#include "tulip/runtime.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

namespace tulip {
namespace {

using test::MathLibrary;
using test::TempDir;

ToolCall call(std::string id, Json args)
{
    return {"c1", std::move(id), std::move(args)};
}

TEST(Runtime, ExecutesNatives)
{
    MathLibrary m;
    auto r = m.runtime->execute(call("math_tools__add", {{"a", 1064947554}, {"b", 32478}}));
    ASSERT_TRUE(r.ok()) << *r.error;
    EXPECT_EQ(*r.value, 1064980032);
    EXPECT_EQ(r.content(), "1064980032");
    EXPECT_EQ(r.call_id, "c1");
}

TEST(Runtime, ToolErrorsBecomeResults)
{
    MathLibrary m;
    auto r = m.runtime->execute(call("math_tools__divide", {{"a", 1}, {"b", 0}}));
    ASSERT_FALSE(r.ok());
    EXPECT_FALSE(r.error_code);
    EXPECT_EQ(r.content().rfind("Error: ValueError", 0), 0u);
}

TEST(Runtime, FrameworkFailuresCarryCodes)
{
    MathLibrary m;
    EXPECT_EQ(m.runtime->execute(call("nope__x", {})).error_code, Errc::UnknownTool);
    EXPECT_EQ(m.runtime->execute(call("math_tools__add", {{"a", 1}})).error_code, Errc::ArgumentError);
    EXPECT_EQ(m.runtime->execute(call("math_tools__add", {{"a", 1}, {"b", "2"}})).error_code, Errc::ArgumentError);
    EXPECT_EQ(m.runtime->execute(call("math_tools__add", {{"a", 1}, {"b", 2}, {"c", 3}})).error_code,
              Errc::ArgumentError);
    EXPECT_EQ(m.runtime->execute(call("math_tools__add", Json::array())).error_code, Errc::ArgumentError);
}

TEST(Runtime, IntegralFloatsCoerceToDeclaredIntegers)
{
    MathLibrary m;
    auto d = m.library->lookup("number_theory__factorial").descriptor;
    auto args = validate_arguments(d, {{"n", 10.0}});
    EXPECT_TRUE(args["n"].is_number_integer());
    EXPECT_THROW(validate_arguments(d, {{"n", 10.5}}), Error);
    auto r = m.runtime->execute(call("number_theory__factorial", {{"n", 10.0}}));
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(*r.value, 3628800);
}

TEST(Runtime, RegistrationChecks)
{
    MathLibrary m;
    auto d = m.library->lookup("math_tools__add").descriptor;
    try {
        m.runtime->register_native(d, {{ParamKind::Number, ParamKind::Number}, [](const Json&) { return Json(0); }});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DuplicateRegistration);
    }
    Runtime fresh(*m.library);
    try {
        fresh.register_native(d, {{ParamKind::String, ParamKind::Number}, [](const Json&) { return Json(0); }});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SignatureMismatch);
    }
    EXPECT_EQ(fresh.execute(call("math_tools__add", {{"a", 1}, {"b", 2}})).error_code, Errc::NotExecutable);
}

TEST(Runtime, FileToolsNeedAnInterpreter)
{
    TempDir dir;
    test::write_file(dir / "tools" / "ops.tdf", test::read_file(test::fixtures() / "listings" / "add.tdf"));
    ToolLibrary lib(LibraryConfig{{}, dir / "tools", test::hashing()});
    auto sources = read_tool_dir(dir / "tools");
    lib.initialize(sources);
    Runtime runtime(lib);
    EXPECT_EQ(runtime.execute(call("ops__add", {{"a", 1}, {"b", 2}})).error_code, Errc::NotExecutable);
}

class PythonRuntime : public ::testing::Test {
protected:
    void SetUp() override
    {
        if (!test::have_python())
            GTEST_SKIP() << "python3 not available";
    }
};

TEST_F(PythonRuntime, RunsFileTools)
{
    TempDir dir;
    test::write_file(dir / "tools" / "ops.tdf",
                     test::read_file(test::fixtures() / "listings" / "add.tdf") + "\n\n" +
                         "def slow(seconds: float) -> float:\n"
                         "    \"\"\"\n    Sleep.\n\n    :param seconds: Duration.\n    :return: Duration.\n    \"\"\"\n"
                         "    import time\n    time.sleep(seconds)\n    return seconds\n\n\n"
                         "def fail(x: int) -> int:\n"
                         "    \"\"\"\n    Fail.\n\n    :param x: Anything.\n    :return: Nothing.\n    \"\"\"\n"
                         "    raise ValueError(\"nope\")\n");
    ToolLibrary lib(LibraryConfig{{}, dir / "tools", test::hashing()});
    auto sources = read_tool_dir(dir / "tools");
    lib.initialize(sources);
    auto interp = test::python_interpreter();
    interp.timeout = std::chrono::milliseconds(1500);
    Runtime runtime(lib, interp);

    auto ok = runtime.execute(call("ops__add", {{"a", 2}, {"b", 0.5}}));
    ASSERT_TRUE(ok.ok()) << *ok.error;
    EXPECT_EQ(*ok.value, 2.5);

    auto failed = runtime.execute(call("ops__fail", {{"x", 1}}));
    ASSERT_FALSE(failed.ok());
    EXPECT_NE(failed.error->find("nope"), std::string::npos);

    auto slow = runtime.execute(call("ops__slow", {{"seconds", 5}}));
    EXPECT_EQ(slow.error_code, Errc::Timeout);
}

TEST_F(PythonRuntime, ComplexResultsAreStrings)
{
    TempDir dir;
    test::write_file(dir / "tools" / "r.tdf", "import cmath\n\n\ndef root(x: float) -> complex:\n"
                                              "    \"\"\"\n    Root.\n\n    :param x: Value.\n"
                                              "    :return: Root.\n    \"\"\"\n    return cmath.sqrt(x)\n");
    ToolLibrary lib(LibraryConfig{{}, dir / "tools", test::hashing()});
    auto sources = read_tool_dir(dir / "tools");
    lib.initialize(sources);
    Runtime runtime(lib, test::python_interpreter());
    auto r = runtime.execute(call("r__root", {{"x", -200}}));
    ASSERT_TRUE(r.ok()) << *r.error;
    EXPECT_EQ(*r.value, "14.142135623730951j");
}

TEST_F(PythonRuntime, ValidateSourceUsesCheckMode)
{
    TempDir dir;
    ToolLibrary lib(LibraryConfig{{}, {}, test::hashing()});
    Runtime runtime(lib, test::python_interpreter());
    const std::string good = test::read_file(test::fixtures() / "listings" / "add.tdf");
    EXPECT_TRUE(runtime.validate_source(good).empty());

    std::string bad_body = good + "    return a +\n";
    auto d = runtime.validate_source(bad_body);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].code, Errc::SyntaxError);
    EXPECT_EQ(d[0].line, 10);

    auto undocumented = runtime.validate_source("def f(a: int) -> int:\n    return a\n");
    ASSERT_EQ(undocumented.size(), 1u);
    EXPECT_EQ(undocumented[0].code, Errc::MissingDoc);

    Runtime no_interp(lib);
    EXPECT_TRUE(no_interp.validate_source(bad_body).empty());
}

TEST(InterpreterConfig, EnvironmentOverride)
{
    ::setenv("TULIP_INTERPRETER", "python3 -u runner.py", 1);
    auto c = InterpreterConfig::from_env();
    ::unsetenv("TULIP_INTERPRETER");
    EXPECT_TRUE(c.enabled);
    EXPECT_EQ(c.command, (std::vector<std::string>{"python3", "-u", "runner.py"}));
    EXPECT_FALSE(InterpreterConfig::from_env().enabled);
}

} // namespace
} // namespace tulip
