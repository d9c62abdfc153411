// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "tulip/corpus.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

namespace tulip {
namespace {

TEST(Corpus, HundredNativesAcrossTenModules)
{
    const auto& natives = corpus::math_natives();
    EXPECT_EQ(natives.size(), 100u);
    std::set<std::string> modules, ids;
    for (const auto& n : natives) {
        modules.insert(n.module);
        ids.insert(n.id());
        EXPECT_FALSE(n.samples.empty()) << n.id();
    }
    EXPECT_EQ(modules.size(), 10u);
    EXPECT_EQ(ids.size(), 100u);
}

TEST(Corpus, EveryNativeMatchesItsDescriptor)
{
    test::MathLibrary m;
    for (const auto& n : corpus::math_natives()) {
        auto entry = m.library->find(n.id());
        ASSERT_TRUE(entry) << n.id();
        EXPECT_TRUE(m.runtime->has_native(n.id())) << n.id();
    }
    EXPECT_EQ(m.library->count(), corpus::math_natives().size());
}

TEST(Corpus, ListingToolsShipVerbatim)
{
    auto shipped = test::read_file(test::data() / "corpus" / "math" / "math_tools.tdf");
    for (auto name : {"add", "multiply", "coefficient_of_variation"}) {
        auto listing = test::read_file(test::fixtures() / "listings" / (std::string(name) + ".tdf"));
        EXPECT_NE(shipped.find(listing), std::string::npos) << name;
    }
}

bool same_value(const Json& a, const Json& b)
{
    if (a.is_number() && b.is_number()) {
        if (a.is_number_integer() != b.is_number_integer())
            return false;
        const double x = a.get<double>(), y = b.get<double>();
        return x == y || std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y));
    }
    if (a.is_array() && b.is_array()) {
        if (a.size() != b.size())
            return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!same_value(a[i], b[i]))
                return false;
        return true;
    }
    return a == b;
}

// The host implementations and the Python bodies in the .tdf files are two
// bindings of one tool; they must agree on every sample, errors included.
TEST(Corpus, NativesAgreeWithPythonBodies)
{
    if (!test::have_python())
        GTEST_SKIP() << "python3 not available";
    test::MathLibrary native;

    ToolLibrary files(LibraryConfig{{}, {}, test::hashing()});
    auto sources = read_tool_dir(test::data() / "corpus" / "math");
    files.initialize(sources);
    Runtime python(files, test::python_interpreter());

    int checked = 0;
    for (const auto& n : corpus::math_natives()) {
        for (const auto& args : n.samples) {
            ToolCall c{"s", n.id(), args};
            auto want = python.execute(c);
            auto got = native.runtime->execute(c);
            ASSERT_EQ(got.ok(), want.ok()) << n.id() << " " << args.dump() << " native: " << got.content()
                                           << " python: " << want.content();
            if (got.ok())
                EXPECT_TRUE(same_value(*got.value, *want.value))
                    << n.id() << " " << args.dump() << " native " << got.value->dump() << " python "
                    << want.value->dump();
            else
                EXPECT_EQ(got.error->substr(0, got.error->find(':')), want.error->substr(0, want.error->find(':')))
                    << n.id() << " " << args.dump() << " native: " << *got.error << " python: " << *want.error;
            ++checked;
        }
    }
    EXPECT_GT(checked, 200);
}

TEST(Corpus, DataDirectoryResolves)
{
    EXPECT_TRUE(std::filesystem::is_directory(corpus::math_dir()));
    EXPECT_EQ(corpus::math_modules().size(), 10u);
}

} // namespace
} // namespace tulip
