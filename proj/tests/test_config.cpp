#include <gtest/gtest.h>

#include "causal_cart/config.hpp"
#include "causal_cart/errors.hpp"
#include "causal_cart/mc.hpp"

using ccart::Config;
using ccart::ConfigError;

TEST(Config, ParsesKeysCommentsAndLists) {
  const auto c = Config::parse("# header\n reps = 200  # trailing\n\nrules = dim, ipw ,sse\nxi=0.25\n");
  EXPECT_EQ(c.count("reps"), 200u);
  EXPECT_EQ(c.list("rules"), (std::vector<std::string>{"dim", "ipw", "sse"}));
  EXPECT_DOUBLE_EQ(c.real("xi"), 0.25);
  EXPECT_FALSE(c.has("header"));
}

TEST(Config, CanonicalFormIgnoresLayout) {
  const auto a = Config::parse("b = 2\na=1\n");
  const auto b = Config::parse("# same\na = 1\n\n   b=2");
  EXPECT_EQ(a.canonical(), b.canonical());
  EXPECT_EQ(a.canonical(), "a=1\nb=2\n");
}

TEST(Config, MalformedInput) {
  EXPECT_THROW(Config::parse("reps 10\n"), ConfigError);
  EXPECT_THROW(Config::parse("= 3\n"), ConfigError);
  EXPECT_THROW(Config::parse("a = 1\na = 2\n"), ConfigError);
  try {
    Config::parse("a = 1\n\nbroken\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Config, TypedAccessorsRejectJunk) {
  const auto c = Config::parse("n = 12x\nneg = -3\nlist = 1,,2\nreal = abc\nseed = 18446744073709551615\n");
  EXPECT_THROW(c.count("n"), ConfigError);
  EXPECT_THROW(c.count("neg"), ConfigError);
  EXPECT_EQ(c.integer("neg"), -3);
  EXPECT_THROW(c.list("list"), ConfigError);
  EXPECT_THROW(c.real("real"), ConfigError);
  EXPECT_EQ(c.u64("seed"), 18446744073709551615ull);
  try {
    c.str("absent");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "missing required config key 'absent'");
  }
}

TEST(Config, CheckKeysNamesOffenders) {
  const auto c = Config::parse("a = 1\nzz = 2\nyy = 3\n");
  try {
    c.check_keys({"a"}, {});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "unknown config key(s): yy, zz");
  }
  EXPECT_THROW(c.check_keys({"a", "yy", "zz"}, {"b"}), ConfigError);
  EXPECT_NO_THROW(c.check_keys({"a", "yy", "zz", "b"}, {"a"}));
}

TEST(Config, LoadMissingFile) {
  EXPECT_THROW(Config::load("/nonexistent/dir/x.cfg"), ConfigError);
}

TEST(Config, BuiltInDefaultsParse) {
  for (const auto& name : ccart::experiment_names()) {
    const auto c = Config::parse(ccart::default_config(name));
    EXPECT_TRUE(c.has("reps")) << name;
  }
  EXPECT_THROW(ccart::default_config("nope"), ConfigError);
}
