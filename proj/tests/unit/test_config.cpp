#include <gtest/gtest.h>

#include <cmath>

#include "scss/config.hpp"
#include "scss/types.hpp"

namespace scss {
namespace {

TEST(Config, ParsesKeyValueWithComments) {
  const Config c = Config::parse("# header\nsir = -10:-2:2\n\nseed=7 # trailing\nseed=9\n");
  EXPECT_EQ(c.get("seed", ""), "9");
  EXPECT_EQ(c.get_int("seed", 0), 9);
  EXPECT_EQ(c.get_grid("sir", {}), (std::vector<double>{-10, -8, -6, -4, -2}));
  EXPECT_EQ(c.get("missing", "x"), "x");
}

TEST(Config, RejectsMalformedLines) {
  EXPECT_THROW(Config::parse("novalue\n"), std::invalid_argument);
  EXPECT_THROW(Config::parse("=3\n"), std::invalid_argument);
  const Config c = Config::parse("n=12x\n");
  EXPECT_THROW(c.get_int("n", 0), std::invalid_argument);
  EXPECT_THROW(c.get_double("n", 0), std::invalid_argument);
}

TEST(Config, GridForms) {
  EXPECT_EQ(parse_grid("1,2,3"), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(parse_grid("0:1:0.5"), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(parse_grid("2:0:1"), (std::vector<double>{2, 1, 0}));
  const auto g = parse_grid("-4:-2:2,inf");
  ASSERT_EQ(g.size(), 3U);
  EXPECT_EQ(g[2], kInf);
  EXPECT_THROW(parse_grid(""), std::invalid_argument);
  EXPECT_THROW(parse_grid("0:1:0"), std::invalid_argument);
  EXPECT_THROW(parse_grid("0:1"), std::invalid_argument);
  EXPECT_THROW(parse_grid("nan"), std::invalid_argument);
}

TEST(Config, DbParsing) {
  EXPECT_EQ(parse_db("inf"), kInf);
  EXPECT_EQ(parse_db("+inf"), kInf);
  EXPECT_EQ(parse_db("-3.5"), -3.5);
}

TEST(Config, NumberFormattingRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -12.0, 1e-300, 123456789.125}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(kInf), "inf");
  EXPECT_EQ(format_number(-2.0), "-2");
}

}  // namespace
}  // namespace scss
