#include <doctest.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "steering/errors.hpp"
#include "steering/io.hpp"
#include "steering/random.hpp"

using steering::InvalidArgument;
namespace io = steering::io;

TEST_CASE("split_csv splits on commas and trims surrounding spaces") {
  CHECK(io::split_csv("a,b,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(io::split_csv(" a , b ,c ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(io::split_csv("1") == std::vector<std::string>{"1"});
  CHECK(io::split_csv("x,,y") == std::vector<std::string>{"x", "", "y"});
  CHECK(io::split_csv("a,b,") == std::vector<std::string>{"a", "b", ""});
}

TEST_CASE("parse_double accepts full numeric strings only") {
  CHECK(io::parse_double("1.25", "f") == doctest::Approx(1.25));
  CHECK(io::parse_double("-3e-7", "f") == doctest::Approx(-3e-7));
  CHECK_THROWS_AS(io::parse_double("", "f"), InvalidArgument);
  // Fields are trimmed by the CSV splitter; the parser itself is strict.
  CHECK_THROWS_AS(io::parse_double("  2.5 ", "f"), InvalidArgument);
  CHECK_THROWS_AS(io::parse_double("abc", "f"), InvalidArgument);
  CHECK_THROWS_AS(io::parse_double("1.2x", "f"), InvalidArgument);
  CHECK_THROWS_AS(io::parse_double("--2", "f"), InvalidArgument);
  CHECK_THROWS_AS(io::parse_double("1e", "f"), InvalidArgument);
}

TEST_CASE("parse_int accepts integers only") {
  CHECK(io::parse_int("42", "n") == 42);
  CHECK(io::parse_int("-7", "n") == -7);
  CHECK(io::parse_int("0", "n") == 0);
  CHECK_THROWS_AS(io::parse_int("3.5", "n"), InvalidArgument);
  CHECK_THROWS_AS(io::parse_int("", "n"), InvalidArgument);
  CHECK_THROWS_AS(io::parse_int("12a", "n"), InvalidArgument);
}

TEST_CASE("parse errors name the offending field") {
  try {
    io::parse_double("oops", "efficiency eta");
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("efficiency eta") != std::string::npos);
    CHECK(e.category() == "invalid-argument");
  }
}

TEST_CASE("read_data_lines drops blanks and comment lines") {
  std::istringstream in("# header\n\nrow1\n  \t\n# mid comment\nrow2\n");
  CHECK(io::read_data_lines(in) == std::vector<std::string>{"row1", "row2"});
}

TEST_CASE("output header carries version, command, seed, and config") {
  std::ostringstream out;
  io::write_output_header(out, "steerkit simulate --seed 5", 5,
                          {{"mu", "0.99"}, {"trials", "100"}});
  std::string text = out.str();
  CHECK(text.find("# steerkit 0.1.0\n") != std::string::npos);
  CHECK(text.find("# command: steerkit simulate --seed 5\n") != std::string::npos);
  CHECK(text.find("# seed: 5\n") != std::string::npos);
  CHECK(text.find("# mu: 0.99\n") != std::string::npos);
  CHECK(text.find("# trials: 100\n") != std::string::npos);
  for (const std::string& line : io::split_csv("")) (void)line;
  // Every line of the header is a comment.
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    REQUIRE(!line.empty());
    CHECK(line[0] == '#');
  }
}

TEST_CASE("output header omits the seed when none is given") {
  std::ostringstream out;
  io::write_output_header(out, "steerkit ftl", std::nullopt, {});
  CHECK(out.str().find("# seed") == std::string::npos);
}

TEST_CASE("thread count comes from STEERKIT_THREADS with fallback 1") {
  const char* saved = std::getenv("STEERKIT_THREADS");
  std::string saved_value = saved ? saved : "";

  unsetenv("STEERKIT_THREADS");
  CHECK(steering::default_thread_count() == 1);
  setenv("STEERKIT_THREADS", "3", 1);
  CHECK(steering::default_thread_count() == 3);
  setenv("STEERKIT_THREADS", "garbage", 1);
  CHECK(steering::default_thread_count() == 1);
  setenv("STEERKIT_THREADS", "0", 1);
  CHECK(steering::default_thread_count() == 1);

  if (saved)
    setenv("STEERKIT_THREADS", saved_value.c_str(), 1);
  else
    unsetenv("STEERKIT_THREADS");
}

TEST_CASE("derived seeds differ across indices and masters") {
  CHECK(steering::derive_seed(1, 0) != steering::derive_seed(1, 1));
  CHECK(steering::derive_seed(1, 0) != steering::derive_seed(2, 0));
  CHECK(steering::derive_seed(7, 3) == steering::derive_seed(7, 3));
}
