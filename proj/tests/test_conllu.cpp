#include <doctest.h>

#include <sstream>

#include "mh4/conllu.hpp"

using namespace mh4;

namespace {

const char* kCorpus =
    "# newdoc id = d1\n"
    "# sent_id = s1\n"
    "# text = Don't go\n"
    "1-2\tDon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
    "1\tDo\tdo\tAUX\t_\t_\t3\taux\t_\t_\n"
    "2\tn't\tnot\tPART\t_\t_\t3\tadvmod\t_\t_\n"
    "3\tgo\tgo\tVERB\t_\t_\t0\troot\t_\tSpaceAfter=No\n"
    "\n"
    "# sent_id = s2\n"
    "1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n"
    "1.1\tthere\t_\t_\t_\t_\t_\t_\t1:dep\t_\n"
    "\n"
    "1\tOk\tok\tINTJ\t_\t_\t0\troot\t0:root\t_\n"
    "\n";

}  // namespace

TEST_CASE("minimal sentence") {
  auto s = read_conllu_string("1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n");
  REQUIRE(s.size() == 1);
  CHECK(s[0].n() == 1);
  CHECK(s[0].tokens[0].head == 0);
}

TEST_CASE("figure 1 sentence") {
  auto s = read_conllu_file(MH4_TEST_DATA_DIR "/fig1.conllu");
  REQUIRE(s.size() == 1);
  CHECK(s[0].n() == 9);
  CHECK(s[0].tokens[8].head == 6);
  CHECK(s[0].tokens[8].deprel == "advcl");
  CHECK(s[0].sent_id() == "en-fig1");
}

TEST_CASE("round trip with comments, ranges and empty nodes") {
  auto s = read_conllu_string(kCorpus);
  REQUIRE(s.size() == 3);
  CHECK(s[0].n() == 3);
  CHECK(s[0].extras.size() == 1);
  CHECK(s[1].n() == 1);
  CHECK(s[1].extras.size() == 1);
  CHECK(write_conllu(s) == kCorpus);
}

TEST_CASE("three sentences are separated by exactly one blank line") {
  auto out = write_conllu(read_conllu_string(kCorpus));
  CHECK(out.find("\n\n\n") == std::string::npos);
  std::size_t blocks = 0;
  for (std::size_t p = out.find("\n\n"); p != std::string::npos; p = out.find("\n\n", p + 1)) {
    ++blocks;
  }
  CHECK(blocks == 3);
}

TEST_CASE("overlay replaces head and deprel only") {
  auto s = read_conllu_string("1\ta\tA\tX\tY\tF=1\t0\troot\td\tm\n");
  ParseOverlay overlay{{-1, 0}, {"", "dep"}};
  CHECK(write_conllu(s, {overlay}) == "1\ta\tA\tX\tY\tF=1\t0\tdep\td\tm\n\n");
  ParseOverlay unlabeled{{-1, 0}, {}};
  CHECK(write_conllu(s, {unlabeled}) == "1\ta\tA\tX\tY\tF=1\t0\t_\td\tm\n\n");
  ParseOverlay wrong{{-1, 0, 1}, {}};
  CHECK_THROWS_AS(write_conllu(s, {wrong}), std::invalid_argument);
  CHECK_THROWS_AS(write_conllu(s, std::vector<ParseOverlay>{}), std::invalid_argument);
}

TEST_CASE("malformed lines report line numbers") {
  SUBCASE("column count") {
    try {
      read_conllu_string("# c\n1\ta\t_\t_\t_\t_\t0\troot\t_\n");
      FAIL("expected error");
    } catch (const ConlluError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("non-integer id") {
    CHECK_THROWS_AS(read_conllu_string("x\ta\t_\t_\t_\t_\t0\troot\t_\t_\n"), ConlluError);
  }
  SUBCASE("non-integer head") {
    CHECK_THROWS_AS(read_conllu_string("1\ta\t_\t_\t_\t_\tz\troot\t_\t_\n"), ConlluError);
  }
  SUBCASE("ids out of sequence") {
    CHECK_THROWS_AS(read_conllu_string("2\ta\t_\t_\t_\t_\t0\troot\t_\t_\n"), ConlluError);
  }
  SUBCASE("head out of range") {
    try {
      read_conllu_string("1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n2\tb\t_\t_\t_\t_\t3\tdep\t_\t_\n");
      FAIL("expected error");
    } catch (const ConlluValidationError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("empty form") {
    CHECK_THROWS_AS(read_conllu_string("1\t\t_\t_\t_\t_\t0\troot\t_\t_\n"), ConlluError);
  }
}

TEST_CASE("unannotated heads") {
  const char* text = "1\ta\t_\t_\t_\t_\t_\t_\t_\t_\n\n";
  CHECK_THROWS_AS(read_conllu_string(text), ConlluError);
  auto s = read_conllu_string(text, {.require_heads = false});
  REQUIRE(s.size() == 1);
  CHECK_FALSE(s[0].has_heads());
  CHECK(write_conllu(s) == text);
}

TEST_CASE("lenient about repeated blank lines and missing final blank line") {
  auto s = read_conllu_string("\n\n1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n\n\n1\tb\t_\t_\t_\t_\t0\troot\t_\t_");
  CHECK(s.size() == 2);
}
