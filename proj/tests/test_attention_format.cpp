#include <doctest.h>

#include <bit>
#include <cstring>
#include <sstream>

#include "sap/attention.hpp"
#include "sap/errors.hpp"
#include "sap/toy_corpus.hpp"
#include "sap/toymodel.hpp"
#include "support/generators.hpp"

using namespace sap;

namespace {

AttentionRecord minimal() {
  return AttentionRecord("s1", 1, 1, 2, {0.6f, 0.4f, 0.3f, 0.7f}, WordAlignment::identity(2));
}

AttentionErrorKind kind_of(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_attention(in);
  } catch (const AttentionFormatError& e) {
    return e.kind();
  }
  FAIL("expected AttentionFormatError");
  return AttentionErrorKind::kBadMagic;
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// Hand-assembled SAPATTN1 bytes, independent of write_attention.
std::string assemble(std::uint32_t l, std::uint32_t h, std::uint32_t n, const std::string& header,
                     const std::vector<float>& values) {
  std::string s = "SAPATTN1";
  put_u32(s, l);
  put_u32(s, h);
  put_u32(s, n);
  put_u32(s, static_cast<std::uint32_t>(header.size()));
  s += header;
  for (float v : values) put_u32(s, std::bit_cast<std::uint32_t>(v));
  return s;
}

}  // namespace

TEST_CASE("minimal well-formed tensor reads back its values") {
  const std::string bytes =
      assemble(1, 1, 2, R"({"alignment":[[0,1],[1,2]],"sentence_id":"s1"})", {0.6f, 0.4f, 0.3f, 0.7f});
  std::istringstream in(bytes);
  const AttentionRecord r = read_attention(in);
  CHECK(r.layers() == 1);
  CHECK(r.heads() == 1);
  CHECK(r.tokens() == 2);
  CHECK(r.at(0, 0, 0, 0) == 0.6f);
  CHECK(r.at(0, 0, 0, 1) == 0.4f);
  CHECK(r.at(0, 0, 1, 0) == 0.3f);
  CHECK(r.at(0, 0, 1, 1) == 0.7f);
  CHECK(r == minimal());
  // The writer emits exactly the hand-assembled layout.
  CHECK(write_attention(r) == bytes);
}

TEST_CASE("row summing to 1.5 is rejected") {
  CHECK(kind_of(assemble(1, 1, 2, R"({"alignment":[[0,1],[1,2]],"sentence_id":"s"})", {0.9f, 0.6f, 0.3f, 0.7f})) ==
        AttentionErrorKind::kRowSum);
}

TEST_CASE("row-sum tolerance is 1e-4") {
  const std::string header = R"({"alignment":[[0,1],[1,2]],"sentence_id":"s"})";
  std::istringstream ok(assemble(1, 1, 2, header, {0.60005f, 0.4f, 0.3f, 0.7f}));
  CHECK_NOTHROW(read_attention(ok));
  CHECK(kind_of(assemble(1, 1, 2, header, {0.6002f, 0.4f, 0.3f, 0.7f})) == AttentionErrorKind::kRowSum);
}

TEST_CASE("distinct error variants") {
  const std::string header = R"({"alignment":[[0,1],[1,2]],"sentence_id":"s"})";
  const std::string good = assemble(1, 1, 2, header, {0.6f, 0.4f, 0.3f, 0.7f});

  SUBCASE("bad magic") { CHECK(kind_of("SAPATTN2" + good.substr(8)) == AttentionErrorKind::kBadMagic); }
  SUBCASE("empty stream") { CHECK(kind_of("") == AttentionErrorKind::kBadMagic); }
  SUBCASE("truncated payload") { CHECK(kind_of(good.substr(0, good.size() - 3)) == AttentionErrorKind::kTruncated); }
  SUBCASE("truncated header") { CHECK(kind_of(good.substr(0, 30)) == AttentionErrorKind::kTruncated); }
  SUBCASE("zero layers") { CHECK(kind_of(assemble(0, 1, 2, header, {})) == AttentionErrorKind::kBadShape); }
  SUBCASE("header not JSON") { CHECK(kind_of(assemble(1, 1, 2, "{oops", {0.6f, 0.4f, 0.3f, 0.7f})) == AttentionErrorKind::kBadHeader); }
  SUBCASE("span beyond tokens") {
    CHECK(kind_of(assemble(1, 1, 2, R"({"alignment":[[0,1],[1,3]],"sentence_id":"s"})", {0.6f, 0.4f, 0.3f, 0.7f})) ==
          AttentionErrorKind::kSpanInvalid);
  }
  SUBCASE("overlapping spans") {
    CHECK(kind_of(assemble(1, 1, 2, R"({"alignment":[[0,2],[1,2]],"sentence_id":"s"})", {0.6f, 0.4f, 0.3f, 0.7f})) ==
          AttentionErrorKind::kSpanInvalid);
  }
  SUBCASE("empty span") {
    CHECK(kind_of(assemble(1, 1, 2, R"({"alignment":[[1,1]],"sentence_id":"s"})", {0.6f, 0.4f, 0.3f, 0.7f})) ==
          AttentionErrorKind::kSpanInvalid);
  }
  SUBCASE("negative value") {
    CHECK(kind_of(assemble(1, 1, 2, header, {1.1f, -0.1f, 0.3f, 0.7f})) == AttentionErrorKind::kValueRange);
  }
  SUBCASE("NaN value") {
    CHECK(kind_of(assemble(1, 1, 2, header, {std::numeric_limits<float>::quiet_NaN(), 0.4f, 0.3f, 0.7f})) ==
          AttentionErrorKind::kValueRange);
  }
  SUBCASE("masked head with nonzero rows") {
    CHECK(kind_of(assemble(1, 1, 2, R"({"alignment":[[0,1],[1,2]],"masked_heads":[[0,0]],"sentence_id":"s"})",
                           {0.6f, 0.4f, 0.3f, 0.7f})) == AttentionErrorKind::kMaskedRowNotZero);
  }
}

TEST_CASE("0-layer record rejected at construction") {
  CHECK_THROWS_AS(AttentionRecord("s", 0, 1, 1, {}, WordAlignment::identity(1)), AttentionFormatError);
}

TEST_CASE("span/sentence mismatch") {
  const ParsedSentence three{"s1", {{1, "a"}, {2, "b"}, {3, "c"}}, {{0, 1, "root"}, {1, 2, "x"}, {1, 3, "y"}}};
  try {
    check_alignment(minimal(), three);
    FAIL("expected mismatch");
  } catch (const AttentionFormatError& e) {
    CHECK(e.kind() == AttentionErrorKind::kSpanMismatch);
  }
  const ParsedSentence other_id{"s2", {{1, "a"}, {2, "b"}}, {{0, 1, "root"}, {1, 2, "x"}}};
  CHECK_THROWS_AS(check_alignment(minimal(), other_id), AttentionFormatError);
}

TEST_CASE("toy-model output for a 5-token sentence round-trips bit-exactly") {
  const ToyModel model(toy_config(2, 3, 42));
  const std::vector<std::string> tokens = {"[CLS]", "the", "dolp", "##hins", "saw"};
  WordAlignment align{{{1, 2}, {2, 4}, {4, 5}}};
  const AttentionRecord r = model.forward(tokens, PruneMask(2, 3), "toy", align).attention;
  const std::string bytes = write_attention(r);
  std::istringstream in(bytes);
  const AttentionRecord back = read_attention(in);
  CHECK(back == r);
  CHECK(write_attention(back) == bytes);
  CHECK(std::memcmp(back.values().data(), r.values().data(), r.values().size_bytes()) == 0);
}

TEST_CASE("masked heads survive a round trip") {
  testing::Gen g(5);
  const std::vector<HeadId> masked = {{0, 1}, {1, 0}};
  const AttentionRecord r("m", 2, 2, 3, testing::random_attention_values(g, 2, 2, 3, masked),
                          WordAlignment::identity(3), masked);
  std::istringstream in(write_attention(r));
  const AttentionRecord back = read_attention(in);
  CHECK(back.masked_heads() == masked);
  CHECK(back == r);
}

TEST_CASE("property: read(write(r)) == r for generated records") {
  testing::Gen g(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = testing::random_sentence(g, "p" + std::to_string(trial), g.uniform_int(1, 6));
    const AttentionRecord r = testing::random_record(g, s, g.uniform_int(1, 3), g.uniform_int(1, 3), 14);
    std::istringstream in(write_attention(r));
    CHECK(read_attention(in) == r);
  }
}
