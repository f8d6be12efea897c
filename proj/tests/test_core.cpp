// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#include <catch2/catch_amalgamated.hpp>

#include "datascout/core/clock.hpp"
#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/core/hash.hpp"
#include "datascout/core/http.hpp"
#include "datascout/core/rng.hpp"
#include "datascout/core/text.hpp"
#include "support.hpp"

using namespace datascout;

TEST_CASE("Rng: xoshiro256** stream matches reference values", "[unit][core]") {
  Rng a(42);
  CHECK(a.next() == 0x15780b2e0c2ec716ULL);
  CHECK(a.next() == 0x6104d9866d113a7eULL);
  CHECK(a.next() == 0xae17533239e499a1ULL);
  Rng b(0);
  CHECK(b.next() == 0x99ec5f36cb75f2b4ULL);
  CHECK(b.next() == 0xbf6e1f784956452aULL);
}

TEST_CASE("Rng: uniform and below stay in range", "[unit][core]") {
  Rng r(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(r.below(7) < 7);
  }
}

TEST_CASE("Rng: normal has unit moments", "[unit][core]") {
  Rng r(7);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(s / n == Catch::Approx(0.0).margin(0.01));
  CHECK(s2 / n == Catch::Approx(1.0).margin(0.01));
}

TEST_CASE("Hashing: digests match published vectors", "[unit][core]") {
  CHECK(hashing::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(hashing::fnv1a64("datascout") == 0x8a0d96f1ab752b8aULL);
  CHECK(hashing::fnv1a64("datascout", 7) == 0x29e61953e9657112ULL);
  testsupport::TempDir dir("hash");
  fs::write_file_atomic(dir / "f.txt", "hello\n");
  CHECK(hashing::checksum_matches(dir / "f.txt", "md5:b1946ac92492d2347c6235b4d2611184"));
  CHECK(hashing::checksum_matches(dir / "f.txt", "B1946AC92492D2347C6235B4D2611184"));
  CHECK_FALSE(hashing::checksum_matches(dir / "f.txt", "md5:00000000000000000000000000000000"));
}

TEST_CASE("Text: tokenizer counts word runs and punctuation", "[unit][core]") {
  CHECK(text::count_tokens("") == 0);
  CHECK(text::count_tokens("Hello, world!") == 4);
  CHECK(text::count_tokens("a-b  c") == 4);
  CHECK(text::tokenize("x y").size() == text::count_tokens("x y"));
  CHECK(text::words("The CAT, sat.") == std::vector<std::string>{"the", "cat", "sat"});
}

TEST_CASE("Text: sentence splitter and truncation", "[unit][core]") {
  const auto s = text::sentences("One. Two! Three?\n- Four");
  CHECK(s == std::vector<std::string>{"One.", "Two!", "Three?", "Four"});
  const auto t = text::truncate_tokens("a b c d e f", 4);
  CHECK(t == "a b\n[...]\ne f");
  CHECK(text::truncate_tokens("a b", 4) == "a b");
}

TEST_CASE("Text: strict number parsing", "[unit][core]") {
  double d = 0;
  long long i = 0;
  CHECK(text::parse_double(" 1.5 ", d));
  CHECK(d == 1.5);
  CHECK_FALSE(text::parse_double("1.5x", d));
  CHECK_FALSE(text::parse_double("inf", d));
  CHECK(text::parse_integer("+12", i));
  CHECK(i == 12);
  CHECK_FALSE(text::parse_integer("1.0", i));
}

TEST_CASE("Text: NFC normalization composes accents", "[unit][core]") {
  CHECK(text::nfc("e\xCC\x81") == "\xC3\xA9");
  CHECK(text::valid_utf8("\xC3\xA9"));
  CHECK_FALSE(text::valid_utf8("\xC3"));
}

TEST_CASE("Http: url parsing", "[unit][core]") {
  const auto u = http::parse_url("https://repo.test/api/x?page=1");
  CHECK(u.host == "repo.test");
  CHECK(u.port == 443);
  CHECK(u.target == "/api/x?page=1");
  CHECK(u.path() == "/api/x");
  CHECK(http::parse_url("http://h:8081").target == "/");
  CHECK_THROWS_AS(http::parse_url("ftp://x"), Error);
  CHECK(http::url_encode("a@b c") == "a%40b%20c");
}

TEST_CASE("Http: retry stops on non-retryable errors", "[unit][core]") {
  http::RetryPolicy p{3, std::chrono::milliseconds(0)};
  int calls = 0;
  CHECK_THROWS_AS(http::with_retry(p, [&]() -> int {
                    ++calls;
                    fail(ErrorCode::kMalformedResponse, "bad");
                  }),
                  Error);
  CHECK(calls == 1);
  calls = 0;
  CHECK_THROWS_AS(http::with_retry(p, [&]() -> int {
                    ++calls;
                    fail(ErrorCode::kTransportFailure, "down");
                  }),
                  Error);
  CHECK(calls == 3);
  calls = 0;
  CHECK(http::with_retry(p, [&] {
          if (++calls < 2) fail(ErrorCode::kTransportFailure, "once");
          return 5;
        }) == 5);
}

TEST_CASE("Fs: atomic write and append", "[unit][core]") {
  testsupport::TempDir dir("fs");
  fs::write_file_atomic(dir / "a/b.txt", "x");
  CHECK(fs::read_file(dir / "a/b.txt") == "x");
  fs::append_line(dir / "l.jsonl", "1");
  fs::append_line(dir / "l.jsonl", "2");
  CHECK(fs::read_file(dir / "l.jsonl") == "1\n2\n");
  CHECK_THROWS_AS(fs::read_file(dir / "missing"), Error);
}

TEST_CASE("Clock: fixed clock replays its stamp", "[unit][core]") {
  const auto c = fixed_clock("2024-01-01T00:00:00Z");
  CHECK(c() == "2024-01-01T00:00:00Z");
  CHECK(utc_now_iso().size() == 20);
}
