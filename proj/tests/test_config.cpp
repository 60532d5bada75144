// Copyright 2026 The resebm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "resebm/config.hpp"
#include "resebm/errors.hpp"

using namespace resebm;

TEST_CASE("parse skips comments and trims whitespace") {
  const auto cfg = ExperimentConfig::parse("# header\n\n  V = 4 \nT=6\n\t# another\nname = canonical fixture\n");
  CHECK(cfg.entries().size() == 3);
  CHECK(cfg.get_int("V") == 4);
  CHECK(cfg.get_int("T") == 6);
  CHECK(cfg.get_string("name") == "canonical fixture");
}

TEST_CASE("parse rejects malformed lines, bad keys and duplicates") {
  CHECK_THROWS_AS(ExperimentConfig::parse("V 4\n"), ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::parse("=4\n"), ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::parse("a b=4\n"), ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::parse("V=4\nV=5\n"), ValidationError);
}

TEST_CASE("serialize is canonical and round-trips") {
  const auto a = ExperimentConfig::parse("b=2\na = 1\nc=x=y\n");
  CHECK(a.serialize() == "a=1\nb=2\nc=x=y\n");
  CHECK(ExperimentConfig::parse(a.serialize()) == a);
  const auto b = ExperimentConfig::parse("# reordered\nc=x=y\na=1\n\nb = 2\n");
  CHECK(a == b);
  CHECK(a.content_hash() == b.content_hash());
}

TEST_CASE("content hash is FNV-1a of the canonical form") {
  // FNV-1a 64 of "a=1\n"
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : std::string("a=1\n")) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  CHECK(ExperimentConfig::parse("a=1").content_hash() == buf);
  CHECK(ExperimentConfig().content_hash() == "cbf29ce484222325");
  CHECK(ExperimentConfig::parse("a=1").content_hash() != ExperimentConfig::parse("a=2").content_hash());
  CHECK(ExperimentConfig::parse("a=1").content_hash().size() == 16);
}

TEST_CASE("typed getters") {
  const auto cfg = ExperimentConfig::parse(
      "i=-12\nr=0.25\ninf=inf\nb1=true\nb2=0\nseed=18446744073709551615\nbad=3x\nword=yes please\n");
  CHECK(cfg.get_int("i") == -12);
  CHECK(cfg.get_int("missing", 7) == 7);
  CHECK(cfg.get_real("r") == 0.25);
  CHECK(cfg.get_real("i") == -12.0);
  CHECK(std::isinf(cfg.get_real("inf")));
  CHECK(cfg.get_real("missing", 1.5) == 1.5);
  CHECK(cfg.get_bool("b1", false));
  CHECK_FALSE(cfg.get_bool("b2", true));
  CHECK(cfg.get_bool("missing", true));
  CHECK(cfg.get_seed("seed", 0) == 18446744073709551615ULL);
  CHECK(cfg.get_seed("missing", 9) == 9);
  CHECK(cfg.get_string("missing", "x") == "x");
  CHECK_THROWS_AS(cfg.get_int("bad"), ValidationError);
  CHECK_THROWS_AS(cfg.get_int("r"), ValidationError);
  CHECK_THROWS_AS(cfg.get_real("bad"), ValidationError);
  CHECK_THROWS_AS(cfg.get_bool("word", false), ValidationError);
  CHECK_THROWS_AS(cfg.get_seed("i", 0), ValidationError);
  CHECK_THROWS_AS(cfg.get_string("missing"), ValidationError);
  CHECK_THROWS_AS(cfg.get_int("missing"), ValidationError);
}

TEST_CASE("set validates keys and values") {
  ExperimentConfig cfg;
  cfg.set("seed", "3");
  CHECK(cfg.get_int("seed") == 3);
  cfg.set("seed", "4");
  CHECK(cfg.get_int("seed") == 4);
  CHECK_THROWS_AS(cfg.set("bad key", "1"), ValidationError);
  CHECK_THROWS_AS(cfg.set("k", "two\nlines"), ValidationError);
  CHECK_THROWS_AS(cfg.set("k", " padded"), ValidationError);
}

TEST_CASE("check_keys rejects unknown keys") {
  const auto cfg = ExperimentConfig::parse("V=4\nT=3\n");
  CHECK_NOTHROW(cfg.check_keys({"V", "T", "p"}));
  CHECK_THROWS_AS(cfg.check_keys({"V"}), ValidationError);
}
