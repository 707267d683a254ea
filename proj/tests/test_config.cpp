// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "lidarda/config.hpp"
#include "lidarda/error.hpp"
#include "test_util.hpp"

using namespace lidarda;

namespace {

Schema demo_schema() {
  Schema schema;
  schema.add("train.total_iters", KeyType::integer, "5000")
      .add("train.lr0", KeyType::real, "5e-3")
      .add("train.seed", KeyType::seed, "0")
      .add("chain.use_xyz_shift", KeyType::boolean, "false")
      .add("data.source", KeyType::text, "");
  return schema;
}

}  // namespace

TEST_CASE("config parsing handles comments, blanks and spacing") {
  const Config config = Config::parse_text(
      "# a comment\n"
      "train.total_iters = 100\n"
      "\n"
      "train.lr0=0.01   # trailing comment\n"
      "data.source = /tmp/ds\n");
  CHECK(config.has("train.total_iters"));
  const auto resolved = demo_schema().resolve(config);
  Resolved r{resolved};
  CHECK(r.get_int("train.total_iters") == 100);
  CHECK(r.get_double("train.lr0") == 0.01);
  CHECK(r.get_text("data.source") == "/tmp/ds");
  // defaults fill unset keys
  CHECK(r.get_bool("chain.use_xyz_shift") == false);
  CHECK(r.get_seed("train.seed") == 0);
}

TEST_CASE("unknown keys are rejected by name") {
  const Config config = Config::parse_text("train.totl_iters = 100\n");
  try {
    demo_schema().resolve(config);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("train.totl_iters") != std::string::npos);
  }
}

TEST_CASE("type errors name the key and value") {
  const Config config = Config::parse_text("train.total_iters = soon\n");
  CHECK_THROWS_AS(demo_schema().resolve(config), ValidationError);
  const Config bad_bool = Config::parse_text("chain.use_xyz_shift = yes\n");
  CHECK_THROWS_AS(demo_schema().resolve(bad_bool), ValidationError);
  const Config bad_real = Config::parse_text("train.lr0 = fast\n");
  CHECK_THROWS_AS(demo_schema().resolve(bad_real), ValidationError);
}

TEST_CASE("malformed lines are rejected") {
  CHECK_THROWS_AS(Config::parse_text("just words\n"), ValidationError);
  CHECK_THROWS_AS(Config::parse_text("= value\n"), ValidationError);
}

TEST_CASE("overrides win over file values") {
  Config config = Config::parse_text("train.total_iters = 100\n");
  config.set("train.total_iters", "250");
  Resolved r{demo_schema().resolve(config)};
  CHECK(r.get_int("train.total_iters") == 250);
}

TEST_CASE("list values split on commas") {
  Schema schema;
  schema.add("ablate.stages", KeyType::text, "base,xyz");
  Config config;
  config.set("ablate.stages", "base, xyz , beams");
  Resolved r{schema.resolve(config)};
  CHECK(r.get_list("ablate.stages") ==
        std::vector<std::string>{"base", "xyz", "beams"});
}

TEST_CASE("run manifest is sorted and deterministic") {
  testutil::TempDir tmp("manifest");
  Resolved r{demo_schema().resolve(Config::parse_text("train.lr0 = 0.25\n"))};
  write_run_manifest(r, tmp.path() / "a.txt");
  write_run_manifest(r, tmp.path() / "b.txt");
  const auto a = testutil::slurp(tmp.path() / "a.txt");
  CHECK(a == testutil::slurp(tmp.path() / "b.txt"));
  const std::string text(a.begin(), a.end());
  CHECK(text.find("train.lr0 = 0.25") != std::string::npos);
  CHECK(text.find("# lidarda") != std::string::npos);
}
