#include "doctest.h"

#include <sstream>

#include "slblr/bench_data.hpp"
#include "slblr/gap.hpp"

using namespace slblr;

TEST_CASE("minimal well-formed file parses machine-major into job-major storage") {
  const std::string text = "1\n2 3\n10 11 12\n20 21 22\n1 2 3\n4 5 6\n9 9\n";
  const auto instances = parse_orlib_gap(text);
  REQUIRE(instances.size() == 1);
  const GapInstance& inst = instances.front();
  CHECK(inst.machines == 2);
  CHECK(inst.jobs == 3);
  CHECK(inst.cost(0, 0) == 10);
  CHECK(inst.cost(2, 0) == 12);
  CHECK(inst.cost(0, 1) == 20);
  CHECK(inst.resource(1, 0) == 2);
  CHECK(inst.resource(2, 1) == 6);
  CHECK(inst.capacity[0] == 9);
}

TEST_CASE("truncated stream names the missing field") {
  CHECK_THROWS_WITH_AS(parse_orlib_gap(std::string("1 2 3")), "expected 6 cost entries",
                       ParseError);
  CHECK_THROWS_WITH_AS(parse_orlib_gap(std::string("1 2 3 1 1 1 1 1 1")),
                       "expected 6 resource entries", ParseError);
  CHECK_THROWS_WITH_AS(parse_orlib_gap(std::string("1 2 3 1 1 1 1 1 1 1 1 1 1 1 1")),
                       "expected 2 capacity entries", ParseError);
}

TEST_CASE("negative entries are validation errors") {
  CHECK_THROWS_AS(parse_orlib_gap(std::string("1 2 2 1 1 1 -1 1 1 1 1 9 9")), ValidationError);
}

TEST_CASE("strict mode rejects trailing integers, lenient tolerates junk") {
  const std::string good = "1 2 2 5 5 5 5 1 1 1 1 9 9";
  CHECK_NOTHROW(parse_orlib_gap(good));
  CHECK_THROWS_AS(parse_orlib_gap(good + " 7"), ParseError);
  OrlibParseOptions lenient;
  lenient.strict = false;
  CHECK_NOTHROW(parse_orlib_gap(good + " 7", lenient));
  CHECK_NOTHROW(parse_orlib_gap("# capacities below\n" + good, lenient));
  // Trailing whitespace is fine either way.
  CHECK_NOTHROW(parse_orlib_gap(good + "  \n\n"));
}

TEST_CASE("serialize then parse reproduces the integer sequence") {
  for (std::uint64_t seed : {3ULL, 4ULL}) {
    const GapInstance inst = make_type_d_gap(3, 8, seed);
    const std::string text = serialize_orlib_gap({inst});
    const auto parsed = parse_orlib_gap(text);
    REQUIRE(parsed.size() == 1);
    const std::string again = serialize_orlib_gap(parsed);
    CHECK(text == again);
    CHECK(parsed.front().cost == inst.cost);
    CHECK(parsed.front().resource == inst.resource);
    CHECK(parsed.front().capacity == inst.capacity);
  }
}

TEST_CASE("benchmark file materialization yields the declared dimensions") {
  const auto file = ensure_benchmark_instance("d05100", default_data_dir());
  const GapInstance inst = load_gap_instance(file, 1);
  CHECK(inst.machines == 5);
  CHECK(inst.jobs == 100);
  // Deterministic: a second load is identical.
  const GapInstance again = load_gap_instance(ensure_benchmark_instance("d05100", default_data_dir()), 1);
  CHECK(inst.cost == again.cost);
}

TEST_CASE("type-d generator is deterministic and valid") {
  const GapInstance a = make_type_d_gap(4, 30, 77);
  const GapInstance b = make_type_d_gap(4, 30, 77);
  CHECK(a.cost == b.cost);
  CHECK(a.resource == b.resource);
  CHECK(a.capacity == b.capacity);
  CHECK((a.resource.array() >= 1).all());
  CHECK((a.resource.array() <= 100).all());
  CHECK_NOTHROW(a.validate());
}

TEST_CASE("a job no machine can host fails validation") {
  GapInstance inst;
  inst.machines = 2;
  inst.jobs = 1;
  inst.cost.setConstant(1, 2, 1);
  inst.resource.setConstant(1, 2, 50);
  inst.capacity.resize(2);
  inst.capacity << 10, 10;
  CHECK_THROWS_AS(inst.validate(), ValidationError);
}
