#include <sstream>

#include "ddms/diagram.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace ddms;

namespace {

Diagram sample() {
  Diagram d;
  d.pairs.push_back({1, {1, 40}, {2, 41}, 9, 12, 0.9, 1.2, 3, 4});
  d.pairs.push_back({0, {0, 2}, {1, 7}, 2, 5, 0.2, 0.5, 2, 5});
  d.pairs.push_back({0, {0, 3}, {1, 8}, 6, 6, 0.6, 0.6, 6, 6});
  d.infinite.push_back({0, {0, 0}, 0, 0.0, 0});
  return d;
}

}  // namespace

TEST_CASE("canonical form drops diagonal pairs and sorts") {
  Diagram d = sample();
  d.canonicalize();
  REQUIRE(d.pairs.size() == 2);
  CHECK(d.pairs[0].dim == 0);
  CHECK(d.pairs[1].dim == 1);
  CHECK(d.finite_count(0) == 1);
  CHECK(d.infinite_count(0) == 1);
  CHECK(signature(d) == DiagramSignature{{0, 0, -1}, {0, 2, 5}, {1, 9, 12}});
}

TEST_CASE("comparison ignores values and simplex ids") {
  Diagram a = sample(), b = sample();
  b.pairs[0].birth = {1, 99};
  b.pairs[0].birth_value = 42;
  CHECK(same_diagram(a, b));
  CHECK(describe_difference(a, b).empty());
  b.pairs[1].death_order = 4;
  CHECK_FALSE(same_diagram(a, b));
  CHECK_FALSE(describe_difference(a, b).empty());
  b = sample();
  b.infinite.clear();
  CHECK_FALSE(same_diagram(a, b));
}

TEST_CASE("csv rows") {
  std::ostringstream out;
  write_csv(out, sample());
  CHECK(out.str() ==
        "dim,birth_order,death_order,birth_value,death_value,birth_simplex,death_simplex,finite\n"
        "0,0,,0,,0:0,,0\n"
        "0,2,5,0.20000000000000001,0.5,0:2,1:7,1\n"
        "1,9,12,0.90000000000000002,1.2,1:40,2:41,1\n");
}

TEST_CASE("json document") {
  std::ostringstream out;
  write_json(out, sample());
  const auto j = nlohmann::json::parse(out.str());
  REQUIRE(j["pairs"].size() == 2);
  CHECK(j["pairs"][0]["birth_simplex"] == "0:2");
  CHECK(j["pairs"][1]["death_order"] == 12);
  REQUIRE(j["infinite"].size() == 1);
  CHECK(j["infinite"][0]["birth_order"] == 0);
}
