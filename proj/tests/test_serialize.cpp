#include <doctest.h>

#include "statarb/error.hpp"
#include "statarb/serialize.hpp"
#include "support.hpp"

using namespace statarb;

TEST_CASE("matrices are row-major with explicit dimensions") {
  Matrix a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  const Json j = matrix_to_json(a);
  CHECK(j["rows"] == 2);
  CHECK(j["cols"] == 3);
  CHECK(j["data"][1] == 2.0);
  CHECK(matrix_from_json(j, "a") == a);
  Json bad = j;
  bad["cols"] = 4;
  CHECK_THROWS_AS(matrix_from_json(bad, "a"), Error);
}

TEST_CASE("model round trip through text") {
  Philox rng(3);
  const auto p = testing::random_model(rng, 4, 2, -7.0);
  const Json j = Json::parse(model_to_json(p).dump());
  const auto q = model_from_json(j);
  CHECK(q.sigma1 == p.sigma1);
  CHECK(q.mu == p.mu);
  CHECK((q.sigma_c - p.sigma_c).norm() < 1e-15 * (1.0 + p.sigma_c.norm()));
  CHECK(q.gamma == p.gamma);
}

TEST_CASE("synthetic config round trip") {
  MarketShape shape;
  auto c = random_market(shape, 100, 6);
  c.z0 = Vector::Constant(c.d, 0.01);
  testing::TempDir dir("ser");
  write_json(synth_to_json(c), dir / "c.json");
  const auto back = synth_from_json(read_json(dir / "c.json"));
  CHECK(back.sigma1 == c.sigma1);
  CHECK(back.cross == c.cross);
  CHECK(back.n_steps == 100);
  CHECK(back.seed == 6);
  REQUIRE(back.z0);
  CHECK(*back.z0 == *c.z0);
  CHECK(simulate(back).stock_levels == simulate(c).stock_levels);
}

TEST_CASE("solution json carries diagnostics") {
  Philox rng(9);
  const auto p = testing::random_model(rng, 3, 1, -2.0);
  const Json j = solution_to_json(solve_hjb(p, Variant::Constrained));
  CHECK(j["variant"] == "constrained");
  CHECK(j["certificate"].contains("rank_conditions"));
  CHECK(matrix_from_json(j["C_bar"], "C").rows() == 3);
}

TEST_CASE("malformed json names the file") {
  testing::TempDir dir("ser");
  write_text(dir / "bad.json", "{not json");
  try {
    read_json(dir / "bad.json");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
  }
}
