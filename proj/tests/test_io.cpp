#include <doctest.h>

#include <cmath>
#include <random>

#include "mocp/io.hpp"
#include "mocp/registry.hpp"
#include "oracles/extremals.hpp"

using namespace mocp;
using io::json;
using oracle::v1;
using oracle::vec;

namespace {

PiecewiseC1Path random_cubic_path(std::mt19937_64& rng, int corners) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> cs;
  for (int i = 0; i < corners; ++i) cs.push_back((i + 1.0) / (corners + 1.0) + 0.05 * U(rng));
  std::vector<SegmentPtr> segs;
  double start = U(rng), a = 0.0;
  for (int i = 0; i <= corners; ++i) {
    Mat c(1, 4);
    c << start, U(rng), U(rng), U(rng);
    auto seg = std::make_shared<PolynomialSegment>(c, a);
    const double b = i < corners ? cs[static_cast<std::size_t>(i)] : 1.0;
    start = seg->value(b)(0);
    segs.push_back(seg);
    a = b;
  }
  return PiecewiseC1Path(1.0, cs, segs);
}

}  // namespace

TEST_CASE("problem JSON round-trips") {
  for (const auto& name : registry_names()) {
    CAPTURE(name);
    const auto spec = registry_spec(name);
    const json j = io::problem_to_json(spec);
    const auto back = io::problem_from_json(j);
    CHECK(io::problem_to_json(back).dump() == j.dump());
    CHECK(io::problem_hash(back) == io::problem_hash(spec));
    CHECK(io::parse_json(j.dump()).dump() == j.dump());
  }
  CHECK(io::problem_hash(registry_spec("lq1d")) != io::problem_hash(registry_spec("lq1d-free")));
}

TEST_CASE("problem JSON defaults and validation") {
  json j = io::problem_to_json(registry_spec("lq1d"));
  j.erase("terminal_objectives");
  auto s = io::problem_from_json(j);
  CHECK(s.g0 == std::vector<std::string>{"0", "0"});
  CHECK_NOTHROW(build_problem(s));

  auto bad = io::problem_to_json(registry_spec("lq1d"));
  bad["colour"] = 3;
  CHECK_THROWS_AS(io::problem_from_json(bad), io::ParseError);
  bad = io::problem_to_json(registry_spec("lq1d"));
  bad["control_set"]["kind"] = "ball";
  CHECK_THROWS_AS(io::problem_from_json(bad), io::ParseError);
  bad = io::problem_to_json(registry_spec("lq1d"));
  bad.erase("T");
  CHECK_THROWS_AS(io::problem_from_json(bad), io::ParseError);
  bad = io::problem_to_json(registry_spec("lq1d"));
  bad["running"] = json::array({"-x[0]^2"});
  CHECK_THROWS_AS(io::problem_from_json(bad), io::ParseError);
  bad = io::problem_to_json(registry_spec("lq1d"));
  bad["xi0"] = json::array({"one"});
  CHECK_THROWS_AS(io::problem_from_json(bad), io::ParseError);
  // arity is the problem builder's job
  bad = io::problem_to_json(registry_spec("lq1d"));
  bad["dynamics"] = json::array({"u[3]"});
  CHECK_THROWS(build_problem(io::problem_from_json(bad)));
}

TEST_CASE("malformed JSON reports the byte offset") {
  const std::string text = "{\"T\": 1.0,\n \"n\" 1}";
  try {
    io::parse_json(text, "demo.json");
    FAIL("expected a parse error");
  } catch (const io::ParseError& e) {
    CHECK(e.offset == 17);
    CHECK(std::string(e.what()).find("byte 17") != std::string::npos);
    CHECK(std::string(e.what()).find("demo.json") != std::string::npos);
  }
  CHECK_THROWS_AS(io::read_json_file("/nonexistent/problem.json"), io::ParseError);
}

TEST_CASE("path JSON lists both corner values, left first") {
  mocp::Mat a(1, 1), b(1, 1);
  a << 1.0;
  b << 3.0;
  NormalizedPath u(1.0, {0.5}, {std::make_shared<PolynomialSegment>(a, 0.0),
                                std::make_shared<PolynomialSegment>(b, 0.5)});
  const json j = io::path_to_json(u, false, 3);
  const auto& s = j["samples"];
  REQUIRE(s.size() == 6);
  CHECK(s[2]["t"] == 0.5);
  CHECK(s[3]["t"] == 0.5);
  CHECK(s[2]["value"][0] == 1.0);
  CHECK(s[3]["value"][0] == 3.0);
  const auto back = io::normalized_path_from_json(j);
  CHECK(back.corners() == std::vector<double>{0.5});
  CHECK(back.value(0.5)(0) == 3.0);
  CHECK(back.value(0.5, Side::Left)(0) == 1.0);
  CHECK(back.value(1.0)(0) == 3.0);
}

TEST_CASE("cubic paths survive serialization") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = random_cubic_path(rng, rep % 4);
    const auto back = io::c1_path_from_json(io::path_to_json(x, true, 11));
    CHECK(back.corners().size() == x.corners().size());
    for (int i = 0; i <= 200; ++i) {
      const double t = i / 200.0;
      CHECK(std::abs(back.value(t)(0) - x.value(t)(0)) <= 1e-12);
      CHECK(std::abs(back.derivative(t)(0) - x.derivative(t)(0)) <= 1e-10);
    }
  }
}

TEST_CASE("path parsing rejects inconsistent input") {
  json ok = {{"samples", json::array({{{"t", 0.0}, {"value", {1.0}}}, {{"t", 1.0}, {"value", {2.0}}}})}};
  CHECK_NOTHROW(io::normalized_path_from_json(ok));
  json j = ok;
  j["samples"][1]["t"] = -0.5;
  CHECK_THROWS_AS(io::normalized_path_from_json(j), io::ParseError);
  j = ok;
  j["samples"][1]["value"] = {1.0, 2.0};
  CHECK_THROWS_AS(io::normalized_path_from_json(j), io::ParseError);
  j = ok;
  j["corners"] = {0.5};
  CHECK_THROWS_AS(io::normalized_path_from_json(j), io::ParseError);
  j = ok;
  j["samples"][0]["t"] = 0.1;
  CHECK_THROWS_AS(io::normalized_path_from_json(j), io::ParseError);
  j = ok;
  j["samples"][0]["derivative"] = {0.0};
  CHECK_THROWS_AS(io::c1_path_from_json(j), io::ParseError);
  // a jump in a state path is not continuous
  json jump = {{"corners", {0.5}},
               {"samples", json::array({{{"t", 0.0}, {"value", {0.0}}}, {{"t", 0.5}, {"value", {0.0}}},
                                        {{"t", 0.5}, {"value", {1.0}}}, {{"t", 1.0}, {"value", {1.0}}}})}};
  CHECK_THROWS_AS(io::c1_path_from_json(jump), io::ParseError);
  CHECK_NOTHROW(io::normalized_path_from_json(jump));
}

TEST_CASE("a single record at a corner means a continuous path") {
  json j = {{"corners", {0.5}},
            {"samples", json::array({{{"t", 0.0}, {"value", {0.0}}}, {{"t", 0.5}, {"value", {1.0}}},
                                     {{"t", 1.0}, {"value", {0.0}}}})}};
  const auto x = io::c1_path_from_json(j);
  CHECK(x.value(0.25)(0) == doctest::Approx(0.5));
  CHECK(x.value(0.75)(0) == doctest::Approx(0.5));
  CHECK(x.derivative(0.5, Side::Left)(0) == doctest::Approx(2.0));
  CHECK(x.derivative(0.5, Side::Right)(0) == doctest::Approx(-2.0));
}

TEST_CASE("process and multipliers round-trip through the oracle extremal") {
  const auto ex = oracle::lq1d_half();
  const auto prob = registry_problem("lq1d");
  json j = io::process_to_json(ex.process, 201);
  j["multipliers"] = io::to_json(ex.multipliers);
  const json text = io::parse_json(j.dump());
  const auto proc = io::process_from_json(text);
  const auto mult = io::multipliers_from_json(text["multipliers"]);
  CHECK(check_admissible(prob, proc).admissible);
  CHECK(check_conditions(prob, proc, mult).all_pass());
  // the control is stored as linear samples: O(h^2) in the effort integral
  CHECK((evaluate_objectives(prob, proc) - ex.objectives).cwiseAbs().maxCoeff() <= 2e-6);
}

TEST_CASE("reports re-emit byte-identically") {
  const auto ex = oracle::lq1d_track();
  const auto prob = registry_problem("lq1d");
  const auto rep = check_conditions(prob, ex.process, ex.multipliers);
  std::vector<json> docs{io::to_json(rep), io::to_json(check_admissible(prob, ex.process)),
                         io::to_json(ex.multipliers)};
  CQReport cq;
  cq.which = "QC1";
  cq.holds = false;
  cq.measure = 1e-17;
  cq.certificate = vec({0.6, -0.8});
  cq.certificate_residual = 1.0 / 3.0;
  docs.push_back(io::to_json(cq));
  ParetoPoint pt;
  pt.weight = vec({0.1, 0.9});
  pt.objectives = vec({-1.0 / 7.0, std::exp(1.0)});
  pt.multipliers = ex.multipliers;
  pt.necessary = rep;
  docs.push_back(io::to_json(pt, true));
  for (const auto& d : docs) {
    const std::string once = d.dump(2);
    CHECK(io::parse_json(once).dump(2) == once);
  }
  CHECK(docs[0]["AE"].contains("argmax_control"));
  CHECK(docs[0]["all_pass"] == true);
  CHECK(io::number(std::nan("")).is_null());
  CHECK(io::number(INFINITY).is_null());
}

TEST_CASE("front CSV has one row per point") {
  ParetoFront f;
  for (double w : {0.0, 0.5, 1.0}) {
    ParetoPoint p;
    p.weight = vec({w, 1 - w});
    p.objectives = vec({w, -w * w});
    p.dominated = w == 0.5;
    p.necessary.mp.residual = 1e-6 * w;
    f.points.push_back(p);
  }
  const auto csv = io::front_csv(f);
  CHECK(csv.rfind("theta_1,theta_2,J_1,J_2,dominated,max_residual\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.find("\n0.5,0.5,0.5,-0.25,1,4.9999999999999998e-07\n") != std::string::npos);
  CHECK(io::front_csv(ParetoFront{}) == "dominated,max_residual\n");
}
