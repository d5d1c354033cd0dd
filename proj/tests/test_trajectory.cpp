#include <doctest.h>

#include <cmath>
#include <random>

#include "mocp/trajectory.hpp"

using namespace mocp;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

// |t - 0.5| on [0, 1] with a corner at 0.5.
PiecewiseC1Path kink() {
  Mat left(1, 2), right(1, 2);
  left << 0.5, -1.0;   // 0.5 - t
  right << 0.0, 1.0;   // t - 0.5
  return PiecewiseC1Path(1.0, {0.5},
                         {std::make_shared<PolynomialSegment>(left, 0.0),
                          std::make_shared<PolynomialSegment>(right, 0.5)});
}

}  // namespace

TEST_CASE("corners are merged and clipped") {
  auto c = normalize_corners(2.0, {1.0, 0.0, 1.0 + 1e-14, 2.0, 0.5, -1.0});
  REQUIRE(c.size() == 2);
  CHECK(c[0] == doctest::Approx(0.5));
  CHECK(c[1] == doctest::Approx(1.0));
}

TEST_CASE("one-sided limits at a corner of a step control") {
  NormalizedPath step(1.0, {0.3},
                      {PolynomialSegment::constant(v1(-1.0)), PolynomialSegment::constant(v1(2.0))});
  auto lim = step.one_sided_limits(0.3);
  REQUIRE(lim.left);
  REQUIRE(lim.right);
  CHECK((*lim.left)(0) == -1.0);
  CHECK((*lim.right)(0) == 2.0);
  CHECK(step.value(0.3)(0) == 2.0);
  auto at0 = step.one_sided_limits(0.0);
  CHECK_FALSE(at0.left);
  auto atT = step.one_sided_limits(1.0);
  CHECK_FALSE(atT.right);
  CHECK(step.value(1.0)(0) == 2.0);
}

TEST_CASE("C1 path rejects a jump") {
  Mat a(1, 1), b(1, 1);
  a << 0.0;
  b << 1.0;
  CHECK_THROWS_AS(PiecewiseC1Path(1.0, {0.5},
                                  {std::make_shared<PolynomialSegment>(a, 0.0),
                                   std::make_shared<PolynomialSegment>(b, 0.5)}),
                  TrajectoryError);
}

TEST_CASE("extended derivative uses right derivative at corners") {
  auto p = kink();
  auto d = extended_derivative(p);
  CHECK(d.value(0.25)(0) == doctest::Approx(-1.0));
  CHECK(d.value(0.5)(0) == doctest::Approx(1.0));
  CHECK(d.value(1.0)(0) == doctest::Approx(1.0));
  CHECK(p.derivative(0.5, Side::Left)(0) == doctest::Approx(-1.0));
}

TEST_CASE("integral of a kinked path matches the closed form") {
  auto p = kink();
  // integral_0^1 |t - 0.5| dt = 0.25
  CHECK(integrate(p, 0.0, 1.0)(0) == doctest::Approx(0.25).epsilon(1e-12));
  // integral_0.2^0.9 = 0.5*0.3^2 + 0.5*0.4^2
  CHECK(integrate(p, 0.2, 0.9)(0) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK_THROWS_AS(integrate(p, 0.9, 0.2), TrajectoryError);
}

TEST_CASE("integral of a smooth analytic segment") {
  auto seg = std::make_shared<FunctionSegment>(
      1, [](double t) { return v1(std::sin(3.0 * t)); }, [](double t) { return v1(3.0 * std::cos(3.0 * t)); });
  NormalizedPath p(2.0, {}, {seg});
  const double exact = (1.0 - std::cos(6.0)) / 3.0;
  CHECK(std::abs(integrate(p, 0.0, 2.0)(0) - exact) < 1e-10);
}

TEST_CASE("reconstruct inverts the extended derivative") {
  auto p = kink();
  auto r = reconstruct(extended_derivative(p), p.value(0.0));
  for (double t : {0.0, 0.1, 0.5, 0.73, 1.0}) {
    CHECK(std::abs(r.value(t)(0) - p.value(t)(0)) < 1e-12);
  }
}

TEST_CASE("sampled cubic segment reproduces a cubic exactly with node derivatives") {
  std::vector<double> ts;
  std::vector<Vec> xs, ds;
  for (int i = 0; i <= 10; ++i) {
    const double t = 0.1 * i;
    ts.push_back(t);
    xs.push_back(v1(t * t * t - t));
    ds.push_back(v1(3 * t * t - 1));
  }
  SampledSegment s(ts, xs, ds);
  for (double t : {0.05, 0.333, 0.91}) {
    CHECK(s.value(t)(0) == doctest::Approx(t * t * t - t).epsilon(1e-12));
    CHECK(s.derivative(t)(0) == doctest::Approx(3 * t * t - 1).epsilon(1e-10));
  }
}

TEST_CASE("stack and slice") {
  auto a = kink();
  auto b = PiecewiseC1Path::constant(1.0, v1(3.0));
  std::vector<PiecewiseC1Path> parts{a, b};
  auto s = stack(parts);
  CHECK(s.dim() == 2);
  CHECK(s.value(0.25)(0) == doctest::Approx(0.25));
  CHECK(s.value(0.25)(1) == doctest::Approx(3.0));
  auto back = slice(s, 1, 1);
  CHECK(back.value(0.9)(0) == doctest::Approx(3.0));
}

TEST_CASE("evaluation grid lists corners on both sides") {
  std::vector<double> corners{0.35};
  auto g = evaluation_grid(1.0, corners, 11);
  int hits = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i].at_corner) {
      ++hits;
      CHECK(g[i].t == 0.35);
    }
    if (i > 0) CHECK(g[i].t >= g[i - 1].t);
  }
  CHECK(hits == 2);
  CHECK(g.front().t == 0.0);
  CHECK(g.back().t == 1.0);
  CHECK(g.size() == 13);
}

TEST_CASE("refined path keeps values") {
  auto p = kink();
  std::vector<double> extra{0.2, 0.7};
  auto r = p.refined(extra);
  CHECK(r.corners().size() == 3);
  for (double t : {0.1, 0.2, 0.5, 0.69, 0.7, 1.0}) CHECK(r.value(t)(0) == doctest::Approx(p.value(t)(0)));
}
