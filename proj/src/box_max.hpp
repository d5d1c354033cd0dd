#pragma once
// Internal: bounded maximization over a control box.

#include <algorithm>
#include <limits>
#include <vector>

#include "mocp/problem.hpp"

namespace mocp::detail {

inline constexpr double kGolden = 0.6180339887498949;

// Maximizes phi on [a, b] by golden-section search; returns the argmax.
template <typename F>
double golden_max(const F& phi, double a, double b, double width) {
  double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
  double fc = phi(c), fd = phi(d);
  while (b - a > width) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = phi(d);
    }
  }
  return fc >= fd ? c : d;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

struct Candidate {
  double value = -std::numeric_limits<double>::infinity();
  Vec u;
};

// Best H over a box [lo, hi]: tensor grid for k <= 2, coordinate sweeps
// otherwise, then golden refinement one coordinate at a time.
template <typename H>
Candidate maximize_over_box(const H& ham, const Vec& lo, const Vec& hi, const Vec& start,
                            std::size_t grid, double width, int refine_sweeps = 2) {
  const auto k = start.size();
  Candidate best{ham(start), start};
  auto consider = [&](const Vec& z) {
    const double v = ham(z);
    if (v > best.value) best = {v, z};
  };
  grid = std::max<std::size_t>(grid, 2);
  std::vector<std::vector<double>> axes(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) axes[static_cast<std::size_t>(i)] = linspace(lo(i), hi(i), grid);
  if (k == 1) {
    Vec z(1);
    for (double a : axes[0]) {
      z(0) = a;
      consider(z);
    }
  } else if (k == 2) {
    Vec z(2);
    for (double a : axes[0]) {
      for (double b : axes[1]) {
        z << a, b;
        consider(z);
      }
    }
  } else {
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (Eigen::Index i = 0; i < k; ++i) {
        Vec z = best.u;
        for (double a : axes[static_cast<std::size_t>(i)]) {
          z(i) = a;
          consider(z);
        }
      }
    }
  }
  for (int sweep = 0; sweep < refine_sweeps; ++sweep) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const double spacing = (hi(i) - lo(i)) / static_cast<double>(grid - 1);
      if (!(spacing > 0.0)) continue;
      const double a = std::max(lo(i), best.u(i) - spacing);
      const double b = std::min(hi(i), best.u(i) + spacing);
      Vec z = best.u;
      auto phi = [&](double s) {
        z(i) = s;
        return ham(z);
      };
      const double s = golden_max(phi, a, b, width);
      z(i) = s;
      consider(z);
    }
  }
  return best;
}

struct Argmax {
  Candidate best;
  bool unbounded = false;
};

// Maximizer of ham over U. Finite sets are enumerated, boxes searched on a
// grid, free sets on a box around `start` whose radius doubles (and recentres)
// while the maximizer sits on its boundary.
template <typename H>
Argmax argmax_over(const H& ham, const ControlSet& U, const Vec& start, std::size_t grid,
                   double width, double radius, int refine_sweeps = 4) {
  Argmax out;
  switch (U.kind()) {
    case ControlSet::Kind::Finite:
      for (const auto& z : U.points()) {
        const double v = ham(z);
        if (v > out.best.value) out.best = {v, z};
      }
      return out;
    case ControlSet::Kind::Box:
      out.best = maximize_over_box(ham, U.lower(), U.upper(), U.project(start), grid, width,
                                   refine_sweeps);
      return out;
    case ControlSet::Kind::Free:
      break;
  }
  grid = std::max<std::size_t>(grid, 3);
  Vec center = start;
  double r = std::max(radius, 1e-3);
  for (int round = 0; round < 14; ++round) {
    const Vec lo = center.array() - r, hi = center.array() + r;
    out.best = maximize_over_box(ham, lo, hi, center, grid, width * std::max(1.0, r), refine_sweeps);
    const double spacing = 2.0 * r / static_cast<double>(grid - 1);
    if (((out.best.u - center).cwiseAbs().array() < r - 0.5 * spacing).all()) return out;
    center = out.best.u;
    r *= 2.0;
  }
  out.unbounded = true;
  return out;
}

}  // namespace mocp::detail
