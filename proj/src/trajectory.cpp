#include "mocp/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mocp {

namespace {

constexpr std::array<double, 5> kGaussNodes = {0.1488743389816312, 0.4333953941292472,
                                               0.6794095682990244, 0.8650633666889845,
                                               0.9739065285171717};
constexpr std::array<double, 5> kGaussWeights = {0.2955242247147529, 0.2692667193099963,
                                                 0.2190863625159820, 0.1494513491505806,
                                                 0.0666713443086881};

// 10-point Gauss-Legendre on [a, b].
Vec gauss10(const Segment& seg, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  Vec acc = Vec::Zero(static_cast<Eigen::Index>(seg.dim()));
  if (half == 0.0) return acc;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
    acc += kGaussWeights[i] * (seg.value(mid - half * kGaussNodes[i]) +
                               seg.value(mid + half * kGaussNodes[i]));
  }
  return half * acc;
}

double merge_eps(double horizon) { return 1e-12 * horizon; }

// Composite Simpson with panel doubling until the Richardson estimate meets tol.
template <typename F>
Vec simpson_vec(const F& fn, double a, double b, double tol, std::size_t min_panels) {
  const double len = b - a;
  auto rule = [&](std::size_t n) {
    const double h = len / static_cast<double>(n);
    Vec s = fn(a) + fn(b);
    for (std::size_t i = 1; i < n; ++i) {
      s += ((i % 2 == 1) ? 4.0 : 2.0) * fn(a + h * static_cast<double>(i));
    }
    return Vec(s * (h / 3.0));
  };
  std::size_t n = std::max<std::size_t>(2, min_panels);
  Vec prev = rule(n);
  constexpr std::size_t kMaxPanels = std::size_t{1} << 18;
  while (true) {
    n *= 2;
    Vec cur = rule(n);
    const double err = (cur - prev).lpNorm<Eigen::Infinity>() / 15.0;
    const double scale = std::max(len, cur.lpNorm<Eigen::Infinity>());
    if (err <= tol * scale || n >= kMaxPanels) return Vec(cur + (cur - prev) / 15.0);
    prev = std::move(cur);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// segments

PolynomialSegment::PolynomialSegment(Mat coeffs, double origin)
    : coeffs_(std::move(coeffs)), origin_(origin) {
  if (coeffs_.rows() == 0 || coeffs_.cols() == 0) {
    throw TrajectoryError("polynomial segment needs at least one coefficient");
  }
}

Vec PolynomialSegment::value(double t) const {
  const double s = t - origin_;
  Vec acc = coeffs_.col(coeffs_.cols() - 1);
  for (Eigen::Index j = coeffs_.cols() - 2; j >= 0; --j) acc = acc * s + coeffs_.col(j);
  return acc;
}

Vec PolynomialSegment::derivative(double t) const {
  const double s = t - origin_;
  if (coeffs_.cols() == 1) return Vec::Zero(coeffs_.rows());
  Vec acc = static_cast<double>(coeffs_.cols() - 1) * coeffs_.col(coeffs_.cols() - 1);
  for (Eigen::Index j = coeffs_.cols() - 2; j >= 1; --j) {
    acc = acc * s + static_cast<double>(j) * coeffs_.col(j);
  }
  return acc;
}

SegmentPtr PolynomialSegment::constant(const Vec& v) {
  return std::make_shared<PolynomialSegment>(Mat(v), 0.0);
}

FunctionSegment::FunctionSegment(std::size_t dim, Fn value, Fn derivative,
                                 std::vector<double> breakpoints)
    : dim_(dim), value_(std::move(value)), derivative_(std::move(derivative)),
      breakpoints_(std::move(breakpoints)) {
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
}

Vec FunctionSegment::derivative(double t) const {
  if (!derivative_) throw TrajectoryError("segment has no derivative");
  return derivative_(t);
}

SampledSegment::SampledSegment(std::vector<double> times, std::vector<Vec> values,
                               std::vector<Vec> derivatives, Interpolation interp)
    : times_(std::move(times)), values_(std::move(values)), derivs_(std::move(derivatives)),
      exact_derivs_(!derivs_.empty()), interp_(interp) {
  if (times_.size() < 2 || times_.size() != values_.size()) {
    throw TrajectoryError("sampled segment needs >= 2 matching times and values");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw TrajectoryError("sampled segment times must be strictly increasing");
    }
  }
  dim_ = static_cast<std::size_t>(values_.front().size());
  for (const auto& v : values_) {
    if (static_cast<std::size_t>(v.size()) != dim_) {
      throw TrajectoryError("sampled segment values have inconsistent dimension");
    }
  }
  if (exact_derivs_ && derivs_.size() != times_.size()) {
    throw TrajectoryError("sampled segment derivative count mismatch");
  }
  if (!exact_derivs_ && interp_ == Interpolation::Cubic) {
    // Four-point Lagrange derivative at each node.
    const std::size_t n = times_.size();
    derivs_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t lo = 0, hi = n - 1;
      if (n >= 4) {
        lo = (i == 0) ? 0 : std::min(i - 1, n - 4);
        hi = lo + 3;
      }
      Vec d = Vec::Zero(static_cast<Eigen::Index>(dim_));
      const double x = times_[i];
      for (std::size_t j = lo; j <= hi; ++j) {
        // derivative of the j-th Lagrange basis polynomial at x
        double lj = 0.0;
        for (std::size_t m = lo; m <= hi; ++m) {
          if (m == j) continue;
          double term = 1.0 / (times_[j] - times_[m]);
          for (std::size_t r = lo; r <= hi; ++r) {
            if (r == j || r == m) continue;
            term *= (x - times_[r]) / (times_[j] - times_[r]);
          }
          lj += term;
        }
        d += lj * values_[j];
      }
      derivs_[i] = d;
    }
  }
}

std::size_t SampledSegment::locate(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t idx = (it == times_.begin()) ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(idx, times_.size() - 2);
}

Vec SampledSegment::value(double t) const {
  const std::size_t i = locate(t);
  const double h = times_[i + 1] - times_[i];
  const double s = (t - times_[i]) / h;
  if (interp_ == Interpolation::Linear) return (1.0 - s) * values_[i] + s * values_[i + 1];
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * values_[i] + h10 * h * derivs_[i] + h01 * values_[i + 1] +
         h11 * h * derivs_[i + 1];
}

Vec SampledSegment::derivative(double t) const {
  const std::size_t i = locate(t);
  const double h = times_[i + 1] - times_[i];
  if (interp_ == Interpolation::Linear) return (values_[i + 1] - values_[i]) / h;
  const double s = (t - times_[i]) / h;
  const double s2 = s * s;
  const double d00 = 6 * s2 - 6 * s;
  const double d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s;
  const double d11 = 3 * s2 - 2 * s;
  return (d00 * values_[i] + d01 * values_[i + 1]) / h + d10 * derivs_[i] + d11 * derivs_[i + 1];
}

std::vector<double> SampledSegment::breakpoints() const {
  if (times_.size() <= 2) return {};
  return {times_.begin() + 1, times_.end() - 1};
}

std::shared_ptr<const SampledSegment> SampledSegment::resample(const Segment& seg, double a,
                                                               double b, std::size_t points,
                                                               Interpolation interp) {
  points = std::max<std::size_t>(points, 2);
  std::vector<double> ts(points);
  std::vector<Vec> vs(points);
  std::vector<Vec> ds;
  const bool with_d = seg.has_derivative() && interp == Interpolation::Cubic;
  if (with_d) ds.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = (i + 1 == points)
                         ? b
                         : a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    ts[i] = t;
    vs[i] = seg.value(t);
    if (with_d) ds[i] = seg.derivative(t);
  }
  return std::make_shared<SampledSegment>(std::move(ts), std::move(vs), std::move(ds), interp);
}

namespace {

// Inverse of the quintic Hermite conditions at s = 0, 1/2, 1.
const Eigen::Matrix<double, 6, 6>& quintic_inverse() {
  static const Eigen::Matrix<double, 6, 6> inv = [] {
    Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
    const double nodes[3] = {0.0, 0.5, 1.0};
    for (int r = 0; r < 3; ++r) {
      for (int i = 0; i < 6; ++i) {
        A(2 * r, i) = std::pow(nodes[r], i);
        A(2 * r + 1, i) = i == 0 ? 0.0 : i * std::pow(nodes[r], i - 1);
      }
    }
    return Eigen::Matrix<double, 6, 6>(A.inverse());
  }();
  return inv;
}

}  // namespace

QuinticSegment::QuinticSegment(std::vector<double> times, std::vector<Vec> values,
                               std::vector<Vec> derivatives, std::vector<Vec> mid_values,
                               std::vector<Vec> mid_derivatives)
    : times_(std::move(times)),
      values_(std::move(values)),
      derivs_(std::move(derivatives)),
      mid_values_(std::move(mid_values)),
      mid_derivs_(std::move(mid_derivatives)) {
  const std::size_t n = times_.size();
  if (n < 2 || values_.size() != n || derivs_.size() != n || mid_values_.size() != n - 1 ||
      mid_derivs_.size() != n - 1) {
    throw TrajectoryError("quintic segment needs matching node and midpoint data");
  }
  dim_ = static_cast<std::size_t>(values_.front().size());
  const auto& inv = quintic_inverse();
  coeffs_.reserve(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double h = times_[j + 1] - times_[j];
    if (!(h > 0.0)) throw TrajectoryError("quintic segment times must increase");
    Mat data(static_cast<Eigen::Index>(dim_), 6);
    data.col(0) = values_[j];
    data.col(1) = h * derivs_[j];
    data.col(2) = mid_values_[j];
    data.col(3) = h * mid_derivs_[j];
    data.col(4) = values_[j + 1];
    data.col(5) = h * derivs_[j + 1];
    coeffs_.push_back(data * inv.transpose());
  }
}

std::size_t QuinticSegment::locate(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t j = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(j, times_.size() - 2);
}

Vec QuinticSegment::value(double t) const {
  const std::size_t j = locate(t);
  const double s = (t - times_[j]) / (times_[j + 1] - times_[j]);
  const Mat& c = coeffs_[j];
  Vec acc = c.col(5);
  for (int i = 4; i >= 0; --i) acc = acc * s + c.col(i);
  return acc;
}

Vec QuinticSegment::derivative(double t) const {
  const std::size_t j = locate(t);
  const double h = times_[j + 1] - times_[j];
  const double s = (t - times_[j]) / h;
  const Mat& c = coeffs_[j];
  Vec acc = 5.0 * c.col(5);
  for (int i = 4; i >= 1; --i) acc = acc * s + static_cast<double>(i) * c.col(i);
  return acc / h;
}

std::vector<double> QuinticSegment::breakpoints() const {
  return {times_.begin() + 1, times_.end() - 1};
}

void QuinticSegment::samples(std::vector<double>& t, std::vector<Vec>& x,
                             std::vector<Vec>& dx) const {
  for (std::size_t j = 0; j < times_.size(); ++j) {
    t.push_back(times_[j]);
    x.push_back(values_[j]);
    dx.push_back(derivs_[j]);
    if (j + 1 < times_.size()) {
      t.push_back(0.5 * (times_[j] + times_[j + 1]));
      x.push_back(mid_values_[j]);
      dx.push_back(mid_derivs_[j]);
    }
  }
}

AntiderivativeSegment::AntiderivativeSegment(SegmentPtr integrand, double a, double b, Vec start)
    : integrand_(std::move(integrand)), a_(a), b_(b), start_(std::move(start)) {
  if (!(b_ > a_)) throw TrajectoryError("antiderivative segment needs a < b");
  if (static_cast<std::size_t>(start_.size()) != integrand_->dim()) {
    throw TrajectoryError("antiderivative start value has wrong dimension");
  }
  constexpr int kMinPieces = 32;
  std::vector<double> pts;
  for (int i = 0; i <= kMinPieces; ++i) pts.push_back(a_ + (b_ - a_) * i / kMinPieces);
  for (double bp : integrand_->breakpoints()) {
    if (bp > a_ && bp < b_) pts.push_back(bp);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.front() = a_;
  pts.back() = b_;
  nodes_ = std::move(pts);
  node_values_.reserve(nodes_.size());
  node_values_.push_back(start_);
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    node_values_.push_back(node_values_.back() + gauss10(*integrand_, nodes_[i - 1], nodes_[i]));
  }
}

Vec AntiderivativeSegment::value(double t) const {
  t = std::clamp(t, a_, b_);
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  std::size_t i = (it == nodes_.begin()) ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  i = std::min(i, nodes_.size() - 1);
  if (t == nodes_[i]) return node_values_[i];
  return node_values_[i] + gauss10(*integrand_, nodes_[i], t);
}

DerivativeSegment::DerivativeSegment(SegmentPtr base) : base_(std::move(base)) {
  if (!base_->has_derivative()) throw TrajectoryError("segment is not differentiable");
}

Vec DerivativeSegment::derivative(double) const {
  throw TrajectoryError("second derivatives are not available");
}

StackSegment::StackSegment(std::vector<SegmentPtr> parts) : parts_(std::move(parts)), dim_(0) {
  for (const auto& p : parts_) dim_ += p->dim();
}

Vec StackSegment::value(double t) const {
  Vec out(static_cast<Eigen::Index>(dim_));
  Eigen::Index off = 0;
  for (const auto& p : parts_) {
    const auto d = static_cast<Eigen::Index>(p->dim());
    out.segment(off, d) = p->value(t);
    off += d;
  }
  return out;
}

Vec StackSegment::derivative(double t) const {
  Vec out(static_cast<Eigen::Index>(dim_));
  Eigen::Index off = 0;
  for (const auto& p : parts_) {
    const auto d = static_cast<Eigen::Index>(p->dim());
    out.segment(off, d) = p->derivative(t);
    off += d;
  }
  return out;
}

bool StackSegment::has_derivative() const {
  return std::all_of(parts_.begin(), parts_.end(),
                     [](const SegmentPtr& p) { return p->has_derivative(); });
}

std::vector<double> StackSegment::breakpoints() const {
  std::vector<double> out;
  for (const auto& p : parts_) {
    auto b = p->breakpoints();
    out.insert(out.end(), b.begin(), b.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SliceSegment::SliceSegment(SegmentPtr base, std::size_t offset, std::size_t count)
    : base_(std::move(base)), offset_(offset), count_(count) {
  if (offset_ + count_ > base_->dim() || count_ == 0) {
    throw TrajectoryError("slice out of range");
  }
}

// ---------------------------------------------------------------------------
// paths

std::vector<double> normalize_corners(double horizon, std::vector<double> corners) {
  std::sort(corners.begin(), corners.end());
  const double eps = merge_eps(horizon);
  std::vector<double> out;
  for (double c : corners) {
    if (c <= eps || c >= horizon - eps) continue;
    if (!out.empty() && c - out.back() < eps) continue;
    out.push_back(c);
  }
  return out;
}

std::vector<double> union_corners(double horizon, std::span<const double> a,
                                  std::span<const double> b) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return normalize_corners(horizon, std::move(all));
}

PiecewisePath::PiecewisePath(double horizon, std::vector<double> corners,
                             std::vector<SegmentPtr> segments)
    : horizon_(horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw TrajectoryError("horizon must be a positive finite number");
  }
  if (segments.size() != corners.size() + 1) {
    throw TrajectoryError("a path needs exactly one segment more than corners");
  }
  for (const auto& s : segments) {
    if (!s) throw TrajectoryError("null segment");
  }
  const double eps = merge_eps(horizon);
  segments_.push_back(segments[0]);
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const double c = corners[i];
    if (c < -eps || c > horizon + eps) throw TrajectoryError("corner outside [0, T]");
    if (c <= eps) {
      segments_.back() = segments[i + 1];
      continue;
    }
    if (c >= horizon - eps) break;
    if (!corners_.empty() && c - corners_.back() < eps) {
      if (c < corners_.back() - eps) throw TrajectoryError("corners must be increasing");
      segments_.back() = segments[i + 1];
      continue;
    }
    if (!corners_.empty() && c < corners_.back()) {
      throw TrajectoryError("corners must be increasing");
    }
    corners_.push_back(c);
    segments_.push_back(segments[i + 1]);
  }
  const std::size_t d = segments_.front()->dim();
  if (d == 0) throw TrajectoryError("path dimension must be positive");
  for (const auto& s : segments_) {
    if (s->dim() != d) throw TrajectoryError("segments have inconsistent dimension");
  }
}

double PiecewisePath::segment_begin(std::size_t i) const { return i == 0 ? 0.0 : corners_[i - 1]; }

double PiecewisePath::segment_end(std::size_t i) const {
  return i == corners_.size() ? horizon_ : corners_[i];
}

void PiecewisePath::check_time(double t) const {
  const double eps = merge_eps(horizon_);
  if (!(t >= -eps && t <= horizon_ + eps)) throw TrajectoryError("time outside [0, T]");
}

std::size_t PiecewisePath::locate(double t, Side side) const {
  check_time(t);
  const double eps = merge_eps(horizon_);
  // corners at or before t (snapping within eps)
  std::size_t k = static_cast<std::size_t>(
      std::upper_bound(corners_.begin(), corners_.end(), t + eps) - corners_.begin());
  if (side == Side::Left && k > 0 && std::abs(corners_[k - 1] - t) <= eps) --k;
  return k;
}

Vec PiecewisePath::value(double t, Side side) const { return value_in(locate(t, side), t); }

Vec PiecewisePath::value_in(std::size_t i, double t) const {
  return segments_[i]->value(std::clamp(t, segment_begin(i), segment_end(i)));
}

OneSidedLimits PiecewisePath::one_sided_limits(double t) const {
  check_time(t);
  const double eps = merge_eps(horizon_);
  OneSidedLimits out;
  if (t > eps) out.left = value(t, Side::Left);
  if (t < horizon_ - eps) out.right = value(t, Side::Right);
  return out;
}

std::vector<double> PiecewisePath::all_breakpoints() const {
  std::vector<double> out = corners_;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    for (double b : segments_[i]->breakpoints()) {
      if (b > segment_begin(i) && b < segment_end(i)) out.push_back(b);
    }
  }
  return normalize_corners(horizon_, std::move(out));
}

namespace {

std::vector<SegmentPtr> refine_segments(const PiecewisePath& p,
                                        const std::vector<double>& corners) {
  std::vector<SegmentPtr> segs;
  segs.reserve(corners.size() + 1);
  for (std::size_t i = 0; i <= corners.size(); ++i) {
    const double a = i == 0 ? 0.0 : corners[i - 1];
    const double b = i == corners.size() ? p.horizon() : corners[i];
    segs.push_back(p.segment_ptr(p.locate(0.5 * (a + b))));
  }
  return segs;
}

}  // namespace

NormalizedPath::NormalizedPath(double horizon, std::vector<double> corners,
                               std::vector<SegmentPtr> segments)
    : PiecewisePath(horizon, std::move(corners), std::move(segments)) {}

NormalizedPath NormalizedPath::constant(double horizon, const Vec& v) {
  return NormalizedPath(horizon, {}, {PolynomialSegment::constant(v)});
}

NormalizedPath NormalizedPath::refined(std::span<const double> extra) const {
  auto cs = union_corners(horizon_, corners_, extra);
  auto segs = refine_segments(*this, cs);
  return NormalizedPath(horizon_, std::move(cs), std::move(segs));
}

PiecewiseC1Path::PiecewiseC1Path(double horizon, std::vector<double> corners,
                                 std::vector<SegmentPtr> segments, double continuity_tol)
    : PiecewisePath(horizon, std::move(corners), std::move(segments)) {
  for (const auto& s : segments_) {
    if (!s->has_derivative()) throw TrajectoryError("C1 path segment lacks a derivative");
  }
  for (std::size_t i = 0; i < corners_.size(); ++i) {
    const Vec l = segments_[i]->value(corners_[i]);
    const Vec r = segments_[i + 1]->value(corners_[i]);
    const double scale = 1.0 + std::max(l.lpNorm<Eigen::Infinity>(), r.lpNorm<Eigen::Infinity>());
    if ((l - r).lpNorm<Eigen::Infinity>() > continuity_tol * scale) {
      throw TrajectoryError("path is discontinuous at corner t=" + std::to_string(corners_[i]));
    }
  }
}

PiecewiseC1Path PiecewiseC1Path::constant(double horizon, const Vec& v) {
  return PiecewiseC1Path(horizon, {}, {PolynomialSegment::constant(v)});
}

Vec PiecewiseC1Path::derivative(double t, Side side) const {
  const std::size_t i = locate(t, side);
  return segments_[i]->derivative(std::clamp(t, segment_begin(i), segment_end(i)));
}

PiecewiseC1Path PiecewiseC1Path::refined(std::span<const double> extra) const {
  auto cs = union_corners(horizon_, corners_, extra);
  auto segs = refine_segments(*this, cs);
  return PiecewiseC1Path(horizon_, std::move(cs), std::move(segs));
}

NormalizedPath extended_derivative(const PiecewiseC1Path& path) {
  std::vector<SegmentPtr> segs;
  segs.reserve(path.segment_count());
  for (const auto& s : path.segments()) segs.push_back(std::make_shared<DerivativeSegment>(s));
  return NormalizedPath(path.horizon(), path.corners(), std::move(segs));
}

double simpson(const std::function<double(double)>& fn, double a, double b, double tol) {
  if (a > b) throw TrajectoryError("reversed integration bounds");
  if (a == b) return 0.0;
  auto vf = [&](double t) { return Vec::Constant(1, fn(t)); };
  return simpson_vec(vf, a, b, tol, 4)(0);
}

Vec integrate(const PiecewisePath& path, double a, double b, double quad_tol) {
  if (a > b) throw TrajectoryError("reversed integration bounds");
  const double T = path.horizon();
  const double eps = merge_eps(T);
  if (a < -eps || b > T + eps) throw TrajectoryError("integration bounds outside [0, T]");
  Vec total = Vec::Zero(static_cast<Eigen::Index>(path.dim()));
  for (std::size_t i = 0; i < path.segment_count(); ++i) {
    const double lo = std::max(a, path.segment_begin(i));
    const double hi = std::min(b, path.segment_end(i));
    if (!(hi > lo)) continue;
    const Segment& seg = path.segment(i);
    std::vector<double> pts{lo, hi};
    for (double bp : seg.breakpoints()) {
      if (bp > lo && bp < hi) pts.push_back(bp);
    }
    std::sort(pts.begin(), pts.end());
    const bool whole = pts.size() == 2;
    auto fn = [&](double t) { return seg.value(t); };
    for (std::size_t j = 1; j < pts.size(); ++j) {
      if (!(pts[j] > pts[j - 1])) continue;
      total += simpson_vec(fn, pts[j - 1], pts[j], quad_tol, whole ? 8 : 2);
    }
  }
  return total;
}

PiecewiseC1Path reconstruct(const NormalizedPath& derivative, const Vec& x0) {
  if (static_cast<std::size_t>(x0.size()) != derivative.dim()) {
    throw TrajectoryError("initial value dimension does not match derivative");
  }
  std::vector<SegmentPtr> segs;
  Vec start = x0;
  for (std::size_t i = 0; i < derivative.segment_count(); ++i) {
    const double a = derivative.segment_begin(i);
    const double b = derivative.segment_end(i);
    auto seg = std::make_shared<AntiderivativeSegment>(derivative.segment_ptr(i), a, b, start);
    start = seg->value(b);
    segs.push_back(std::move(seg));
  }
  return PiecewiseC1Path(derivative.horizon(), derivative.corners(), std::move(segs));
}

OneSidedLimits one_sided_limits(const PiecewisePath& path, double t) {
  return path.one_sided_limits(t);
}

PiecewiseC1Path stack(std::span<const PiecewiseC1Path> parts) {
  if (parts.empty()) throw TrajectoryError("nothing to stack");
  const double T = parts.front().horizon();
  std::vector<double> cs;
  for (const auto& p : parts) {
    if (std::abs(p.horizon() - T) > merge_eps(T)) throw TrajectoryError("horizon mismatch");
    cs = union_corners(T, cs, p.corners());
  }
  std::vector<SegmentPtr> segs;
  for (std::size_t i = 0; i <= cs.size(); ++i) {
    const double a = i == 0 ? 0.0 : cs[i - 1];
    const double b = i == cs.size() ? T : cs[i];
    std::vector<SegmentPtr> comp;
    for (const auto& p : parts) comp.push_back(p.segment_ptr(p.locate(0.5 * (a + b))));
    segs.push_back(std::make_shared<StackSegment>(std::move(comp)));
  }
  return PiecewiseC1Path(T, std::move(cs), std::move(segs));
}

PiecewiseC1Path slice(const PiecewiseC1Path& path, std::size_t offset, std::size_t count) {
  std::vector<SegmentPtr> segs;
  for (const auto& s : path.segments()) segs.push_back(std::make_shared<SliceSegment>(s, offset, count));
  return PiecewiseC1Path(path.horizon(), path.corners(), std::move(segs));
}

NormalizedPath slice(const NormalizedPath& path, std::size_t offset, std::size_t count) {
  std::vector<SegmentPtr> segs;
  for (const auto& s : path.segments()) segs.push_back(std::make_shared<SliceSegment>(s, offset, count));
  return NormalizedPath(path.horizon(), path.corners(), std::move(segs));
}

std::vector<GridPoint> evaluation_grid(double horizon, std::span<const double> corners,
                                       std::size_t points) {
  points = std::max<std::size_t>(points, 2);
  const auto cs = normalize_corners(horizon, {corners.begin(), corners.end()});
  const double eps = 1e-12 * horizon;
  std::vector<GridPoint> out;
  out.reserve(points + 2 * cs.size());
  std::size_t c = 0;
  for (std::size_t j = 0; j < points; ++j) {
    const double t = (j + 1 == points)
                         ? horizon
                         : horizon * static_cast<double>(j) / static_cast<double>(points - 1);
    while (c < cs.size() && cs[c] < t - eps) {
      out.push_back({cs[c], Side::Left, true});
      out.push_back({cs[c], Side::Right, true});
      ++c;
    }
    if (c < cs.size() && std::abs(cs[c] - t) <= eps) continue;
    out.push_back({t, j + 1 == points ? Side::Left : Side::Right, false});
  }
  return out;
}

}  // namespace mocp
