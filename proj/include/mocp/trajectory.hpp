#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mocp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct TrajectoryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Which one-sided value to take at a corner.
enum class Side { Left, Right };

inline constexpr std::size_t kDefaultSamplesPerSegment = 200;
inline constexpr double kDefaultQuadTol = 1e-10;

/// A smooth piece of a path. Segments are evaluated on a closed interval, so
/// the value at an endpoint is the one-sided limit from inside the segment.
class Segment {
 public:
  virtual ~Segment() = default;
  virtual std::size_t dim() const = 0;
  virtual Vec value(double t) const = 0;
  virtual Vec derivative(double t) const = 0;
  virtual bool has_derivative() const { return true; }
  /// Interior times where the segment is only C0 (sampled nodes, kinks of
  /// composed functions). Quadrature never lets a panel straddle one.
  virtual std::vector<double> breakpoints() const { return {}; }
};

using SegmentPtr = std::shared_ptr<const Segment>;

/// Vector polynomial sum_j coeffs.col(j) * (t - origin)^j.
class PolynomialSegment final : public Segment {
 public:
  PolynomialSegment(Mat coeffs, double origin);
  std::size_t dim() const override { return static_cast<std::size_t>(coeffs_.rows()); }
  Vec value(double t) const override;
  Vec derivative(double t) const override;
  const Mat& coeffs() const { return coeffs_; }
  double origin() const { return origin_; }

  static SegmentPtr constant(const Vec& v);

 private:
  Mat coeffs_;
  double origin_;
};

/// Analytic segment from callables. Without a derivative callable the segment
/// is only usable inside normalized piecewise-continuous paths.
class FunctionSegment final : public Segment {
 public:
  using Fn = std::function<Vec(double)>;
  FunctionSegment(std::size_t dim, Fn value, Fn derivative = {},
                  std::vector<double> breakpoints = {});
  std::size_t dim() const override { return dim_; }
  Vec value(double t) const override { return value_(t); }
  Vec derivative(double t) const override;
  bool has_derivative() const override { return static_cast<bool>(derivative_); }
  std::vector<double> breakpoints() const override { return breakpoints_; }

 private:
  std::size_t dim_;
  Fn value_;
  Fn derivative_;
  std::vector<double> breakpoints_;
};

enum class Interpolation { Linear, Cubic };

/// Samples on a strictly increasing node list. Cubic mode is Hermite using the
/// supplied node derivatives, or four-point Lagrange estimates when absent.
class SampledSegment final : public Segment {
 public:
  SampledSegment(std::vector<double> times, std::vector<Vec> values,
                 std::vector<Vec> derivatives = {},
                 Interpolation interp = Interpolation::Cubic);
  std::size_t dim() const override { return dim_; }
  Vec value(double t) const override;
  Vec derivative(double t) const override;
  std::vector<double> breakpoints() const override;

  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec>& values() const { return values_; }
  const std::vector<Vec>& node_derivatives() const { return derivs_; }
  bool has_exact_derivatives() const { return exact_derivs_; }
  Interpolation interpolation() const { return interp_; }

  /// Uniform resampling of an arbitrary segment on [a, b].
  static std::shared_ptr<const SampledSegment> resample(
      const Segment& seg, double a, double b, std::size_t points,
      Interpolation interp = Interpolation::Cubic);

 private:
  std::size_t locate(double t) const;

  std::size_t dim_;
  std::vector<double> times_;
  std::vector<Vec> values_;
  std::vector<Vec> derivs_;
  bool exact_derivs_;
  Interpolation interp_;
};

/// Integrator dense output: on each step a quintic through the endpoint and
/// midpoint values and derivatives. Derivative error is one order better than
/// cubic Hermite on the step nodes.
class QuinticSegment final : public Segment {
 public:
  QuinticSegment(std::vector<double> times, std::vector<Vec> values, std::vector<Vec> derivatives,
                 std::vector<Vec> mid_values, std::vector<Vec> mid_derivatives);
  std::size_t dim() const override { return dim_; }
  Vec value(double t) const override;
  Vec derivative(double t) const override;
  std::vector<double> breakpoints() const override;

  const std::vector<double>& times() const { return times_; }
  /// Step nodes and midpoints merged in time order.
  void samples(std::vector<double>& t, std::vector<Vec>& x, std::vector<Vec>& dx) const;

 private:
  std::size_t locate(double t) const;

  std::size_t dim_;
  std::vector<double> times_;
  std::vector<Mat> coeffs_;  // dim x 6 per step, in the local variable s in [0, 1]
  std::vector<Vec> values_, derivs_, mid_values_, mid_derivs_;
};

/// value(t) = start + integral_a^t integrand(s) ds on [a, b].
class AntiderivativeSegment final : public Segment {
 public:
  AntiderivativeSegment(SegmentPtr integrand, double a, double b, Vec start);
  std::size_t dim() const override { return start_.size(); }
  Vec value(double t) const override;
  Vec derivative(double t) const override { return integrand_->value(t); }
  std::vector<double> breakpoints() const override { return integrand_->breakpoints(); }

 private:
  SegmentPtr integrand_;
  double a_, b_;
  Vec start_;
  std::vector<double> nodes_;
  std::vector<Vec> node_values_;
};

/// The derivative of a segment, viewed as a segment.
class DerivativeSegment final : public Segment {
 public:
  explicit DerivativeSegment(SegmentPtr base);
  std::size_t dim() const override { return base_->dim(); }
  Vec value(double t) const override { return base_->derivative(t); }
  Vec derivative(double t) const override;
  bool has_derivative() const override { return false; }
  std::vector<double> breakpoints() const override { return base_->breakpoints(); }

 private:
  SegmentPtr base_;
};

/// Concatenation of segments that share one interval.
class StackSegment final : public Segment {
 public:
  explicit StackSegment(std::vector<SegmentPtr> parts);
  std::size_t dim() const override { return dim_; }
  Vec value(double t) const override;
  Vec derivative(double t) const override;
  bool has_derivative() const override;
  std::vector<double> breakpoints() const override;

 private:
  std::vector<SegmentPtr> parts_;
  std::size_t dim_;
};

/// Components [offset, offset + count) of a segment.
class SliceSegment final : public Segment {
 public:
  SliceSegment(SegmentPtr base, std::size_t offset, std::size_t count);
  std::size_t dim() const override { return count_; }
  Vec value(double t) const override { return base_->value(t).segment(offset_, count_); }
  Vec derivative(double t) const override {
    return base_->derivative(t).segment(offset_, count_);
  }
  bool has_derivative() const override { return base_->has_derivative(); }
  std::vector<double> breakpoints() const override { return base_->breakpoints(); }

 private:
  SegmentPtr base_;
  std::size_t offset_, count_;
};

struct OneSidedLimits {
  std::optional<Vec> left;
  std::optional<Vec> right;
};

/// Shared representation of paths on [0, T]: corners 0 < tau_1 < ... < tau_k < T
/// and one segment per piece. Segment i covers [tau_i, tau_{i+1}]; the path
/// value at an interior corner is taken from the right segment.
class PiecewisePath {
 public:
  double horizon() const { return horizon_; }
  const std::vector<double>& corners() const { return corners_; }
  std::size_t dim() const { return segments_.front()->dim(); }
  std::size_t segment_count() const { return segments_.size(); }
  double segment_begin(std::size_t i) const;
  double segment_end(std::size_t i) const;
  const Segment& segment(std::size_t i) const { return *segments_[i]; }
  const SegmentPtr& segment_ptr(std::size_t i) const { return segments_[i]; }
  const std::vector<SegmentPtr>& segments() const { return segments_; }

  /// Index of the segment that supplies the value at t from the given side.
  std::size_t locate(double t, Side side = Side::Right) const;
  Vec value(double t, Side side = Side::Right) const;
  /// Evaluate segment i at t (t is clamped into the segment interval).
  Vec value_in(std::size_t i, double t) const;
  OneSidedLimits one_sided_limits(double t) const;

  /// Union of corners and of every segment breakpoint, sorted.
  std::vector<double> all_breakpoints() const;

 protected:
  PiecewisePath(double horizon, std::vector<double> corners,
                std::vector<SegmentPtr> segments);
  void check_time(double t) const;

  double horizon_;
  std::vector<double> corners_;
  std::vector<SegmentPtr> segments_;
};

/// Normalized piecewise continuous path: right-continuous on [0, T) and
/// left-continuous at T.
class NormalizedPath : public PiecewisePath {
 public:
  NormalizedPath(double horizon, std::vector<double> corners,
                 std::vector<SegmentPtr> segments);
  static NormalizedPath constant(double horizon, const Vec& v);
  /// Same function with additional corners (segments are shared).
  NormalizedPath refined(std::span<const double> extra) const;
};

/// Continuous, piecewise continuously differentiable path.
class PiecewiseC1Path : public PiecewisePath {
 public:
  PiecewiseC1Path(double horizon, std::vector<double> corners,
                  std::vector<SegmentPtr> segments, double continuity_tol = 1e-8);
  static PiecewiseC1Path constant(double horizon, const Vec& v);
  Vec derivative(double t, Side side = Side::Right) const;
  PiecewiseC1Path refined(std::span<const double> extra) const;
};

/// Merge corners closer than 1e-12 T and drop anything outside (0, T).
std::vector<double> normalize_corners(double horizon, std::vector<double> corners);
std::vector<double> union_corners(double horizon, std::span<const double> a,
                                  std::span<const double> b);

/// Extended derivative: interior derivative off corners, right derivative at
/// corners and at 0, left derivative at T.
NormalizedPath extended_derivative(const PiecewiseC1Path& path);

/// Corner-respecting composite Simpson quadrature of the path over [a, b].
Vec integrate(const PiecewisePath& path, double a, double b,
              double quad_tol = kDefaultQuadTol);
/// Scalar composite Simpson on [a, b] for a function smooth on the interval.
double simpson(const std::function<double(double)>& fn, double a, double b,
               double tol = kDefaultQuadTol);

/// Path with value(0) = x0 whose extended derivative is `derivative`.
PiecewiseC1Path reconstruct(const NormalizedPath& derivative, const Vec& x0);

OneSidedLimits one_sided_limits(const PiecewisePath& path, double t);

/// Stack several paths on the same horizon into one (corners are merged).
PiecewiseC1Path stack(std::span<const PiecewiseC1Path> parts);
PiecewiseC1Path slice(const PiecewiseC1Path& path, std::size_t offset, std::size_t count);
NormalizedPath slice(const NormalizedPath& path, std::size_t offset, std::size_t count);

/// Uniform evaluation grid of `points` times plus every corner; at interior
/// corners both the left and the right value are listed (left first).
struct GridPoint {
  double t;
  Side side;
  bool at_corner;
};
std::vector<GridPoint> evaluation_grid(double horizon, std::span<const double> corners,
                                       std::size_t points);

}  // namespace mocp
