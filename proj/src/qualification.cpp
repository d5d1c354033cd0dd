#include "mocp/qualification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace mocp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Euclidean projection onto the probability simplex.
Vec project_simplex(const Vec& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

// min c^T Q c over the simplex: FISTA, then exact solves on the support.
Vec simplex_min(const Mat& Q, const Vec& start, std::size_t iterations) {
  Eigen::SelfAdjointEigenSolver<Mat> es(Q);
  const double L = 2.0 * std::max(es.eigenvalues().maxCoeff(), 1e-300);
  auto f = [&](const Vec& c) { return c.dot(Q * c); };
  Vec x = project_simplex(start), y = x;
  double t = 1.0, fx = f(x);
  for (std::size_t it = 0; it < iterations; ++it) {
    const Vec next = project_simplex(y - (2.0 / L) * (Q * y));
    const double fn = f(next);
    if (fn > fx) {
      y = x;
      t = 1.0;
      continue;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / tn) * (next - x);
    x = next;
    fx = fn;
    t = tn;
  }
  const auto s = x.size();
  for (int round = 0; round < 4; ++round) {
    std::vector<Eigen::Index> sup;
    for (Eigen::Index i = 0; i < s; ++i) {
      if (x(i) > 1e-12) sup.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(sup.size());
    if (m == 0) break;
    // KKT: [2Q_S 1; 1^T 0] [c; nu] = [0; 1]
    Mat K = Mat::Zero(m + 1, m + 1);
    Vec rhs = Vec::Zero(m + 1);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) {
        K(r, c) = 2.0 * Q(sup[static_cast<std::size_t>(r)], sup[static_cast<std::size_t>(c)]);
      }
      K(r, m) = 1.0;
      K(m, r) = 1.0;
    }
    rhs(m) = 1.0;
    const Vec sol = K.completeOrthogonalDecomposition().solve(rhs);
    Vec cand = Vec::Zero(s);
    for (Eigen::Index r = 0; r < m; ++r) cand(sup[static_cast<std::size_t>(r)]) = sol(r);
    if (!cand.allFinite()) break;
    if (cand.minCoeff() < 0.0) {
      // step toward the candidate until a coordinate hits zero
      double step = 1.0;
      for (Eigen::Index i = 0; i < s; ++i) {
        if (cand(i) < 0.0) step = std::min(step, x(i) / (x(i) - cand(i)));
      }
      cand = x + step * (cand - x);
      cand = cand.cwiseMax(0.0);
      cand /= cand.sum();
    }
    if (f(cand) <= fx) {
      const bool same = (cand - x).norm() <= 1e-15;
      x = cand;
      fx = f(cand);
      if (same) break;
    } else {
      break;
    }
  }
  return x;
}

Vec sign_fixed(Vec v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      break;
    }
  }
  return v;
}

double max_row_norm(const Mat& rows) {
  double m = 0.0;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) m = std::max(m, rows.row(r).norm());
  return m;
}

void check_neighborhood(const BolzaProblem& prob, const Process& proc, const char* which) {
  const auto kind = prob.control.kind();
  if (kind == ControlSet::Kind::Finite) {
    throw QualificationError(std::string(which) + " needs a control set that is a neighborhood; "
                             "a finite control set is not");
  }
  if (kind == ControlSet::Kind::Box) {
    const Vec uT = proc.control.value(prob.T, Side::Left);
    for (int i = 0; i < prob.k; ++i) {
      if (!(uT(i) > prob.control.lower()(i) && uT(i) < prob.control.upper()(i))) {
        throw QualificationError(std::string(which) +
                                 " needs u(T) in the interior of the control box");
      }
    }
  }
}

}  // namespace

CQReport positive_independence(const GradientStack& stack, const CQConfig& cfg) {
  CQReport rep;
  rep.labels = stack.labels;
  const Mat& A = stack.rows;
  const auto s = static_cast<Eigen::Index>(stack.sign_rows);
  const auto r = A.rows() - s;
  const auto n = A.cols();
  rep.threshold = cfg.cq_tol * std::max(1.0, max_row_norm(A));
  if (A.rows() == 0) {
    rep.measure = kInf;
    rep.note = "no rows";
    return rep;
  }
  const Mat H = A.bottomRows(r);
  const Mat S = A.topRows(s);
  Mat Q(n, 0);  // orthonormal basis of the span of the h rows
  if (r > 0) {
    Eigen::JacobiSVD<Mat> svd(H, Eigen::ComputeFullU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double smin = sv.size() < r ? 0.0 : sv(sv.size() - 1);
    if (r > n || smin <= rep.threshold) {
      Vec d = sign_fixed(Vec(svd.matrixU().col(r - 1)));
      Vec w = Vec::Zero(A.rows());
      w.tail(r) = d;
      rep.holds = false;
      rep.measure = smin;
      rep.certificate = w;
      rep.certificate_residual = (A.transpose() * w).norm();
      rep.note = "equality rows are linearly dependent";
      return rep;
    }
    Q = svd.matrixV();
  }
  if (s == 0) {
    rep.measure = Eigen::JacobiSVD<Mat>(H).singularValues().minCoeff();
    return rep;
  }
  const Mat P = Mat::Identity(n, n) - Q * Q.transpose();
  const Mat M = P * S.transpose();  // n x s
  const Mat G = M.transpose() * M;
  std::mt19937_64 rng(cfg.seed);
  std::exponential_distribution<double> expo(1.0);
  Vec best;
  double best_val = kInf;
  for (std::size_t k = 0; k < std::max<std::size_t>(cfg.starts, 1); ++k) {
    Vec start(s);
    if (k == 0) {
      start.setConstant(1.0 / static_cast<double>(s));
    } else {
      for (Eigen::Index i = 0; i < s; ++i) start(i) = expo(rng);
      start /= start.sum();
    }
    const Vec c = simplex_min(G, start, cfg.iterations);
    const double v = (M * c).norm();
    if (v < best_val) {
      best_val = v;
      best = c;
    }
  }
  // complete with the equality coefficients and normalize to the unit sphere
  Vec w = Vec::Zero(A.rows());
  w.head(s) = best;
  if (r > 0) {
    const Vec d = -(H * H.transpose()).ldlt().solve(H * (S.transpose() * best));
    w.tail(r) = d;
  }
  w /= w.norm();
  const double residual = (A.transpose() * w).norm();
  rep.measure = residual;
  rep.holds = residual > rep.threshold;
  if (!rep.holds) {
    rep.certificate = w;
    rep.certificate_residual = residual;
  }
  return rep;
}

CQReport linear_independence(const GradientStack& stack, const CQConfig& cfg) {
  CQReport rep;
  rep.labels = stack.labels;
  const Mat& R = stack.rows;
  if (R.rows() == 0) {
    rep.measure = kInf;
    rep.threshold = 0.0;
    rep.note = "no rows";
    return rep;
  }
  Eigen::JacobiSVD<Mat> svd(R, Eigen::ComputeFullU);
  const Vec& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double smin = sv.size() < R.rows() ? 0.0 : sv(sv.size() - 1);
  rep.threshold = cfg.cq_tol * (smax + 1.0);
  rep.measure = smin;
  rep.holds = smin > rep.threshold;
  if (R.rows() > R.cols()) rep.note = "more rows than columns";
  if (!rep.holds) {
    const Vec c = sign_fixed(Vec(svd.matrixU().col(R.rows() - 1)));
    rep.certificate = c;
    rep.certificate_residual = (R.transpose() * c).norm();
  }
  return rep;
}

GradientStack qc_stack(const BolzaProblem& prob, const Vec& xT, bool with_objectives,
                       double act_tol) {
  const auto td = terminal_differentials(prob, xT);
  const Vec g = prob.inequalities(xT);
  std::vector<Vec> rows;
  GradientStack st;
  if (with_objectives) {
    for (int i = 0; i < prob.l(); ++i) {
      rows.push_back(td.Dg0.row(i).transpose());
      st.labels.push_back("Dg0_" + std::to_string(i + 1));
    }
  }
  for (int a = 0; a < prob.m(); ++a) {
    if (g(a) <= act_tol) {
      rows.push_back(td.Dg.row(a).transpose());
      st.labels.push_back("Dg_" + std::to_string(a + 1));
    }
  }
  st.sign_rows = static_cast<int>(rows.size());
  for (int b = 0; b < prob.q(); ++b) {
    rows.push_back(td.Dh.row(b).transpose());
    st.labels.push_back("Dh_" + std::to_string(b + 1));
  }
  st.rows = Mat(static_cast<Eigen::Index>(rows.size()), prob.n);
  for (std::size_t i = 0; i < rows.size(); ++i) st.rows.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return st;
}

CQReport check_QC1(const BolzaProblem& prob, const Vec& xT, const CQConfig& cfg) {
  auto rep = positive_independence(qc_stack(prob, xT, false, cfg.act_tol), cfg);
  rep.which = "QC1";
  return rep;
}

CQReport check_QC0(const BolzaProblem& prob, const Vec& xT, const CQConfig& cfg) {
  auto rep = positive_independence(qc_stack(prob, xT, true, cfg.act_tol), cfg);
  rep.which = "QC0";
  return rep;
}

GradientStack control_stack(const BolzaProblem& prob, const Process& proc, bool objectives,
                            int skip, bool bolza) {
  const double T = prob.T;
  const Vec xT = proc.state.value(T), uT = proc.control.value(T, Side::Left);
  const auto td = terminal_differentials(prob, xT);
  const auto pd = partial_differentials(prob, T, xT, uT, true);
  std::vector<Vec> rows;
  GradientStack st;
  if (objectives) {
    for (int i = 0; i < prob.l(); ++i) {
      if (i == skip) continue;
      Vec row = pd.D3f.transpose() * td.Dg0.row(i).transpose();
      if (bolza) row += pd.D3f0.row(i).transpose();
      rows.push_back(row);
      st.labels.push_back((bolza ? "Dg0_" : "Dg0f_") + std::to_string(i + 1));
    }
  }
  for (int a = 0; a < prob.m(); ++a) {
    rows.push_back(pd.D3f.transpose() * td.Dg.row(a).transpose());
    st.labels.push_back("Dg_" + std::to_string(a + 1));
  }
  for (int b = 0; b < prob.q(); ++b) {
    rows.push_back(pd.D3f.transpose() * td.Dh.row(b).transpose());
    st.labels.push_back("Dh_" + std::to_string(b + 1));
  }
  st.rows = Mat(static_cast<Eigen::Index>(rows.size()), prob.k);
  for (std::size_t i = 0; i < rows.size(); ++i) st.rows.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return st;
}

CQReport check_Alib(const BolzaProblem& prob, const Process& proc, const CQConfig& cfg) {
  check_neighborhood(prob, proc, "Alib");
  auto rep = linear_independence(control_stack(prob, proc, false, -1, false), cfg);
  rep.which = "Alib";
  return rep;
}

CQReport check_Af(const BolzaProblem& prob, const Process& proc, int j, bool bolza,
                  const CQConfig& cfg) {
  if (j < 0 || j >= prob.l()) throw QualificationError("objective index out of range");
  check_neighborhood(prob, proc, "Af");
  auto rep = linear_independence(control_stack(prob, proc, true, j, bolza), cfg);
  rep.which = (bolza ? "Af0_" : "Af_") + std::to_string(j + 1);
  return rep;
}

CQReport check_Av3(const BolzaProblem& prob, const Process& proc, const CQConfig& cfg) {
  if (prob.control.kind() == ControlSet::Kind::Finite) {
    throw QualificationError("Av3 needs control differentials; the control set is finite");
  }
  CQReport rep;
  rep.which = "Av3";
  rep.holds = false;
  rep.measure = 0.0;
  if (prob.k < prob.n) {
    rep.note = "control dimension below state dimension";
    return rep;
  }
  const auto grid = evaluation_grid(prob.T, process_corners(proc), cfg.grid_points);
  for (const auto& gp : grid) {
    const Vec x = proc.state.value(gp.t, gp.side), u = proc.control.value(gp.t, gp.side);
    if (prob.control.kind() == ControlSet::Kind::Box) {
      bool interior = true;
      for (int i = 0; i < prob.k; ++i) {
        interior = interior && u(i) > prob.control.lower()(i) && u(i) < prob.control.upper()(i);
      }
      if (!interior) continue;
    }
    const auto pd = partial_differentials(prob, gp.t, x, u, true);
    const Vec sv = Eigen::JacobiSVD<Mat>(pd.D3f).singularValues();
    const double smin = sv(sv.size() - 1);
    const double thr = cfg.cq_tol * (sv(0) + 1.0);
    if (smin > rep.measure) {
      rep.measure = smin;
      rep.threshold = thr;
      rep.witness_t = gp.t;
    }
    if (smin > thr) {
      rep.holds = true;
      rep.measure = smin;
      rep.threshold = thr;
      rep.witness_t = gp.t;
      return rep;
    }
  }
  if (rep.threshold == 0.0) rep.threshold = cfg.cq_tol;
  return rep;
}

}  // namespace mocp
