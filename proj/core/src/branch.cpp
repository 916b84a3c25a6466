#include "stratwave/branch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/SparseLU>

#include "stratwave/error.hpp"
#include "stratwave/spectral.hpp"

namespace stratwave {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Triplets = std::vector<Eigen::Triplet<double>>;

void state_error(const char* where, int j, double v) {
  throw StateError(std::string("h_p + H' <= 0 (") + where + ", row " + std::to_string(j) +
                   ", value " + std::to_string(v) + ")");
}

}  // namespace

BranchProblem::BranchProblem(const LaminarFlow& flow, int nq, int np)
    : flow_(&flow), nq_(nq), np_(np) {
  if (nq < 8 || nq % 2 != 0) throw ConfigError("nq must be even and >= 8");
  if (np < 4) throw ConfigError("np must be >= 4");
  const auto& prm = flow.params;
  p0_ = prm.profile.p0();
  dp_ = -p0_ / np;
  g_ = prm.g;
  sigma_ = prm.sigma;
  Hp_.resize(np + 1);
  rho_.resize(np + 1);
  for (int j = 0; j <= np; ++j) {
    const double pj = j == np ? 0.0 : p(j);
    Hp_[j] = flow.Hp_at(pj);
    rho_[j] = prm.profile.rho(pj);
  }
  Hph_.resize(np);
  rhoh_.resize(np);
  for (int i = 0; i < np; ++i) {
    const double ph = p0_ + (i + 0.5) * dp_;
    Hph_[i] = flow.Hp_at(ph);
    rhoh_[i] = prm.profile.rho(ph);
  }
  D1_ = spectral::diff_matrix(nq, 1);
  Minv_ = spectral::inverse_helmholtz_matrix(nq);

  fold_.resize(nq);
  for (int m = 0; m < nq; ++m) fold_[m] = m <= nq / 2 ? m : nq - m;

  weights_.resize(size());
  for (int j = 1; j <= np; ++j)
    for (int m = 0; m < nh(); ++m) {
      const double wq = (m == 0 || m == nq / 2) ? 1.0 / nq : 2.0 / nq;
      weights_[index(j, m)] = wq * dp_ * (j == np ? 0.5 : 1.0);
    }
}

int BranchProblem::index(int j, int m) const { return (j - 1) * nh() + fold_[m]; }

Mat BranchProblem::unfold(const Vec& u) const {
  Mat U = Mat::Zero(np_ + 1, nq_);
  for (int j = 1; j <= np_; ++j)
    for (int m = 0; m < nq_; ++m) U(j, m) = u[index(j, m)];
  return U;
}

Vec BranchProblem::fold(const Mat& full) const {
  Vec u(size());
  for (int j = 1; j <= np_; ++j)
    for (int m = 0; m < nh(); ++m) u[index(j, m)] = full(j, m);
  return u;
}

Mat BranchProblem::residual_full(const Mat& U, double lambda) const {
  const double l2 = lambda * lambda;
  const Mat UQ = U * D1_.transpose();
  Mat R = Mat::Zero(np_ + 1, nq_);

  // p-fluxes at half points, laminar part subtracted
  Mat Phi(np_, nq_);
  for (int i = 0; i < np_; ++i) {
    for (int m = 0; m < nq_; ++m) {
      const double v = (U(i + 1, m) - U(i, m)) / dp_;
      const double w = 0.5 * (UQ(i, m) + UQ(i + 1, m));
      const double ub = 0.5 * (U(i, m) + U(i + 1, m));
      const double hv = v + Hph_[i];
      if (!(hv > 0.0)) state_error("half point", i, hv);
      Phi(i, m) = (l2 + w * w) / (2.0 * hv * hv) - l2 / (2.0 * Hph_[i] * Hph_[i]) +
                  l2 * g_ * rhoh_[i] * ub;
    }
  }

  Vec F(nq_);
  for (int j = 1; j < np_; ++j) {
    Vec up = (U.row(j + 1) - U.row(j - 1)).transpose() / (2.0 * dp_);
    for (int m = 0; m < nq_; ++m) {
      const double hp = up[m] + Hp_[j];
      if (!(hp > 0.0)) state_error("node", j, hp);
      F[m] = UQ(j, m) / hp;
    }
    R.row(j) = (D1_ * F).transpose() - (Phi.row(j) - Phi.row(j - 1)) / dp_ +
               l2 * g_ * rho_[j] * up.transpose();
  }

  const int N = np_;
  Vec up = (3.0 * U.row(N) - 4.0 * U.row(N - 1) + U.row(N - 2)).transpose() / (2.0 * dp_);
  Vec K(nq_), c(nq_);
  for (int m = 0; m < nq_; ++m) {
    const double hp = up[m] + Hp_[N];
    if (!(hp > 0.0)) state_error("top", N, hp);
    const double r = l2 + UQ(N, m) * UQ(N, m);
    K[m] = r / (hp * hp);
    c[m] = r * std::sqrt(r) / (2.0 * sigma_ * l2 * lambda);
  }
  const double M = spectral::periodic_mean(K);
  const Vec h = U.row(N).transpose();
  const Vec E = K.array() + 2.0 * l2 * g_ * rho_[N] * h.array() - M;
  const Vec V = h.array() - c.array() * E.array();
  R.row(N) = (h - Minv_ * V).transpose();
  return R;
}

Vec BranchProblem::residual(const Vec& u, double lambda) const {
  return fold(residual_full(unfold(u), lambda));
}

Eigen::SparseMatrix<double> BranchProblem::jacobian(const Vec& u, double lambda,
                                                    Vec* dlambda) const {
  const double l2 = lambda * lambda;
  const Mat U = unfold(u);
  const Mat UQ = U * D1_.transpose();
  const int n = nq_, h = nh();
  Triplets trip;
  trip.reserve(std::size_t(np_) * h * n * 3);
  Mat dl = Mat::Zero(np_ + 1, n);

  // full block (rows m < nh) for unknown row k into the folded matrix
  auto add_block = [&](int j, int k, const Mat& B) {
    if (k < 1) return;
    for (int m = 0; m < h; ++m) {
      const int row = index(j, m);
      for (int mm = 0; mm < n; ++mm) {
        const double b = B(m, mm);
        if (b != 0.0) trip.emplace_back(row, index(k, mm), b);
      }
    }
  };

  // dPhi_i / dU_i (lo) and dU_{i+1} (hi), and dPhi_i / dlambda
  std::vector<Mat> Plo(np_), Phi_hi(np_);
  Mat Pl(np_, n);
  for (int i = 0; i < np_; ++i) {
    Vec Pw(n), Pv(n);
    for (int m = 0; m < n; ++m) {
      const double v = (U(i + 1, m) - U(i, m)) / dp_;
      const double w = 0.5 * (UQ(i, m) + UQ(i + 1, m));
      const double ub = 0.5 * (U(i, m) + U(i + 1, m));
      const double hv = v + Hph_[i];
      if (!(hv > 0.0)) state_error("half point", i, hv);
      Pw[m] = w / (hv * hv);
      Pv[m] = -(l2 + w * w) / (hv * hv * hv);
      Pl(i, m) = lambda / (hv * hv) - lambda / (Hph_[i] * Hph_[i]) + 2.0 * lambda * g_ * rhoh_[i] * ub;
    }
    Mat common = 0.5 * Pw.asDiagonal() * D1_;
    common.diagonal().array() += 0.5 * l2 * g_ * rhoh_[i];
    Plo[i] = common;
    Plo[i].diagonal() -= Pv / dp_;
    Phi_hi[i] = common;
    Phi_hi[i].diagonal() += Pv / dp_;
  }

  for (int j = 1; j < np_; ++j) {
    Vec up = (U.row(j + 1) - U.row(j - 1)).transpose() / (2.0 * dp_);
    Vec inv_hp(n), G(n);
    for (int m = 0; m < n; ++m) {
      const double hp = up[m] + Hp_[j];
      if (!(hp > 0.0)) state_error("node", j, hp);
      inv_hp[m] = 1.0 / hp;
      G[m] = UQ(j, m) / (hp * hp);
    }
    const Mat Tq = D1_ * G.asDiagonal() / (2.0 * dp_);
    const double grho = l2 * g_ * rho_[j] / (2.0 * dp_);

    Mat Bc = D1_ * inv_hp.asDiagonal() * D1_ - Plo[j] / dp_ + Phi_hi[j - 1] / dp_;
    Mat Bu = -Tq - Phi_hi[j] / dp_;
    Bu.diagonal().array() += grho;
    Mat Bd = Tq + Plo[j - 1] / dp_;
    Bd.diagonal().array() -= grho;
    add_block(j, j, Bc);
    add_block(j, j + 1, Bu);
    add_block(j, j - 1, Bd);
    dl.row(j) = -(Pl.row(j) - Pl.row(j - 1)) / dp_ + 2.0 * lambda * g_ * rho_[j] * up.transpose();
  }

  const int N = np_;
  Vec up = (3.0 * U.row(N) - 4.0 * U.row(N - 1) + U.row(N - 2)).transpose() / (2.0 * dp_);
  Vec K(n), c(n), Kq(n), Kp(n), cq(n), cl(n), Kl(n);
  for (int m = 0; m < n; ++m) {
    const double hp = up[m] + Hp_[N];
    if (!(hp > 0.0)) state_error("top", N, hp);
    const double uq = UQ(N, m);
    const double r = l2 + uq * uq, sr = std::sqrt(r);
    K[m] = r / (hp * hp);
    Kq[m] = 2.0 * uq / (hp * hp);
    Kp[m] = -2.0 * r / (hp * hp * hp);
    Kl[m] = 2.0 * lambda / (hp * hp);
    c[m] = r * sr / (2.0 * sigma_ * l2 * lambda);
    cq[m] = 3.0 * uq * sr / (2.0 * sigma_ * l2 * lambda);
    cl[m] = -3.0 * uq * uq * sr / (2.0 * sigma_ * l2 * l2);
  }
  const Vec hN = U.row(N).transpose();
  const double rho0 = rho_[N];
  const Vec E = K.array() + 2.0 * l2 * g_ * rho0 * hN.array() - spectral::periodic_mean(K);

  // dE for du_top (through u_q, u_p, u) and for the two rows below (through u_p)
  const double w0 = 3.0 / (2.0 * dp_), w1 = -4.0 / (2.0 * dp_), w2 = 1.0 / (2.0 * dp_);
  auto centered = [&](Mat B) {
    const Eigen::RowVectorXd mean = B.colwise().mean();
    B.rowwise() -= mean;
    return B;
  };
  Mat dE0 = Kq.asDiagonal() * D1_;
  dE0.diagonal() += w0 * Kp;
  dE0 = centered(dE0);
  dE0.diagonal().array() += 2.0 * l2 * g_ * rho0;
  Mat dE1 = centered(Mat((w1 * Kp).asDiagonal()));
  Mat dE2 = centered(Mat((w2 * Kp).asDiagonal()));

  // R = h - Minv (h - c E);  dR = dh + Minv (dc E + c dE - dh)
  Mat dV0 = E.asDiagonal() * (cq.asDiagonal() * D1_) + c.asDiagonal() * dE0;
  dV0.diagonal().array() -= 1.0;
  Mat B0 = Minv_ * dV0;
  B0.diagonal().array() += 1.0;
  add_block(N, N, B0);
  add_block(N, N - 1, Minv_ * (c.asDiagonal() * dE1));
  add_block(N, N - 2, Minv_ * (c.asDiagonal() * dE2));

  const Vec El = Kl.array() - Kl.mean() + 4.0 * lambda * g_ * rho0 * hN.array();
  dl.row(N) = (Minv_ * (cl.cwiseProduct(E) + c.cwiseProduct(El))).transpose();

  Eigen::SparseMatrix<double> J(size(), size());
  J.setFromTriplets(trip.begin(), trip.end());
  if (dlambda) *dlambda = fold(dl);
  return J;
}

FdCheck BranchProblem::fd_check(const Vec& u, double lambda, int directions,
                                std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vec dl;
  const auto J = jacobian(u, lambda, &dl);
  FdCheck out;
  out.directions = directions;
  const double eps = 1e-5;
  for (int k = 0; k < directions; ++k) {
    Vec du(size());
    for (int i = 0; i < size(); ++i) du[i] = uni(rng);
    du *= 1e-2;
    const double dlam = 1e-2 * uni(rng);
    const Vec exact = J * du + dl * dlam;
    const Vec fd = (residual(u + eps * du, lambda + eps * dlam) -
                    residual(u - eps * du, lambda - eps * dlam)) /
                   (2.0 * eps);
    const double scale = std::max(exact.lpNorm<Eigen::Infinity>(), 1e-300);
    out.max_rel_err = std::max(out.max_rel_err, (exact - fd).lpNorm<Eigen::Infinity>() / scale);
  }
  return out;
}

double BranchProblem::pair(const Vec& a, const Vec& b) const {
  return (weights_.array() * a.array() * b.array()).sum();
}

double BranchProblem::norm(const Vec& a) const { return std::sqrt(pair(a, a)); }

Vec BranchProblem::sample(const KernelMode& w) const {
  Vec out(size());
  for (int j = 1; j <= np_; ++j) {
    const double wp = w.profile(j == np_ ? 0.0 : p(j));
    for (int m = 0; m < nh(); ++m) out[index(j, m)] = wp * std::cos(kTwoPi * q(m));
  }
  return out;
}

double BranchProblem::min_hp_total(const Vec& u) const {
  const Mat U = unfold(u);
  double mn = std::numeric_limits<double>::infinity();
  for (int m = 0; m < nq_; ++m) {
    mn = std::min(mn, (-3.0 * U(0, m) + 4.0 * U(1, m) - U(2, m)) / (2.0 * dp_) + Hp_[0]);
    for (int j = 1; j < np_; ++j)
      mn = std::min(mn, (U(j + 1, m) - U(j - 1, m)) / (2.0 * dp_) + Hp_[j]);
    mn = std::min(mn, (3.0 * U(np_, m) - 4.0 * U(np_ - 1, m) + U(np_ - 2, m)) / (2.0 * dp_) +
                          Hp_[np_]);
  }
  return mn;
}

ProfileDiagnostics BranchProblem::profile_diagnostics(const Vec& u) const {
  ProfileDiagnostics d;
  const Mat U = unfold(u);
  const double shift = flow_->H.back() - flow_->params.d;
  Vec eta = U.row(np_).transpose().array() + shift;
  d.eta_mean = spectral::periodic_mean(eta);
  d.eta_max = eta.lpNorm<Eigen::Infinity>();
  for (int m = 1; m < nq_; ++m) d.even_defect = std::max(d.even_defect, std::abs(eta[m] - eta[nq_ - m]));
  d.min_hp_total = min_hp_total(u);

  const double tol = 1e-10;
  std::vector<int> sgn;
  bool flat = false;
  for (int m = 0; m < nq_; ++m) {
    const double de = eta[(m + 1) % nq_] - eta[m];
    if (std::abs(de) <= tol) {
      flat = true;
      continue;
    }
    sgn.push_back(de > 0.0 ? 1 : -1);
  }
  int changes = 0;
  for (std::size_t k = 0; k < sgn.size(); ++k)
    if (sgn[k] != sgn[(k + 1) % sgn.size()]) ++changes;
  d.crest_count = changes;
  d.monotone_ok = changes == 2 && !flat;
  return d;
}

Constraint Constraint::fixed(double lambda) {
  Constraint c;
  c.kind = Kind::fixed_lambda;
  c.lambda = lambda;
  return c;
}

Constraint Constraint::arclength(Vec u_prev, double lambda_prev, Vec t_u, double t_lambda,
                                 double ds) {
  Constraint c;
  c.kind = Kind::pseudo_arclength;
  c.u_prev = std::move(u_prev);
  c.lambda_prev = lambda_prev;
  c.t_u = std::move(t_u);
  c.t_lambda = t_lambda;
  c.ds = ds;
  return c;
}

Constraint Constraint::amplitude(Vec wstar, double s) {
  Constraint c;
  c.kind = Kind::fixed_amplitude;
  c.wstar = std::move(wstar);
  c.s = s;
  return c;
}

namespace {

double constraint_value(const BranchProblem& prob, const Constraint& c, const Vec& u,
                        double lambda) {
  switch (c.kind) {
    case Constraint::Kind::fixed_lambda:
      return lambda - c.lambda;
    case Constraint::Kind::pseudo_arclength:
      return prob.pair(u - c.u_prev, c.t_u) + (lambda - c.lambda_prev) * c.t_lambda - c.ds;
    case Constraint::Kind::fixed_amplitude:
      return prob.pair(u, c.wstar) / prob.pair(c.wstar, c.wstar) - c.s;
  }
  return 0.0;
}

// gradient of the constraint in u (weights folded in) and in lambda
std::pair<Vec, double> constraint_gradient(const BranchProblem& prob, const Constraint& c) {
  switch (c.kind) {
    case Constraint::Kind::fixed_lambda:
      return {Vec::Zero(prob.size()), 1.0};
    case Constraint::Kind::pseudo_arclength:
      return {prob.weights().cwiseProduct(c.t_u), c.t_lambda};
    case Constraint::Kind::fixed_amplitude:
      return {prob.weights().cwiseProduct(c.wstar) / prob.pair(c.wstar, c.wstar), 0.0};
  }
  return {};
}

}  // namespace

NewtonResult newton_correct(const BranchProblem& prob, Vec u, double lambda, const Constraint& c,
                            const NewtonOptions& opt) {
  NewtonResult res;
  const int n = prob.size();
  auto eval = [&](const Vec& uu, double ll, Vec& F, double& g) {
    F = prob.residual(uu, ll);
    g = constraint_value(prob, c, uu, ll);
    return std::max(F.lpNorm<Eigen::Infinity>(), std::abs(g));
  };

  Vec F;
  double gval = 0.0, nrm = 0.0;
  try {
    nrm = eval(u, lambda, F, gval);
  } catch (const StateError& e) {
    res.u = u;
    res.lambda = lambda;
    res.status = e.what();
    return res;
  }
  if (!std::isfinite(nrm)) {
    res.status = "initial residual not finite";
    return res;
  }
  const auto [cg, cl] = constraint_gradient(prob, c);

  for (int it = 0; it <= opt.max_iter; ++it) {
    res.iterations = it;
    if (nrm <= opt.tol) {
      res.converged = true;
      break;
    }
    if (it == opt.max_iter) break;

    Vec dl;
    Eigen::SparseMatrix<double> J;
    try {
      J = prob.jacobian(u, lambda, &dl);
    } catch (const StateError& e) {
      res.status = e.what();
      break;
    }
    Triplets trip;
    trip.reserve(J.nonZeros() + 2 * n + 1);
    for (int k = 0; k < J.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator itj(J, k); itj; ++itj)
        trip.emplace_back(itj.row(), itj.col(), itj.value());
    for (int i = 0; i < n; ++i) {
      if (dl[i] != 0.0) trip.emplace_back(i, n, dl[i]);
      if (cg[i] != 0.0) trip.emplace_back(n, i, cg[i]);
    }
    if (cl != 0.0) trip.emplace_back(n, n, cl);
    Eigen::SparseMatrix<double> A(n + 1, n + 1);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) {
      res.status = "singular bordered Jacobian";
      break;
    }
    Vec rhs(n + 1);
    rhs.head(n) = -F;
    rhs[n] = -gval;
    const Vec step = lu.solve(rhs);

    double t = 1.0;
    bool accepted = false;
    for (int hlv = 0; hlv <= opt.max_halvings; ++hlv, t *= 0.5) {
      Vec un = u + t * step.head(n);
      const double ln = lambda + t * step[n];
      Vec Fn;
      double gn = 0.0, nn = 0.0;
      try {
        nn = eval(un, ln, Fn, gn);
      } catch (const StateError&) {
        continue;
      }
      if (std::isfinite(nn) && nn < nrm) {
        u = std::move(un);
        lambda = ln;
        F = std::move(Fn);
        gval = gn;
        nrm = nn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.status = "damping exhausted";
      break;
    }
  }
  res.u = std::move(u);
  res.lambda = lambda;
  res.residual = nrm;
  if (res.converged)
    res.status = "converged";
  else if (res.status.empty())
    res.status = "no convergence in " + std::to_string(opt.max_iter) + " iterations";
  return res;
}

void require_bifurcation_data(const DispersionResult& disp) {
  if (!(disp.lambda_star > 0.0)) throw ConditionError("dispersion data missing lambda*");
  if (!(disp.transversality > 0.0))
    throw ConditionError("transversality value is not positive; refusing to continue the branch");
  if (disp.kernel_collision)
    throw ConditionError("kernel collision at lambda*: bifurcation is not from a simple eigenvalue");
}

namespace {

ContinuationPoint make_point(const BranchProblem& prob, const Vec& u, double lambda,
                             const Vec& wstar, double res, int its, double ds) {
  ContinuationPoint pt;
  pt.lambda = lambda;
  pt.s = prob.pair(u, wstar) / prob.pair(wstar, wstar);
  pt.residual_norm = res;
  pt.diag = prob.profile_diagnostics(u);
  pt.min_hp_total = pt.diag.min_hp_total;
  pt.eta_mean = pt.diag.eta_mean;
  pt.crest_count = pt.diag.crest_count;
  pt.iterations = its;
  pt.ds = ds;
  pt.h = u;
  return pt;
}

// Null vector of [J, J_lambda] normalised against the previous tangent. Unlike the
// secant it does not point back towards the laminar line after a large first step.
bool branch_tangent(const BranchProblem& prob, const Vec& u, double lambda, Vec& t_u,
                    double& t_l) {
  const int n = prob.size();
  Vec dl;
  const Eigen::SparseMatrix<double> J = prob.jacobian(u, lambda, &dl);
  const Vec& w = prob.weights();
  Triplets trip;
  trip.reserve(J.nonZeros() + 2 * n + 1);
  for (int k = 0; k < J.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(J, k); it; ++it)
      trip.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i) {
    if (dl[i] != 0.0) trip.emplace_back(i, n, dl[i]);
    if (t_u[i] != 0.0) trip.emplace_back(n, i, w[i] * t_u[i]);
  }
  if (t_l != 0.0) trip.emplace_back(n, n, t_l);
  Eigen::SparseMatrix<double> A(n + 1, n + 1);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) return false;
  Vec rhs = Vec::Zero(n + 1);
  rhs[n] = 1.0;
  const Vec x = lu.solve(rhs);
  if (!x.allFinite()) return false;
  const double len = std::sqrt(prob.pair(x.head(n), x.head(n)) + x[n] * x[n]);
  if (!(len > 0.0)) return false;
  t_u = x.head(n) / len;
  t_l = x[n] / len;
  return true;
}

BranchDirection trace(const BranchProblem& prob, double lambda_star, const Vec& wstar, double sign,
                      const ContinuationOptions& opt) {
  BranchDirection dir;
  const int n = prob.size();
  const Vec zero = Vec::Zero(n);
  dir.points.push_back(make_point(prob, zero, lambda_star, wstar, 0.0, 0, 0.0));

  const double ds0 = std::abs(opt.ds);
  double ds = ds0;
  Vec t_u = sign * wstar / prob.norm(wstar);
  double t_l = 0.0;

  while (int(dir.points.size()) <= opt.n_steps) {
    const auto& last = dir.points.back();
    NewtonResult nr;
    std::string why;
    while (true) {
      const Vec u_pred = last.h + ds * t_u;
      const double l_pred = last.lambda + ds * t_l;
      nr = newton_correct(prob, u_pred, l_pred,
                          Constraint::arclength(last.h, last.lambda, t_u, t_l, ds), opt.newton);
      if (nr.converged && prob.min_hp_total(nr.u) > 0.0) break;
      why = nr.status;
      ds *= 0.5;
      if (ds < ds0 * opt.ds_min_factor) break;
    }
    if (!nr.converged) {
      if (dir.points.size() == 1)
        dir.status = "first step failed (lambda*, w* inconsistent with the discrete problem): " + why;
      else
        dir.status = "step size underflow: " + why;
      return dir;
    }
    auto pt = make_point(prob, nr.u, nr.lambda, wstar, nr.residual, nr.iterations, ds);
    if (!branch_tangent(prob, pt.h, pt.lambda, t_u, t_l)) {
      const Vec du = pt.h - last.h;
      const double dlam = pt.lambda - last.lambda;
      const double len = std::sqrt(prob.pair(du, du) + dlam * dlam);
      t_u = du / len;
      t_l = dlam / len;
    }
    dir.points.push_back(std::move(pt));
    if (nr.iterations <= opt.fast_iterations) ds = std::min(ds0, ds * opt.grow);
  }
  dir.status = "completed";
  return dir;
}

}  // namespace

BranchRun continue_branch(const BranchProblem& prob, const DispersionResult& disp,
                          const KernelMode& wstar, const ContinuationOptions& opt) {
  require_bifurcation_data(disp);
  BranchRun run;
  run.lambda_star = disp.lambda_star;
  run.wstar = prob.sample(wstar);
  run.plus = trace(prob, disp.lambda_star, run.wstar, 1.0, opt);
  run.minus = trace(prob, disp.lambda_star, run.wstar, -1.0, opt);
  return run;
}

BranchFit fit_branch(const BranchProblem& prob, const BranchRun& run, int first) {
  BranchFit fit;
  std::vector<double> ls, le;
  double num = 0.0, den = 0.0;
  for (const auto* dir : {&run.plus, &run.minus}) {
    for (int k = 1; k <= first && k < int(dir->points.size()); ++k) {
      const auto& pt = dir->points[k];
      const double s = std::abs(pt.s);
      if (s == 0.0) continue;
      fit.C_lambda = std::max(fit.C_lambda, std::abs(pt.lambda - run.lambda_star) / s);
      const double e = prob.norm(pt.h - pt.s * run.wstar);
      num += e * s * s;
      den += s * s * s * s;
      ls.push_back(std::log(s));
      le.push_back(std::log(std::max(e, 1e-300)));
      ++fit.used;
    }
  }
  if (den > 0.0) fit.C_quad = num / den;
  if (ls.size() >= 2) {
    const double n = double(ls.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
      sx += ls[i];
      sy += le[i];
      sxx += ls[i] * ls[i];
      sxy += ls[i] * le[i];
    }
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return fit;
}

SingularInfo jacobian_singular_values(const BranchProblem& prob, const Vec& u, double lambda,
                                      const Vec& wstar) {
  SingularInfo out;
  const auto J = prob.jacobian(u, lambda);
  const int n = prob.size();
  Eigen::SparseMatrix<double> Jc = J;
  Jc.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(Jc);
  if (lu.info() != Eigen::Success) throw NumericalError("Jacobian factorization failed");

  // power iteration for |J|
  Vec x = Vec::Ones(n).normalized();
  double nrm = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec y = J.transpose() * (J * x);
    const double nn = std::sqrt(y.norm());
    x = y.normalized();
    if (std::abs(nn - nrm) <= 1e-10 * nn) {
      nrm = nn;
      break;
    }
    nrm = nn;
  }
  out.norm = nrm;

  // subspace inverse iteration on (J^T J)^-1, two smallest
  Mat X(n, 2);
  X.col(0) = wstar.normalized();
  X.col(1) = Vec::LinSpaced(n, -1.0, 1.0).normalized();
  Eigen::Vector2d prev(0.0, 0.0), sv;
  Mat Vr;
  for (int it = 0; it < 100; ++it) {
    Mat Y(n, 2);
    for (int k = 0; k < 2; ++k) {
      Vec z = lu.transpose().solve(Vec(X.col(k)));
      Y.col(k) = lu.solve(z);
    }
    Eigen::HouseholderQR<Mat> qr(Y);
    X = qr.householderQ() * Mat::Identity(n, 2);
    Mat B = J * X;
    Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeThinV);
    sv = svd.singularValues();  // descending
    Vr = X * svd.matrixV();
    out.iterations = it + 1;
    if ((sv - prev).cwiseAbs().maxCoeff() <= 1e-12 * nrm) break;
    prev = sv;
  }
  out.sigma_min = sv[1];
  out.sigma_2 = sv[0];
  out.v_min = Vr.col(1);
  const double c = std::abs(prob.pair(out.v_min, wstar)) / (prob.norm(out.v_min) * prob.norm(wstar));
  out.angle = std::acos(std::min(1.0, c));
  return out;
}

}  // namespace stratwave
