#include "censreg/estimator.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "censreg/rng.hpp"

namespace censreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd guarded_inverse(const Eigen::MatrixXd& m, const char* what) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const double min_eig = es.eigenvalues().minCoeff();
  const double scale = sym.diagonal().cwiseAbs().maxCoeff();
  if (!(min_eig > 1e-10 * std::max(scale, 1e-300))) {
    throw NonsingularityError(
        std::string(what) +
            ": matrix is numerically singular (min eigenvalue " +
            std::to_string(min_eig) + ")",
        min_eig);
  }
  return es.eigenvectors() *
         es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

// Start from least squares on the rows where y is actually informative.
ReparamPoint ols_start(const Dataset& data) {
  const auto k = data.k();
  Eigen::Index m = 0;
  Eigen::MatrixXd xs(data.n(), k);
  Eigen::VectorXd ys(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.is_censored(i)) continue;
    xs.row(m) = data.x().row(i);
    ys(m) = data.y()(i);
    ++m;
  }
  if (m < k + 1) {
    throw DegenerateDataError(
        "fit: needs more uncensored observations than regressors");
  }
  xs.conservativeResize(m, k);
  ys.conservativeResize(m);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  // Eigen's default pivot threshold (~eps) misses exact duplicates once
  // rounding has accumulated over many rows; use the LAPACK-style cutoff.
  qr.setThreshold(static_cast<double>(std::max(m, k)) *
                  std::numeric_limits<double>::epsilon());
  if (qr.rank() < k) {
    throw CollinearityError(
        "fit: design matrix is rank deficient (collinear columns)");
  }
  const Eigen::VectorXd b = qr.solve(ys);
  const double ssr = (ys - xs * b).squaredNorm();
  double sigma = std::sqrt(ssr / static_cast<double>(m - k));
  // A near-perfect linear fit still needs a usable scale to start from.
  const double floor = 1e-8 * (1.0 + ys.cwiseAbs().mean());
  if (!(sigma > floor)) sigma = floor;
  return ReparamPoint::from_original(b, sigma);
}

struct RunOutcome {
  ReparamPoint theta;
  SampleEval eval;
  double objective = -kInf;
  int n_iter = 0;
  bool converged = false;
  std::vector<double> trace;
};

// Endgame for the ascent phase. Close to the optimum the objective gain of a
// Newton step is about |score|^2/2, which drops below the rounding floor of
// the averaged log likelihood while the score can still sit just above
// grad_tol; a line search that insists on a strict objective increase then
// stalls one order of magnitude short. The score itself is an average of
// O(1) terms and suffers no such cancellation, and Newton contracts it
// quadratically near a strongly concave point, so the endgame accepts full
// Newton steps on a strict decrease of the score sup norm instead.
void polish_on_score(const Dataset& data, const FitOptions& opts,
                     RunOutcome& out) {
  for (int it = 0; it < 10; ++it) {
    const double cur_norm = out.eval.score.cwiseAbs().maxCoeff();
    if (cur_norm <= opts.grad_tol) return;
    const Eigen::MatrixXd neg_h =
        -0.5 * (out.eval.hessian + out.eval.hessian.transpose());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_h);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return;
    const Eigen::VectorXd dir = ldlt.solve(out.eval.score);
    if (!dir.allFinite() || out.eval.score.dot(dir) <= 0.0) return;

    const auto k = out.theta.k();
    double t = 1.0;
    if (out.theta.gamma + dir(k) <= opts.gamma_floor) {
      t = -0.5 * (out.theta.gamma - opts.gamma_floor) / dir(k);
    }
    try {
      ReparamPoint trial(out.theta.delta + t * dir.head(k),
                         out.theta.gamma + t * dir(k));
      const SampleEval eval = eval_sample(data, trial, opts.exec);
      if (!eval.score.allFinite() ||
          eval.score.cwiseAbs().maxCoeff() >= cur_norm) {
        return;
      }
      out.theta = std::move(trial);
      out.eval = eval;
      out.objective = eval.loglik;
      ++out.n_iter;
    } catch (const Error&) {
      return;
    }
  }
}

RunOutcome run_newton(const Dataset& data, ReparamPoint theta,
                      const FitOptions& opts) {
  const auto objective = [&](const ReparamPoint& p) {
    try {
      return eval_loglik(data, p, opts.exec);
    } catch (const Error&) {
      return -kInf;  // treat an unevaluable trial point as worst possible
    }
  };

  RunOutcome out;
  out.eval = eval_sample(data, theta, opts.exec);
  out.theta = std::move(theta);
  out.objective = out.eval.loglik;
  out.trace.push_back(out.objective);

  for (int it = 0; it < opts.max_iter; ++it) {
    if (out.eval.score.cwiseAbs().maxCoeff() <= opts.grad_tol) {
      out.converged = true;
      break;
    }
    const StepResult step = newton_step(out.theta, out.objective,
                                        out.eval.score, out.eval.hessian,
                                        objective, opts);
    if (step.stalled) {
      // The objective is flat to rounding; hand over to the score endgame.
      polish_on_score(data, opts, out);
      break;
    }
    if (!(step.objective >= out.objective)) {
      // The line search only returns ascent steps; anything else is a bug.
      throw Error("fit: internal ascent invariant violated");
    }
    out.theta = step.next;
    out.objective = step.objective;
    out.trace.push_back(out.objective);
    out.eval = eval_sample(data, out.theta, opts.exec);
    out.n_iter = it + 1;
  }
  if (!out.converged) {
    out.converged = out.eval.score.cwiseAbs().maxCoeff() <= opts.grad_tol;
  }
  return out;
}

}  // namespace

StepResult newton_step(const ReparamPoint& cur, double cur_objective,
                       const Eigen::VectorXd& avg_score,
                       const Eigen::MatrixXd& avg_hessian,
                       const std::function<double(const ReparamPoint&)>& objective,
                       const FitOptions& opts) {
  const auto k = cur.k();
  if (avg_score.size() != k + 1 || avg_hessian.rows() != k + 1 ||
      avg_hessian.cols() != k + 1) {
    throw DomainError("newton_step: dimension mismatch");
  }

  StepResult out;
  out.next = cur;

  // Newton direction on -H (positive semidefinite near a maximum); fall back
  // to steepest ascent when the solve fails or points downhill.
  Eigen::VectorXd dir;
  const Eigen::MatrixXd neg_h =
      -0.5 * (avg_hessian + avg_hessian.transpose());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_h);
  bool have_newton = ldlt.info() == Eigen::Success && ldlt.isPositive();
  if (have_newton) {
    dir = ldlt.solve(avg_score);
    have_newton = dir.allFinite() && avg_score.dot(dir) > 0.0;
  }
  if (!have_newton) {
    dir = avg_score;
    out.used_gradient = true;
  }

  // Cap the step so gamma stays strictly above the floor: when a full step
  // would cross it, land halfway between the current gamma and the floor.
  double t = 1.0;
  const double dg = dir(k);
  if (cur.gamma + t * dg <= opts.gamma_floor) {
    t = -0.5 * (cur.gamma - opts.gamma_floor) / dg;
  }

  const double dir_norm = dir.cwiseAbs().maxCoeff();
  while (t * dir_norm >= opts.step_tol) {
    ReparamPoint trial(cur.delta + t * dir.head(k), cur.gamma + t * dg);
    const double obj = objective(trial);
    if (std::isfinite(obj) && obj > cur_objective) {
      out.next = std::move(trial);
      out.objective = obj;
      out.step_scale = t;
      return out;
    }
    t *= 0.5;
  }
  out.objective = cur_objective;
  out.stalled = true;
  return out;
}

Eigen::MatrixXd avar_from_hessian(const Eigen::MatrixXd& avg_hessian) {
  return guarded_inverse(-avg_hessian, "avar_from_hessian");
}

Eigen::MatrixXd avar_from_opg(const Eigen::MatrixXd& avg_opg) {
  return guarded_inverse(avg_opg, "avar_from_opg");
}

Eigen::MatrixXd reparam_jacobian(const ReparamPoint& p) {
  const auto k = p.k();
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(k + 1, k + 1);
  const double g = p.gamma;
  j.topLeftCorner(k, k) =
      Eigen::MatrixXd::Identity(k, k) / g;
  j.topRightCorner(k, 1) = -p.delta / (g * g);
  j(k, k) = -2.0 / (g * g * g);
  return j;
}

OrigParams delta_method(const ReparamPoint& p,
                        const Eigen::MatrixXd& cov_theta) {
  const auto k = p.k();
  if (cov_theta.rows() != k + 1 || cov_theta.cols() != k + 1) {
    throw DomainError("delta_method: covariance dimension mismatch");
  }
  OrigParams out;
  out.beta = p.beta();
  out.sigma2 = p.sigma2();
  const Eigen::MatrixXd j = reparam_jacobian(p);
  out.cov = j * cov_theta * j.transpose();
  return out;
}

FitResult fit(const Dataset& data, const FitOptions& opts) {
  if (opts.max_iter < 1 || !(opts.grad_tol > 0.0) || !(opts.step_tol > 0.0) ||
      !(opts.gamma_floor > 0.0)) {
    throw ConfigError("fit: options out of range");
  }
  if (data.n() <= data.k() + 1) {
    throw DegenerateDataError("fit: sample too small for the parameter count");
  }
  if (data.kind() == ModelKind::tobit && data.n_censored() == data.n()) {
    throw DegenerateDataError("fit: every observation is censored");
  }

  std::vector<ReparamPoint> starts;
  if (opts.init) {
    if (opts.init->k() != data.k()) {
      throw ConfigError("fit: init has the wrong dimension");
    }
    starts.push_back(*opts.init);
  } else {
    const ReparamPoint base = ols_start(data);
    starts.push_back(base);
    // The truncated objective is not concave, so hedge with scattered starts.
    if (data.kind() == ModelKind::truncated) {
      Rng rng(opts.multistart_seed);
      for (int s = 0; s < opts.extra_starts; ++s) {
        Eigen::VectorXd d = base.delta;
        for (Eigen::Index i = 0; i < d.size(); ++i) {
          d(i) *= 1.0 + opts.perturb_scale * (2.0 * rng.next_uniform() - 1.0);
        }
        const double g =
            base.gamma *
            (1.0 + opts.perturb_scale * (2.0 * rng.next_uniform() - 1.0));
        starts.emplace_back(std::move(d), std::max(g, opts.gamma_floor * 2));
      }
    }
  }

  RunOutcome best;
  bool have_best = false;
  for (ReparamPoint& start : starts) {
    RunOutcome run = run_newton(data, std::move(start), opts);
    const bool better =
        !have_best || run.objective > best.objective ||
        (run.objective == best.objective && run.converged && !best.converged);
    if (better) {
      best = std::move(run);
      have_best = true;
    }
  }

  FitResult res;
  res.theta_hat = best.theta;
  res.loglik = best.objective;
  res.n_iter = best.n_iter;
  res.converged = best.converged;
  res.avg_score = best.eval.score;
  res.avg_score_norm = best.eval.score.cwiseAbs().maxCoeff();
  res.avg_hessian = best.eval.hessian;
  res.avg_opg = eval_opg(data, best.theta, opts.exec);
  res.n = data.n();
  res.trace = std::move(best.trace);

  const Eigen::MatrixXd neg_h =
      -0.5 * (res.avg_hessian + res.avg_hessian.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(neg_h);
  res.min_eig_neg_avg_hessian = es.eigenvalues().minCoeff();

  try {
    res.avar_hessian = avar_from_hessian(res.avg_hessian);
  } catch (const NonsingularityError&) {
    // Left empty; callers that need it go through avar_from_hessian and get
    // the full error.
  }
  try {
    res.avar_opg = avar_from_opg(res.avg_opg);
  } catch (const NonsingularityError&) {
  }

  if (res.avar_hessian.size() > 0) {
    res.orig = delta_method(res.theta_hat,
                            res.avar_hessian / static_cast<double>(res.n));
  } else {
    res.orig.beta = res.theta_hat.beta();
    res.orig.sigma2 = res.theta_hat.sigma2();
  }
  return res;
}

}  // namespace censreg
