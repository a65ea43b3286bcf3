#include "censreg/objective.hpp"

#include <cmath>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "censreg/special_fn.hpp"
#include "censreg/tobit.hpp"
#include "censreg/truncated.hpp"

namespace censreg {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Chunk size is a fixed constant, not derived from the thread count: partial
// sums are always formed over the same index ranges and combined in the same
// order, so results cannot depend on scheduling.
constexpr Eigen::Index kChunk = 1024;

bool use_parallel(const Dataset& data, Exec exec) {
  if (exec == Exec::serial) return false;
  if (exec == Exec::parallel) return true;
#ifdef _OPENMP
  return data.n() >= 4 * kChunk && omp_get_max_threads() > 1;
#else
  return false;
#endif
}

// Accumulator for sums of loglik/score/Hessian. The Hessian of both models
// has the same block structure, so the x-block, cross-block and corner are
// kept separately and assembled once at the end.
struct Accum {
  double ll = 0.0;
  Eigen::VectorXd sx;
  double sg = 0.0;
  Eigen::MatrixXd hxx;
  Eigen::VectorXd hxg;
  double hgg = 0.0;

  explicit Accum(Eigen::Index k)
      : sx(Eigen::VectorXd::Zero(k)),
        hxx(Eigen::MatrixXd::Zero(k, k)),
        hxg(Eigen::VectorXd::Zero(k)) {}

  void add(const Accum& o) {
    ll += o.ll;
    sx += o.sx;
    sg += o.sg;
    hxx += o.hxx;
    hxg += o.hxg;
    hgg += o.hgg;
  }
};

// One truncated observation into the accumulator. Same math as the public
// per-observation kernels, fused so the hazard is evaluated once per row.
inline void add_truncated(const Dataset& d, Eigen::Index i,
                          const ReparamPoint& p, Accum& a) {
  const double y = d.y()(i);
  const auto x = d.x().row(i);
  const double xd = x.dot(p.delta);
  const double u = p.gamma * y - xd;
  const double v = p.gamma * d.c() - xd;
  const HazardValue h = hazard(v);
  const double c = d.c();

  a.ll += -kLogSqrt2Pi + std::log(p.gamma) - 0.5 * u * u - log_survival(v);
  a.sx.noalias() += (u - h.lambda) * x.transpose();
  a.sg += 1.0 / p.gamma - u * y + h.lambda * c;
  a.hxx.noalias() += (h.delta - 1.0) * (x.transpose() * x);
  a.hxg.noalias() += (y - h.delta * c) * x.transpose();
  a.hgg += -(1.0 / (p.gamma * p.gamma) + y * y) + h.delta * c * c;
}

inline void add_tobit(const Dataset& d, Eigen::Index i, const ReparamPoint& p,
                      Accum& a) {
  const double y = d.y()(i);
  const auto x = d.x().row(i);
  const double xd = x.dot(p.delta);
  const double c = d.c();
  if (d.is_censored(i)) {
    const double mv = xd - p.gamma * c;  // -v
    const HazardValue h = hazard(mv);
    a.ll += log_survival(mv);
    a.sx.noalias() += -h.lambda * x.transpose();
    a.sg += h.lambda * c;
    a.hxx.noalias() += -h.delta * (x.transpose() * x);
    a.hxg.noalias() += h.delta * c * x.transpose();
    a.hgg += -h.delta * c * c;
  } else {
    const double u = p.gamma * y - xd;
    a.ll += -kLogSqrt2Pi + std::log(p.gamma) - 0.5 * u * u;
    a.sx.noalias() += u * x.transpose();
    a.sg += 1.0 / p.gamma - u * y;
    a.hxx.noalias() += -(x.transpose() * x);
    a.hxg.noalias() += y * x.transpose();
    a.hgg += -(1.0 / (p.gamma * p.gamma) + y * y);
  }
}

void add_range(const Dataset& d, Eigen::Index lo, Eigen::Index hi,
               const ReparamPoint& p, Accum& a) {
  if (d.kind() == ModelKind::truncated) {
    for (Eigen::Index i = lo; i < hi; ++i) add_truncated(d, i, p, a);
  } else {
    for (Eigen::Index i = lo; i < hi; ++i) add_tobit(d, i, p, a);
  }
}

SampleEval assemble(const Accum& a, const Dataset& d) {
  const auto k = d.k();
  const double inv_n = 1.0 / static_cast<double>(d.n());
  SampleEval out;
  out.loglik = a.ll * inv_n;
  out.score.resize(k + 1);
  out.score.head(k) = a.sx * inv_n;
  out.score(k) = a.sg * inv_n;
  out.hessian.resize(k + 1, k + 1);
  out.hessian.topLeftCorner(k, k) = a.hxx * inv_n;
  out.hessian.topRightCorner(k, 1) = a.hxg * inv_n;
  out.hessian.bottomLeftCorner(1, k) = (a.hxg * inv_n).transpose();
  out.hessian(k, k) = a.hgg * inv_n;
  return out;
}

void check_dims(const Dataset& d, const ReparamPoint& p) {
  if (d.k() != p.k()) {
    throw DomainError("eval: dataset and parameter dimensions disagree");
  }
}

}  // namespace

SampleEval eval_sample_serial(const Dataset& data, const ReparamPoint& p) {
  check_dims(data, p);
  const auto k = data.k();
  SampleEval out;
  out.loglik = 0.0;
  out.score = Eigen::VectorXd::Zero(k + 1);
  out.hessian = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    ScoreHessian sh;
    if (data.kind() == ModelKind::truncated) {
      sh = truncated::eval_obs(data.obs(i), p, data.c());
    } else {
      sh = tobit::eval_obs(data.cobs(i), p, data.c());
    }
    out.loglik += sh.loglik;
    out.score += sh.score;
    out.hessian += sh.hessian;
  }
  const double inv_n = 1.0 / static_cast<double>(data.n());
  out.loglik *= inv_n;
  out.score *= inv_n;
  out.hessian *= inv_n;
  return out;
}

SampleEval eval_sample_parallel(const Dataset& data, const ReparamPoint& p) {
  check_dims(data, p);
  const Eigen::Index n = data.n();
  const Eigen::Index n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<Accum> parts(static_cast<size_t>(n_chunks), Accum(data.k()));
  std::exception_ptr eptr = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (Eigen::Index ci = 0; ci < n_chunks; ++ci) {
    try {
      const Eigen::Index lo = ci * kChunk;
      const Eigen::Index hi = std::min(lo + kChunk, n);
      add_range(data, lo, hi, p, parts[static_cast<size_t>(ci)]);
    } catch (...) {
      // Exceptions must not unwind out of the worker loop; stash and rethrow.
#ifdef _OPENMP
#pragma omp critical(censreg_eval_err)
#endif
      if (!eptr) eptr = std::current_exception();
    }
  }
  if (eptr) std::rethrow_exception(eptr);

  Accum total(data.k());
  for (const Accum& part : parts) total.add(part);
  return assemble(total, data);
}

SampleEval eval_sample(const Dataset& data, const ReparamPoint& p, Exec exec) {
  return use_parallel(data, exec) ? eval_sample_parallel(data, p)
                                  : eval_sample_serial(data, p);
}

double eval_loglik(const Dataset& data, const ReparamPoint& p, Exec exec) {
  check_dims(data, p);
  const Eigen::Index n = data.n();
  const Eigen::Index n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> parts(static_cast<size_t>(n_chunks), 0.0);
  [[maybe_unused]] const bool par = use_parallel(data, exec);
  std::exception_ptr eptr = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
  for (Eigen::Index ci = 0; ci < n_chunks; ++ci) {
    try {
      const Eigen::Index lo = ci * kChunk;
      const Eigen::Index hi = std::min(lo + kChunk, n);
      double ll = 0.0;
      if (data.kind() == ModelKind::truncated) {
        for (Eigen::Index i = lo; i < hi; ++i) {
          const double xd = data.x().row(i).dot(p.delta);
          const double u = p.gamma * data.y()(i) - xd;
          ll += -kLogSqrt2Pi + std::log(p.gamma) - 0.5 * u * u -
                log_survival(p.gamma * data.c() - xd);
        }
      } else {
        for (Eigen::Index i = lo; i < hi; ++i) {
          const double xd = data.x().row(i).dot(p.delta);
          if (data.is_censored(i)) {
            ll += log_survival(xd - p.gamma * data.c());
          } else {
            const double u = p.gamma * data.y()(i) - xd;
            ll += -kLogSqrt2Pi + std::log(p.gamma) - 0.5 * u * u;
          }
        }
      }
      parts[static_cast<size_t>(ci)] = ll;
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(censreg_eval_err)
#endif
      if (!eptr) eptr = std::current_exception();
    }
  }
  if (eptr) std::rethrow_exception(eptr);

  double total = 0.0;
  for (double part : parts) total += part;
  return total / static_cast<double>(n);
}

Eigen::MatrixXd eval_opg(const Dataset& data, const ReparamPoint& p,
                         Exec exec) {
  check_dims(data, p);
  const auto k = data.k();
  const Eigen::Index n = data.n();
  const Eigen::Index n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<Eigen::MatrixXd> parts(
      static_cast<size_t>(n_chunks), Eigen::MatrixXd::Zero(k + 1, k + 1));
  [[maybe_unused]] const bool par = use_parallel(data, exec);
  std::exception_ptr eptr = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
  for (Eigen::Index ci = 0; ci < n_chunks; ++ci) {
    try {
      const Eigen::Index lo = ci * kChunk;
      const Eigen::Index hi = std::min(lo + kChunk, n);
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k + 1, k + 1);
      Eigen::VectorXd s(k + 1);
      for (Eigen::Index i = lo; i < hi; ++i) {
        if (data.kind() == ModelKind::truncated) {
          s = truncated::score_obs(data.obs(i), p, data.c());
        } else {
          s = tobit::score_obs(data.cobs(i), p, data.c());
        }
        acc.noalias() += s * s.transpose();
      }
      parts[static_cast<size_t>(ci)] = std::move(acc);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(censreg_eval_err)
#endif
      if (!eptr) eptr = std::current_exception();
    }
  }
  if (eptr) std::rethrow_exception(eptr);

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (const Eigen::MatrixXd& part : parts) total += part;
  return total / static_cast<double>(n);
}

}  // namespace censreg
