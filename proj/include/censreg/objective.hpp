#pragma once

#include <Eigen/Dense>

#include "censreg/types.hpp"

namespace censreg {

enum class Exec { serial, parallel, automatic };

// Per-observation averages over the sample: (1/n) sum of log likelihood,
// score and Hessian at p. Dispatches on dataset.kind().
struct SampleEval {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;
};

// Reference implementation: a plain loop over the public per-observation
// kernels, accumulated in row order. Kept deliberately naive; the parallel
// kernel is tested against it.
SampleEval eval_sample_serial(const Dataset& data, const ReparamPoint& p);

// Production implementation: observations are split into fixed-size chunks,
// chunks are reduced in parallel (OpenMP when available), then partial sums
// are combined in chunk order. The fixed chunking makes the result
// bit-identical no matter how many threads run.
SampleEval eval_sample_parallel(const Dataset& data, const ReparamPoint& p);

SampleEval eval_sample(const Dataset& data, const ReparamPoint& p,
                       Exec exec = Exec::automatic);

// Average log likelihood only (line searches don't need derivatives).
double eval_loglik(const Dataset& data, const ReparamPoint& p,
                   Exec exec = Exec::automatic);

// Average outer product of per-observation scores, (1/n) sum s_i s_i'.
Eigen::MatrixXd eval_opg(const Dataset& data, const ReparamPoint& p,
                         Exec exec = Exec::automatic);

}  // namespace censreg
