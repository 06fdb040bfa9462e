#ifndef DECGP_GP_HPP
#define DECGP_GP_HPP

#include "decgp/kernel.hpp"
#include "decgp/types.hpp"

#include <Eigen/Cholesky>

namespace decgp {

// Jitter policy: on Cholesky failure add 1e-10 * mean(diag) to the diagonal,
// doubling up to 8 times, then give up with a conditioning error.
inline Eigen::LLT<MatrixXd> cholesky_with_jitter(const MatrixXd& C) {
  if (C.rows() != C.cols()) throw ContractError("cholesky_with_jitter: square matrix required");
  if (!C.allFinite()) throw ConditioningError("cholesky_with_jitter: non-finite entries");
  Eigen::LLT<MatrixXd> llt(C);
  if (llt.info() == Eigen::Success) return llt;
  double jitter = 1e-10 * C.diagonal().mean();
  if (!(jitter > 0.0)) jitter = 1e-300;
  for (int attempt = 0; attempt < 8; ++attempt) {
    MatrixXd Cj = C;
    Cj.diagonal().array() += jitter;
    llt.compute(Cj);
    if (llt.info() == Eigen::Success) return llt;
    jitter *= 2.0;
  }
  throw ConditioningError("cholesky_with_jitter: factorization failed after max jitter");
}

// log|C| from the Cholesky factor (never via a determinant routine).
inline double log_det_from_chol(const Eigen::LLT<MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// Constant-free negative marginal log-likelihood:
//   nll = y^T C^{-1} y + log|C|,  C = K + sigma_e^2 I.
inline double nll(const Dataset& data, const HyperParams& hyper) {
  data.validate();
  const MatrixXd C = covariance_matrix(data.inputs, data.inputs, hyper, true);
  const Eigen::LLT<MatrixXd> llt = cholesky_with_jitter(C);
  const VectorXd alpha = llt.solve(data.outputs);
  return data.outputs.dot(alpha) + log_det_from_chol(llt);
}

// nll value plus its gradient with respect to the LOG hyperparameters.
// Gradient in the raw domain is tr{(C^{-1} - alpha alpha^T) dC/dtheta_j} with
//   dC/dl_d   = 2 K .* Delta_d^2 / l_d^3,
//   dC/dsf    = 2 K / sigma_f,
//   dC/dse    = 2 sigma_e I,
// then the chain rule d/dlog theta_j = theta_j * d/dtheta_j.
struct NllEval {
  double value = 0.0;
  VectorXd grad_log;
};

inline NllEval nll_with_grad(const Dataset& data, const VectorXd& log_hyper) {
  data.validate();
  const HyperParams hyper = HyperParams::from_log(log_hyper);
  if (hyper.input_dim() != data.dim())
    throw ContractError("nll_with_grad: hyperparameter/input dimension mismatch");
  const int n = data.n();
  const int dim = data.dim();

  const MatrixXd K = covariance_matrix(data.inputs, data.inputs, hyper, false);
  MatrixXd C = K;
  C.diagonal().array() += hyper.noise_std * hyper.noise_std;
  const Eigen::LLT<MatrixXd> llt = cholesky_with_jitter(C);
  const VectorXd alpha = llt.solve(data.outputs);

  NllEval out;
  out.value = data.outputs.dot(alpha) + log_det_from_chol(llt);

  // A = C^{-1} - alpha alpha^T; every trace term is sum(A .* dC) by symmetry.
  MatrixXd A = llt.solve(MatrixXd::Identity(n, n));
  A.noalias() -= alpha * alpha.transpose();

  out.grad_log.resize(dim + 2);
  for (int d = 0; d < dim; ++d) {
    // log-domain: l_d * dC/dl_d = 2 K .* Delta_d^2 / l_d^2
    const double inv_l2 = 1.0 / (hyper.lengthscales[d] * hyper.lengthscales[d]);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double dx = data.inputs(i, d) - data.inputs(j, d);
        acc += A(i, j) * K(i, j) * dx * dx;
      }
    }
    out.grad_log[d] = 2.0 * inv_l2 * acc;
  }
  // log-domain: sigma_f * dC/dsf = 2 K
  out.grad_log[dim] = 2.0 * A.cwiseProduct(K).sum();
  // log-domain: sigma_e * dC/dse = 2 sigma_e^2 I
  out.grad_log[dim + 1] = 2.0 * hyper.noise_std * hyper.noise_std * A.trace();
  return out;
}

inline VectorXd nll_grad(const Dataset& data, const VectorXd& log_hyper) {
  return nll_with_grad(data, log_hyper).grad_log;
}

// One agent's fitted local model: dataset, hyperparameters, Cholesky factor of
// C = K + sigma_e^2 I, and the cached weight vector C^{-1} y. Immutable after
// construction.
class ExpertModel {
 public:
  ExpertModel(Dataset data, HyperParams hyper)
      : dataset_(std::move(data)), hyper_(std::move(hyper)) {
    dataset_.validate();
    hyper_.validate();
    if (hyper_.input_dim() != dataset_.dim())
      throw ContractError("ExpertModel: hyperparameter/input dimension mismatch");
    const MatrixXd C = covariance_matrix(dataset_.inputs, dataset_.inputs, hyper_, true);
    llt_ = cholesky_with_jitter(C);
    alpha_ = llt_.solve(dataset_.outputs);
  }

  const Dataset& dataset() const { return dataset_; }
  const HyperParams& hyper() const { return hyper_; }
  MatrixXd chol() const { return MatrixXd(llt_.matrixL()); }
  const VectorXd& alpha() const { return alpha_; }

  VectorXd solve(const VectorXd& rhs) const { return llt_.solve(rhs); }
  MatrixXd solve(const MatrixXd& rhs) const { return llt_.solve(rhs); }

 private:
  Dataset dataset_;
  HyperParams hyper_;
  Eigen::LLT<MatrixXd> llt_;
  VectorXd alpha_;
};

// Expert posterior at one query:
//   mu = k_*^T C^{-1} y,  var = k_** - k_*^T C^{-1} k_* (clamped at 0).
inline Prediction local_predict(const ExpertModel& expert, const VectorXd& xstar) {
  const VectorXd kstar = covariance_vector(expert.dataset().inputs, xstar, expert.hyper());
  const double kss = kernel_eval(xstar, xstar, expert.hyper());
  Prediction p;
  p.mean = kstar.dot(expert.alpha());
  p.variance = std::max(0.0, kss - kstar.dot(expert.solve(kstar)));
  return p;
}

// Exact GP posterior on the whole dataset (the M=1 oracle every aggregation
// method must collapse to).
inline Prediction full_gp_predict(const Dataset& data, const HyperParams& hyper,
                                  const VectorXd& xstar) {
  return local_predict(ExpertModel(data, hyper), xstar);
}

}  // namespace decgp

#endif  // DECGP_GP_HPP
