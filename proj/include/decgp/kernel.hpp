#ifndef DECGP_KERNEL_HPP
#define DECGP_KERNEL_HPP

#include "decgp/types.hpp"

namespace decgp {

// Separable squared-exponential kernel
//   k(x, x') = sigma_f^2 * exp(-sum_d (x_d - x'_d)^2 / l_d^2).
// Note the plain l_d^2 denominator (no factor 2).
inline double kernel_eval(const VectorXd& x, const VectorXd& x2, const HyperParams& hyper) {
  if (x.size() != x2.size() || x.size() != hyper.input_dim())
    throw ContractError("kernel_eval: dimension mismatch");
  double s = 0.0;
  for (int d = 0; d < x.size(); ++d) {
    const double dx = (x[d] - x2[d]) / hyper.lengthscales[d];
    s += dx * dx;
  }
  return hyper.signal_std * hyper.signal_std * std::exp(-s);
}

// Cross-covariance matrix: entry (i,j) = k(row i of Xa, row j of Xb).
// add_noise appends sigma_e^2 on the diagonal and is only meaningful when Xa
// and Xb are the same point set (enforced).
inline MatrixXd covariance_matrix(const MatrixXd& Xa, const MatrixXd& Xb, const HyperParams& hyper,
                                  bool add_noise) {
  if (Xa.cols() != hyper.input_dim() || Xb.cols() != hyper.input_dim())
    throw ContractError("covariance_matrix: input dimension mismatch");
  if (add_noise && (Xa.rows() != Xb.rows() || Xa != Xb))
    throw ContractError("covariance_matrix: add_noise requires identical point sets");

  const double sf2 = hyper.signal_std * hyper.signal_std;
  MatrixXd K(Xa.rows(), Xb.rows());
  for (Eigen::Index i = 0; i < Xa.rows(); ++i) {
    for (Eigen::Index j = 0; j < Xb.rows(); ++j) {
      double s = 0.0;
      for (Eigen::Index d = 0; d < Xa.cols(); ++d) {
        const double dx = (Xa(i, d) - Xb(j, d)) / hyper.lengthscales[d];
        s += dx * dx;
      }
      K(i, j) = sf2 * std::exp(-s);
    }
  }
  if (add_noise) K.diagonal().array() += hyper.noise_std * hyper.noise_std;
  return K;
}

// Vector of covariances between the rows of X and a single query point.
inline VectorXd covariance_vector(const MatrixXd& X, const VectorXd& xstar,
                                  const HyperParams& hyper) {
  if (X.cols() != hyper.input_dim() || xstar.size() != hyper.input_dim())
    throw ContractError("covariance_vector: dimension mismatch");
  const double sf2 = hyper.signal_std * hyper.signal_std;
  VectorXd k(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < X.cols(); ++d) {
      const double dx = (X(i, d) - xstar[d]) / hyper.lengthscales[d];
      s += dx * dx;
    }
    k[i] = sf2 * std::exp(-s);
  }
  return k;
}

}  // namespace decgp

#endif  // DECGP_KERNEL_HPP
