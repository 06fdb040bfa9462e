#ifndef DECGP_TYPES_HPP
#define DECGP_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace decgp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Error taxonomy. Contract errors are misuse (bad arguments, broken
// preconditions); conditioning errors are numerical (Cholesky failure after
// the jitter policy); convergence errors are exhausted iteration caps.
class ContractError : public std::invalid_argument {
 public:
  explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

class ConditioningError : public std::runtime_error {
 public:
  explicit ConditioningError(const std::string& what) : std::runtime_error(what) {}
};

class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Kernel hyperparameters: per-dimension lengthscales l_d, signal std sigma_f,
// noise std sigma_e. All strictly positive; optimizers work on the log vector
// (log l_1, ..., log l_D, log sigma_f, log sigma_e).
struct HyperParams {
  VectorXd lengthscales;
  double signal_std = 1.0;
  double noise_std = 1.0;

  HyperParams() = default;
  HyperParams(VectorXd ls, double sf, double se)
      : lengthscales(std::move(ls)), signal_std(sf), noise_std(se) {
    validate();
  }

  int input_dim() const { return static_cast<int>(lengthscales.size()); }
  int size() const { return input_dim() + 2; }

  void validate() const {
    if (lengthscales.size() < 1) throw ContractError("HyperParams: need at least one lengthscale");
    if (!(signal_std > 0.0) || !(noise_std > 0.0) || !(lengthscales.array() > 0.0).all())
      throw ContractError("HyperParams: all entries must be strictly positive");
  }

  VectorXd to_log() const {
    VectorXd v(size());
    for (int d = 0; d < input_dim(); ++d) v[d] = std::log(lengthscales[d]);
    v[input_dim()] = std::log(signal_std);
    v[input_dim() + 1] = std::log(noise_std);
    return v;
  }

  static HyperParams from_log(const VectorXd& v) {
    if (v.size() < 3) throw ContractError("HyperParams::from_log: need D+2 >= 3 entries");
    const int d = static_cast<int>(v.size()) - 2;
    HyperParams h;
    h.lengthscales = v.head(d).array().exp();
    h.signal_std = std::exp(v[d]);
    h.noise_std = std::exp(v[d + 1]);
    h.validate();
    return h;
  }
};

// Observations: inputs X (N x D), outputs y (N). N >= 1.
struct Dataset {
  MatrixXd inputs;
  VectorXd outputs;

  Dataset() = default;
  Dataset(MatrixXd x, VectorXd y) : inputs(std::move(x)), outputs(std::move(y)) { validate(); }

  int n() const { return static_cast<int>(inputs.rows()); }
  int dim() const { return static_cast<int>(inputs.cols()); }

  void validate() const {
    if (inputs.rows() < 1) throw ContractError("Dataset: N >= 1 required");
    if (inputs.rows() != outputs.size())
      throw ContractError("Dataset: input rows must match output length");
  }
};

// Posterior mean/variance at one query point. Variance is the latent
// (noise-free) predictive variance, clamped at zero against roundoff.
struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

// Deterministic seed derivation (splitmix64 over the combined words), so
// per-agent / per-replication streams are reproducible and order-independent.
inline std::uint64_t hash_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 engine with hand-rolled draws: std:: distributions are
// implementation-defined, which would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x1234abcdULL) {
    // splitmix64 warmup decorrelates nearby seeds
    for (int i = 0; i < 4; ++i) next();
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (cached second draw)
  double normal() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cache_ = r * std::sin(a);
    have_cache_ = true;
    return r * std::cos(a);
  }

  // uniform integer in [0, n), unbiased by rejection
  int uniform_int(int n) {
    if (n <= 0) throw ContractError("Rng::uniform_int: n must be positive");
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return static_cast<int>(x % un);
  }

  // k distinct indices from [0, n), in draw order (partial Fisher-Yates)
  std::vector<int> sample_without_replacement(int n, int k) {
    if (k > n) throw ContractError("Rng: sample size exceeds population");
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    std::vector<int> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
      const int j = i + uniform_int(n - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

 private:
  std::uint64_t state_;
  double cache_ = 0.0;
  bool have_cache_ = false;
};

}  // namespace decgp

#endif  // DECGP_TYPES_HPP
