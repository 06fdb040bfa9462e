#ifndef DECGP_CONSENSUS_HPP
#define DECGP_CONSENSUS_HPP

#include "decgp/netsim.hpp"

#include <functional>

namespace decgp {

// Decentralized convergence detector: max-consensus and min-consensus ride
// along with the algorithm's own messages in windows of diam(G)+1 rounds
// (seed round plus diam propagation hops). Value mode fires when every
// agent's windowed (max - min) spread is below eta; residual mode tracks only
// the max of per-agent update residuals and fires when that is below eta
// everywhere. Detector traffic piggybacks and is not charged to the ledger.
class MaximinDetector {
 public:
  enum class Mode { value, residual };

  MaximinDetector(const Graph& graph, double eta, Mode mode)
      : graph_(graph), eta_(eta), mode_(mode), window_(graph.diameter() + 1) {
    if (!(eta > 0.0)) throw ContractError("MaximinDetector: eta must be positive");
  }

  // Feed the per-agent monitored quantity for this round; returns true when
  // the window closed with the convergence condition met at every agent.
  bool step(const std::vector<double>& values) {
    const int m = graph_.size();
    if (static_cast<int>(values.size()) != m)
      throw ContractError("MaximinDetector: one value per agent required");
    if (pos_ == 0) {
      maxv_ = values;
      minv_ = values;
    } else {
      std::vector<double> new_max = maxv_, new_min = minv_;
      for (int i = 0; i < m; ++i) {
        new_max[i] = std::max(new_max[i], values[i]);
        new_min[i] = std::min(new_min[i], values[i]);
        for (int j : graph_.neighbors(i)) {
          new_max[i] = std::max(new_max[i], maxv_[j]);
          new_min[i] = std::min(new_min[i], minv_[j]);
        }
      }
      maxv_ = std::move(new_max);
      minv_ = std::move(new_min);
    }
    if (++pos_ < window_) return false;
    pos_ = 0;
    for (int i = 0; i < m; ++i) {
      const bool ok = (mode_ == Mode::value) ? (maxv_[i] - minv_[i] < eta_) : (maxv_[i] < eta_);
      if (!ok) return false;
    }
    return true;
  }

  int window() const { return window_; }

 private:
  const Graph& graph_;
  double eta_;
  Mode mode_;
  int window_;
  int pos_ = 0;
  std::vector<double> maxv_, minv_;
};

// ---------------------------------------------------------------------------
// Average consensus (DAC)

// Per-agent scalar states and the Perron step size.
struct DacState {
  std::vector<double> w;
  double eps = 0.0;
};

// One synchronous Perron update w_i += eps * sum_j a_ij (w_j - w_i).
// Preserves sum(w) on undirected graphs; charges one scalar per neighbor.
inline void dac_step(const Graph& graph, DacState& state, CommLedger& ledger) {
  if (!(state.eps > 0.0) || (graph.max_degree() > 0 && state.eps >= 1.0 / graph.max_degree()))
    throw ContractError("dac_step: eps must lie in (0, 1/max_degree)");
  std::vector<VectorXd> payload(graph.size());
  for (int i = 0; i < graph.size(); ++i) payload[i] = VectorXd::Constant(1, state.w[i]);
  const auto received = neighbor_exchange(graph, payload, ledger);
  std::vector<double> next = state.w;
  for (int i = 0; i < graph.size(); ++i)
    for (const auto& [j, v] : received[i]) next[i] += state.eps * (v[0] - state.w[i]);
  state.w = std::move(next);
}

struct DacRunResult {
  // each agent's consensus estimate per stream: values[k][i]
  std::vector<std::vector<double>> values;
  long long rounds = 0;
};

inline long long dac_iteration_cap(int m, double eta_stop) {
  const double cap = 10.0 * m * m * m * std::log(static_cast<double>(m) / eta_stop);
  return std::max<long long>(100, static_cast<long long>(cap));
}

// Runs K DAC streams in lockstep (one exchange per round carries all streams)
// until the joint maximin detector fires. Every agent ends within eta_stop of
// the initial stream mean.
inline DacRunResult run_dac_multi(const Graph& graph, std::vector<std::vector<double>> init,
                                  double eta_stop, CommLedger& ledger, long long cap = -1) {
  const int m = graph.size();
  const int streams = static_cast<int>(init.size());
  if (streams < 1) throw ContractError("run_dac_multi: need at least one stream");
  for (const auto& s : init)
    if (static_cast<int>(s.size()) != m) throw ContractError("run_dac_multi: one value per agent");
  if (m == 1) {
    ledger.note_phase("dac", 0, streams);
    return {std::move(init), 0};
  }
  if (cap < 0) cap = dac_iteration_cap(m, eta_stop);
  const double eps = perron_epsilon(graph);

  std::vector<MaximinDetector> detectors(
      streams, MaximinDetector(graph, eta_stop, MaximinDetector::Mode::value));
  long long rounds = 0;
  while (rounds < cap) {
    // one bus round moves every stream's scalar to each neighbor
    std::vector<VectorXd> payload(m, VectorXd(streams));
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < streams; ++k) payload[i][k] = init[k][i];
    const auto received = neighbor_exchange(graph, payload, ledger);
    for (int k = 0; k < streams; ++k) {
      std::vector<double> next = init[k];
      for (int i = 0; i < m; ++i)
        for (const auto& [j, v] : received[i]) next[i] += eps * (v[k] - init[k][i]);
      init[k] = std::move(next);
    }
    ++rounds;
    bool all_fired = true;
    for (int k = 0; k < streams; ++k) {
      const bool fired = detectors[k].step(init[k]);
      all_fired = all_fired && fired;
    }
    if (all_fired) {
      ledger.note_phase("dac", rounds, streams);
      return {std::move(init), rounds};
    }
  }
  throw ConvergenceError("run_dac_multi: iteration cap exceeded");
}

inline DacRunResult run_dac(const Graph& graph, const std::vector<double>& initial_values,
                            double eta_stop, CommLedger& ledger, long long cap = -1) {
  return run_dac_multi(graph, {initial_values}, eta_stop, ledger, cap);
}

// ---------------------------------------------------------------------------
// Jacobi over-relaxation (JOR)

// Pure update given the broadcast of all current iterates:
//   q_i <- (1 - omega) q_i + (omega / h_ii) (b_i - sum_{j != i} h_ij q_j).
inline VectorXd jor_step(const MatrixXd& H, const VectorXd& b, const VectorXd& q, double omega) {
  const int m = static_cast<int>(H.rows());
  if (!(omega > 0.0)) throw ContractError("jor_step: omega must be positive");
  VectorXd next(m);
  for (int i = 0; i < m; ++i) {
    if (H(i, i) == 0.0) throw ContractError("jor_step: zero diagonal entry");
    const double off = H.row(i).dot(q) - H(i, i) * q[i];
    next[i] = (1.0 - omega) * q[i] + omega / H(i, i) * (b[i] - off);
  }
  return next;
}

struct JorResult {
  MatrixXd q;             // column k = converged solution of H q = B.col(k)
  long long iterations = 0;
};

// Distributed JOR for one or more right-hand sides solved in lockstep. Agent
// i owns row i; iterates are broadcast each step (one exchange round on a
// complete graph, a diam(G)-round flood otherwise, as the update needs every
// q_j). Residual-mode maximin detection.
inline JorResult jor_solve(const Graph& graph, const MatrixXd& H, const MatrixXd& B, double omega,
                           double eta_stop, CommLedger& ledger, long long cap = 50000) {
  const int m = graph.size();
  if (H.rows() != m || H.cols() != m || B.rows() != m)
    throw ContractError("jor_solve: H must be M x M with one row per agent");
  const int nrhs = static_cast<int>(B.cols());
  const bool complete = (graph.diameter() <= 1);

  MatrixXd q(m, nrhs);
  for (int i = 0; i < m; ++i) {
    if (H(i, i) == 0.0) throw ContractError("jor_solve: zero diagonal entry");
    for (int k = 0; k < nrhs; ++k) q(i, k) = B(i, k) / H(i, i);
  }
  if (m == 1) return {q, 0};

  MaximinDetector detector(graph, eta_stop, MaximinDetector::Mode::residual);
  long long iterations = 0;
  while (iterations < cap) {
    // broadcast all iterates (per-agent payload: its nrhs values)
    std::vector<VectorXd> payload(m);
    for (int i = 0; i < m; ++i) payload[i] = q.row(i).transpose();
    if (complete) {
      neighbor_exchange(graph, payload, ledger);
    } else {
      flood(graph, payload, ledger);
    }
    MatrixXd next(m, nrhs);
    for (int k = 0; k < nrhs; ++k) next.col(k) = jor_step(H, B.col(k), q.col(k), omega);
    std::vector<double> residual(m);
    for (int i = 0; i < m; ++i) residual[i] = (next.row(i) - q.row(i)).cwiseAbs().maxCoeff();
    q = std::move(next);
    ++iterations;
    if (detector.step(residual)) return {q, iterations};
  }
  throw ConvergenceError("jor_solve: iteration cap exceeded");
}

// ---------------------------------------------------------------------------
// Power method and the optimal JOR relaxation

// Dominant-eigenvalue estimate via infinity-norm power iteration from the
// uniform start e = 1/M. Termination is sign-aware (a shifted matrix has a
// negative dominant eigenvalue, making iterates alternate sign); the returned
// value is the magnitude ||g||_inf. A zero matrix yields 0 immediately.
inline double power_method(const Graph& graph, const MatrixXd& R, double eta_pm,
                           CommLedger& ledger, long long cap = 50000) {
  const int m = graph.size();
  if (R.rows() != m || R.cols() != m) throw ContractError("power_method: R must be M x M");
  const bool complete = (graph.diameter() <= 1);
  VectorXd e = VectorXd::Constant(m, 1.0 / m);
  double lambda = 0.0;
  for (long long it = 0; it < cap; ++it) {
    // g_i is local to agent i; the full g is then shared for normalization
    VectorXd g = R * e;
    if (m > 1) {
      std::vector<VectorXd> payload(m);
      for (int i = 0; i < m; ++i) payload[i] = VectorXd::Constant(1, g[i]);
      if (complete) {
        neighbor_exchange(graph, payload, ledger);
      } else {
        flood(graph, payload, ledger);
      }
    }
    lambda = g.cwiseAbs().maxCoeff();
    if (lambda < 1e-300) return 0.0;
    const VectorXd e_next = g / lambda;
    const double diff = std::min((e_next - e).norm(), (e_next + e).norm());
    e = e_next;
    if (diff < eta_pm) return lambda;
  }
  throw ConvergenceError("power_method: iteration cap exceeded");
}

struct OmegaResult {
  double omega = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
};

// Optimal JOR relaxation omega* = 2 / (lambda_max(R) + lambda_min(R)) with
// R = diag(C_A)^{-1} C_A. Rows are exchanged first so every agent can run the
// iteration; lambda_min comes from the spectral shift B = R - lambda_max I.
inline OmegaResult optimal_omega(const Graph& graph, const MatrixXd& C_A, double eta_pm,
                                 CommLedger& ledger) {
  const int m = graph.size();
  if (C_A.rows() != m || C_A.cols() != m) throw ContractError("optimal_omega: C_A must be M x M");
  std::vector<VectorXd> rows(m);
  for (int i = 0; i < m; ++i) rows[i] = C_A.row(i).transpose();
  flood(graph, rows, ledger);

  MatrixXd R(m, m);
  for (int i = 0; i < m; ++i) {
    if (!(C_A(i, i) > 0.0)) throw ContractError("optimal_omega: nonpositive diagonal");
    R.row(i) = C_A.row(i) / C_A(i, i);
  }
  OmegaResult out;
  out.lambda_max = power_method(graph, R, eta_pm, ledger);
  MatrixXd B = R;
  B.diagonal().array() -= out.lambda_max;
  const double lambda_shift = power_method(graph, B, eta_pm, ledger);
  out.lambda_min = std::abs(lambda_shift - out.lambda_max);
  out.omega = 2.0 / (out.lambda_max + out.lambda_min);
  return out;
}

// ---------------------------------------------------------------------------
// Projection-consensus linear solver (DALE)

// Agent i owns one row of H q = b and its kernel projector; iterates live on
// neighbor exchanges only (no flooding needed).
struct DaleState {
  MatrixXd H;                  // row i belongs to agent i
  MatrixXd B;                  // one column per right-hand side
  std::vector<MatrixXd> q;     // q[k] is n x M: column i = agent i's iterate
  std::vector<MatrixXd> proj;  // P_i = I - h_i h_i^T / ||h_i||^2
  std::vector<MatrixXd> anchors;  // anchors[k].col(i) = h_i b_{ik} / ||h_i||^2
};

inline void dale_validate_rows(const MatrixXd& H) {
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    if (H.row(i).norm() == 0.0) throw ContractError("dale: zero row in H");
}

// One synchronous DALE update for all agents and all right-hand sides:
//   q_i <- h_i^T b_i / ||h_i||^2 + (1/card(N_i)) P_i sum_{j in N_i} q_j.
// An isolated agent keeps its anchor (exact for 1x1 systems).
inline void dale_step(const Graph& graph, DaleState& state, CommLedger& ledger) {
  const int m = graph.size();
  const int n = static_cast<int>(state.H.cols());
  const int nrhs = static_cast<int>(state.B.cols());
  // payload: agent i's iterates for all rhs stacked (n * nrhs scalars)
  std::vector<VectorXd> payload(m, VectorXd(n * nrhs));
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < nrhs; ++k) payload[i].segment(k * n, n) = state.q[k].col(i);
  const auto received = neighbor_exchange(graph, payload, ledger);

  for (int k = 0; k < nrhs; ++k) {
    MatrixXd next(n, m);
    for (int i = 0; i < m; ++i) {
      VectorXd acc = VectorXd::Zero(n);
      int count = 0;
      for (const auto& [j, v] : received[i]) {
        acc += v.segment(k * n, n);
        ++count;
      }
      VectorXd qi = state.anchors[k].col(i);
      if (count > 0) qi += state.proj[i] * (acc / count);
      next.col(i) = qi;
    }
    state.q[k] = std::move(next);
  }
}

struct DaleResult {
  // solutions[k].col(i) = agent i's converged estimate for rhs k
  std::vector<MatrixXd> solutions;
  long long iterations = 0;
};

inline DaleResult dale_solve(const Graph& graph, const MatrixXd& H, const MatrixXd& B,
                             double eta_stop, CommLedger& ledger, long long cap = 50000) {
  const int m = graph.size();
  if (H.rows() != m || B.rows() != m)
    throw ContractError("dale_solve: one row of H and b per agent required");
  dale_validate_rows(H);
  const int n = static_cast<int>(H.cols());
  const int nrhs = static_cast<int>(B.cols());

  DaleState state;
  state.H = H;
  state.B = B;
  state.proj.resize(m);
  state.anchors.assign(nrhs, MatrixXd(n, m));
  for (int i = 0; i < m; ++i) {
    const VectorXd h = H.row(i).transpose();
    const double hh = h.squaredNorm();
    state.proj[i] = MatrixXd::Identity(n, n) - h * h.transpose() / hh;
    for (int k = 0; k < nrhs; ++k) state.anchors[k].col(i) = h * (B(i, k) / hh);
  }
  state.q.resize(nrhs);
  for (int k = 0; k < nrhs; ++k) state.q[k] = state.anchors[k];
  if (m == 1) return {state.q, 0};

  MaximinDetector detector(graph, eta_stop, MaximinDetector::Mode::residual);
  long long iterations = 0;
  while (iterations < cap) {
    const std::vector<MatrixXd> prev = state.q;
    dale_step(graph, state, ledger);
    std::vector<double> residual(m, 0.0);
    for (int k = 0; k < nrhs; ++k)
      for (int i = 0; i < m; ++i)
        residual[i] = std::max(residual[i],
                               (state.q[k].col(i) - prev[k].col(i)).cwiseAbs().maxCoeff());
    ++iterations;
    if (detector.step(residual)) return {state.q, iterations};
  }
  throw ConvergenceError("dale_solve: iteration cap exceeded");
}

}  // namespace decgp

#endif  // DECGP_CONSENSUS_HPP
