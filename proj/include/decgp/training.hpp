#ifndef DECGP_TRAINING_HPP
#define DECGP_TRAINING_HPP

#include "decgp/consensus.hpp"
#include "decgp/gp.hpp"
#include "decgp/netsim.hpp"

#include <functional>
#include <memory>

namespace decgp {

// A trainer sees each agent's objective only through value/gradient calls in
// log-hyperparameter space; the fused call shares one factorization per
// evaluation. Tests substitute stubs here.
struct LocalObjective {
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> grad;
  std::function<NllEval(const VectorXd&)> value_and_grad;
};

inline LocalObjective make_objective(std::function<double(const VectorXd&)> value,
                                     std::function<VectorXd(const VectorXd&)> grad) {
  LocalObjective o;
  o.value = value;
  o.grad = grad;
  o.value_and_grad = [value, grad](const VectorXd& x) {
    NllEval e;
    e.value = value(x);
    e.grad_log = grad(x);
    return e;
  };
  return o;
}

inline LocalObjective nll_objective(Dataset data) {
  auto d = std::make_shared<Dataset>(std::move(data));
  LocalObjective o;
  o.value = [d](const VectorXd& lh) { return nll(*d, HyperParams::from_log(lh)); };
  o.grad = [d](const VectorXd& lh) { return nll_grad(*d, lh); };
  o.value_and_grad = [d](const VectorXd& lh) { return nll_with_grad(*d, lh); };
  return o;
}

inline std::vector<LocalObjective> nll_objectives(const std::vector<Dataset>& datasets) {
  std::vector<LocalObjective> out;
  out.reserve(datasets.size());
  for (const Dataset& d : datasets) out.push_back(nll_objective(d));
  return out;
}

// ADMM-family knobs. rho/lipschitz/kappa/gd_step/s_end/tol_admm carry the
// experiment defaults; the remaining fields are artifact safety caps.
struct AdmmConfig {
  double rho = 500.0;
  double lipschitz = 5000.0;
  double kappa = 5000.0;
  double gd_step = 1e-5;  // nested gradient-descent step
  long long s_end = 100;  // fixed decentralized round budget
  double tol_admm = 1e-3;
  std::uint64_t rng_seed = 0;

  long long max_rounds = 1000;  // centralized ADMM safety cap
  int inner_iters = 100;        // nested GD iteration cap
  double inner_grad_tol = 1e-6;
  long long fact_iters = 2000;  // factorized-GD iteration cap
  double fact_grad_tol = 1e-3;

  void validate() const {
    if (!(rho > 0.0) || !(lipschitz > 0.0) || !(kappa > 0.0) || !(gd_step > 0.0) ||
        !(tol_admm > 0.0) || s_end < 1)
      throw ContractError("AdmmConfig: all parameters must be positive, s_end >= 1");
  }
};

// Start point used by the experiments: lengthscales (2, 0.5, 0.5, ...),
// sigma_f = 1, sigma_e = 1.
inline HyperParams default_initial_hyper(int input_dim) {
  VectorXd ls = VectorXd::Constant(input_dim, 0.5);
  ls[0] = 2.0;
  return HyperParams(ls, 1.0, 1.0);
}

struct TrainResult {
  VectorXd theta_log;                     // consensus point estimate, log-domain
  std::vector<VectorXd> theta_log_agents; // per-agent final iterates
  long long rounds = 0;
  bool converged = true;
  std::vector<double> spread;  // per-round max pairwise ||theta_i - theta_j||_2

  HyperParams theta() const { return HyperParams::from_log(theta_log); }
};

inline double consensus_spread(const std::vector<VectorXd>& theta) {
  double s = 0.0;
  for (size_t i = 0; i < theta.size(); ++i)
    for (size_t j = i + 1; j < theta.size(); ++j)
      s = std::max(s, (theta[i] - theta[j]).norm());
  return s;
}

inline VectorXd mean_log(const std::vector<VectorXd>& theta) {
  VectorXd z = VectorXd::Zero(theta.at(0).size());
  for (const VectorXd& t : theta) z += t;
  return z / static_cast<double>(theta.size());
}

// ---------------------------------------------------------------------------
// Nested gradient descent (the inexact per-agent minimizer): fixed step,
// iteration cap, early exit on small gradient; on 20 straight objective
// increases the step is halved and the search resumes from the best iterate.
inline VectorXd nested_gd(const std::function<NllEval(const VectorXd&)>& eval, VectorXd x,
                          const AdmmConfig& cfg) {
  double step = cfg.gd_step;
  NllEval e = eval(x);
  VectorXd best_x = x;
  double best_f = e.value;
  int bad = 0, halvings = 0;
  for (int it = 0; it < cfg.inner_iters; ++it) {
    if (e.grad_log.norm() < cfg.inner_grad_tol) break;
    x -= step * e.grad_log;
    e = eval(x);
    if (e.value < best_f) {
      best_f = e.value;
      best_x = x;
      bad = 0;
    } else if (++bad >= 20) {
      step *= 0.5;
      bad = 0;
      x = best_x;
      e = eval(x);
      if (++halvings > 60) throw ConvergenceError("nested_gd: objective kept increasing");
    }
  }
  return best_x;
}

// ---------------------------------------------------------------------------
// Factorized training: plain gradient descent on sum_i L_i in log-domain with
// step adaptation (grow on decrease, shrink and retry on increase). The
// optional ledger models the central gather of the M local gradients: each
// agent ships D+2 scalars per iteration.
inline TrainResult fact_gp_train(const std::vector<LocalObjective>& objectives,
                                 const AdmmConfig& cfg, const VectorXd& theta0_log,
                                 CommLedger* ledger = nullptr) {
  cfg.validate();
  const int dim = static_cast<int>(theta0_log.size());
  const int m = static_cast<int>(objectives.size());
  auto eval_sum = [&](const VectorXd& x) {
    NllEval total;
    total.value = 0.0;
    total.grad_log = VectorXd::Zero(dim);
    for (const LocalObjective& o : objectives) {
      const NllEval e = o.value_and_grad(x);
      total.value += e.value;
      total.grad_log += e.grad_log;
    }
    if (ledger != nullptr) {
      for (int i = 0; i < m; ++i) ledger->charge(i, dim);
      ledger->add_rounds();
    }
    return total;
  };

  VectorXd x = theta0_log;
  NllEval e = eval_sum(x);
  VectorXd best_x = x;
  double best_f = e.value;
  double step = cfg.gd_step;
  TrainResult result;
  result.converged = false;
  long long it = 0;
  for (; it < cfg.fact_iters; ++it) {
    if (e.grad_log.norm() < cfg.fact_grad_tol) {
      result.converged = true;
      break;
    }
    const VectorXd x_try = x - step * e.grad_log;
    const NllEval e_try = eval_sum(x_try);
    if (e_try.value < e.value) {
      x = x_try;
      e = e_try;
      step *= 1.6;
      if (e.value < best_f) {
        best_f = e.value;
        best_x = x;
      }
    } else {
      step *= 0.5;
      if (step < 1e-16) break;
    }
  }
  result.theta_log = best_x;
  result.theta_log_agents = {best_x};
  result.rounds = it;
  return result;
}

inline TrainResult fact_gp_train(const std::vector<Dataset>& local_datasets, const AdmmConfig& cfg,
                                 const HyperParams& initial, CommLedger* ledger = nullptr) {
  return fact_gp_train(nll_objectives(local_datasets), cfg, initial.to_log(), ledger);
}

// ---------------------------------------------------------------------------
// Centralized consensus ADMM

struct CentralAdmmState {
  VectorXd z;                  // auxiliary consensus variable (log-domain)
  std::vector<VectorXd> theta; // per-agent iterates
  std::vector<VectorXd> psi;   // per-agent duals

  static CentralAdmmState init(int agents, const VectorXd& theta0_log) {
    CentralAdmmState s;
    s.z = theta0_log;
    s.theta.assign(agents, theta0_log);
    s.psi.assign(agents, VectorXd::Zero(theta0_log.size()));
    return s;
  }
};

// One exact-ADMM round: z-average, nested per-agent minimization of
// L_i(theta) + psi_i^T (theta - z) + (rho/2) ||theta - z||^2, dual ascent.
inline void cgp_round(CentralAdmmState& state, const std::vector<LocalObjective>& objectives,
                      const AdmmConfig& cfg) {
  const int m = static_cast<int>(objectives.size());
  VectorXd z = VectorXd::Zero(state.z.size());
  for (int i = 0; i < m; ++i) z += state.theta[i] + state.psi[i] / cfg.rho;
  z /= static_cast<double>(m);
  state.z = z;
  for (int i = 0; i < m; ++i) {
    const VectorXd psi = state.psi[i];
    const LocalObjective& f = objectives[i];
    auto eval = [&](const VectorXd& x) {
      NllEval e = f.value_and_grad(x);
      const VectorXd dx = x - z;
      e.value += psi.dot(dx) + 0.5 * cfg.rho * dx.squaredNorm();
      e.grad_log += psi + cfg.rho * dx;
      return e;
    };
    state.theta[i] = nested_gd(eval, state.theta[i], cfg);
  }
  for (int i = 0; i < m; ++i) state.psi[i] += cfg.rho * (state.theta[i] - z);
}

// One inexact round: the nested problem is linearized at z, giving the closed
// form theta_i = z - (grad L_i(z) + psi_i) / (rho + L_i).
inline void apx_gp_round(CentralAdmmState& state, const std::vector<LocalObjective>& objectives,
                         const AdmmConfig& cfg) {
  const int m = static_cast<int>(objectives.size());
  VectorXd z = VectorXd::Zero(state.z.size());
  for (int i = 0; i < m; ++i) z += state.theta[i] + state.psi[i] / cfg.rho;
  z /= static_cast<double>(m);
  state.z = z;
  for (int i = 0; i < m; ++i) {
    const VectorXd g = objectives[i].grad(z);
    state.theta[i] = z - (g + state.psi[i]) / (cfg.rho + cfg.lipschitz);
  }
  for (int i = 0; i < m; ++i) state.psi[i] += cfg.rho * (state.theta[i] - z);
}

namespace detail {
// Shared centralized driver: rounds until max_i ||theta_i - z|| < tol_admm or
// the safety cap trips (converged=false, best state returned).
template <typename RoundFn>
TrainResult central_admm_train(RoundFn round, const std::vector<LocalObjective>& objectives,
                               const AdmmConfig& cfg, const VectorXd& theta0_log) {
  cfg.validate();
  CentralAdmmState state = CentralAdmmState::init(static_cast<int>(objectives.size()), theta0_log);
  TrainResult result;
  result.converged = false;
  for (long long s = 0; s < cfg.max_rounds; ++s) {
    round(state, objectives, cfg);
    ++result.rounds;
    double gap = 0.0;
    for (const VectorXd& t : state.theta) gap = std::max(gap, (t - state.z).norm());
    result.spread.push_back(consensus_spread(state.theta));
    if (gap < cfg.tol_admm) {
      result.converged = true;
      break;
    }
  }
  result.theta_log = state.z;
  result.theta_log_agents = state.theta;
  return result;
}
}  // namespace detail

inline TrainResult cgp_train(const std::vector<LocalObjective>& objectives, const AdmmConfig& cfg,
                             const VectorXd& theta0_log) {
  return detail::central_admm_train(
      [](CentralAdmmState& s, const std::vector<LocalObjective>& o, const AdmmConfig& c) {
        cgp_round(s, o, c);
      },
      objectives, cfg, theta0_log);
}

inline TrainResult apx_gp_train(const std::vector<LocalObjective>& objectives,
                                const AdmmConfig& cfg, const VectorXd& theta0_log) {
  return detail::central_admm_train(
      [](CentralAdmmState& s, const std::vector<LocalObjective>& o, const AdmmConfig& c) {
        apx_gp_round(s, o, c);
      },
      objectives, cfg, theta0_log);
}

// ---------------------------------------------------------------------------
// Communication dataset and augmented local datasets

// D_c is the union (agent-index order) of floor(N_i/M) points drawn without
// replacement from each local dataset; D_{+i} appends D_c to D_i with
// duplicates retained for bookkeeping. Covariance assembly dedups exact input
// matches (first occurrence wins), so a point sampled from D_i itself does
// not make C_{+i} singular.
struct AugmentedData {
  MatrixXd comm_inputs;   // |D_c| x D
  VectorXd comm_outputs;  // |D_c|
  std::vector<Dataset> local_plus;
  std::vector<std::vector<int>> sampled_indices;  // per agent, into its D_i

  int comm_size() const { return static_cast<int>(comm_inputs.rows()); }
  Dataset comm_dataset() const {
    if (comm_size() < 1) throw ContractError("AugmentedData: empty communication dataset");
    return Dataset(comm_inputs, comm_outputs);
  }
};

inline Dataset dedup_inputs(const Dataset& data) {
  std::vector<int> keep;
  for (int i = 0; i < data.n(); ++i) {
    bool dup = false;
    for (int j : keep) {
      if (data.inputs.row(i) == data.inputs.row(j)) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(i);
  }
  MatrixXd x(keep.size(), data.dim());
  VectorXd y(keep.size());
  for (size_t r = 0; r < keep.size(); ++r) {
    x.row(r) = data.inputs.row(keep[r]);
    y[r] = data.outputs[keep[r]];
  }
  return Dataset(std::move(x), std::move(y));
}

// Per-agent sample of floor(N_i/M) local points; stream seeded by
// (seed, agent) so the draw is independent of agent evaluation order.
inline std::vector<std::vector<int>> sample_comm_indices(const std::vector<Dataset>& locals,
                                                         std::uint64_t seed) {
  const int m = static_cast<int>(locals.size());
  std::vector<std::vector<int>> indices(m);
  for (int i = 0; i < m; ++i) {
    const int k = locals[i].n() / m;
    Rng rng(hash_seed(seed, static_cast<std::uint64_t>(i)));
    indices[i] = rng.sample_without_replacement(locals[i].n(), k);
  }
  return indices;
}

inline AugmentedData assemble_augmented(const std::vector<Dataset>& locals,
                                        const std::vector<std::vector<int>>& indices) {
  const int m = static_cast<int>(locals.size());
  const int dim = locals.at(0).dim();
  int total = 0;
  for (int i = 0; i < m; ++i) total += static_cast<int>(indices[i].size());

  AugmentedData aug;
  aug.sampled_indices = indices;
  aug.comm_inputs.resize(total, dim);
  aug.comm_outputs.resize(total);
  int row = 0;
  for (int i = 0; i < m; ++i) {
    for (int idx : indices[i]) {
      aug.comm_inputs.row(row) = locals[i].inputs.row(idx);
      aug.comm_outputs[row] = locals[i].outputs[idx];
      ++row;
    }
  }
  aug.local_plus.reserve(m);
  for (int i = 0; i < m; ++i) {
    MatrixXd x(locals[i].n() + total, dim);
    VectorXd y(locals[i].n() + total);
    x.topRows(locals[i].n()) = locals[i].inputs;
    y.head(locals[i].n()) = locals[i].outputs;
    x.bottomRows(total) = aug.comm_inputs;
    y.tail(total) = aug.comm_outputs;
    aug.local_plus.emplace_back(std::move(x), std::move(y));
  }
  return aug;
}

inline AugmentedData build_augmented(const std::vector<Dataset>& locals, std::uint64_t seed) {
  return assemble_augmented(locals, sample_comm_indices(locals, seed));
}

// Generalized inexact training: build D_c (central scatter), then apx rounds
// over the deduplicated augmented datasets until the tol_admm stop.
inline std::pair<TrainResult, AugmentedData> gapx_gp_train(const std::vector<Dataset>& locals,
                                                           const AdmmConfig& cfg,
                                                           const VectorXd& theta0_log) {
  AugmentedData aug = build_augmented(locals, cfg.rng_seed);
  std::vector<LocalObjective> objectives;
  objectives.reserve(aug.local_plus.size());
  for (const Dataset& d : aug.local_plus) objectives.push_back(nll_objective(dedup_inputs(d)));
  TrainResult result = apx_gp_train(objectives, cfg, theta0_log);
  return {std::move(result), std::move(aug)};
}

// ---------------------------------------------------------------------------
// Decentralized consensus ADMM (edge formulation)

struct DecAdmmState {
  std::vector<VectorXd> theta;  // per-agent iterates (log-domain)
  std::vector<VectorXd> p;      // per-agent dual sums, start at zero

  static DecAdmmState init(int agents, const VectorXd& theta0_log) {
    DecAdmmState s;
    s.theta.assign(agents, theta0_log);
    s.p.assign(agents, VectorXd::Zero(theta0_log.size()));
    return s;
  }
};

// Shared first half of every decentralized round: exchange iterates (charged
// (D+2) * card(N_i) per agent) and ascend the dual sums
//   p_i += rho * sum_{j in N_i} (theta_i - theta_j).
// Antisymmetry keeps sum_i p_i = 0 on undirected graphs.
inline std::vector<std::map<int, VectorXd>> dec_dual_update(DecAdmmState& state,
                                                            const Graph& graph,
                                                            const AdmmConfig& cfg,
                                                            CommLedger& ledger) {
  const auto received = neighbor_exchange(graph, state.theta, ledger);
  for (int i = 0; i < graph.size(); ++i)
    for (const auto& [j, theta_j] : received[i])
      state.p[i] += cfg.rho * (state.theta[i] - theta_j);
  return received;
}

// Exact decentralized round: nested GD on
//   L_i(theta) + theta^T p_i + rho * sum_j ||theta - (theta_i + theta_j)/2||^2.
inline void dec_cgp_round(DecAdmmState& state, const Graph& graph,
                          const std::vector<LocalObjective>& objectives, const AdmmConfig& cfg,
                          CommLedger& ledger) {
  const auto received = dec_dual_update(state, graph, cfg, ledger);
  const std::vector<VectorXd> snapshot = state.theta;
  for (int i = 0; i < graph.size(); ++i) {
    std::vector<VectorXd> mids;
    mids.reserve(received[i].size());
    for (const auto& [j, theta_j] : received[i]) mids.push_back(0.5 * (snapshot[i] + theta_j));
    const VectorXd p = state.p[i];
    const LocalObjective& f = objectives[i];
    auto eval = [&](const VectorXd& x) {
      NllEval e = f.value_and_grad(x);
      e.value += x.dot(p);
      e.grad_log += p;
      for (const VectorXd& mid : mids) {
        e.value += cfg.rho * (x - mid).squaredNorm();
        e.grad_log += 2.0 * cfg.rho * (x - mid);
      }
      return e;
    };
    state.theta[i] = nested_gd(eval, snapshot[i], cfg);
  }
}

// Inexact decentralized round (closed form): with c_i = card(N_i),
//   theta_i <- [rho * sum_j theta_j - grad L_i(theta_i)
//               + (kappa + c_i rho) theta_i - p_i] / (kappa + 2 c_i rho).
inline void dec_apx_round(DecAdmmState& state, const Graph& graph,
                          const std::vector<LocalObjective>& objectives, const AdmmConfig& cfg,
                          CommLedger& ledger) {
  const auto received = dec_dual_update(state, graph, cfg, ledger);
  const std::vector<VectorXd> snapshot = state.theta;
  for (int i = 0; i < graph.size(); ++i) {
    const double c = static_cast<double>(graph.degree(i));
    VectorXd nbr_sum = VectorXd::Zero(snapshot[i].size());
    for (const auto& [j, theta_j] : received[i]) nbr_sum += theta_j;
    const VectorXd g = objectives[i].grad(snapshot[i]);
    state.theta[i] = (cfg.rho * nbr_sum - g + (cfg.kappa + c * cfg.rho) * snapshot[i] -
                      state.p[i]) /
                     (cfg.kappa + 2.0 * c * cfg.rho);
  }
}

// Convergence condition on the linearization penalty:
//   kappa_i > L_i^2 / m_i^2 - rho * lambda_min(D + A).
inline double kappa_lower_bound(const Graph& graph, double rho, double lipschitz,
                                double strong_convexity) {
  if (!(strong_convexity > 0.0)) throw ContractError("kappa_lower_bound: m must be positive");
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(graph.degree_plus_adjacency());
  const double lambda_min = eig.eigenvalues().minCoeff();
  return lipschitz * lipschitz / (strong_convexity * strong_convexity) - rho * lambda_min;
}

namespace detail {
template <typename RoundFn>
TrainResult dec_admm_train(RoundFn round, const std::vector<LocalObjective>& objectives,
                           const Graph& graph, const AdmmConfig& cfg, const VectorXd& theta0_log,
                           CommLedger& ledger) {
  cfg.validate();
  if (static_cast<int>(objectives.size()) != graph.size())
    throw ContractError("decentralized trainer: one objective per agent required");
  DecAdmmState state = DecAdmmState::init(graph.size(), theta0_log);
  TrainResult result;
  for (long long s = 0; s < cfg.s_end; ++s) {
    round(state, graph, objectives, cfg, ledger);
    ++result.rounds;
    result.spread.push_back(consensus_spread(state.theta));
  }
  result.theta_log = mean_log(state.theta);
  result.theta_log_agents = state.theta;
  return result;
}
}  // namespace detail

inline TrainResult dec_cgp_train(const std::vector<LocalObjective>& objectives, const Graph& graph,
                                 const AdmmConfig& cfg, const VectorXd& theta0_log,
                                 CommLedger& ledger) {
  return detail::dec_admm_train(
      [](DecAdmmState& s, const Graph& g, const std::vector<LocalObjective>& o,
         const AdmmConfig& c, CommLedger& l) { dec_cgp_round(s, g, o, c, l); },
      objectives, graph, cfg, theta0_log, ledger);
}

inline TrainResult dec_apx_train(const std::vector<LocalObjective>& objectives, const Graph& graph,
                                 const AdmmConfig& cfg, const VectorXd& theta0_log,
                                 CommLedger& ledger) {
  return detail::dec_admm_train(
      [](DecAdmmState& s, const Graph& g, const std::vector<LocalObjective>& o,
         const AdmmConfig& c, CommLedger& l) { dec_apx_round(s, g, o, c, l); },
      objectives, graph, cfg, theta0_log, ledger);
}

// Generalized decentralized training: sample D_{c,i} locally, flood the
// samples (diam(G) rounds, charged), train with dec_apx rounds on the
// deduplicated augmented datasets for exactly s_end rounds.
inline std::pair<TrainResult, AugmentedData> dec_gapx_train(const std::vector<Dataset>& locals,
                                                            const Graph& graph,
                                                            const AdmmConfig& cfg,
                                                            const VectorXd& theta0_log,
                                                            CommLedger& ledger) {
  cfg.validate();
  const int m = graph.size();
  if (static_cast<int>(locals.size()) != m)
    throw ContractError("dec_gapx_train: one dataset per agent required");
  const int dim = locals.at(0).dim();

  const auto indices = sample_comm_indices(locals, cfg.rng_seed);
  // payload: sampled rows flattened as (x_1..x_D, y) per point
  std::vector<VectorXd> payload(m);
  for (int i = 0; i < m; ++i) {
    payload[i].resize(static_cast<Eigen::Index>(indices[i].size()) * (dim + 1));
    Eigen::Index at = 0;
    for (int idx : indices[i]) {
      payload[i].segment(at, dim) = locals[i].inputs.row(idx).transpose();
      payload[i][at + dim] = locals[i].outputs[idx];
      at += dim + 1;
    }
  }
  flood(graph, payload, ledger);
  ledger.note_phase("comm-dataset-flood", graph.diameter(), 1);

  // flooding delivers payloads in agent-index order, so every agent assembles
  // the same D_c this helper produces
  AugmentedData aug = assemble_augmented(locals, indices);
  std::vector<LocalObjective> objectives;
  objectives.reserve(m);
  for (const Dataset& d : aug.local_plus) objectives.push_back(nll_objective(dedup_inputs(d)));
  TrainResult result = dec_apx_train(objectives, graph, cfg, theta0_log, ledger);
  return {std::move(result), std::move(aug)};
}

}  // namespace decgp

#endif  // DECGP_TRAINING_HPP
