#ifndef DECGP_AGGREGATION_HPP
#define DECGP_AGGREGATION_HPP

#include "decgp/consensus.hpp"
#include "decgp/gp.hpp"
#include "decgp/netsim.hpp"

#include <algorithm>
#include <cmath>

namespace decgp {

// All aggregation rules consume per-expert predictive summaries at one query
// point. beta is filled by the aggregation rule (or by the agent, in the
// decentralized versions) and rides along for bookkeeping.
struct LocalSummary {
  double mu = 0.0;
  double var = 0.0;
  double beta = 0.0;
};

enum class PoeVariant { poe, gpoe };
enum class BcmVariant { bcm, rbcm };
enum class AggVariant { poe, gpoe, bcm, rbcm, grbcm };

inline void validate_summaries(const std::vector<LocalSummary>& s) {
  if (s.empty()) throw ContractError("aggregate: need at least one summary");
  for (const LocalSummary& e : s)
    if (!(e.var > 0.0)) throw ContractError("aggregate: local variance must be positive");
}

inline std::vector<LocalSummary> summarize(const std::vector<ExpertModel>& experts,
                                           const VectorXd& xstar) {
  std::vector<LocalSummary> s(experts.size());
  for (size_t i = 0; i < experts.size(); ++i) {
    const Prediction p = local_predict(experts[i], xstar);
    s[i].mu = p.mean;
    s[i].var = p.variance;
  }
  return s;
}

// Product-of-experts family: precision = sum_i beta_i / var_i,
// mean = variance * sum_i beta_i mu_i / var_i, with beta_i = 1 (poe) or
// 1/M (gpoe). The means coincide because beta is uniform and cancels.
inline Prediction poe_aggregate(std::vector<LocalSummary> s, PoeVariant variant) {
  validate_summaries(s);
  const double beta = (variant == PoeVariant::poe) ? 1.0 : 1.0 / static_cast<double>(s.size());
  double precision = 0.0, weighted = 0.0;
  for (LocalSummary& e : s) {
    e.beta = beta;
    precision += e.beta / e.var;
    weighted += e.beta * e.mu / e.var;
  }
  Prediction p;
  p.variance = 1.0 / precision;
  p.mean = p.variance * weighted;
  return p;
}

// Differential-entropy weight used by the robust committee rules.
inline double entropy_beta(double prior_var, double var) {
  return 0.5 * (std::log(prior_var) - std::log(var));
}

// Bayesian-committee family: the prior-correction term (1 - sum beta) / prior_var
// removes the prior counted once per expert. beta_i = 1 (bcm) or the entropy
// difference against the prior (rbcm).
inline Prediction bcm_aggregate(std::vector<LocalSummary> s, double prior_var,
                                BcmVariant variant) {
  validate_summaries(s);
  if (!(prior_var > 0.0)) throw ContractError("bcm_aggregate: prior variance must be positive");
  double precision = 0.0, weighted = 0.0, beta_sum = 0.0;
  for (LocalSummary& e : s) {
    e.beta = (variant == BcmVariant::bcm) ? 1.0 : entropy_beta(prior_var, e.var);
    precision += e.beta / e.var;
    weighted += e.beta * e.mu / e.var;
    beta_sum += e.beta;
  }
  precision += (1.0 - beta_sum) / prior_var;
  Prediction p;
  p.variance = 1.0 / precision;
  p.mean = p.variance * weighted;
  return p;
}

// Weights for the generalized robust committee: the first augmented expert is
// trusted fully; the rest carry entropy weights against the communication
// expert. strict_beta2 additionally pins the second expert's weight to one.
inline std::vector<double> grbcm_betas(const std::vector<LocalSummary>& augmented,
                                       const LocalSummary& comm, bool strict_beta2) {
  std::vector<double> beta(augmented.size());
  for (size_t i = 0; i < augmented.size(); ++i) {
    if (i == 0 || (strict_beta2 && i == 1))
      beta[i] = 1.0;
    else
      beta[i] = entropy_beta(comm.var, augmented[i].var);
  }
  return beta;
}

// Generalized robust committee: augmented experts corrected against the
// communication expert instead of the prior,
//   precision = sum_i beta_i / var_{+i} + (1 - sum_i beta_i) / var_c,
//   mean = variance * [sum_i beta_i mu_{+i} / var_{+i} + (1 - sum beta) mu_c / var_c].
inline Prediction grbcm_aggregate(std::vector<LocalSummary> augmented, const LocalSummary& comm,
                                  bool strict_beta2 = false) {
  validate_summaries(augmented);
  if (!(comm.var > 0.0))
    throw ContractError("grbcm_aggregate: communication-expert variance must be positive");
  const std::vector<double> beta = grbcm_betas(augmented, comm, strict_beta2);
  double precision = 0.0, weighted = 0.0, beta_sum = 0.0;
  for (size_t i = 0; i < augmented.size(); ++i) {
    augmented[i].beta = beta[i];
    precision += beta[i] / augmented[i].var;
    weighted += beta[i] * augmented[i].mu / augmented[i].var;
    beta_sum += beta[i];
  }
  precision += (1.0 - beta_sum) / comm.var;
  weighted += (1.0 - beta_sum) * comm.mu / comm.var;
  Prediction p;
  p.variance = 1.0 / precision;
  p.mean = p.variance * weighted;
  return p;
}

// Variant dispatch over plain-expert summaries (grbcm needs the communication
// summary as well). Used by the experiment harness and the oracle tests.
inline Prediction aggregate_family(AggVariant variant, const std::vector<LocalSummary>& s,
                                   double prior_var, const LocalSummary* comm = nullptr,
                                   bool strict_beta2 = false) {
  switch (variant) {
    case AggVariant::poe:
      return poe_aggregate(s, PoeVariant::poe);
    case AggVariant::gpoe:
      return poe_aggregate(s, PoeVariant::gpoe);
    case AggVariant::bcm:
      return bcm_aggregate(s, prior_var, BcmVariant::bcm);
    case AggVariant::rbcm:
      return bcm_aggregate(s, prior_var, BcmVariant::rbcm);
    case AggVariant::grbcm:
      if (comm == nullptr) throw ContractError("aggregate_family: grbcm needs a comm summary");
      return grbcm_aggregate(s, *comm, strict_beta2);
  }
  throw ContractError("aggregate_family: unknown variant");
}

// ---------------------------------------------------------------------------
// Nested pointwise aggregation (NPAE)

// Agent i's share of the aggregated system:
//   kA    = k_{i,*}^T C_i^{-1} k_{i,*}
//   row_j = k_{i,*}^T C_i^{-1} C_ij C_j^{-1} k_{j,*}
// The diagonal block is always the noisy local covariance, so row_i == kA.
// cross_block_noise adds sigma_e^2 along the main diagonal of off-diagonal
// blocks as well (formula-verbatim mode, the default).
struct NpaeLocal {
  double kA = 0.0;
  VectorXd row;
};

inline NpaeLocal npae_local(const std::vector<ExpertModel>& experts, int i, const VectorXd& xstar,
                            bool cross_block_noise = true) {
  const int m = static_cast<int>(experts.size());
  if (i < 0 || i >= m) throw ContractError("npae_local: agent index out of range");
  const HyperParams& hyper = experts[i].hyper();
  const double noise_var = hyper.noise_std * hyper.noise_std;

  std::vector<VectorXd> kstar(m), v(m);
  for (int j = 0; j < m; ++j) {
    kstar[j] = covariance_vector(experts[j].dataset().inputs, xstar, experts[j].hyper());
    v[j] = experts[j].solve(kstar[j]);
  }

  NpaeLocal out;
  out.kA = kstar[i].dot(v[i]);
  out.row.resize(m);
  for (int j = 0; j < m; ++j) {
    if (j == i) {
      out.row[j] = out.kA;
      continue;
    }
    MatrixXd cross =
        covariance_matrix(experts[i].dataset().inputs, experts[j].dataset().inputs, hyper, false);
    if (cross_block_noise) {
      const Eigen::Index overlap = std::min(cross.rows(), cross.cols());
      cross.diagonal().head(overlap).array() += noise_var;
    }
    out.row[j] = v[i].dot(cross * v[j]);
  }
  return out;
}

inline Prediction npae_aggregate(const VectorXd& mu, const VectorXd& kA, const MatrixXd& C_A,
                                 double kstarstar) {
  if (mu.size() != kA.size() || C_A.rows() != mu.size() || C_A.cols() != mu.size())
    throw ContractError("npae_aggregate: dimension mismatch");
  MatrixXd C = C_A;
  const Eigen::LLT<MatrixXd> llt = cholesky_with_jitter(C);
  const VectorXd w = llt.solve(kA);
  Prediction p;
  p.mean = w.dot(mu);
  p.variance = std::max(0.0, kstarstar - w.dot(kA));
  return p;
}

// Full aggregated system at one query point; shared by the centralized
// predictor and the decentralized solvers (which hand out row i to agent i).
struct NpaeSystem {
  VectorXd mu;   // local predictive means
  VectorXd kA;   // cross-covariances to x*
  MatrixXd C_A;  // aggregated covariance, row i owned by agent i
  double kss = 0.0;
};

inline NpaeSystem npae_system(const std::vector<ExpertModel>& experts, const VectorXd& xstar,
                              bool cross_block_noise = true) {
  const int m = static_cast<int>(experts.size());
  if (m < 1) throw ContractError("npae_system: need at least one expert");
  NpaeSystem sys;
  sys.mu.resize(m);
  sys.kA.resize(m);
  sys.C_A.resize(m, m);
  for (int i = 0; i < m; ++i) {
    sys.mu[i] = local_predict(experts[i], xstar).mean;
    const NpaeLocal loc = npae_local(experts, i, xstar, cross_block_noise);
    sys.kA[i] = loc.kA;
    sys.C_A.row(i) = loc.row.transpose();
  }
  sys.kss = kernel_eval(xstar, xstar, experts[0].hyper());
  return sys;
}

inline Prediction npae_predict(const std::vector<ExpertModel>& experts, const VectorXd& xstar,
                               bool cross_block_noise = true) {
  const NpaeSystem sys = npae_system(experts, xstar, cross_block_noise);
  return npae_aggregate(sys.mu, sys.kA, sys.C_A, sys.kss);
}

// ---------------------------------------------------------------------------
// Decentralized committee family (consensus-averaged)

// Two consensus streams recover sum beta_i mu_i / var_i and sum beta_i / var_i
// (scaling the converged averages by M); rbcm/grbcm add a third stream for
// sum beta_i, which those rules need and the others know a priori. The
// communication expert for grbcm is built from the globally shared dataset,
// so every agent evaluates it locally.
inline std::vector<Prediction> dec_poe_family(const Graph& graph,
                                              const std::vector<ExpertModel>& experts,
                                              const VectorXd& xstar, AggVariant variant,
                                              CommLedger& ledger,
                                              const ExpertModel* comm_expert = nullptr,
                                              double eta_stop = 1e-9,
                                              bool strict_grbcm_beta2 = false) {
  const int m = graph.size();
  if (static_cast<int>(experts.size()) != m)
    throw ContractError("dec_poe_family: one expert per agent required");
  if (variant == AggVariant::grbcm && comm_expert == nullptr)
    throw ContractError("dec_poe_family: grbcm needs the communication expert");

  std::vector<LocalSummary> s = summarize(experts, xstar);
  validate_summaries(s);
  const double prior_var = kernel_eval(xstar, xstar, experts[0].hyper());
  LocalSummary comm;
  if (variant == AggVariant::grbcm) {
    const Prediction pc = local_predict(*comm_expert, xstar);
    comm.mu = pc.mean;
    comm.var = pc.variance;
    if (!(comm.var > 0.0))
      throw ContractError("dec_poe_family: communication-expert variance must be positive");
  }

  for (int i = 0; i < m; ++i) {
    switch (variant) {
      case AggVariant::poe:
      case AggVariant::bcm:
        s[i].beta = 1.0;
        break;
      case AggVariant::gpoe:
        s[i].beta = 1.0 / static_cast<double>(m);
        break;
      case AggVariant::rbcm:
        s[i].beta = entropy_beta(prior_var, s[i].var);
        break;
      case AggVariant::grbcm:
        s[i].beta = (i == 0 || (strict_grbcm_beta2 && i == 1))
                        ? 1.0
                        : entropy_beta(comm.var, s[i].var);
        break;
    }
  }

  std::vector<std::vector<double>> init;
  std::vector<double> w_mu(m), w_prec(m), w_beta(m);
  for (int i = 0; i < m; ++i) {
    w_mu[i] = s[i].beta * s[i].mu / s[i].var;
    w_prec[i] = s[i].beta / s[i].var;
    w_beta[i] = s[i].beta;
  }
  init.push_back(w_mu);
  init.push_back(w_prec);
  const bool three_streams = (variant == AggVariant::rbcm || variant == AggVariant::grbcm);
  if (three_streams) init.push_back(w_beta);

  const DacRunResult dac = run_dac_multi(graph, init, eta_stop, ledger);

  std::vector<Prediction> out(m);
  for (int i = 0; i < m; ++i) {
    const double sum_mu = m * dac.values[0][i];
    const double sum_prec = m * dac.values[1][i];
    double precision = sum_prec, weighted = sum_mu;
    if (variant == AggVariant::bcm) {
      precision += (1.0 - m) / prior_var;
    } else if (variant == AggVariant::rbcm) {
      const double sum_beta = m * dac.values[2][i];
      precision += (1.0 - sum_beta) / prior_var;
    } else if (variant == AggVariant::grbcm) {
      const double sum_beta = m * dac.values[2][i];
      precision += (1.0 - sum_beta) / comm.var;
      weighted += (1.0 - sum_beta) * comm.mu / comm.var;
    }
    out[i].variance = 1.0 / precision;
    out[i].mean = out[i].variance * weighted;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Covariance-based nearest-neighbor selection (CBNN)

// Each agent scores the query by its own cross-covariance quadratic form
// kmu_i = k_{i,*}^T C_i^{-1} k_{i,*} and drops out below the threshold.
// The selection never empties: the top-scoring agent (lowest id on ties)
// stays.
struct CbnnSelection {
  std::vector<double> kmu;
  std::vector<int> selected;  // ascending agent ids
  double eta_nn = 0.0;

  double ratio() const {
    return static_cast<double>(selected.size()) / static_cast<double>(kmu.size());
  }
};

inline double default_eta_nn(const HyperParams& hyper) {
  return 0.05 * hyper.signal_std * hyper.signal_std;
}

inline CbnnSelection cbnn_select(const std::vector<ExpertModel>& experts, const VectorXd& xstar,
                                 double eta_nn) {
  if (!(eta_nn >= 0.0)) throw ContractError("cbnn_select: eta_nn must be nonnegative");
  CbnnSelection sel;
  sel.eta_nn = eta_nn;
  sel.kmu.resize(experts.size());
  for (size_t i = 0; i < experts.size(); ++i) {
    const VectorXd kstar =
        covariance_vector(experts[i].dataset().inputs, xstar, experts[i].hyper());
    sel.kmu[i] = kstar.dot(experts[i].solve(kstar));
    if (sel.kmu[i] >= eta_nn) sel.selected.push_back(static_cast<int>(i));
  }
  if (sel.selected.empty()) {
    const auto top = std::max_element(sel.kmu.begin(), sel.kmu.end());
    sel.selected.push_back(static_cast<int>(top - sel.kmu.begin()));
  }
  return sel;
}

namespace detail {

// Fold a subgraph run back into the caller's ledger: sub-agent k is agent
// members[k] of the full graph.
inline void merge_sub_ledger(CommLedger& ledger, const CommLedger& sub,
                             const std::vector<int>& members) {
  for (int k = 0; k < sub.agents(); ++k) ledger.charge(members[k], sub.scalars(k));
  ledger.add_rounds(sub.rounds());
  for (const CommLedger::Phase& p : sub.phases()) ledger.note_phase(p.name, p.rounds, p.streams);
}

// Communication graph among the selected agents: the induced subgraph when it
// stays connected, otherwise a complete overlay (multi-hop routes through
// dropped agents stand in for direct edges).
inline Graph nn_subgraph(const Graph& graph, const std::vector<int>& members) {
  MatrixXd adj = Graph::induced_adjacency(graph, members);
  if (!Graph::is_connected(adj)) {
    const Eigen::Index n = adj.rows();
    adj = MatrixXd::Ones(n, n) - MatrixXd::Identity(n, n);
  }
  return Graph::custom(adj);
}

// Selected agents flood their (mean, variance) pair over the full graph;
// excluded agents adopt the lowest-id result.
inline void broadcast_to_excluded(const Graph& graph, const std::vector<int>& members,
                                  const std::vector<Prediction>& member_preds,
                                  std::vector<Prediction>& out, CommLedger& ledger) {
  if (static_cast<int>(members.size()) == graph.size()) return;
  std::vector<VectorXd> payloads(members.size());
  for (size_t k = 0; k < members.size(); ++k) {
    payloads[k].resize(2);
    payloads[k] << member_preds[k].mean, member_preds[k].variance;
  }
  const auto known = flood_from(graph, members, payloads, ledger);
  ledger.note_phase("nn-broadcast", graph.diameter(), 1);
  std::vector<char> is_member(graph.size(), 0);
  for (int id : members) is_member[id] = 1;
  for (int i = 0; i < graph.size(); ++i) {
    if (is_member[i]) continue;
    const VectorXd& v = known[i].begin()->second;  // lowest selected id
    out[i].mean = v[0];
    out[i].variance = v[1];
  }
}

}  // namespace detail

struct DecNnResult {
  std::vector<Prediction> predictions;  // one per agent, all equal up to eta_stop
  std::vector<int> selected;
};

// Nearest-neighbor variant of the consensus committee family: restrict to the
// CBNN selection, aggregate over the subgraph with M_NN agents, then push the
// result back out to the dropped agents.
inline DecNnResult dec_nn_family(const Graph& graph, const std::vector<ExpertModel>& experts,
                                 const VectorXd& xstar, AggVariant variant, double eta_nn,
                                 CommLedger& ledger, const ExpertModel* comm_expert = nullptr,
                                 double eta_stop = 1e-9, bool strict_grbcm_beta2 = false) {
  const int m = graph.size();
  if (static_cast<int>(experts.size()) != m)
    throw ContractError("dec_nn_family: one expert per agent required");

  const CbnnSelection sel = cbnn_select(experts, xstar, eta_nn);
  DecNnResult result;
  result.selected = sel.selected;
  if (static_cast<int>(sel.selected.size()) == m) {
    result.predictions = dec_poe_family(graph, experts, xstar, variant, ledger, comm_expert,
                                        eta_stop, strict_grbcm_beta2);
    return result;
  }

  const Graph sub = detail::nn_subgraph(graph, sel.selected);
  std::vector<ExpertModel> sub_experts;
  sub_experts.reserve(sel.selected.size());
  for (int id : sel.selected) sub_experts.push_back(experts[id]);

  CommLedger sub_ledger(sub.size());
  const std::vector<Prediction> sub_preds = dec_poe_family(
      sub, sub_experts, xstar, variant, sub_ledger, comm_expert, eta_stop, strict_grbcm_beta2);
  detail::merge_sub_ledger(ledger, sub_ledger, sel.selected);

  result.predictions.assign(m, Prediction{});
  for (size_t k = 0; k < sel.selected.size(); ++k)
    result.predictions[sel.selected[k]] = sub_preds[k];
  detail::broadcast_to_excluded(graph, sel.selected, sub_preds, result.predictions, ledger);
  return result;
}

// ---------------------------------------------------------------------------
// Decentralized NPAE

enum class NpaeMode { fixed_omega, optimal_omega, nn_dale };

struct NpaeOptions {
  double eta_stop = 1e-9;
  double eta_pm = 1e-8;
  double eta_nn = -1.0;  // negative: use default_eta_nn of the shared hyper
  bool cross_block_noise = true;
};

struct DecNpaeResult {
  std::vector<Prediction> predictions;  // one per agent
  std::vector<int> selected;            // participating agents
  long long jor_iterations = 0;
  long long dale_iterations = 0;
  double omega = 0.0;
};

// fixed_omega / optimal_omega: flood (X_i, C_i^{-1}), solve C_A q = mu and
// C_A q = k_A with two lockstep JOR streams (omega = 1.999/M or the
// power-method optimum), form w_i = [k_A]_i q_i, average both streams by DAC,
// then mean = M wbar_mu and variance = k** - M wbar_sigma.
// nn_dale: CBNN restriction, projector-consensus solves of the restricted
// system (each agent ends holding the full solution vector), local inner
// products, and a broadcast to the dropped agents.
inline DecNpaeResult dec_npae(const Graph& graph, const std::vector<ExpertModel>& experts,
                              const VectorXd& xstar, NpaeMode mode, CommLedger& ledger,
                              const NpaeOptions& opts = {}) {
  const int m = graph.size();
  if (static_cast<int>(experts.size()) != m)
    throw ContractError("dec_npae: one expert per agent required");

  auto data_payload = [&](int id) {
    const Dataset& d = experts[id].dataset();
    const MatrixXd identity = MatrixXd::Identity(d.n(), d.n());
    const MatrixXd inv = experts[id].solve(identity);
    VectorXd payload(d.n() * d.dim() + d.n() * d.n());
    Eigen::Index at = 0;
    for (int r = 0; r < d.n(); ++r, at += d.dim()) payload.segment(at, d.dim()) = d.inputs.row(r);
    for (int c = 0; c < d.n(); ++c, at += d.n()) payload.segment(at, d.n()) = inv.col(c);
    return payload;
  };

  DecNpaeResult result;
  result.predictions.assign(m, Prediction{});

  if (mode == NpaeMode::nn_dale) {
    const double eta_nn =
        opts.eta_nn >= 0.0 ? opts.eta_nn : default_eta_nn(experts[0].hyper());
    const CbnnSelection sel = cbnn_select(experts, xstar, eta_nn);
    result.selected = sel.selected;
    const int n = static_cast<int>(sel.selected.size());

    // restricted data exchange among the survivors (relayed by the others)
    std::vector<VectorXd> payloads(n);
    for (int k = 0; k < n; ++k) payloads[k] = data_payload(sel.selected[k]);
    flood_from(graph, sel.selected, payloads, ledger);
    ledger.note_phase("npae-data-flood", graph.diameter(), 1);

    std::vector<ExpertModel> sub_experts;
    sub_experts.reserve(n);
    for (int id : sel.selected) sub_experts.push_back(experts[id]);
    const NpaeSystem sys = npae_system(sub_experts, xstar, opts.cross_block_noise);

    const Graph sub = detail::nn_subgraph(graph, sel.selected);
    MatrixXd B(n, 2);
    B.col(0) = sys.mu;
    B.col(1) = sys.kA;
    CommLedger sub_ledger(n);
    const DaleResult dale = dale_solve(sub, sys.C_A, B, opts.eta_stop, sub_ledger);
    detail::merge_sub_ledger(ledger, sub_ledger, sel.selected);
    result.dale_iterations = dale.iterations;

    std::vector<Prediction> member_preds(n);
    for (int k = 0; k < n; ++k) {
      member_preds[k].mean = sys.kA.dot(dale.solutions[0].col(k));
      member_preds[k].variance = std::max(0.0, sys.kss - sys.kA.dot(dale.solutions[1].col(k)));
      result.predictions[sel.selected[k]] = member_preds[k];
    }
    detail::broadcast_to_excluded(graph, sel.selected, member_preds, result.predictions, ledger);
    return result;
  }

  result.selected.resize(m);
  std::iota(result.selected.begin(), result.selected.end(), 0);

  std::vector<VectorXd> payloads(m);
  for (int i = 0; i < m; ++i) payloads[i] = data_payload(i);
  flood(graph, payloads, ledger);
  ledger.note_phase("npae-data-flood", graph.diameter(), 1);

  const NpaeSystem sys = npae_system(experts, xstar, opts.cross_block_noise);

  double omega = 1.999 / static_cast<double>(m);
  if (mode == NpaeMode::optimal_omega)
    omega = optimal_omega(graph, sys.C_A, opts.eta_pm, ledger).omega;
  result.omega = omega;

  MatrixXd B(m, 2);
  B.col(0) = sys.mu;
  B.col(1) = sys.kA;
  const JorResult jor = jor_solve(graph, sys.C_A, B, omega, opts.eta_stop, ledger);
  result.jor_iterations = jor.iterations;

  std::vector<double> w_mu(m), w_sig(m);
  for (int i = 0; i < m; ++i) {
    w_mu[i] = sys.kA[i] * jor.q(i, 0);
    w_sig[i] = sys.kA[i] * jor.q(i, 1);
  }
  const DacRunResult dac = run_dac_multi(graph, {w_mu, w_sig}, opts.eta_stop, ledger);
  for (int i = 0; i < m; ++i) {
    result.predictions[i].mean = m * dac.values[0][i];
    result.predictions[i].variance = std::max(0.0, sys.kss - m * dac.values[1][i]);
  }
  return result;
}

}  // namespace decgp

#endif  // DECGP_AGGREGATION_HPP
