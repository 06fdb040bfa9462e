#ifndef DECGP_NETSIM_HPP
#define DECGP_NETSIM_HPP

#include "decgp/graph.hpp"
#include "decgp/types.hpp"

#include <map>
#include <numeric>
#include <utility>

namespace decgp {

// Per-agent cumulative transmitted-scalar counts plus named phase records
// (rounds and parallel stream counts per algorithm). Counts only ever grow.
class CommLedger {
 public:
  struct Phase {
    std::string name;
    long long rounds = 0;
    int streams = 0;
  };

  explicit CommLedger(int m) : scalars_(m, 0) {}

  void charge(int agent, long long scalars) {
    if (scalars < 0) throw ContractError("CommLedger: negative charge");
    scalars_.at(agent) += scalars;
  }

  void add_rounds(long long n = 1) { rounds_ += n; }

  long long scalars(int agent) const { return scalars_.at(agent); }
  long long total_scalars() const {
    long long t = 0;
    for (long long s : scalars_) t += s;
    return t;
  }
  long long rounds() const { return rounds_; }
  int agents() const { return static_cast<int>(scalars_.size()); }

  void note_phase(const std::string& name, long long rounds, int streams) {
    phases_.push_back({name, rounds, streams});
  }
  const std::vector<Phase>& phases() const { return phases_; }

 private:
  std::vector<long long> scalars_;
  long long rounds_ = 0;
  std::vector<Phase> phases_;
};

// Round-synchronous bus: messages posted in round s become readable only
// after deliver() advances to round s+1. Only neighbor pairs may exchange.
// Within a round agents read the delivered snapshot and write their own
// outbox, so they can be stepped concurrently.
class MessageBus {
 public:
  using Message = std::pair<int, VectorXd>;  // (sender, payload)

  MessageBus(const Graph& graph, CommLedger* ledger = nullptr)
      : graph_(graph), ledger_(ledger), outbox_(graph.size()), inbox_(graph.size()) {}

  void post(int from, int to, VectorXd payload) {
    if (from == to || !graph_.has_edge(from, to))
      throw ContractError("MessageBus: post requires a graph edge");
    sent_this_round_ += payload.size();
    if (ledger_ != nullptr) ledger_->charge(from, payload.size());
    outbox_[to].emplace_back(from, std::move(payload));
  }

  // Advances the round: everything posted becomes visible, outboxes clear.
  void deliver() {
    received_last_round_ = 0;
    for (int i = 0; i < graph_.size(); ++i) {
      inbox_[i] = std::move(outbox_[i]);
      outbox_[i].clear();
      for (const Message& m : inbox_[i]) received_last_round_ += m.second.size();
    }
    sent_last_round_ = sent_this_round_;
    sent_this_round_ = 0;
    ++round_;
    if (ledger_ != nullptr) ledger_->add_rounds();
  }

  const std::vector<Message>& inbox(int agent) const { return inbox_.at(agent); }
  long long round() const { return round_; }
  long long sent_last_round() const { return sent_last_round_; }
  long long received_last_round() const { return received_last_round_; }

 private:
  const Graph& graph_;
  CommLedger* ledger_;
  std::vector<std::vector<Message>> outbox_;
  std::vector<std::vector<Message>> inbox_;
  long long round_ = 0;
  long long sent_this_round_ = 0;
  long long sent_last_round_ = 0;
  long long received_last_round_ = 0;
};

// One synchronous exchange: every agent sends its state to each neighbor and
// receives each neighbor's state. Charges card(N_i) * len(state_i) per agent.
inline std::vector<std::map<int, VectorXd>> neighbor_exchange(
    const Graph& graph, const std::vector<VectorXd>& state_per_agent, CommLedger& ledger) {
  if (static_cast<int>(state_per_agent.size()) != graph.size())
    throw ContractError("neighbor_exchange: one state per agent required");
  MessageBus bus(graph, &ledger);
  for (int i = 0; i < graph.size(); ++i)
    for (int j : graph.neighbors(i)) bus.post(i, j, state_per_agent[i]);
  bus.deliver();
  std::vector<std::map<int, VectorXd>> received(graph.size());
  for (int i = 0; i < graph.size(); ++i)
    for (const MessageBus::Message& m : bus.inbox(i)) received[i][m.first] = m.second;
  return received;
}

// Flooding with a restricted origin set: payloads carry their origin id,
// agents forward newly learned payloads to all neighbors, duplicates are
// dropped by id. After exactly diam(G) rounds every agent maps each origin
// to its payload (diam bounds every origin-to-agent distance).
inline std::vector<std::map<int, VectorXd>> flood_from(const Graph& graph,
                                                       const std::vector<int>& origins,
                                                       const std::vector<VectorXd>& payload_per_origin,
                                                       CommLedger& ledger) {
  const int m = graph.size();
  if (origins.size() != payload_per_origin.size())
    throw ContractError("flood_from: one payload per origin required");

  std::vector<std::map<int, VectorXd>> known(m);
  std::vector<std::vector<int>> fresh(m);
  for (size_t k = 0; k < origins.size(); ++k) {
    const int i = origins[k];
    if (i < 0 || i >= m) throw ContractError("flood_from: origin out of range");
    if (!known[i].emplace(i, payload_per_origin[k]).second)
      throw ContractError("flood_from: duplicate origin");
    fresh[i].push_back(i);
  }

  MessageBus bus(graph, &ledger);
  for (int round = 0; round < graph.diameter(); ++round) {
    for (int i = 0; i < m; ++i) {
      for (int j : graph.neighbors(i)) {
        for (int id : fresh[i]) {
          // tag rides in front of the payload so receivers can de-duplicate
          const VectorXd& body = known[i].at(id);
          VectorXd tagged(body.size() + 1);
          tagged[0] = static_cast<double>(id);
          tagged.tail(body.size()) = body;
          bus.post(i, j, std::move(tagged));
        }
      }
    }
    bus.deliver();
    std::vector<std::vector<int>> next_fresh(m);
    for (int i = 0; i < m; ++i) {
      for (const MessageBus::Message& msg : bus.inbox(i)) {
        const int id = static_cast<int>(msg.second[0]);
        if (known[i].emplace(id, msg.second.tail(msg.second.size() - 1)).second)
          next_fresh[i].push_back(id);
      }
    }
    fresh = std::move(next_fresh);
  }

  for (int i = 0; i < m; ++i)
    if (known[i].size() != origins.size())
      throw ContractError("flood_from: propagation incomplete (graph invariant broken)");
  return known;
}

// All-origins flooding: after exactly diam(G) rounds every agent holds all M
// payloads in agent-index order.
inline std::vector<std::vector<VectorXd>> flood(const Graph& graph,
                                                const std::vector<VectorXd>& payload_per_agent,
                                                CommLedger& ledger) {
  const int m = graph.size();
  if (static_cast<int>(payload_per_agent.size()) != m)
    throw ContractError("flood: one payload per agent required");
  std::vector<int> origins(m);
  std::iota(origins.begin(), origins.end(), 0);
  auto maps = flood_from(graph, origins, payload_per_agent, ledger);
  std::vector<std::vector<VectorXd>> known(m, std::vector<VectorXd>(m));
  for (int i = 0; i < m; ++i)
    for (int id = 0; id < m; ++id) known[i][id] = std::move(maps[i].at(id));
  return known;
}

}  // namespace decgp

#endif  // DECGP_NETSIM_HPP
