#include "decgp/graph.hpp"
#include "decgp/netsim.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace decgp;

namespace {

VectorXd payload(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("path and complete graph shapes") {
  const Graph path = Graph::path(5);
  CHECK(path.size() == 5);
  CHECK(path.diameter() == 4);
  CHECK(path.max_degree() == 2);
  CHECK(path.degree(0) == 1);
  CHECK(path.degree(2) == 2);
  CHECK(path.neighbors(2) == std::vector<int>{1, 3});
  CHECK(path.has_edge(1, 2));
  CHECK(!path.has_edge(0, 2));

  const Graph complete = Graph::complete(5);
  CHECK(complete.diameter() == 1);
  CHECK(complete.max_degree() == 4);
  CHECK(complete.neighbors(3) == std::vector<int>{0, 1, 2, 4});

  const Graph single = Graph::path(1);
  CHECK(single.size() == 1);
  CHECK(single.diameter() == 0);
  CHECK(single.max_degree() == 0);
}

TEST_CASE("graph adjacency validation") {
  MatrixXd bad = MatrixXd::Zero(3, 3);
  bad(0, 1) = bad(1, 0) = 1.0;
  bad(1, 2) = bad(2, 1) = 1.0;

  MatrixXd diag = bad;
  diag(0, 0) = 1.0;
  CHECK_THROWS_AS(Graph::custom(diag), ContractError);

  MatrixXd weighted = bad;
  weighted(0, 1) = weighted(1, 0) = 0.5;
  CHECK_THROWS_AS(Graph::custom(weighted), ContractError);

  MatrixXd asym = bad;
  asym(2, 0) = 1.0;
  CHECK_THROWS_AS(Graph::custom(asym), ContractError);

  MatrixXd disconnected = MatrixXd::Zero(3, 3);
  disconnected(0, 1) = disconnected(1, 0) = 1.0;
  CHECK_THROWS_AS(Graph::custom(disconnected), ContractError);

  CHECK_THROWS_AS(Graph::custom(MatrixXd::Zero(2, 3)), ContractError);
  CHECK_THROWS_AS(Graph::path(0), ContractError);

  CHECK_NOTHROW(Graph::custom(bad));
}

TEST_CASE("laplacian and degree-plus-adjacency") {
  const Graph g = Graph::path(3);
  MatrixXd l(3, 3);
  l << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((g.laplacian() - l).norm() == 0.0);
  MatrixXd dpa(3, 3);
  dpa << 1, 1, 0, 1, 2, 1, 0, 1, 1;
  CHECK((g.degree_plus_adjacency() - dpa).norm() == 0.0);
}

TEST_CASE("induced subgraph and connectivity probe") {
  const Graph g = Graph::path(5);
  const MatrixXd sub = Graph::induced_adjacency(g, {1, 2, 3});
  CHECK(Graph::is_connected(sub));
  CHECK(sub(0, 1) == 1.0);
  CHECK(sub(0, 2) == 0.0);

  const MatrixXd split = Graph::induced_adjacency(g, {0, 1, 3, 4});
  CHECK(!Graph::is_connected(split));
  CHECK(!Graph::is_connected(MatrixXd(0, 0)));
  CHECK(Graph::is_connected(MatrixXd::Zero(1, 1)));
}

TEST_CASE("graph factory dispatch") {
  CHECK(build_graph("path", 4).diameter() == 3);
  CHECK(build_graph("complete", 4).diameter() == 1);
  MatrixXd a = MatrixXd::Zero(2, 2);
  a(0, 1) = a(1, 0) = 1.0;
  CHECK(build_graph("custom", 2, &a).has_edge(0, 1));
  CHECK_THROWS_AS(build_graph("custom", 2), ContractError);
  CHECK_THROWS_AS(build_graph("ring", 4), ContractError);
}

TEST_CASE("consensus step size sits inside the convergent interval") {
  CHECK(perron_epsilon(Graph::path(5)) == 1.0 / 3.0);
  CHECK(perron_epsilon(Graph::complete(4)) == 0.25);
  CHECK(perron_epsilon(Graph::path(1)) == 1.0);
}

TEST_CASE("message bus round semantics") {
  const Graph g = Graph::path(3);
  CommLedger ledger(3);
  MessageBus bus(g, &ledger);

  bus.post(0, 1, payload({1.0, 2.0}));
  bus.post(2, 1, payload({3.0}));
  CHECK(bus.inbox(1).empty());  // not yet delivered
  CHECK_THROWS_AS(bus.post(0, 2, payload({9.0})), ContractError);  // not an edge
  CHECK_THROWS_AS(bus.post(1, 1, payload({9.0})), ContractError);  // self loop

  bus.deliver();
  CHECK(bus.round() == 1);
  REQUIRE(bus.inbox(1).size() == 2);
  CHECK(bus.inbox(0).empty());
  CHECK(bus.sent_last_round() == 3);
  CHECK(bus.received_last_round() == 3);
  CHECK(ledger.scalars(0) == 2);
  CHECK(ledger.scalars(2) == 1);
  CHECK(ledger.rounds() == 1);

  bus.deliver();  // empty round clears inboxes
  CHECK(bus.inbox(1).empty());
  CHECK(bus.round() == 2);
}

TEST_CASE("neighbor exchange charges degree times payload length") {
  const Graph g = Graph::path(4);
  CommLedger ledger(4);
  std::vector<VectorXd> states;
  for (int i = 0; i < 4; ++i) states.push_back(payload({double(i), double(10 * i)}));

  const auto received = neighbor_exchange(g, states, ledger);
  CHECK(ledger.rounds() == 1);
  for (int i = 0; i < 4; ++i) {
    CHECK(ledger.scalars(i) == 2LL * g.degree(i));
    CHECK(static_cast<int>(received[i].size()) == g.degree(i));
    for (int j : g.neighbors(i)) {
      REQUIRE(received[i].count(j) == 1);
      CHECK((received[i].at(j) - states[j]).norm() == 0.0);
    }
  }

  states.pop_back();
  CHECK_THROWS_AS(neighbor_exchange(g, states, ledger), ContractError);
}

TEST_CASE("flood reaches every agent in diameter rounds") {
  const Graph g = Graph::path(3);
  CommLedger ledger(3);
  std::vector<VectorXd> payloads;
  for (int i = 0; i < 3; ++i) payloads.push_back(payload({double(i), double(i) + 0.5}));

  const auto known = flood(g, payloads, ledger);
  CHECK(ledger.rounds() == g.diameter());
  for (int i = 0; i < 3; ++i) {
    REQUIRE(known[i].size() == 3);
    for (int id = 0; id < 3; ++id) CHECK((known[i][id] - payloads[id]).norm() == 0.0);
  }
  // origin tags ride along and are charged: payload length 2 becomes 3 on the
  // wire; the 3-path floods with 4 first-round and 6 second-round messages
  CHECK(ledger.total_scalars() == 30);
  CHECK(ledger.scalars(0) == 6);
  CHECK(ledger.scalars(1) == 18);
  CHECK(ledger.scalars(2) == 6);

  std::vector<VectorXd> wrong(2, payload({0.0}));
  CHECK_THROWS_AS(flood(g, wrong, ledger), ContractError);
}

TEST_CASE("restricted-origin flooding delivers exactly the origin set") {
  const Graph g = Graph::path(4);
  CommLedger ledger(4);
  const std::vector<int> origins{2};
  const std::vector<VectorXd> payloads{payload({7.0, 8.0})};

  const auto known = flood_from(g, origins, payloads, ledger);
  CHECK(ledger.rounds() == g.diameter());
  for (int i = 0; i < 4; ++i) {
    REQUIRE(known[i].size() == 1);
    CHECK((known[i].at(2) - payloads[0]).norm() == 0.0);
  }
  // posts: round 1 from agent 2 (x2), round 2 from agents 1 (x2) and 3 (x1),
  // round 3 from agent 0 (x1); each message carries 2 scalars plus the tag
  CHECK(ledger.total_scalars() == 18);

  CHECK_THROWS_AS(flood_from(g, {2, 2}, {payloads[0], payloads[0]}, ledger), ContractError);
  CHECK_THROWS_AS(flood_from(g, {4}, {payloads[0]}, ledger), ContractError);
  CHECK_THROWS_AS(flood_from(g, {0, 1}, {payloads[0]}, ledger), ContractError);
}

TEST_CASE("multiple origins propagate independently") {
  const Graph g = Graph::complete(4);
  CommLedger ledger(4);
  const std::vector<int> origins{1, 3};
  const std::vector<VectorXd> payloads{payload({1.0}), payload({3.0})};

  const auto known = flood_from(g, origins, payloads, ledger);
  CHECK(ledger.rounds() == 1);
  for (int i = 0; i < 4; ++i) {
    REQUIRE(known[i].size() == 2);
    CHECK(known[i].at(1)[0] == 1.0);
    CHECK(known[i].at(3)[0] == 3.0);
  }
}

TEST_CASE("ledger bookkeeping") {
  CommLedger ledger(3);
  ledger.charge(0, 5);
  ledger.charge(0, 2);
  ledger.charge(2, 1);
  CHECK(ledger.scalars(0) == 7);
  CHECK(ledger.scalars(1) == 0);
  CHECK(ledger.total_scalars() == 8);
  CHECK(ledger.agents() == 3);
  CHECK_THROWS_AS(ledger.charge(1, -1), ContractError);
  CHECK_THROWS(ledger.charge(3, 1));

  ledger.add_rounds();
  ledger.add_rounds(4);
  CHECK(ledger.rounds() == 5);

  ledger.note_phase("dac", 12, 2);
  REQUIRE(ledger.phases().size() == 1);
  CHECK(ledger.phases()[0].name == "dac");
  CHECK(ledger.phases()[0].rounds == 12);
  CHECK(ledger.phases()[0].streams == 2);
}
