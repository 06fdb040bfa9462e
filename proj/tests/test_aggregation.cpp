#include "decgp/aggregation.hpp"
#include "decgp/training.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace decgp;

namespace {

Dataset random_dataset(Rng& rng, int n, double x0_lo = 0.0, double x0_hi = 2.0) {
  MatrixXd x(n, 2);
  VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(x0_lo, x0_hi);
    x(i, 1) = rng.uniform(0.0, 2.0);
    y[i] = rng.normal();
  }
  return Dataset(std::move(x), std::move(y));
}

HyperParams test_hyper() { return HyperParams(Eigen::Vector2d(0.6, 0.6), 1.3, 0.15); }

std::vector<ExpertModel> make_experts(const std::vector<Dataset>& datasets,
                                      const HyperParams& hyper) {
  std::vector<ExpertModel> experts;
  experts.reserve(datasets.size());
  for (const Dataset& d : datasets) experts.emplace_back(d, hyper);
  return experts;
}

std::vector<LocalSummary> random_summaries(Rng& rng, int m) {
  std::vector<LocalSummary> s(m);
  for (LocalSummary& e : s) {
    e.mu = rng.uniform(-3.0, 3.0);
    e.var = rng.uniform(0.05, 2.0);
  }
  return s;
}

}  // namespace

TEST_CASE("product-of-experts scalar oracle and variants") {
  Rng rng(3);
  const auto s = random_summaries(rng, 4);

  double precision = 0.0, weighted = 0.0;
  for (const LocalSummary& e : s) {
    precision += 1.0 / e.var;
    weighted += e.mu / e.var;
  }
  const Prediction poe = poe_aggregate(s, PoeVariant::poe);
  CHECK_THAT(poe.variance, Catch::Matchers::WithinRel(1.0 / precision, 1e-14));
  CHECK_THAT(poe.mean, Catch::Matchers::WithinRel(weighted / precision, 1e-14));

  // the averaged variant scales the precision by 1/M and keeps the mean
  const Prediction gpoe = poe_aggregate(s, PoeVariant::gpoe);
  CHECK_THAT(gpoe.variance, Catch::Matchers::WithinRel(4.0 * poe.variance, 1e-13));
  CHECK_THAT(gpoe.mean, Catch::Matchers::WithinAbs(poe.mean, 1e-12));

  CHECK_THROWS_AS(poe_aggregate({}, PoeVariant::poe), ContractError);
  CHECK_THROWS_AS(poe_aggregate({LocalSummary{0.0, 0.0, 0.0}}, PoeVariant::poe), ContractError);
}

TEST_CASE("product-of-experts means coincide across variants") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_summaries(rng, 2 + rng.uniform_int(7));
    const Prediction a = poe_aggregate(s, PoeVariant::poe);
    const Prediction b = poe_aggregate(s, PoeVariant::gpoe);
    CHECK_THAT(a.mean, Catch::Matchers::WithinAbs(b.mean, 1e-12));
  }
}

TEST_CASE("single-expert product rules return the local prediction") {
  const LocalSummary s{0.7, 0.3, 0.0};
  for (const PoeVariant v : {PoeVariant::poe, PoeVariant::gpoe}) {
    const Prediction p = poe_aggregate({s}, v);
    CHECK_THAT(p.mean, Catch::Matchers::WithinRel(0.7, 1e-14));
    CHECK_THAT(p.variance, Catch::Matchers::WithinRel(0.3, 1e-14));
  }
  const Prediction p = bcm_aggregate({s}, 1.69, BcmVariant::bcm);
  CHECK_THAT(p.mean, Catch::Matchers::WithinRel(0.7, 1e-14));
  CHECK_THAT(p.variance, Catch::Matchers::WithinRel(0.3, 1e-14));
}

TEST_CASE("committee scalar oracle and prior recovery") {
  Rng rng(7);
  const auto s = random_summaries(rng, 4);
  const double prior_var = 1.69;

  for (const BcmVariant v : {BcmVariant::bcm, BcmVariant::rbcm}) {
    double precision = 0.0, weighted = 0.0, beta_sum = 0.0;
    for (const LocalSummary& e : s) {
      const double beta = (v == BcmVariant::bcm) ? 1.0 : entropy_beta(prior_var, e.var);
      precision += beta / e.var;
      weighted += beta * e.mu / e.var;
      beta_sum += beta;
    }
    precision += (1.0 - beta_sum) / prior_var;
    const Prediction p = bcm_aggregate(s, prior_var, v);
    CHECK_THAT(p.variance, Catch::Matchers::WithinRel(1.0 / precision, 1e-13));
    CHECK_THAT(p.mean, Catch::Matchers::WithinRel(weighted / precision, 1e-13));
  }

  // uninformative experts carry zero entropy weight: the robust committee
  // falls back to the prior
  std::vector<LocalSummary> flat(5);
  for (int i = 0; i < 5; ++i) flat[i] = LocalSummary{double(i), prior_var, 0.0};
  const Prediction p = bcm_aggregate(flat, prior_var, BcmVariant::rbcm);
  CHECK_THAT(p.variance, Catch::Matchers::WithinRel(prior_var, 1e-12));
  CHECK_THAT(p.mean, Catch::Matchers::WithinAbs(0.0, 1e-12));

  CHECK_THROWS_AS(bcm_aggregate(s, 0.0, BcmVariant::bcm), ContractError);
}

TEST_CASE("entropy weight closed form") {
  CHECK_THAT(entropy_beta(2.0, 0.5), Catch::Matchers::WithinRel(0.5 * std::log(4.0), 1e-14));
  CHECK(entropy_beta(1.0, 1.0) == 0.0);
}

TEST_CASE("generalized robust committee weights and oracle") {
  Rng rng(11);
  auto aug = random_summaries(rng, 3);
  LocalSummary comm{0.4, 0.9, 0.0};

  const std::vector<double> beta = grbcm_betas(aug, comm, false);
  CHECK(beta[0] == 1.0);
  CHECK_THAT(beta[1], Catch::Matchers::WithinRel(entropy_beta(comm.var, aug[1].var), 1e-14));
  CHECK_THAT(beta[2], Catch::Matchers::WithinRel(entropy_beta(comm.var, aug[2].var), 1e-14));
  const std::vector<double> strict = grbcm_betas(aug, comm, true);
  CHECK(strict[1] == 1.0);
  CHECK(strict[2] == beta[2]);

  for (const bool strict_mode : {false, true}) {
    const std::vector<double> b = grbcm_betas(aug, comm, strict_mode);
    double precision = 0.0, weighted = 0.0, beta_sum = 0.0;
    for (int i = 0; i < 3; ++i) {
      precision += b[i] / aug[i].var;
      weighted += b[i] * aug[i].mu / aug[i].var;
      beta_sum += b[i];
    }
    precision += (1.0 - beta_sum) / comm.var;
    weighted += (1.0 - beta_sum) * comm.mu / comm.var;
    const Prediction p = grbcm_aggregate(aug, comm, strict_mode);
    CHECK_THAT(p.variance, Catch::Matchers::WithinRel(1.0 / precision, 1e-13));
    CHECK_THAT(p.mean, Catch::Matchers::WithinRel(weighted / precision, 1e-13));
  }

  // single augmented expert: fully trusted, communication correction cancels
  const Prediction solo = grbcm_aggregate({aug[0]}, comm);
  CHECK_THAT(solo.mean, Catch::Matchers::WithinRel(aug[0].mu, 1e-13));
  CHECK_THAT(solo.variance, Catch::Matchers::WithinRel(aug[0].var, 1e-13));

  // all augmented experts identical to the communication expert: zero extra
  // information beyond the first, result is that shared prediction
  std::vector<LocalSummary> same(4, comm);
  const Prediction echo = grbcm_aggregate(same, comm);
  CHECK_THAT(echo.mean, Catch::Matchers::WithinRel(comm.mu, 1e-12));
  CHECK_THAT(echo.variance, Catch::Matchers::WithinRel(comm.var, 1e-12));

  CHECK_THROWS_AS(grbcm_aggregate(aug, LocalSummary{0.0, 0.0, 0.0}), ContractError);
}

TEST_CASE("aggregate family dispatch") {
  Rng rng(13);
  const auto s = random_summaries(rng, 3);
  const double prior_var = 1.69;
  const LocalSummary comm{0.2, 0.8, 0.0};

  CHECK(aggregate_family(AggVariant::poe, s, prior_var).mean ==
        poe_aggregate(s, PoeVariant::poe).mean);
  CHECK(aggregate_family(AggVariant::gpoe, s, prior_var).variance ==
        poe_aggregate(s, PoeVariant::gpoe).variance);
  CHECK(aggregate_family(AggVariant::bcm, s, prior_var).mean ==
        bcm_aggregate(s, prior_var, BcmVariant::bcm).mean);
  CHECK(aggregate_family(AggVariant::rbcm, s, prior_var).mean ==
        bcm_aggregate(s, prior_var, BcmVariant::rbcm).mean);
  CHECK(aggregate_family(AggVariant::grbcm, s, prior_var, &comm).mean ==
        grbcm_aggregate(s, comm).mean);
  CHECK_THROWS_AS(aggregate_family(AggVariant::grbcm, s, prior_var), ContractError);
}

TEST_CASE("pointwise aggregation blocks against a dense oracle") {
  Rng rng(17);
  const HyperParams hyper = test_hyper();
  std::vector<Dataset> datasets{random_dataset(rng, 7), random_dataset(rng, 5)};
  const auto experts = make_experts(datasets, hyper);
  const VectorXd xstar = Eigen::Vector2d(1.0, 0.7);
  const double noise_var = hyper.noise_std * hyper.noise_std;

  std::vector<VectorXd> v(2), kstar(2);
  std::vector<MatrixXd> cinv(2);
  for (int j = 0; j < 2; ++j) {
    const MatrixXd c = covariance_matrix(datasets[j].inputs, datasets[j].inputs, hyper, true);
    cinv[j] = c.inverse();
    kstar[j] = covariance_vector(datasets[j].inputs, xstar, hyper);
    v[j] = cinv[j] * kstar[j];
  }

  for (const bool with_noise : {true, false}) {
    const NpaeLocal loc = npae_local(experts, 0, xstar, with_noise);
    CHECK(loc.row[0] == loc.kA);  // diagonal block is the noisy local system
    CHECK_THAT(loc.kA, Catch::Matchers::WithinAbs(kstar[0].dot(v[0]), 1e-10));

    MatrixXd cross = covariance_matrix(datasets[0].inputs, datasets[1].inputs, hyper, false);
    if (with_noise) cross.diagonal().head(5).array() += noise_var;
    CHECK_THAT(loc.row[1], Catch::Matchers::WithinAbs(v[0].dot(cross * v[1]), 1e-10));
  }

  // far queries contribute vanishing cross-covariance mass
  const NpaeLocal far = npae_local(experts, 0, Eigen::Vector2d(80.0, -75.0));
  CHECK(std::abs(far.kA) < 1e-12);

  CHECK_THROWS_AS(npae_local(experts, 2, xstar), ContractError);
  CHECK_THROWS_AS(npae_local(experts, -1, xstar), ContractError);
}

TEST_CASE("pointwise aggregation with one expert is the exact posterior") {
  Rng rng(19);
  const HyperParams hyper = test_hyper();
  const Dataset data = random_dataset(rng, 12);
  const std::vector<ExpertModel> experts = make_experts({data}, hyper);

  for (int t = 0; t < 10; ++t) {
    const VectorXd xstar = Eigen::Vector2d(rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0));
    const Prediction agg = npae_predict(experts, xstar);
    const Prediction full = full_gp_predict(data, hyper, xstar);
    CHECK_THAT(agg.mean, Catch::Matchers::WithinAbs(full.mean, 1e-10));
    CHECK_THAT(agg.variance, Catch::Matchers::WithinAbs(full.variance, 1e-10));
  }
}

TEST_CASE("pointwise aggregation solves its dense system") {
  Rng rng(23);
  const HyperParams hyper = test_hyper();
  std::vector<Dataset> datasets;
  for (int i = 0; i < 4; ++i) datasets.push_back(random_dataset(rng, 6));
  const auto experts = make_experts(datasets, hyper);
  const VectorXd xstar = Eigen::Vector2d(0.8, 1.1);

  const NpaeSystem sys = npae_system(experts, xstar);
  const VectorXd w = sys.C_A.ldlt().solve(sys.kA);
  const Prediction p = npae_predict(experts, xstar);
  CHECK_THAT(p.mean, Catch::Matchers::WithinAbs(w.dot(sys.mu), 1e-9));
  CHECK_THAT(p.variance,
             Catch::Matchers::WithinAbs(std::max(0.0, sys.kss - w.dot(sys.kA)), 1e-9));
  CHECK_THAT(sys.kss, Catch::Matchers::WithinRel(hyper.signal_std * hyper.signal_std, 1e-14));

  CHECK_THROWS_AS(npae_aggregate(VectorXd::Ones(2), VectorXd::Ones(3), MatrixXd::Identity(3, 3),
                                 1.0),
                  ContractError);
}

TEST_CASE("consensus committee family matches centralized aggregation") {
  Rng rng(29);
  const int m = 5;
  const Graph graph = Graph::path(m);
  const HyperParams hyper = test_hyper();

  std::vector<Dataset> locals;
  for (int i = 0; i < m; ++i) locals.push_back(random_dataset(rng, 12));

  // the robust generalized variant aggregates augmented experts against the
  // shared communication expert
  const AugmentedData aug = build_augmented(locals, 99);
  std::vector<Dataset> plus;
  for (const Dataset& d : aug.local_plus) plus.push_back(dedup_inputs(d));
  const auto aug_experts = make_experts(plus, hyper);
  const ExpertModel comm_expert(aug.comm_dataset(), hyper);
  const LocalSummary comm = [&](const VectorXd& x) {
    const Prediction pc = local_predict(comm_expert, x);
    return LocalSummary{pc.mean, pc.variance, 0.0};
  }(Eigen::Vector2d(1.0, 1.0));

  const auto experts = make_experts(locals, hyper);
  const VectorXd xstar = Eigen::Vector2d(1.0, 1.0);
  const double prior_var = kernel_eval(xstar, xstar, hyper);

  const std::vector<AggVariant> variants{AggVariant::poe, AggVariant::gpoe, AggVariant::bcm,
                                         AggVariant::rbcm, AggVariant::grbcm};
  for (const AggVariant variant : variants) {
    const bool is_grbcm = (variant == AggVariant::grbcm);
    const auto& used_experts = is_grbcm ? aug_experts : experts;

    CommLedger ledger(m);
    const std::vector<Prediction> dec =
        dec_poe_family(graph, used_experts, xstar, variant, ledger,
                       is_grbcm ? &comm_expert : nullptr);

    Prediction central;
    if (is_grbcm) {
      central = grbcm_aggregate(summarize(aug_experts, xstar), comm);
    } else {
      central = aggregate_family(variant, summarize(experts, xstar), prior_var);
    }

    REQUIRE(static_cast<int>(dec.size()) == m);
    for (int i = 0; i < m; ++i) {
      CHECK_THAT(dec[i].mean, Catch::Matchers::WithinAbs(central.mean, 1e-6));
      CHECK_THAT(dec[i].variance, Catch::Matchers::WithinAbs(central.variance, 1e-6));
    }

    REQUIRE(ledger.phases().size() == 1);
    CHECK(ledger.phases()[0].name == "dac");
    const bool three = (variant == AggVariant::rbcm || variant == AggVariant::grbcm);
    CHECK(ledger.phases()[0].streams == (three ? 3 : 2));
    CHECK(ledger.total_scalars() > 0);
  }

  CommLedger ledger(m);
  CHECK_THROWS_AS(dec_poe_family(graph, experts, xstar, AggVariant::grbcm, ledger),
                  ContractError);
  CHECK_THROWS_AS(dec_poe_family(graph, make_experts({locals[0]}, hyper), xstar, AggVariant::poe,
                                 ledger),
                  ContractError);
}

TEST_CASE("nearest-neighbor selection") {
  Rng rng(31);
  const HyperParams hyper(Eigen::Vector2d(0.4, 0.4), 1.0, 0.1);
  const int m = 5;
  std::vector<Dataset> stripes;
  for (int i = 0; i < m; ++i) stripes.push_back(random_dataset(rng, 12, 0.4 * i, 0.4 * (i + 1)));
  const auto experts = make_experts(stripes, hyper);

  SECTION("zero threshold keeps everyone") {
    const CbnnSelection sel = cbnn_select(experts, Eigen::Vector2d(1.0, 1.0), 0.0);
    CHECK(sel.selected == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(sel.ratio() == 1.0);
  }

  SECTION("huge threshold keeps only the top scorer") {
    const CbnnSelection sel = cbnn_select(experts, Eigen::Vector2d(1.0, 1.0), 1e6);
    REQUIRE(sel.selected.size() == 1);
    const auto top = std::max_element(sel.kmu.begin(), sel.kmu.end());
    CHECK(sel.selected[0] == static_cast<int>(top - sel.kmu.begin()));
  }

  SECTION("ties resolve to the lowest agent id") {
    const auto twins = make_experts({stripes[2], stripes[2]}, hyper);
    const CbnnSelection sel = cbnn_select(twins, Eigen::Vector2d(1.0, 1.0), 1e6);
    REQUIRE(sel.selected.size() == 1);
    CHECK(sel.selected[0] == 0);
  }

  SECTION("striped data selects a contiguous block") {
    for (int t = 0; t < 20; ++t) {
      const VectorXd xstar = Eigen::Vector2d(rng.uniform(0.2, 1.8), rng.uniform(0.2, 1.8));
      const CbnnSelection sel = cbnn_select(experts, xstar, default_eta_nn(hyper));
      REQUIRE(!sel.selected.empty());
      CHECK(sel.selected.back() - sel.selected.front() + 1 ==
            static_cast<int>(sel.selected.size()));
    }
  }

  SECTION("negative threshold is rejected") {
    CHECK_THROWS_AS(cbnn_select(experts, Eigen::Vector2d(1.0, 1.0), -0.1), ContractError);
  }
}

TEST_CASE("nearest-neighbor committee equals the full committee at zero threshold") {
  Rng rng(37);
  const Graph graph = Graph::path(4);
  const HyperParams hyper = test_hyper();
  std::vector<Dataset> locals;
  for (int i = 0; i < 4; ++i) locals.push_back(random_dataset(rng, 10));
  const auto experts = make_experts(locals, hyper);
  const VectorXd xstar = Eigen::Vector2d(0.9, 0.9);

  CommLedger ledger_nn(4), ledger_full(4);
  const DecNnResult nn =
      dec_nn_family(graph, experts, xstar, AggVariant::gpoe, 0.0, ledger_nn);
  const std::vector<Prediction> full =
      dec_poe_family(graph, experts, xstar, AggVariant::gpoe, ledger_full);

  CHECK(nn.selected == std::vector<int>{0, 1, 2, 3});
  for (int i = 0; i < 4; ++i) {
    CHECK(nn.predictions[i].mean == full[i].mean);
    CHECK(nn.predictions[i].variance == full[i].variance);
  }
  CHECK(ledger_nn.total_scalars() == ledger_full.total_scalars());
}

TEST_CASE("nearest-neighbor committee restricts to the selected experts") {
  Rng rng(41);
  const Graph graph = Graph::path(5);
  const HyperParams hyper(Eigen::Vector2d(0.4, 0.4), 1.0, 0.1);
  std::vector<Dataset> stripes;
  for (int i = 0; i < 5; ++i) stripes.push_back(random_dataset(rng, 12, 0.4 * i, 0.4 * (i + 1)));
  const auto experts = make_experts(stripes, hyper);
  const VectorXd xstar = Eigen::Vector2d(0.3, 1.0);  // deep inside the first stripes

  CommLedger ledger(5);
  const DecNnResult nn =
      dec_nn_family(graph, experts, xstar, AggVariant::rbcm, default_eta_nn(hyper), ledger);
  REQUIRE(!nn.selected.empty());
  REQUIRE(static_cast<int>(nn.selected.size()) < 5);

  // centralized oracle on the same restricted committee
  std::vector<ExpertModel> sub;
  for (int id : nn.selected) sub.push_back(experts[id]);
  const Prediction central = aggregate_family(AggVariant::rbcm, summarize(sub, xstar),
                                              kernel_eval(xstar, xstar, hyper));
  for (int i = 0; i < 5; ++i) {
    CHECK_THAT(nn.predictions[i].mean, Catch::Matchers::WithinAbs(central.mean, 1e-6));
    CHECK_THAT(nn.predictions[i].variance, Catch::Matchers::WithinAbs(central.variance, 1e-6));
  }

  // the dropped agents received the broadcast
  bool has_broadcast = false;
  for (const auto& phase : ledger.phases()) has_broadcast |= (phase.name == "nn-broadcast");
  CHECK(has_broadcast);
}

TEST_CASE("single-survivor nearest-neighbor committee is that agent's posterior") {
  Rng rng(43);
  const Graph graph = Graph::path(3);
  const HyperParams hyper = test_hyper();
  std::vector<Dataset> locals;
  for (int i = 0; i < 3; ++i) locals.push_back(random_dataset(rng, 8));
  const auto experts = make_experts(locals, hyper);
  const VectorXd xstar = Eigen::Vector2d(1.0, 1.0);

  CommLedger ledger(3);
  const DecNnResult nn = dec_nn_family(graph, experts, xstar, AggVariant::poe, 1e6, ledger);
  REQUIRE(nn.selected.size() == 1);
  const Prediction local = local_predict(experts[nn.selected[0]], xstar);
  for (int i = 0; i < 3; ++i) {
    CHECK_THAT(nn.predictions[i].mean, Catch::Matchers::WithinRel(local.mean, 1e-12));
    CHECK_THAT(nn.predictions[i].variance, Catch::Matchers::WithinRel(local.variance, 1e-12));
  }
}

TEST_CASE("decentralized pointwise aggregation matches the centralized predictor") {
  Rng rng(47);
  const int m = 4;
  const Graph graph = Graph::complete(m);
  const HyperParams hyper = test_hyper();
  std::vector<Dataset> locals;
  for (int i = 0; i < m; ++i) locals.push_back(random_dataset(rng, 10));
  const auto experts = make_experts(locals, hyper);
  const VectorXd xstar = Eigen::Vector2d(1.2, 0.6);
  const Prediction central = npae_predict(experts, xstar);

  for (const NpaeMode mode : {NpaeMode::fixed_omega, NpaeMode::optimal_omega}) {
    CommLedger ledger(m);
    const DecNpaeResult dec = dec_npae(graph, experts, xstar, mode, ledger);
    CHECK(dec.selected == std::vector<int>{0, 1, 2, 3});
    CHECK(dec.jor_iterations > 0);
    CHECK(dec.omega > 0.0);
    for (int i = 0; i < m; ++i) {
      CHECK_THAT(dec.predictions[i].mean, Catch::Matchers::WithinAbs(central.mean, 1e-5));
      CHECK_THAT(dec.predictions[i].variance, Catch::Matchers::WithinAbs(central.variance, 1e-5));
    }
    bool has_flood = false;
    for (const auto& phase : ledger.phases()) has_flood |= (phase.name == "npae-data-flood");
    CHECK(has_flood);
  }

  // the power-method relaxation differs from the fixed fallback
  CommLedger l1(m), l2(m);
  const double w_fixed = dec_npae(graph, experts, xstar, NpaeMode::fixed_omega, l1).omega;
  const double w_opt = dec_npae(graph, experts, xstar, NpaeMode::optimal_omega, l2).omega;
  CHECK(w_fixed == 1.999 / m);
  CHECK(w_opt != w_fixed);
}

TEST_CASE("nearest-neighbor pointwise aggregation matches its restricted oracle") {
  Rng rng(53);
  const Graph graph = Graph::path(5);
  const HyperParams hyper(Eigen::Vector2d(0.4, 0.4), 1.0, 0.1);
  std::vector<Dataset> stripes;
  for (int i = 0; i < 5; ++i) stripes.push_back(random_dataset(rng, 10, 0.4 * i, 0.4 * (i + 1)));
  const auto experts = make_experts(stripes, hyper);
  const VectorXd xstar = Eigen::Vector2d(1.7, 1.0);  // deep inside the last stripes

  CommLedger ledger(5);
  NpaeOptions opts;
  opts.eta_stop = 1e-11;
  const DecNpaeResult dec = dec_npae(graph, experts, xstar, NpaeMode::nn_dale, ledger, opts);
  REQUIRE(!dec.selected.empty());
  REQUIRE(dec.selected.size() < 5);
  CHECK(dec.dale_iterations > 0);

  std::vector<ExpertModel> sub;
  for (int id : dec.selected) sub.push_back(experts[id]);
  const Prediction central = npae_predict(sub, xstar);
  for (int i = 0; i < 5; ++i) {
    CHECK_THAT(dec.predictions[i].mean, Catch::Matchers::WithinAbs(central.mean, 1e-5));
    CHECK_THAT(dec.predictions[i].variance, Catch::Matchers::WithinAbs(central.variance, 1e-5));
  }
}

TEST_CASE("single-agent pointwise aggregation collapses to the full posterior") {
  Rng rng(59);
  const Graph graph = Graph::path(1);
  const HyperParams hyper = test_hyper();
  const Dataset data = random_dataset(rng, 12);
  const auto experts = make_experts({data}, hyper);
  const VectorXd xstar = Eigen::Vector2d(1.0, 0.4);
  const Prediction full = full_gp_predict(data, hyper, xstar);

  for (const NpaeMode mode : {NpaeMode::fixed_omega, NpaeMode::optimal_omega, NpaeMode::nn_dale}) {
    CommLedger ledger(1);
    const DecNpaeResult dec = dec_npae(graph, experts, xstar, mode, ledger);
    CHECK_THAT(dec.predictions[0].mean, Catch::Matchers::WithinAbs(full.mean, 1e-8));
    CHECK_THAT(dec.predictions[0].variance, Catch::Matchers::WithinAbs(full.variance, 1e-8));
    CHECK(ledger.total_scalars() == 0);
  }
}
