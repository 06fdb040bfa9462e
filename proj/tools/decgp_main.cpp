#include "decgp/decgp.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

namespace {

// exit codes: 0 success, 2 non-convergence, 3 conditioning failure
constexpr int kExitNonConvergence = 2;
constexpr int kExitConditioning = 3;

int run(const std::string& config_path, const std::string& out_override, decgp::RunMode mode) {
  decgp::ExperimentSpec spec = decgp::load_spec(config_path);
  if (!out_override.empty()) spec.out = out_override;
  if (const char* env = std::getenv("DECGP_SEED")) spec.seed = std::stoull(env);

  const std::vector<decgp::MetricsRecord> records = decgp::run_experiment(spec, mode);
  for (const decgp::MetricsRecord& rec : records) {
    std::cout << "replication " << rec.replication;
    if (mode != decgp::RunMode::predict_only && spec.trainer != "none") {
      std::cout << "  trainer=" << spec.trainer << " rounds=" << rec.train_rounds << " theta=(";
      for (int i = 0; i < rec.theta_hat.size(); ++i)
        std::cout << (i ? "," : "") << rec.theta_hat[i];
      std::cout << ")";
    }
    if (mode != decgp::RunMode::train_only && spec.predictor != "none") {
      std::cout << "  predictor=" << spec.predictor << " rmse=" << rec.rmse_value
                << " nlpd=" << rec.nlpd_value;
      if (std::isfinite(rec.m_nn_ratio)) std::cout << " m_nn_ratio=" << rec.m_nn_ratio;
    }
    if (rec.decentralized) {
      long long total = 0;
      for (long long s : rec.scalars_per_agent) total += s;
      std::cout << "  comm_rounds=" << rec.comm_rounds << " scalars_sent=" << total;
    }
    std::cout << "\n";
  }
  if (!spec.out.empty()) std::cout << "results written to " << spec.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized Gaussian-process training and prediction over simulated networks"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_override, "output directory (overrides config)");
  };
  CLI::App* train = app.add_subcommand("train", "train hyperparameters only");
  CLI::App* predict = app.add_subcommand("predict", "predict with fixed hyperparameters");
  CLI::App* bench = app.add_subcommand("bench", "train, predict, and emit metrics");
  add_common(train);
  add_common(predict);
  add_common(bench);

  CLI11_PARSE(app, argc, argv);

  decgp::RunMode mode = decgp::RunMode::full;
  if (train->parsed()) mode = decgp::RunMode::train_only;
  if (predict->parsed()) mode = decgp::RunMode::predict_only;

  try {
    return run(config_path, out_override, mode);
  } catch (const decgp::ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const decgp::ConditioningError& e) {
    std::cerr << "conditioning failure: " << e.what() << "\n";
    return kExitConditioning;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
