#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tshrink/marginal_kl.hpp"
#include "tshrink/model.hpp"
#include "tshrink/posterior.hpp"

namespace tshrink::harness {

enum class SignalRule {
  RandomPositions,  // `sparsity` coefficients equal to `signal_value` at uniformly random positions
  Leading,          // beta0 = (leading..., 0, ...)
};

struct ExperimentSpec {
  std::string name = "custom";
  Index n = 100;
  Index p = 100;
  Index sparsity = 0;
  SignalRule rule = SignalRule::Leading;
  double signal_value = 0.0;
  std::vector<double> leading;
  double sigma = 1.0;
  NoiseMode noise = NoiseMode::Known;
  int replications = 100;
  std::uint64_t seed = 0;
  Index vb_blocks = 1;
  Index gibbs_blocks = 1;

  /// sparsity <= p, replications >= 1, positive dimensions; throws ConfigError.
  void validate() const;
};

/// example1a | example1b | example2 | toyC. Throws ConfigError otherwise.
ExperimentSpec experiment_spec(std::string_view name);

struct Replicate {
  Dataset data;
  VectorXd beta;
  std::vector<Index> support;  // ascending
};

/// X_ij ~ N(0, 1), Y = X beta0 + sigma eps. Deterministic in (spec.seed,
/// replication); design, noise and signal positions use separate streams.
Replicate generate(const ExperimentSpec& spec, std::uint64_t replication);

struct ReplicationMetrics {
  double rmse = 0.0;             // |beta_hat - beta0|_2 / sqrt(p)
  double fdr = 0.0;              // NaN when nothing is selected
  double tpr = 0.0;              // NaN when the support is empty
  double coverage_signal = 0.0;  // NaN when the support is empty
  double coverage_null = 0.0;    // NaN when the support is everything
  double run_time = 0.0;
};

ReplicationMetrics evaluate(const VectorXd& estimate, const posterior::SelectionResult& selection,
                            const VectorXd& beta0, const std::vector<Index>& support, double run_time);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;  // finite values that entered the mean
};

/// Mean and sample s.d. over the finite entries; NaNs are skipped and show up
/// as count < values.size().
Summary summarize(const std::vector<double>& values);

enum class Method { TVb, TMcmc, MarginalVb };

std::string_view to_string(Method method);
/// Accepts tvb | tmcmc | mvb (and t-VB | t-MCMC | marginal-VB).
Method parse_method(std::string_view name);

struct MetricsReport {
  Method method = Method::TVb;
  Summary rmse, fdr, tpr, coverage_signal, coverage_null, run_time;
  int replications = 0;
  int failures = 0;
  int fdr_undefined = 0;
  std::vector<std::string> failure_messages;
};

struct ReplicationRecord {
  std::uint64_t replication = 0;
  Method method = Method::TVb;
  bool ok = true;
  std::string error;
  ReplicationMetrics metrics;
  double sigma_hat = 0.0;
  int iterations = 0;
};

struct BenchmarkOptions {
  double level = 0.95;
  int gibbs_iterations = 1000;
  int gibbs_burn_in = 200;
  marginal::AdamOptions adam;
  int jobs = 1;
  /// Called after each replication finishes (from worker threads, serialized).
  std::function<void(const ReplicationRecord&)> on_record;
};

struct BenchmarkResult {
  std::vector<MetricsReport> reports;  // one per method, in request order
  std::vector<ReplicationRecord> records;
};

/// Runs every method on every replication (shared data per replication) and
/// aggregates in replication order. Failures are counted, never dropped.
BenchmarkResult run_benchmark(const ExperimentSpec& spec, const std::vector<Method>& methods,
                              const BenchmarkOptions& options = {});

/// Hyperparameters for an experiment: default rule (or the comparison preset
/// for toyC), the experiment's block count and noise handling. For empirical-Bayes
/// noise `sigma_hat` seeds hyper.sigma.
Hyperparameters experiment_hyperparameters(const ExperimentSpec& spec, Index n, Index p, double sigma_hat);

}  // namespace tshrink::harness
