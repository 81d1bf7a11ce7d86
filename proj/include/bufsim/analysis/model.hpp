#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace bufsim::analysis {

/// Flows sharing one bottleneck. alphas default to 1/T_i when left empty;
/// backoff_prob[i] is the chance flow i backs off at a congestion event
/// (1 for synchronized flows).
struct FlowEnsemble {
  std::vector<double> rtts;
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<double> backoff_prob;

  static FlowEnsemble identical(std::size_t n, double rtt, double beta = 0.5);

  std::size_t size() const { return rtts.size(); }
  double alpha(std::size_t i) const { return alphas.empty() ? 1.0 / rtts[i] : alphas[i]; }
  double beta(std::size_t i) const { return betas.empty() ? 0.5 : betas[i]; }
  double backoff_probability(std::size_t i) const { return backoff_prob.empty() ? 1.0 : backoff_prob[i]; }
  /// E[beta_T]: alpha-weighted mean of the per-flow expected backoff factor.
  double expected_beta_t() const;
  void validate() const;
};

struct Aggregates {
  double alpha_t = 0.0;
  double a_t = 0.0;
  double t_t = 0.0;
  /// alpha_t / (a_t * t_t), in [1/n, 1].
  double rtt_ratio() const { return alpha_t / (a_t * t_t); }
};

Aggregates ensemble_derive(const FlowEnsemble& ens);

struct ModelParams {
  double a = 10.0;
  double b = 1.0;
  double service_rate = 0.0;  // E[B], packets/s
  double alpha_t = 5.0;
  double a_t = 25.0;
  double t_t = 0.2;
  double beta_t = 0.5;
  double delta = 0.0;
  double p_e = 1.0;
  double q_min = 0.0;  // clamp applied by the oracle only
  double q_max = std::numeric_limits<double>::infinity();

  static ModelParams from_ensemble(const FlowEnsemble& ens, double a, double b, double service_rate);
  double rtt_ratio() const { return alpha_t / (a_t * t_t); }
  void validate() const;
};

struct Coefficients {
  double lambda_e = 0.0;
  double lambda_f = 0.0;
  double gamma_e = 0.0;
};

Coefficients lambda_gamma(const ModelParams& mp);

struct Stability {
  bool stable = false;     // a < 2 alpha_t + b
  double margin = 0.0;     // 2 alpha_t + b - a
  bool practical = false;  // a < 10 + b
};

Stability is_stable(const ModelParams& mp);

/// Limit of E[Q(k)] with every epoch draining the queue and rtt_ratio = 1.
double fixed_point(const ModelParams& mp);

struct UtilizationBounds {
  double tight = 0.0;
  double loose = 0.0;
};

UtilizationBounds utilization_bounds(const ModelParams& mp);

/// E[Q(0..k_max)] under the averaged recursion. Aggregates and beta_t come
/// from `ens`; a, b, service_rate, p_e and delta from `mp`.
std::vector<double> recursion_trajectory(const ModelParams& mp, const FlowEnsemble& ens, double q0, int k_max);

/// Per-step moments, for driving the recursion with measured p_e(k), delta(k).
struct EpochMoments {
  double p_e = 1.0;
  double delta = 0.0;
};

std::vector<double> recursion_trajectory(const ModelParams& mp, const FlowEnsemble& ens, double q0,
                                         const std::vector<EpochMoments>& moments);

struct OracleResult {
  std::vector<double> mean;                 // mean Q(k) over paths
  std::vector<std::vector<double>> paths;   // kept only when requested
  std::vector<EpochMoments> moments;        // empirical p_e(k), E[delta(k)] over non-draining paths
};

/// Event-level Monte Carlo of Q(k+1) = Q(k) + a T_I(k) - b T_B(k) with random
/// per-flow backoff. Each path uses its own stream derived from `seed`.
OracleResult epoch_oracle(const FlowEnsemble& ens, const ModelParams& mp, double q0, int k_max, int paths,
                          std::uint64_t seed, bool keep_paths = false);

/// Relative gap between the window-weighted mean of 1/T_i (equal windows,
/// queue q) and the harmonic-mean approximation 1/T_T.
double harmonic_rtt_gap(const std::vector<double>& rtts, double service_rate, double q);

}  // namespace bufsim::analysis
