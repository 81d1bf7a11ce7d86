#include "bufsim/analysis/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bufsim/sim/rng.hpp"

namespace bufsim::analysis {

FlowEnsemble FlowEnsemble::identical(std::size_t n, double rtt, double beta) {
  FlowEnsemble e;
  e.rtts.assign(n, rtt);
  e.betas.assign(n, beta);
  return e;
}

void FlowEnsemble::validate() const {
  if (rtts.empty()) throw std::invalid_argument("ensemble needs at least one flow");
  auto check_size = [&](const std::vector<double>& v, const char* what) {
    if (!v.empty() && v.size() != rtts.size()) throw std::invalid_argument(std::string(what) + " size mismatch");
  };
  check_size(alphas, "alphas");
  check_size(betas, "betas");
  check_size(backoff_prob, "backoff_prob");
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(rtts[i] > 0)) throw std::invalid_argument("flow rtt must be positive");
    if (!(alpha(i) > 0)) throw std::invalid_argument("flow alpha must be positive");
    if (!(beta(i) > 0 && beta(i) <= 1)) throw std::invalid_argument("flow beta must lie in (0,1]");
    double p = backoff_probability(i);
    if (!(p >= 0 && p <= 1)) throw std::invalid_argument("backoff probability must lie in [0,1]");
  }
}

double FlowEnsemble::expected_beta_t() const {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    double p = backoff_probability(i);
    num += alpha(i) * (p * beta(i) + (1.0 - p));
    den += alpha(i);
  }
  return num / den;
}

Aggregates ensemble_derive(const FlowEnsemble& ens) {
  ens.validate();
  Aggregates g;
  double inv_sum = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    g.alpha_t += ens.alpha(i);
    g.a_t += ens.alpha(i) / ens.rtts[i];
    inv_sum += 1.0 / ens.rtts[i];
  }
  g.t_t = static_cast<double>(ens.size()) / inv_sum;
  return g;
}

ModelParams ModelParams::from_ensemble(const FlowEnsemble& ens, double a, double b, double service_rate) {
  Aggregates g = ensemble_derive(ens);
  ModelParams mp;
  mp.a = a;
  mp.b = b;
  mp.service_rate = service_rate;
  mp.alpha_t = g.alpha_t;
  mp.a_t = g.a_t;
  mp.t_t = g.t_t;
  mp.beta_t = ens.expected_beta_t();
  return mp;
}

void ModelParams::validate() const {
  if (!(a >= 0 && b >= 0)) throw std::invalid_argument("model gains a, b must be non-negative");
  if (!(service_rate >= 0)) throw std::invalid_argument("model service_rate must be non-negative");
  if (!(alpha_t > 0)) throw std::invalid_argument("model alpha_t must be positive");
  if (!(a_t > 0)) throw std::invalid_argument("model a_t must be positive");
  if (!(t_t > 0)) throw std::invalid_argument("model t_t must be positive");
  if (!(beta_t > 0 && beta_t <= 1)) throw std::invalid_argument("model beta_t must lie in (0,1]");
  if (!(delta >= 0 && delta < 1)) throw std::invalid_argument("model delta must lie in [0,1)");
  if (!(p_e >= 0 && p_e <= 1)) throw std::invalid_argument("model p_e must lie in [0,1]");
  if (!(q_min >= 0 && q_max >= q_min)) throw std::invalid_argument("model q bounds invalid");
}

Coefficients lambda_gamma(const ModelParams& mp) {
  mp.validate();
  double r = mp.rtt_ratio();
  double den = mp.alpha_t + mp.b;
  Coefficients c;
  c.lambda_e = (mp.alpha_t - mp.a * mp.beta_t * r) / den;
  c.lambda_f = (mp.alpha_t + mp.b * mp.delta) / den;
  c.gamma_e = mp.a * (1.0 - mp.beta_t) / den * r;
  return c;
}

Stability is_stable(const ModelParams& mp) {
  mp.validate();
  Stability s;
  s.margin = 2.0 * mp.alpha_t + mp.b - mp.a;
  s.stable = s.margin > 0;
  s.practical = mp.a < 10.0 + mp.b;
  return s;
}

double fixed_point(const ModelParams& mp) {
  mp.validate();
  if (mp.a == 0.0) throw std::invalid_argument("fixed point undefined for a = 0");
  double den = mp.b / mp.a + mp.beta_t;
  if (den == 0.0) throw std::invalid_argument("fixed point undefined: b/a + beta_t = 0");
  return (1.0 - mp.beta_t) / den * mp.service_rate * mp.t_t;
}

UtilizationBounds utilization_bounds(const ModelParams& mp) {
  mp.validate();
  if (mp.a == 0.0) return {0.0, 0.0};
  double ratio = mp.b / mp.a;
  return {1.0 / (1.0 + ratio * mp.rtt_ratio()), 1.0 / (1.0 + ratio)};
}

namespace {

ModelParams with_ensemble(ModelParams mp, const FlowEnsemble& ens) {
  Aggregates g = ensemble_derive(ens);
  mp.alpha_t = g.alpha_t;
  mp.a_t = g.a_t;
  mp.t_t = g.t_t;
  mp.beta_t = ens.expected_beta_t();
  return mp;
}

double step(const ModelParams& mp, double q, double p_e, double delta) {
  ModelParams m = mp;
  m.p_e = p_e;
  m.delta = delta;
  Coefficients c = lambda_gamma(m);
  double lambda = p_e * c.lambda_e + (1.0 - p_e) * c.lambda_f;
  double gamma = p_e * c.gamma_e;
  return std::max(0.0, lambda * q + gamma * mp.service_rate * mp.t_t);
}

}  // namespace

std::vector<double> recursion_trajectory(const ModelParams& mp, const FlowEnsemble& ens, double q0, int k_max) {
  if (!(q0 >= 0)) throw std::invalid_argument("q0 must be non-negative");
  ModelParams m = with_ensemble(mp, ens);
  std::vector<double> out{q0};
  for (int k = 0; k < k_max; ++k) out.push_back(step(m, out.back(), m.p_e, m.delta));
  return out;
}

std::vector<double> recursion_trajectory(const ModelParams& mp, const FlowEnsemble& ens, double q0,
                                         const std::vector<EpochMoments>& moments) {
  if (!(q0 >= 0)) throw std::invalid_argument("q0 must be non-negative");
  ModelParams m = with_ensemble(mp, ens);
  std::vector<double> out{q0};
  for (const EpochMoments& em : moments) out.push_back(step(m, out.back(), em.p_e, em.delta));
  return out;
}

OracleResult epoch_oracle(const FlowEnsemble& ens, const ModelParams& mp, double q0, int k_max, int paths,
                          std::uint64_t seed, bool keep_paths) {
  if (paths < 1) throw std::invalid_argument("oracle needs at least one path");
  if (!(q0 >= 0)) throw std::invalid_argument("q0 must be non-negative");
  ModelParams m = with_ensemble(mp, ens);
  m.validate();
  const double bdp = m.service_rate * m.t_t;
  const std::size_t n = ens.size();

  OracleResult res;
  res.mean.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  std::vector<double> drained(static_cast<std::size_t>(k_max), 0.0);
  std::vector<double> delta_sum(static_cast<std::size_t>(k_max), 0.0);
  if (keep_paths) res.paths.reserve(static_cast<std::size_t>(paths));

  for (int p = 0; p < paths; ++p) {
    sim::RngStream rng(seed, static_cast<std::uint64_t>(p));
    std::vector<double> path{q0};
    double q = q0;
    res.mean[0] += q;
    for (int k = 0; k < k_max; ++k) {
      double num = 0.0;
      double den = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        bool backs_off = rng.bernoulli(ens.backoff_probability(i));
        num += ens.alpha(i) * (backs_off ? ens.beta(i) : 1.0);
        den += ens.alpha(i);
      }
      double beta = num / den;
      double residual = beta * q - (1.0 - beta) * bdp;
      double next;
      if (residual <= 0.0) {
        // queue drains: idle until the aggregate rate climbs back to E[B]
        double t_idle = std::max(0.0, ((1.0 - beta) * m.service_rate - beta * q / m.t_t) / m.a_t);
        next = (q + m.a * t_idle) * m.alpha_t / (m.alpha_t + m.b);
        drained[static_cast<std::size_t>(k)] += 1.0;
      } else {
        next = (m.alpha_t * q + m.b * residual) / (m.alpha_t + m.b);
        delta_sum[static_cast<std::size_t>(k)] += q > 0 ? residual / q : 0.0;
      }
      q = std::clamp(next, m.q_min, m.q_max);
      res.mean[static_cast<std::size_t>(k) + 1] += q;
      if (keep_paths) path.push_back(q);
    }
    if (keep_paths) res.paths.push_back(std::move(path));
  }
  for (double& v : res.mean) v /= paths;
  for (int k = 0; k < k_max; ++k) {
    double d = drained[static_cast<std::size_t>(k)];
    double full = paths - d;
    res.moments.push_back({d / paths, full > 0 ? delta_sum[static_cast<std::size_t>(k)] / full : 0.0});
  }
  return res;
}

double harmonic_rtt_gap(const std::vector<double>& rtts, double service_rate, double q) {
  if (rtts.empty()) throw std::invalid_argument("need at least one rtt");
  if (!(service_rate > 0)) throw std::invalid_argument("service_rate must be positive");
  double weight_sum = 0.0;
  double weighted = 0.0;
  double inv_sum = 0.0;
  for (double t : rtts) {
    if (!(t > 0)) throw std::invalid_argument("rtt must be positive");
    double w = 1.0 / (t + q / service_rate);
    weight_sum += w;
    weighted += w / t;
    inv_sum += 1.0 / t;
  }
  double exact = weighted / weight_sum;
  double approx = inv_sum / static_cast<double>(rtts.size());
  return std::abs(exact - approx) / approx;
}

}  // namespace bufsim::analysis
