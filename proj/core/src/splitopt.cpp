#include "cfisac/splitopt.hpp"

#include <algorithm>
#include <numeric>

namespace cfisac {
namespace {

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

// argmin over [floor, 1] of (r - y)^2 - mu * a * sqrt(r). The derivative
// 2(r - y) - mu a / (2 sqrt r) is increasing, so bisection on its sign.
double prox_component(double y, double a, double mu, double floor) {
  auto deriv = [&](double r) { return 2.0 * (r - y) - mu * a / (2.0 * std::sqrt(r)); };
  if (deriv(1.0) <= 0.0) return 1.0;
  if (deriv(floor) >= 0.0) return floor;
  double lo = floor, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    (deriv(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

UtilityReport compute_report(const CMat& comm_raw, const CMat& sensing_raw, double alpha,
                             const CVec& steering, double gain_var, int ap) {
  const double nc = comm_raw.norm();
  const double ns = sensing_raw.norm();
  if (!(nc > 0.0) || !(ns > 0.0)) {
    throw NumericalError("utility report needs nonzero raw beamformers");
  }
  UtilityReport r;
  r.ap = ap;
  r.alpha_tilde = alpha / nc;
  const double gc = (steering.adjoint() * comm_raw).squaredNorm() / (nc * nc);
  const double gs = (steering.adjoint() * sensing_raw).squaredNorm() / (ns * ns);
  r.delta_tilde = gain_var * (gc - gs);
  return r;
}

double split_objective(const std::vector<double>& delta_tilde, const std::vector<double>& rho,
                       double slack, double penalty) {
  double f = -penalty * slack;
  for (std::size_t i = 0; i < rho.size(); ++i) f += delta_tilde[i] * rho[i];
  return f;
}

void project_split(const std::vector<double>& alpha_tilde, double sqrt_gamma, double floor,
                   const std::vector<double>& y, double e, std::vector<double>& rho,
                   double& slack) {
  const std::size_t n = y.size();
  rho.resize(n);
  auto at = [&](double mu) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rho[i] = prox_component(y[i], alpha_tilde[i], mu, floor);
      lhs += alpha_tilde[i] * std::sqrt(rho[i]);
    }
    slack = std::max(0.0, e + 0.5 * mu);
    return lhs + slack - sqrt_gamma;
  };
  if (at(0.0) >= 0.0) return;
  // The constraint residual is nondecreasing in the multiplier.
  double lo = 0.0, hi = 1.0;
  while (at(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (at(mid) < 0.0 ? lo : hi) = mid;
  }
  at(hi);  // feasible side
}

PgaResult solve_pa(const std::vector<double>& alpha_tilde, const std::vector<double>& delta_tilde,
                   double gamma, double penalty, const PgaParams& params) {
  if (alpha_tilde.size() != delta_tilde.size() || alpha_tilde.empty()) {
    throw std::invalid_argument("PSR problem needs one (alpha~, Delta~) pair per Tx AP");
  }
  check_finite(alpha_tilde, "alpha~");
  check_finite(delta_tilde, "Delta~");
  if (!std::isfinite(gamma) || gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  if (!std::isfinite(penalty) || penalty <= 0.0) {
    throw std::invalid_argument("slack penalty must be > 0");
  }
  const std::size_t n = alpha_tilde.size();
  const double sg = std::sqrt(gamma);
  const double floor = params.rho_floor;

  PgaResult out;
  std::vector<double> rho, trial(n), step(n);
  double slack = 0.0, trial_slack = 0.0;
  project_split(alpha_tilde, sg, floor,
                std::vector<double>(n, std::clamp(params.initial_rho, floor, 1.0)), 0.0, rho,
                slack);
  double f = split_objective(delta_tilde, rho, slack, penalty);
  out.trace.push_back(f);

  auto moved = [&](const std::vector<double>& r, double s) {
    double d = (s - slack) * (s - slack);
    for (std::size_t i = 0; i < n; ++i) d += (r[i] - rho[i]) * (r[i] - rho[i]);
    return std::sqrt(d);
  };

  double t = params.initial_step;
  for (out.iterations = 0; out.iterations < params.max_iterations; ++out.iterations) {
    // Stationarity: gradient mapping at unit step.
    for (std::size_t i = 0; i < n; ++i) step[i] = rho[i] + delta_tilde[i];
    project_split(alpha_tilde, sg, floor, step, slack - penalty, trial, trial_slack);
    if (moved(trial, trial_slack) < params.tolerance) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < n; ++i) step[i] = rho[i] + t * delta_tilde[i];
      project_split(alpha_tilde, sg, floor, step, slack - t * penalty, trial, trial_slack);
      const double ft = split_objective(delta_tilde, trial, trial_slack, penalty);
      const double d = moved(trial, trial_slack);
      if (ft >= f + 0.5 * d * d / t) {
        rho = trial;
        slack = trial_slack;
        f = ft;
        accepted = true;
        break;
      }
      t *= params.shrink;
    }
    if (!accepted) break;
    out.trace.push_back(f);
    t = std::min(t / params.shrink, 1e6);
  }
  out.split.rho = std::move(rho);
  out.split.slack = slack;
  out.split.gamma = gamma;
  out.split.penalty = penalty;
  return out;
}

double sinr_to_utility(double gamma_db, double noise_var, double p_max) {
  return from_db(gamma_db) * noise_var / p_max;
}

SplitOptResult run_splitopt(const ScenarioConfig& config, const ChannelSet& channels,
                            const std::vector<SensingPath>& paths, double gamma_db) {
  const SolverParams& sp = config.solver;
  const int n_tx = channels.tx_count();
  const int n_ue = channels.ue_count();
  const int m = channels.antennas();
  const int n_s = config.sensing_streams;
  const double p_max = config.p_max_watts;
  const std::vector<CVec> steering = target_steering(channels, paths);
  const std::vector<double> zeta2 = target_gain_var(channels, paths);

  FronthaulBus bus;
  SplitOptResult res;

  // Step 1: channel metrics up, their sum back.
  res.channel_metrics.resize(n_tx);
  for (int k = 0; k < n_tx; ++k) {
    res.channel_metrics[k] = channel_metric(channels.H[k]);
    bus.send(make_real_message(channels.tx_aps[k], Direction::kApToCs, Phase::kMetricExchange,
                               {res.channel_metrics[k]}));
  }
  double metric_sum = 0.0;
  for (const auto& msg : bus.receive(kCentralServer, Phase::kMetricExchange)) {
    metric_sum += msg.data.front();
  }
  for (int k = 0; k < n_tx; ++k) {
    bus.send(make_real_message(channels.tx_aps[k], Direction::kBroadcast, Phase::kMetricBroadcast,
                               {metric_sum}));
  }

  // Step 2: local LM-RZF / NS-C and utility reports.
  std::vector<CMat> comm_raw(n_tx), sensing_raw(n_tx);
  res.weights.resize(n_tx);
  for (int k = 0; k < n_tx; ++k) {
    const int ap = channels.tx_aps[k];
    const double sum = bus.receive(ap, Phase::kMetricBroadcast).front().data.front();
    if (!(sum > 0.0)) throw NumericalError("all channel metrics are zero: no usable channel");
    const double alpha = res.channel_metrics[k] / sum;
    res.weights[k] = alpha;
    const CMat& H = channels.H[k];
    const CMat target = alpha * CMat::Identity(n_ue, n_ue);
    const CMat P = null_projection(H, default_projection_reg(H, sp.projection_reg_scale), m);
    sensing_raw[k] = nsc_raw(P, steering[k], n_s);
    UtilityReport rep;
    if (alpha > 0.0) {
      comm_raw[k] = lm_rzf(H, target, default_rzf_reg(H, sp.rzf_reg_scale));
      rep = compute_report(comm_raw[k], sensing_raw[k], alpha, steering[k], zeta2[k], ap);
    } else {
      // A rank-deficient AP gets no communication share: its whole budget
      // goes to sensing.
      comm_raw[k] = CMat::Zero(m, n_ue);
      const double ns = sensing_raw[k].norm();
      rep.ap = ap;
      rep.delta_tilde = -zeta2[k] * (steering[k].adjoint() * sensing_raw[k]).squaredNorm() / (ns * ns);
    }
    bus.send(make_real_message(ap, Direction::kApToCs, Phase::kUtilityReport,
                               {rep.alpha_tilde, rep.delta_tilde}));
  }

  // Step 3: CS solves for the PSRs.
  std::vector<double> at, dt;
  for (const auto& msg : bus.receive(kCentralServer, Phase::kUtilityReport)) {
    res.reports.push_back({msg.ap, msg.data[0], msg.data[1]});
    at.push_back(msg.data[0]);
    dt.push_back(msg.data[1]);
  }
  const double gamma = sinr_to_utility(gamma_db, config.noise_var, p_max);
  if (sp.fixed_psr) {
    res.split.rho.assign(n_tx, *sp.fixed_psr);
    res.split.gamma = gamma;
    res.split.penalty = sp.split_penalty;
    double lhs = 0.0;
    for (int k = 0; k < n_tx; ++k) lhs += at[k] * std::sqrt(*sp.fixed_psr);
    res.split.slack = std::max(0.0, std::sqrt(gamma) - lhs);
  } else {
    PgaResult pga = solve_pa(at, dt, gamma, sp.split_penalty, sp.pga);
    res.split = std::move(pga.split);
    res.trace = std::move(pga.trace);
    res.pga_converged = pga.converged;
  }
  for (std::size_t i = 0; i < res.reports.size(); ++i) {
    bus.send(make_real_message(res.reports[i].ap, Direction::kCsToAp, Phase::kPsrAssignment,
                               {res.split.rho[i]}));
  }

  // Step 4: APs assemble W_a with the split budgets.
  res.beamformers.ue_count = n_ue;
  res.beamformers.W.resize(n_tx);
  for (int k = 0; k < n_tx; ++k) {
    const double rho = bus.receive(channels.tx_aps[k], Phase::kPsrAssignment).front().data.front();
    CMat W(m, n_ue + n_s);
    W.leftCols(n_ue) = comm_raw[k].norm() > 0.0 ? normalize_power(comm_raw[k], rho * p_max)
                                                 : CMat::Zero(m, n_ue);
    W.rightCols(n_s) = normalize_power(sensing_raw[k], (1.0 - rho) * p_max);
    res.beamformers.W[k] = std::move(W);
  }

  res.metrics = evaluate_link(channels, res.beamformers, paths, config.noise_var,
                              config.sensing_noise());
  res.ledger = bus.ledger();
  return res;
}

}  // namespace cfisac
