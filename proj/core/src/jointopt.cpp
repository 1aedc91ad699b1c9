#include "cfisac/jointopt.hpp"

#include <algorithm>
#include <limits>

#include "cfisac/real_embedding.hpp"

namespace cfisac {

AffineForm linearize_g(const CVec& h, const CVec& anchor) {
  const cx s = h.dot(anchor);  // h^H anchor
  return {2.0 * re_inner(s * h), -std::norm(s)};
}

AffineForm surrogate_f(const CVec& a, const CMat& anchor) {
  const Eigen::Index m = anchor.rows();
  AffineForm out{RVec::Zero(2 * anchor.size()), 0.0};
  for (Eigen::Index i = 0; i < anchor.cols(); ++i) {
    const cx s = a.dot(anchor.col(i));  // a^H w_i
    out.coef.segment(i * 2 * m, 2 * m) = 2.0 * re_inner(s * a);
    out.constant -= std::norm(s);
  }
  return out;
}

double compute_interference_share(const CMat& H, const CMat& W, int u) {
  if (u < 0 || u >= H.rows()) throw std::out_of_range("UE index out of range");
  const RVec g = (H.row(u) * W).cwiseAbs2().transpose();
  return std::sqrt(std::max(0.0, g.sum() - g(u)));
}

std::vector<std::vector<double>> responsibility_weights(const ChannelSet& channels,
                                                        EtaPolicy policy, int ap_count) {
  const int n_tx = channels.tx_count();
  const int n_ue = channels.ue_count();
  std::vector<std::vector<double>> eta(n_tx, std::vector<double>(n_ue, 1.0 / ap_count));
  if (policy == EtaPolicy::kChannelGain) {
    for (int u = 0; u < n_ue; ++u) {
      double total = 0.0;
      for (int k = 0; k < n_tx; ++k) total += channels.H[k].row(u).squaredNorm();
      for (int k = 0; k < n_tx; ++k) eta[k][u] = channels.H[k].row(u).squaredNorm() / total;
    }
  }
  return eta;
}

SubproblemSpec build_local_spec(const LocalInput& in) {
  const int n_ue = static_cast<int>(in.H.rows());
  const int m = static_cast<int>(in.H.cols());
  const int cols = static_cast<int>(in.anchor.cols());
  SubproblemSpec s;
  s.n = 2 * m * cols;
  const double kappa = in.zeta_in_objective ? in.gain_var : 1.0;
  const AffineForm fbar = surrogate_f(in.steering, in.anchor);
  s.c = (1.0 - in.tradeoff) * kappa * fbar.coef;
  s.offset = (1.0 - in.tradeoff) * kappa * fbar.constant;
  s.has_gamma = true;
  s.p = in.tradeoff;
  s.q = in.admm_penalty;
  s.c0 = in.gamma_prev - in.nu;
  s.slack_penalty = in.slack_penalty;
  for (int u = 0; u < n_ue; ++u) {
    // g~(w_u) >= eta (psi_u + sigma)^2 gamma - eps_u
    const AffineForm g = linearize_g(in.H.row(u).adjoint(), in.anchor.col(u));
    KernelRow r;
    r.a = RVec::Zero(s.n);
    r.a.segment(u * 2 * m, 2 * m) = -g.coef;
    const double level = in.psi[u] + in.noise_std;
    r.b = in.eta[u] * level * level;
    r.d = g.constant;
    r.has_slack = true;
    s.rows.push_back(std::move(r));
  }
  s.balls.push_back({0, s.n, in.p_max});
  return s;
}

LocalResult local_step(const LocalInput& in, const KernelParams& kp) {
  const SubproblemSpec spec = build_local_spec(in);
  KernelPoint warm;
  warm.x = embed(in.anchor);
  warm.gamma = in.gamma_prev;
  const SubproblemSolution sol = solve(spec, warm, kp);
  LocalResult r;
  r.W = unembed(sol.x, static_cast<int>(in.anchor.rows()), static_cast<int>(in.anchor.cols()));
  r.gamma = sol.gamma;
  r.slack = sol.slack;
  r.status = sol.status;
  r.iterations = sol.iterations;
  r.objective = sol.objective;
  for (int u = 0; u < in.H.rows(); ++u) r.psi.push_back(compute_interference_share(in.H, r.W, u));
  return r;
}

GlobalUpdate global_step(const std::vector<int>& expected_aps, const std::vector<ApReport>& reports,
                         const std::vector<double>& nu, double divisor) {
  if (!(divisor > 0.0)) throw std::invalid_argument("floor divisor must be > 0");
  GlobalUpdate g;
  double acc = 0.0;
  for (std::size_t k = 0; k < expected_aps.size(); ++k) {
    const int ap = expected_aps[k];
    auto it = std::find_if(reports.begin(), reports.end(),
                           [ap](const ApReport& r) { return r.ap == ap; });
    if (it == reports.end()) {
      throw std::invalid_argument("missing report from AP " + std::to_string(ap));
    }
    acc += it->gamma + nu[k];
    if (g.psi.empty()) g.psi.assign(it->psi.size(), 0.0);
    if (it->psi.size() != g.psi.size()) {
      throw std::invalid_argument("AP " + std::to_string(ap) + " reported a malformed psi vector");
    }
    for (std::size_t u = 0; u < g.psi.size(); ++u) g.psi[u] += it->psi[u];
  }
  g.gamma = acc / divisor;
  return g;
}

DualUpdate dual_and_penalty_update(const std::vector<double>& nu,
                                   const std::vector<double>& gamma_a, double gamma,
                                   double slack_penalty, double step, double slack_max, int t) {
  DualUpdate d;
  d.nu.resize(nu.size());
  for (std::size_t k = 0; k < nu.size(); ++k) d.nu[k] = nu[k] + (gamma_a[k] - gamma);
  d.slack_penalty = std::min(slack_max, slack_penalty + step * t);
  return d;
}

CMat initial_beamformer(const CMat& H, const CVec& steering, int sensing_streams, double p_max) {
  const Eigen::Index n_ue = H.rows();
  const Eigen::Index m = H.cols();
  const double amp = std::sqrt(p_max / static_cast<double>(n_ue + sensing_streams));
  CMat W(m, n_ue + sensing_streams);
  for (Eigen::Index u = 0; u < n_ue; ++u) {
    const CVec h = H.row(u).adjoint();
    W.col(u) = amp * h / h.norm();
  }
  for (int j = 0; j < sensing_streams; ++j) {
    W.col(n_ue + j) = amp * steering / std::sqrt(static_cast<double>(m));
  }
  return W;
}

double joint_objective(const LinkMetrics& metrics, const BeamformerSet& bf,
                       const std::vector<CVec>& steering, const std::vector<double>& gain_var,
                       double tradeoff) {
  double sens = 0.0;
  for (int k = 0; k < bf.tx_count(); ++k) {
    sens += gain_var[k] * (steering[k].adjoint() * bf.W[k]).squaredNorm();
  }
  return tradeoff * metrics.min_sinr() + (1.0 - tradeoff) * sens;
}

JointOptResult run_jointopt(const ScenarioConfig& config, const ChannelSet& channels,
                            const std::vector<SensingPath>& paths) {
  const SolverParams& sp = config.solver;
  const int n_tx = channels.tx_count();
  const int n_ue = channels.ue_count();
  const int n_s = config.sensing_streams;
  const double sigma = std::sqrt(config.noise_var);
  const std::vector<CVec> steering = target_steering(channels, paths);
  const std::vector<double> zeta2 = target_gain_var(channels, paths);
  const auto eta = responsibility_weights(channels, sp.eta_policy, config.ap_count);
  const double divisor = sp.divide_by_tx_count ? n_tx : config.ap_count;
  const std::vector<int>& aps = channels.tx_aps;

  FronthaulBus bus;
  JointOptResult res;
  AdmmState& st = res.state;
  st.W.resize(n_tx);
  st.nu.assign(n_tx, 0.0);
  st.gamma_a.assign(n_tx, 0.0);
  st.psi_au.assign(n_tx, std::vector<double>(n_ue, 0.0));
  st.slack.assign(n_tx, std::vector<double>(n_ue, 0.0));
  st.slack_penalty = sp.slack_penalty_init;

  // Initialization: each AP reports psi_au^[0] and the largest floor its own
  // W^[0] supports per UE (before scaling by the aggregate interference).
  for (int k = 0; k < n_tx; ++k) {
    st.W[k] = initial_beamformer(channels.H[k], steering[k], n_s, config.p_max_watts);
    std::vector<double> payload;
    for (int u = 0; u < n_ue; ++u) payload.push_back(compute_interference_share(channels.H[k], st.W[k], u));
    for (int u = 0; u < n_ue; ++u) {
      const cx s = channels.H[k].row(u) * st.W[k].col(u);
      payload.push_back(std::norm(s) / eta[k][u]);
    }
    bus.send(make_real_message(aps[k], Direction::kApToCs, Phase::kAdmmInit, std::move(payload)));
  }
  {
    std::vector<double> psi(n_ue, 0.0);
    const auto msgs = bus.receive(kCentralServer, Phase::kAdmmInit);
    for (const auto& msg : msgs) {
      for (int u = 0; u < n_ue; ++u) psi[u] += msg.data[u];
    }
    double g0 = std::numeric_limits<double>::infinity();
    for (const auto& msg : msgs) {
      for (int u = 0; u < n_ue; ++u) {
        const double level = psi[u] + sigma;
        g0 = std::min(g0, msg.data[n_ue + u] / (level * level));
      }
    }
    std::vector<double> payload{g0};
    payload.insert(payload.end(), psi.begin(), psi.end());
    for (int ap : aps) {
      bus.send(make_real_message(ap, Direction::kBroadcast, Phase::kAdmmInit, payload));
    }
  }

  // Each AP's view of the latest broadcast.
  std::vector<double> ap_gamma(n_tx);
  std::vector<std::vector<double>> ap_psi(n_tx);
  auto take_broadcast = [&](Phase phase) {
    for (int k = 0; k < n_tx; ++k) {
      const auto msgs = bus.receive(aps[k], phase);
      const auto& d = msgs.back().data;
      ap_gamma[k] = d[0];
      ap_psi[k].assign(d.begin() + 1, d.end());
    }
  };
  take_broadcast(Phase::kAdmmInit);
  st.gamma = ap_gamma.front();
  st.psi = ap_psi.front();

  BeamformerSet bf;
  bf.ue_count = n_ue;
  BeamformerSet best;
  double best_obj = -std::numeric_limits<double>::infinity();
  KernelParams kp;

  for (int t = 1; t <= sp.max_admm_iterations; ++t) {
    AdmmTraceRow row;
    row.t = t;
    for (int k = 0; k < n_tx; ++k) {
      LocalInput in;
      in.H = channels.H[k];
      in.steering = steering[k];
      in.gain_var = zeta2[k];
      in.anchor = st.W[k];
      in.gamma_prev = ap_gamma[k];
      in.psi = ap_psi[k];
      in.nu = st.nu[k];
      in.slack_penalty = st.slack_penalty;
      in.eta = eta[k];
      in.tradeoff = sp.tradeoff;
      in.admm_penalty = sp.admm_penalty;
      in.zeta_in_objective = sp.zeta_in_local_objective;
      in.p_max = config.p_max_watts;
      in.noise_std = sigma;
      LocalResult lr = local_step(in, kp);
      if (lr.status != SolveStatus::kOptimal) res.solver_inaccurate = true;
      row.solver_iterations.push_back(lr.iterations);
      st.W[k] = std::move(lr.W);
      st.gamma_a[k] = lr.gamma;
      st.psi_au[k] = lr.psi;
      st.slack[k] = lr.slack;
      std::vector<double> payload{lr.gamma};
      payload.insert(payload.end(), lr.psi.begin(), lr.psi.end());
      bus.send(make_real_message(aps[k], Direction::kApToCs, Phase::kAdmmUplink, std::move(payload), t));
    }

    // CS: aggregate, broadcast, mirror the dual update.
    std::vector<ApReport> reports;
    for (const auto& msg : bus.receive(kCentralServer, Phase::kAdmmUplink)) {
      reports.push_back({msg.ap, msg.data[0], std::vector<double>(msg.data.begin() + 1, msg.data.end())});
    }
    const GlobalUpdate g = global_step(aps, reports, st.nu, divisor);
    std::vector<double> payload{g.gamma};
    payload.insert(payload.end(), g.psi.begin(), g.psi.end());
    for (int ap : aps) {
      bus.send(make_real_message(ap, Direction::kBroadcast, Phase::kAdmmDownlink, payload, t));
    }
    take_broadcast(Phase::kAdmmDownlink);

    const DualUpdate du = dual_and_penalty_update(st.nu, st.gamma_a, g.gamma, st.slack_penalty,
                                                  sp.slack_penalty_step, sp.slack_penalty_max, t);
    st.t = t;
    st.gamma = g.gamma;
    st.psi = g.psi;
    st.nu = du.nu;
    st.slack_penalty = du.slack_penalty;

    bf.W = st.W;
    const LinkMetrics lm = evaluate_link(channels, bf, paths, config.noise_var, config.sensing_noise());
    row.gamma = g.gamma;
    for (int k = 0; k < n_tx; ++k) row.residual = std::max(row.residual, std::abs(st.gamma_a[k] - g.gamma));
    row.min_sinr_db = lm.min_sinr_db();
    row.sensing_snr_db = lm.sensing_snr_db();
    row.slack_penalty = st.slack_penalty;
    row.objective = joint_objective(lm, bf, steering, zeta2, sp.tradeoff);
    res.trace.push_back(row);
    res.iterations = t;
    if (row.objective > best_obj) {
      best_obj = row.objective;
      best = bf;
    }
    if (row.residual < sp.consensus_tol) {
      res.converged = true;
      break;
    }
  }

  res.beamformers = res.converged ? bf : best;
  res.metrics = evaluate_link(channels, res.beamformers, paths, config.noise_var,
                              config.sensing_noise());
  res.objective = joint_objective(res.metrics, res.beamformers, steering, zeta2, sp.tradeoff);
  res.ledger = bus.ledger();
  return res;
}

}  // namespace cfisac
