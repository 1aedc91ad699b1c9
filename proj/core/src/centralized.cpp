#include "cfisac/centralized.hpp"

#include <algorithm>
#include <limits>

#include "cfisac/jointopt.hpp"
#include "cfisac/real_embedding.hpp"

namespace cfisac {
namespace {

Message complex_message(int ap, Direction d, Phase p, const CMat& M) {
  Message m;
  m.ap = ap;
  m.direction = d;
  m.phase = p;
  m.descriptor = {static_cast<int>(M.rows()), static_cast<int>(M.cols()), true};
  m.data.reserve(2 * M.size());
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      m.data.push_back(M(i, j).real());
      m.data.push_back(M(i, j).imag());
    }
  }
  return m;
}

CMat decode_complex(const Message& m) {
  CMat M(m.descriptor.rows, m.descriptor.cols);
  std::size_t p = 0;
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    for (Eigen::Index i = 0; i < M.rows(); ++i, p += 2) M(i, j) = cx(m.data[p], m.data[p + 1]);
  }
  return M;
}

double sensing_gain(const std::vector<CMat>& W, const std::vector<CVec>& steering,
                    const std::vector<double>& gain_var) {
  double s = 0.0;
  for (std::size_t k = 0; k < W.size(); ++k) s += gain_var[k] * (steering[k].adjoint() * W[k]).squaredNorm();
  return s;
}

}  // namespace

SubproblemSpec build_centralized_spec(const ChannelSet& channels, const std::vector<CMat>& anchor,
                                      double gamma_anchor, const std::vector<CVec>& steering,
                                      const std::vector<double>& gain_var, double tradeoff,
                                      double noise_var, double p_max, double slack_penalty) {
  const bool with_slack = slack_penalty > 0.0;
  if (!(gamma_anchor > 0.0)) throw std::invalid_argument("SCA anchor floor must be > 0");
  const int n_tx = channels.tx_count();
  const int n_ue = channels.ue_count();
  const int m = channels.antennas();
  const int d = static_cast<int>(anchor.front().cols());
  const int block = 2 * m * d;
  auto at = [&](int k, int i) { return k * block + i * 2 * m; };

  SubproblemSpec s;
  s.n = n_tx * block;
  s.c = RVec::Zero(s.n);
  for (int k = 0; k < n_tx; ++k) {
    const AffineForm f = surrogate_f(steering[k], anchor[k]);
    s.c.segment(k * block, block) = (1.0 - tradeoff) * gain_var[k] * f.coef;
    s.offset += (1.0 - tradeoff) * gain_var[k] * f.constant;
  }
  s.has_gamma = true;
  s.p = tradeoff;
  s.q = 0.0;
  s.c0 = gamma_anchor;
  s.slack_penalty = slack_penalty;

  const double sigma = std::sqrt(noise_var);
  for (int u = 0; u < n_ue; ++u) {
    KernelRow r;
    r.F = RMat::Zero(2 * (d - 1) + 1, s.n);
    r.f = RVec::Zero(r.F.rows());
    r.f(r.F.rows() - 1) = sigma;
    int row = 0;
    for (int i = 0; i < d; ++i) {
      if (i == u) continue;
      for (int k = 0; k < n_tx; ++k) {
        const CVec h = channels.h(k, u);
        r.F.row(row).segment(at(k, i), 2 * m) = re_inner(h).transpose();
        r.F.row(row + 1).segment(at(k, i), 2 * m) = im_inner(h).transpose();
      }
      row += 2;
    }
    cx sbar = 0.0;
    for (int k = 0; k < n_tx; ++k) sbar += (channels.H[k].row(u) * anchor[k].col(u))(0);
    r.a = RVec::Zero(s.n);
    for (int k = 0; k < n_tx; ++k) {
      r.a.segment(at(k, u), 2 * m) = -(2.0 / gamma_anchor) * re_inner(sbar * channels.h(k, u));
    }
    r.b = std::norm(sbar) / (gamma_anchor * gamma_anchor);
    r.d = 0.0;
    r.has_slack = with_slack;
    s.rows.push_back(std::move(r));
  }
  // gamma stays positive so the next anchor is valid.
  KernelRow floor;
  floor.b = -1.0;
  floor.d = -1e-9 * std::max(1.0, gamma_anchor);
  floor.has_slack = false;
  s.rows.push_back(std::move(floor));
  for (int k = 0; k < n_tx; ++k) s.balls.push_back({k * block, block, p_max});
  return s;
}

CentralizedResult solve_centralized(const ScenarioConfig& config, const ChannelSet& channels,
                                    const std::vector<SensingPath>& paths) {
  const SolverParams& sp = config.solver;
  const int n_tx = channels.tx_count();
  const int n_ue = channels.ue_count();
  const int m = channels.antennas();
  const int n_s = config.sensing_streams;
  const double lambda = sp.tradeoff;
  const std::vector<CVec> steering_local = target_steering(channels, paths);
  const std::vector<double> zeta2 = target_gain_var(channels, paths);

  FronthaulBus bus;
  for (int k = 0; k < n_tx; ++k) {
    CMat up(m, n_ue + 1);
    up.leftCols(n_ue) = channels.H[k].transpose();
    up.col(n_ue) = steering_local[k];
    bus.send(complex_message(channels.tx_aps[k], Direction::kApToCs, Phase::kCsiUpload, up));
  }
  // The CS works only from what it received.
  ChannelSet cs;
  std::vector<CVec> steering;
  for (const auto& msg : bus.receive(kCentralServer, Phase::kCsiUpload)) {
    const CMat up = decode_complex(msg);
    cs.tx_aps.push_back(msg.ap);
    cs.H.push_back(up.leftCols(n_ue).transpose());
    steering.push_back(up.col(n_ue));
  }
  cs.path_gain = channels.path_gain;

  CentralizedResult res;
  BeamformerSet bf;
  bf.ue_count = n_ue;
  for (int k = 0; k < n_tx; ++k) {
    bf.W.push_back(initial_beamformer(cs.H[k], steering[k], n_s, config.p_max_watts));
  }
  LinkMetrics lm = evaluate_link(cs, bf, paths, config.noise_var, config.sensing_noise());
  double gamma = lm.min_sinr();
  double obj = lambda * gamma + (1.0 - lambda) * sensing_gain(bf.W, steering, zeta2);
  res.rounds.push_back({0, obj, gamma, lm.min_sinr_db(), lm.sensing_snr_db(), 0, SolveStatus::kOptimal});

  const int d = n_ue + n_s;
  for (int round = 1; round <= sp.sca_max_rounds; ++round) {
    // The anchor satisfies every linearized row, so the round is feasible
    // without slack; a lower gamma moves the start into the interior.
    SubproblemSpec spec = build_centralized_spec(cs, bf.W, gamma, steering, zeta2, lambda,
                                                 config.noise_var, config.p_max_watts, 0.0);
    KernelPoint warm;
    warm.x = RVec(spec.n);
    for (int k = 0; k < n_tx; ++k) embed_into(bf.W[k], warm.x, k * 2 * m * d);
    warm.gamma = 0.5 * gamma;
    try {
      feasible_start(spec, warm);
    } catch (const std::invalid_argument&) {
      // Slack-augmented retry. The penalty must outweigh the gamma reward a
      // unit of slack can buy (lambda / b_u), or gamma runs away.
      spec = build_centralized_spec(cs, bf.W, gamma, steering, zeta2, lambda, config.noise_var,
                                    config.p_max_watts, sp.slack_penalty_max);
      double bmin = std::numeric_limits<double>::infinity();
      for (const auto& r : spec.rows) {
        if (r.has_slack) bmin = std::min(bmin, r.b);
      }
      spec.slack_penalty = std::max(sp.slack_penalty_max, 10.0 * lambda / bmin);
      res.used_slack = true;
    }
    const SubproblemSolution sol = solve(spec, warm);
    if (sol.status != SolveStatus::kOptimal) res.solver_inaccurate = true;

    BeamformerSet next;
    next.ue_count = n_ue;
    for (int k = 0; k < n_tx; ++k) next.W.push_back(unembed(sol.x, m, d, k * 2 * m * d));
    double slack = 0.0;
    for (double s : sol.slack) slack += s;
    const double next_obj = lambda * sol.gamma + (1.0 - lambda) * sensing_gain(next.W, steering, zeta2) -
                            spec.slack_penalty * slack;
    bf = std::move(next);
    lm = evaluate_link(cs, bf, paths, config.noise_var, config.sensing_noise());
    // The minorizer caps gamma at twice its anchor; re-anchoring at the
    // exact SINR of the new beams keeps every row tight and removes the cap.
    gamma = std::max(sol.gamma, lm.min_sinr());
    res.rounds.push_back({round, next_obj, gamma, lm.min_sinr_db(), lm.sensing_snr_db(),
                          sol.iterations, sol.status});
    const double gain = next_obj - obj;
    obj = next_obj;
    if (gain < sp.sca_tolerance * std::max(1.0, std::abs(obj))) {
      res.converged = true;
      break;
    }
  }

  for (int k = 0; k < n_tx; ++k) {
    bus.send(complex_message(cs.tx_aps[k], Direction::kCsToAp, Phase::kBfDownload, bf.W[k]));
  }
  res.beamformers.ue_count = n_ue;
  for (int k = 0; k < n_tx; ++k) {
    res.beamformers.W.push_back(decode_complex(bus.receive(channels.tx_aps[k], Phase::kBfDownload).front()));
  }
  res.gamma = gamma;
  res.metrics = evaluate_link(channels, res.beamformers, paths, config.noise_var,
                              config.sensing_noise());
  res.ledger = bus.ledger();
  return res;
}

}  // namespace cfisac
