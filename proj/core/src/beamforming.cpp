#include "cfisac/beamforming.hpp"

#include <numeric>

namespace cfisac {
namespace {

// Solves A X = B for Hermitian A, refusing numerically singular systems.
CMat hermitian_solve(const CMat& A, const CMat& B, const char* what) {
  Eigen::LDLT<CMat> ldlt(A);
  const double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
  const auto d = ldlt.vectorD().real();
  const double dmin = d.size() ? d.minCoeff() : 1.0;
  if (ldlt.info() != Eigen::Success || !(dmin > 1e-13 * scale)) {
    throw NumericalError(std::string(what) +
                         ": system is singular; use a strictly positive regularizer");
  }
  return ldlt.solve(B);
}

}  // namespace

std::vector<double> compute_weights(const std::vector<double>& metrics) {
  double total = 0.0;
  for (double m : metrics) {
    if (m < 0.0 || !std::isfinite(m)) throw std::invalid_argument("channel metrics must be >= 0");
    total += m;
  }
  if (!(total > 0.0)) throw NumericalError("all channel metrics are zero: no usable channel");
  std::vector<double> w(metrics.size());
  for (std::size_t i = 0; i < metrics.size(); ++i) w[i] = metrics[i] / total;
  return w;
}

double default_rzf_reg(const CMat& H, double scale) {
  return H.cols() == 0 ? 0.0 : scale * H.squaredNorm() / static_cast<double>(H.cols());
}

double default_projection_reg(const CMat& H, double scale) {
  return H.rows() == 0 ? 0.0 : scale * H.squaredNorm() / static_cast<double>(H.rows());
}

CMat lm_rzf(const CMat& H, const CMat& target, double reg) {
  if (reg < 0.0) throw std::invalid_argument("RZF regularizer must be >= 0");
  if (target.rows() != H.rows()) throw std::invalid_argument("RZF target rows must equal N_ue");
  const Eigen::Index n_ue = H.rows();
  const Eigen::Index m = H.cols();
  if (n_ue <= m) {
    // (H^H H + reg I)^{-1} H^H = H^H (H H^H + reg I)^{-1}
    CMat gram = H * H.adjoint();
    gram.diagonal().array() += reg;
    return H.adjoint() * hermitian_solve(gram, target, "LM-RZF");
  }
  CMat gram = H.adjoint() * H;
  gram.diagonal().array() += reg;
  return hermitian_solve(gram, H.adjoint() * target, "LM-RZF");
}

CMat normalize_power(const CMat& W, double budget) {
  if (budget < 0.0) throw std::invalid_argument("power budget must be >= 0");
  const double norm = W.norm();
  if (!(norm > 0.0)) throw NumericalError("cannot normalize a zero beamformer");
  return W * (std::sqrt(budget) / norm);
}

CMat null_projection(const CMat& H, double reg, int antennas) {
  if (reg < 0.0) throw std::invalid_argument("projection regularizer must be >= 0");
  CMat P = CMat::Identity(antennas, antennas);
  if (H.rows() == 0) return P;
  if (H.cols() != antennas) throw std::invalid_argument("projection: H has wrong column count");
  CMat gram = H * H.adjoint();
  gram.diagonal().array() += reg;
  P -= H.adjoint() * hermitian_solve(gram, H, "null-space projection");
  return P;
}

CMat nsc_raw(const CMat& projector, const CVec& steering, int streams) {
  if (streams < 1) throw std::invalid_argument("need at least one sensing stream");
  const CVec w = projector * steering;
  if (!(w.norm() > 1e-10 * steering.norm())) {
    throw NumericalError("sensing direction unservable: steering vector lies in the row space of H");
  }
  return w.replicate(1, streams);
}

CMat nsc_beamformer(const CMat& projector, const CVec& steering, int streams, double budget) {
  return normalize_power(nsc_raw(projector, steering, streams), budget);
}

CMat effective_coupling(const std::vector<CMat>& H, const std::vector<CMat>& W) {
  if (H.size() != W.size() || H.empty()) {
    throw std::invalid_argument("coupling: need one precoder per channel matrix");
  }
  CMat C = CMat::Zero(H.front().rows(), W.front().cols());
  for (std::size_t k = 0; k < H.size(); ++k) {
    if (H[k].cols() != W[k].rows() || H[k].rows() != C.rows() || W[k].cols() != C.cols()) {
      throw std::invalid_argument("coupling: dimension mismatch at slot " + std::to_string(k));
    }
    C.noalias() += H[k] * W[k];
  }
  return C;
}

CMat ideal_coupling(int ue_count, int sensing_streams) {
  CMat C = CMat::Zero(ue_count, ue_count + sensing_streams);
  C.leftCols(ue_count).setIdentity();
  return C;
}

}  // namespace cfisac
