#include <gtest/gtest.h>

#include <random>

#include "cfisac/beamforming.hpp"
#include "cfisac/channel.hpp"
#include "cfisac/metrics.hpp"
#include "oracles/svd.hpp"
#include "support.hpp"

using namespace cfisac;
using testing_support::random_cmat;
using testing_support::random_cvec;

TEST(Weights, Symmetric) {
  const auto w = compute_weights({1, 1, 1});
  for (double x : w) EXPECT_NEAR(x, 1.0 / 3, 1e-15);
}

TEST(Weights, ZeroMetricExcluded) {
  EXPECT_EQ(compute_weights({0.5, 0}), (std::vector<double>{1.0, 0.0}));
}

TEST(Weights, AlreadyNormalized) {
  const auto w = compute_weights({0.2, 0.3, 0.5});
  EXPECT_NEAR(w[0], 0.2, 1e-15);
  EXPECT_NEAR(w[1], 0.3, 1e-15);
  EXPECT_NEAR(w[2], 0.5, 1e-15);
}

TEST(Weights, AllZeroRejected) { EXPECT_THROW(compute_weights({0, 0, 0}), NumericalError); }

TEST(LmRzf, SingleUeRankOne) {
  CMat H(1, 3);
  H << cx(1, 1), cx(0, 1), cx(1, 0);
  H *= 2.0 / H.norm();
  const CMat W = lm_rzf(H, CMat::Constant(1, 1, 1.0), 0.0);
  EXPECT_LT((W - H.adjoint() / 4.0).norm(), 1e-14);
}

TEST(LmRzf, OrthonormalRowsGiveScaledAdjoint) {
  std::mt19937_64 rng(4);
  const CMat Q = Eigen::HouseholderQR<CMat>(random_cmat(rng, 6, 6)).householderQ();
  const CMat H = Q.topRows(3);
  const double alpha = 0.37;
  const CMat W = lm_rzf(H, alpha * CMat::Identity(3, 3), 0.0);
  EXPECT_LT((W - alpha * H.adjoint()).norm(), 1e-12);
}

TEST(LmRzf, MatchesNormalEquations) {
  std::mt19937_64 rng(5);
  const CMat H = random_cmat(rng, 4, 8);
  const CMat C = random_cmat(rng, 4, 5);
  const double reg = 0.1;
  const CMat W = lm_rzf(H, C, reg);
  // Direct M x M solve of (H^H H + reg I) W = H^H C.
  const CMat A = H.adjoint() * H + reg * CMat::Identity(8, 8);
  const CMat ref = A.fullPivLu().solve(H.adjoint() * C);
  EXPECT_NEAR((H * W - C).norm(), (H * ref - C).norm(), 1e-8);
  EXPECT_LT((W - ref).norm(), 1e-8);
}

TEST(LmRzf, TallChannelUsesOtherGram) {
  std::mt19937_64 rng(6);
  const CMat H = random_cmat(rng, 6, 3);
  const CMat C = random_cmat(rng, 6, 7);
  const CMat W = lm_rzf(H, C, 0.05);
  const CMat ref = (H.adjoint() * H + 0.05 * CMat::Identity(3, 3)).fullPivLu().solve(H.adjoint() * C);
  EXPECT_LT((W - ref).norm(), 1e-10);
}

TEST(LmRzf, SingularWithoutRegularizerRejected) {
  std::mt19937_64 rng(7);
  CMat H = random_cmat(rng, 3, 6);
  H.row(2) = H.row(1);
  try {
    lm_rzf(H, CMat::Identity(3, 3), 0.0);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("regularizer"), std::string::npos);
  }
  EXPECT_NO_THROW(lm_rzf(H, CMat::Identity(3, 3), 1e-3));
}

TEST(Normalize, HitsBudget) {
  std::mt19937_64 rng(8);
  const CMat W = normalize_power(random_cmat(rng, 5, 3), 4.0);
  EXPECT_NEAR(W.squaredNorm(), 4.0, 1e-12);
}

TEST(Normalize, ZeroBudgetGivesZero) {
  std::mt19937_64 rng(9);
  EXPECT_EQ(normalize_power(random_cmat(rng, 4, 2), 0.0).norm(), 0.0);
}

TEST(Normalize, UnitInputUnchanged) {
  std::mt19937_64 rng(10);
  CMat W = random_cmat(rng, 4, 2);
  W /= W.norm();
  EXPECT_LT((normalize_power(W, 1.0) - W).norm(), 1e-15);
}

TEST(Normalize, ZeroMatrixRejected) {
  EXPECT_THROW(normalize_power(CMat::Zero(3, 2), 1.0), NumericalError);
}

TEST(Projection, EmptyChannelIsIdentity) {
  EXPECT_TRUE(null_projection(CMat(0, 5), 0.0, 5).isIdentity());
}

TEST(Projection, ExactProjectorIdentities) {
  std::mt19937_64 rng(12);
  const CMat H = random_cmat(rng, 4, 9);
  const CMat P = null_projection(H, 0.0, 9);
  EXPECT_LE((H * P).norm(), 1e-9 * H.norm());
  EXPECT_LT((P * P - P).norm(), 1e-9);
  EXPECT_LT((P - P.adjoint()).norm(), 1e-9);
}

TEST(Projection, SquareInvertibleIsZero) {
  std::mt19937_64 rng(13);
  EXPECT_LT(null_projection(random_cmat(rng, 4, 4), 0.0, 4).norm(), 1e-10);
}

TEST(Projection, SingularWithoutRegularizerRejected) {
  std::mt19937_64 rng(14);
  CMat H = random_cmat(rng, 3, 6);
  H.row(0) = 2.0 * H.row(1);
  EXPECT_THROW(null_projection(H, 0.0, 6), NumericalError);
}

TEST(Nsc, EmptyChannelIsConjugateBeam) {
  std::mt19937_64 rng(15);
  const CVec a = random_cvec(rng, 6);
  const CMat w = nsc_raw(null_projection(CMat(0, 6), 0.0, 6), a, 1);
  EXPECT_LT((w.col(0) - a).norm(), 1e-15);
}

TEST(Nsc, SteeringAlreadyInNullSpace) {
  CMat H = CMat::Zero(2, 4);
  H(0, 0) = 1.0;
  H(1, 1) = cx(0, 2);
  CVec a = CVec::Zero(4);
  a(2) = cx(0.6, 0.8);
  a(3) = 1.0;
  const CMat w = nsc_raw(null_projection(H, 0.0, 4), a, 2);
  ASSERT_EQ(w.cols(), 2);
  EXPECT_LT((w.col(0) - a).norm(), 1e-14);
  EXPECT_LT((w.col(1) - a).norm(), 1e-14);
}

TEST(Nsc, SteeringInRowSpaceRejected) {
  std::mt19937_64 rng(16);
  const CMat H = random_cmat(rng, 3, 5);
  const CVec a = H.adjoint() * random_cvec(rng, 3);
  try {
    nsc_raw(null_projection(H, 0.0, 5), a, 1);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("unservable"), std::string::npos);
  }
}

TEST(Nsc, LeakageBelowBound) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i) {
    const CMat H = random_cmat(rng, 6, 10);
    const CVec a = uca_steering(0.3 * i, -0.01, 10, 0.0857);
    const CMat P = null_projection(H, 1e-8, 10);
    const CMat w = nsc_beamformer(P, a, 1, 0.5);
    EXPECT_NEAR(w.squaredNorm(), 0.5, 1e-12);
    EXPECT_LE((H * w.col(0)).norm() / w.col(0).norm(), 1e-4 * oracle::sigma_max(H));
  }
}

TEST(Coupling, ExactZeroForcingIsIdeal) {
  std::mt19937_64 rng(18);
  const int n_ue = 3, m = 8;
  const std::vector<double> alpha{0.5, 0.3, 0.2};
  std::vector<CMat> H, W;
  for (double al : alpha) {
    H.push_back(random_cmat(rng, n_ue, m));
    CMat Wa(m, n_ue + 1);
    Wa.leftCols(n_ue) = lm_rzf(H.back(), al * CMat::Identity(n_ue, n_ue), 0.0);
    Wa.rightCols(1) = nsc_raw(null_projection(H.back(), 0.0, m), random_cvec(rng, m), 1);
    W.push_back(Wa);
  }
  const CMat C = effective_coupling(H, W);
  EXPECT_LT((C.leftCols(n_ue) - CMat::Identity(n_ue, n_ue)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT(C.rightCols(1).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_TRUE(ideal_coupling(n_ue, 1).leftCols(n_ue).isIdentity());
  EXPECT_TRUE(ideal_coupling(n_ue, 1).rightCols(1).isZero());
}

TEST(Coupling, ZeroPrecoderGivesZero) {
  std::mt19937_64 rng(19);
  EXPECT_EQ(effective_coupling({random_cmat(rng, 2, 4)}, {CMat::Zero(4, 3)}).norm(), 0.0);
}

TEST(Coupling, MatchesTripleLoop) {
  std::mt19937_64 rng(20);
  const int n_ap = 4, n_ue = 5, m = 6, d = 7;
  std::vector<CMat> H, W;
  for (int a = 0; a < n_ap; ++a) {
    H.push_back(random_cmat(rng, n_ue, m));
    W.push_back(random_cmat(rng, m, d));
  }
  const CMat C = effective_coupling(H, W);
  for (int u = 0; u < n_ue; ++u) {
    for (int i = 0; i < d; ++i) {
      cx acc = 0.0;
      for (int a = 0; a < n_ap; ++a)
        for (int k = 0; k < m; ++k) acc += H[a](u, k) * W[a](k, i);
      EXPECT_LT(std::abs(C(u, i) - acc), 1e-12);
    }
  }
}

TEST(Coupling, DimensionMismatchRejected) {
  EXPECT_THROW(effective_coupling({CMat::Zero(2, 4)}, {CMat::Zero(3, 3)}), std::invalid_argument);
}

TEST(LmRzf, InterferenceSuppressedWithRoom) {
  std::mt19937_64 rng(21);
  const int n_ue = 4, n_s = 1, m = 8;
  for (int i = 0; i < 10; ++i) {
    const CMat H = random_cmat(rng, n_ue, m);
    CMat W(m, n_ue + n_s);
    W.leftCols(n_ue) = lm_rzf(H, CMat::Identity(n_ue, n_ue), default_rzf_reg(H));
    W.rightCols(n_s) = nsc_raw(null_projection(H, default_projection_reg(H), m), random_cvec(rng, m), n_s);
    for (int u = 0; u < n_ue; ++u) {
      const UePower p = comm_power(u, {H}, {W}, 0.0);
      EXPECT_LT(to_db(p.mui + p.s2ci), to_db(p.cds) - 40.0);
    }
  }
}
