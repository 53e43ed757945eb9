// phest: parametric channel estimation for uplink OFDMA with hopping pilots
// Copyright (C) 2026 the phest authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "phest/estimator.hpp"
#include "phest/frame.hpp"

using namespace phest;
using estimator::CorrAccumulator;
using numerics::Complex;
using numerics::ComplexMatrix;
using numerics::ComplexVector;
using numerics::RealVector;

namespace {

const std::vector<double> kVehADelays = {0.0, 3.1, 7.1, 10.9, 17.3, 25.1};

std::vector<double> veh_a_powers() {
  const auto p = channel::veh_a_profile(10e6);
  return p.powers_lin;
}

std::vector<int> reference_pilots(int n_sch, frame::UserRole role, bool odd = false) {
  frame::SystemConfig cfg;
  const auto alloc = frame::random_tile_allocation(cfg, n_sch, 515, 0);
  const auto pattern = frame::pilot_pattern(alloc, role);
  return odd ? pattern.pilots_odd : pattern.pilots_even;
}

}  // namespace

TEST_CASE("ls_pilot_estimate") {
  ComplexVector rx(2), tx(2);
  rx << Complex(0.3, 1.0), Complex(1.0, 1.0);
  tx << Complex(1.0, 0.0), Complex(0.0, 1.0);
  const ComplexVector est = estimator::ls_pilot_estimate(rx, tx);
  CHECK(std::abs(est[0] - Complex(0.3, 1.0)) < 1e-15);
  CHECK(std::abs(est[1] - Complex(1.0, -1.0)) < 1e-15);

  ComplexVector zero_tx(1);
  zero_tx << Complex(0.0, 0.0);
  ComplexVector one(1);
  one << Complex(1.0, 0.0);
  CHECK_THROWS_AS(estimator::ls_pilot_estimate(one, zero_tx), DomainError);
  CHECK_THROWS_AS(estimator::ls_pilot_estimate(rx, one), DimensionError);
}

TEST_CASE("stack_pair") {
  ComplexVector even(2), odd(2);
  even << Complex(1.0, 0.0), Complex(2.0, 0.0);
  odd << Complex(3.0, 0.0), Complex(4.0, 0.0);
  const auto s = estimator::stack_pair(even, odd, 7);
  REQUIRE(s.vector.size() == 4);
  CHECK(s.pair_index == 7);
  CHECK((s.vector.head(2) - even).norm() == 0.0);
  CHECK((s.vector.tail(2) - odd).norm() == 0.0);
  ComplexVector three(3);
  three.setZero();
  CHECK_THROWS_AS(estimator::stack_pair(even, three), DimensionError);
}

TEST_CASE("CorrAccumulator rank-one and duplication") {
  ComplexVector v(3);
  v << Complex(1.0, 1.0), Complex(0.0, -2.0), Complex(0.5, 0.0);
  CorrAccumulator acc(3);
  acc.accumulate(v);
  const ComplexMatrix r1 = acc.finalize();
  CHECK((r1 - ComplexMatrix(v * v.adjoint())).norm() < 1e-14);
  acc.accumulate(v);
  acc.accumulate(v);
  CHECK((acc.finalize() - r1).norm() < 1e-14);

  ComplexVector wrong(2);
  wrong.setZero();
  CHECK_THROWS_AS(acc.accumulate(wrong), DimensionError);
  CHECK_THROWS_AS(CorrAccumulator(3).finalize(), DegenerateInputError);
}

TEST_CASE("CorrAccumulator converges to the analytic covariance") {
  const std::vector<int> pilots = {0, 13, 29, 41, 60, 77, 93, 110};
  const std::vector<double> taus = {2.0, 6.5};
  const std::vector<double> powers = {0.6, 0.4};
  const double eta = 0.95;
  const double noise_var = 0.1;
  const int nu = 3;
  const int n_fft = 128;
  const ComplexMatrix expected =
      oracles::stacked_covariance(pilots, taus, powers, eta, noise_var, nu, n_fft);

  const oracles::Matrix f = oracles::vandermonde(pilots, taus, n_fft);
  const oracles::Matrix f_odd = f * oracles::phase_twist(taus, nu, n_fft);
  SplitMix64 rng(2718);
  CorrAccumulator acc(16);
  for (int s = 0; s < 10000; ++s) {
    const ComplexVector z1 = numerics::complex_gaussian(2, 1.0, rng);
    const ComplexVector z2 = numerics::complex_gaussian(2, 1.0, rng);
    ComplexVector h_even(2), h_odd(2);
    for (int l = 0; l < 2; ++l) {
      const double amp = std::sqrt(powers[l]);
      h_even[l] = amp * z1[l];
      h_odd[l] = amp * (eta * z1[l] + std::sqrt(1.0 - eta * eta) * z2[l]);
    }
    ComplexVector snap(16);
    snap.head(8) = f * h_even;
    snap.tail(8) = f_odd * h_odd;
    snap += numerics::complex_gaussian(16, noise_var, rng);
    acc.accumulate(snap);
  }
  const ComplexMatrix r = acc.finalize();
  CHECK((r - expected).norm() / expected.norm() < 0.1);

  // The finalized matrix is Hermitian and positive semidefinite.
  CHECK((r - r.adjoint()).norm() < 1e-12 * r.norm());
  const auto ep = numerics::hermitian_evd(r);
  CHECK(ep.values[ep.values.size() - 1] > -1e-9 * ep.values[0]);
}

TEST_CASE("estimate_eta block identities") {
  // Equal blocks give eta = 1.
  const ComplexMatrix m = oracles::random_hermitian(4, 3);
  ComplexMatrix r(8, 8);
  r << m, m, m, m;
  CHECK(estimator::estimate_eta(r) == doctest::Approx(1.0));

  CHECK_THROWS_AS(estimator::estimate_eta(ComplexMatrix::Zero(8, 8)), DegenerateInputError);
  CHECK_THROWS_AS(estimator::estimate_eta(ComplexMatrix::Zero(3, 3)), DimensionError);
}

TEST_CASE("estimate_eta is exact for equispaced pilots dividing N") {
  std::vector<int> pilots(128);
  for (int i = 0; i < 128; ++i) pilots[i] = 8 * i;
  const std::vector<double> taus = {0.0, 5.0, 17.0, 40.0};
  const std::vector<double> powers = {0.4, 0.3, 0.2, 0.1};
  for (double eta : {0.5, 0.9, 0.99}) {
    const ComplexMatrix r =
        oracles::stacked_covariance(pilots, taus, powers, eta, 0.0, 3, 1024);
    CHECK(std::abs(estimator::estimate_eta(r) - eta) < 1e-10);
  }
}

TEST_CASE("estimate_eta recovers the Jakes lag correlation") {
  std::vector<int> pilots(128);
  for (int i = 0; i < 128; ++i) pilots[i] = 8 * i;
  const double eta = numerics::bessel_j0(2.0 * numerics::kPi * 200.0 * 115.2e-6);
  const ComplexMatrix r = oracles::stacked_covariance(pilots, {0.0, 9.0, 21.0},
                                                      {0.5, 0.3, 0.2}, eta, 0.0, 3, 1024);
  CHECK(estimator::estimate_eta(r) == doctest::Approx(0.994768).epsilon(1e-6));
}

TEST_CASE("estimate_eta scaling invariance and clamping") {
  std::vector<int> pilots(64);
  for (int i = 0; i < 64; ++i) pilots[i] = 16 * i;
  const ComplexMatrix r =
      oracles::stacked_covariance(pilots, {0.0, 7.0}, {0.6, 0.4}, 0.8, 0.0, 3, 1024);
  const double e1 = estimator::estimate_eta(r);
  const double e2 = estimator::estimate_eta(ComplexMatrix(17.0 * r));
  CHECK(e1 == doctest::Approx(e2).epsilon(1e-12));

  // Tiny off-diagonal blocks hit the floor; oversized ones hit the roof.
  ComplexMatrix low = r;
  low.topRightCorner(64, 64) *= 1e-6;
  low.bottomLeftCorner(64, 64) *= 1e-6;
  CHECK(estimator::estimate_eta(low) == doctest::Approx(0.05));
  ComplexMatrix high = r;
  high.topRightCorner(64, 64) *= 10.0;
  high.bottomLeftCorner(64, 64) *= 10.0;
  CHECK(estimator::estimate_eta(high) == doctest::Approx(1.0));
}

TEST_CASE("compensate_doppler") {
  std::vector<int> pilots(32);
  for (int i = 0; i < 32; ++i) pilots[i] = 25 * i;
  const std::vector<double> taus = {0.0, 4.5, 11.0};
  const std::vector<double> powers = {0.5, 0.3, 0.2};
  const ComplexMatrix r09 =
      oracles::stacked_covariance(pilots, taus, powers, 0.9, 0.0, 3, 1024);
  const ComplexMatrix r10 =
      oracles::stacked_covariance(pilots, taus, powers, 1.0, 0.0, 3, 1024);

  SUBCASE("eta = 1 leaves the matrix unchanged") {
    CHECK((estimator::compensate_doppler(r10, 1.0) - r10).norm() < 1e-12 * r10.norm());
  }
  SUBCASE("off-diagonal blocks are scaled by 1/eta") {
    const ComplexMatrix c = estimator::compensate_doppler(r09, 0.9);
    CHECK((c.topRightCorner(32, 32) - ComplexMatrix(r09.topRightCorner(32, 32) / 0.9)).norm() <
          1e-10 * r09.norm());
    CHECK((c.topLeftCorner(32, 32) - r09.topLeftCorner(32, 32)).norm() < 1e-12 * r09.norm());
  }
  SUBCASE("noiseless compensation reconstructs the Doppler-free covariance") {
    const ComplexMatrix c = estimator::compensate_doppler(r09, 0.9);
    CHECK((c - r10).norm() < 1e-10 * r10.norm());
    CHECK((c - c.adjoint()).norm() < 1e-13 * c.norm());
  }
  SUBCASE("domain guard") {
    CHECK_THROWS_AS(estimator::compensate_doppler(r09, 0.0), DomainError);
    CHECK_THROWS_AS(estimator::compensate_doppler(r09, -0.5), DomainError);
  }
}

TEST_CASE("reduce_to_Rp") {
  const ComplexMatrix m = oracles::random_hermitian(5, 8);
  ComplexMatrix r(10, 10);
  r << m, m, m, m;
  CHECK((estimator::reduce_to_Rp(r) - m).norm() < 1e-13);

  std::vector<int> pilots(16);
  for (int i = 0; i < 16; ++i) pilots[i] = 50 * i;
  const std::vector<double> taus = {0.0, 6.0};
  const std::vector<double> powers = {0.7, 0.3};
  const ComplexMatrix cov =
      oracles::stacked_covariance(pilots, taus, powers, 0.85, 0.0, 3, 1024);
  const oracles::Matrix f = oracles::vandermonde(pilots, taus, 1024);
  oracles::Matrix r0 = oracles::Matrix::Zero(2, 2);
  r0(0, 0) = 0.7;
  r0(1, 1) = 0.3;
  const ComplexMatrix expected = f * r0 * f.adjoint();
  const ComplexMatrix rp = estimator::reduce_to_Rp(cov);
  CHECK((rp - expected).norm() < 1e-10 * expected.norm());
  CHECK((rp - rp.adjoint()).norm() < 1e-12 * rp.norm());
}

TEST_CASE("mdl_order on a flat spectrum returns the minimum order") {
  RealVector eigs = RealVector::Constant(10, 0.3);
  CHECK(estimator::mdl_order(eigs, 100, 9) == 1);
}

TEST_CASE("mdl_order matches the direct score on a small spectrum") {
  RealVector eigs(8);
  eigs << 9, 5, 1, 1, 1, 1, 1, 1;
  CHECK(estimator::mdl_order(eigs, 500, 7) == 2);

  // Cross-check the argmin against the scalar reference score.
  std::vector<double> e(8);
  for (int i = 0; i < 8; ++i) e[static_cast<std::size_t>(i)] = eigs[i];
  int best_k = 1;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 7; ++k) {
    const double score = oracles::mdl_score(e, 500, k);
    if (score < best) {
      best = score;
      best_k = k;
    }
  }
  CHECK(best_k == 2);
}

TEST_CASE("mdl_order on an analytic four-tap covariance") {
  const std::vector<int> pilots = reference_pilots(20, frame::UserRole::A);
  REQUIRE(pilots.size() == 120);
  const std::vector<double> taus = {0.0, 5.0, 10.0, 15.0};
  const oracles::Matrix f = oracles::vandermonde(pilots, taus, 1024);
  const ComplexMatrix r =
      ComplexMatrix(0.25 * (f * f.adjoint())) + 0.01 * ComplexMatrix::Identity(120, 120);
  const auto ep = numerics::hermitian_evd(r);
  CHECK(estimator::mdl_order(ep.values, 192, 24) == 4);
}

TEST_CASE("mdl_order guards") {
  RealVector zero = RealVector::Zero(5);
  CHECK_THROWS_AS(estimator::mdl_order(zero, 100, 4), DegenerateInputError);
  RealVector ascending(3);
  ascending << 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(estimator::mdl_order(ascending, 100, 2), DomainError);
  RealVector ok(3);
  ok << 3.0, 2.0, 1.0;
  CHECK_THROWS_AS(estimator::mdl_order(ok, 100, 3), DomainError);
  CHECK_THROWS_AS(estimator::mdl_order(ok, 0, 2), DomainError);
}

TEST_CASE("esprit_delays single-path fixtures") {
  const std::vector<int> pilots = reference_pilots(4, frame::UserRole::A);
  SUBCASE("zero delay") {
    const ComplexMatrix r = oracles::clean_stacked_covariance(pilots, {0.0}, {1.0}, 3, 1024);
    const auto taus =
        estimator::esprit_delays(r, 1, 3, 1024, numerics::ShiftSolveMode::LS);
    REQUIRE(taus.size() == 1);
    CHECK(std::abs(taus[0]) < 1e-8);
  }
  SUBCASE("integer delay with exact phase") {
    const ComplexMatrix r = oracles::clean_stacked_covariance(pilots, {5.0}, {1.0}, 3, 1024);
    const auto taus =
        estimator::esprit_delays(r, 1, 3, 1024, numerics::ShiftSolveMode::TLS);
    REQUIRE(taus.size() == 1);
    CHECK(taus[0] == doctest::Approx(5.0).epsilon(1e-8));
  }
}

TEST_CASE("esprit_delays recovers the six-tap profile from a clean covariance") {
  const std::vector<int> pilots = reference_pilots(20, frame::UserRole::A);
  const ComplexMatrix r =
      oracles::clean_stacked_covariance(pilots, kVehADelays, veh_a_powers(), 3, 1024);
  for (auto mode : {numerics::ShiftSolveMode::LS, numerics::ShiftSolveMode::TLS}) {
    const auto taus = estimator::esprit_delays(r, 6, 3, 1024, mode);
    REQUIRE(taus.size() == 6);
    for (int l = 0; l < 6; ++l) CHECK(std::abs(taus[l] - kVehADelays[l]) < 1e-6);
  }
}

TEST_CASE("esprit_delays wrap-around periodicity") {
  const std::vector<int> pilots = reference_pilots(4, frame::UserRole::A);
  const double period = 1024.0 / 3.0;
  const ComplexMatrix r1 = oracles::clean_stacked_covariance(pilots, {10.0}, {1.0}, 3, 1024);
  const ComplexMatrix r2 =
      oracles::clean_stacked_covariance(pilots, {10.0 + period}, {1.0}, 3, 1024);
  const auto t1 = estimator::esprit_delays(r1, 1, 3, 1024, numerics::ShiftSolveMode::LS);
  const auto t2 = estimator::esprit_delays(r2, 1, 3, 1024, numerics::ShiftSolveMode::LS);
  CHECK(t1[0] == doctest::Approx(10.0).epsilon(1e-8));
  CHECK(t2[0] == doctest::Approx(t1[0]).epsilon(1e-6));
}

TEST_CASE("esprit_delays is invariant under an identity shift of the covariance") {
  const std::vector<int> pilots = reference_pilots(20, frame::UserRole::A);
  const ComplexMatrix r =
      oracles::clean_stacked_covariance(pilots, kVehADelays, veh_a_powers(), 3, 1024);
  const auto ep = numerics::hermitian_evd(r);
  const ComplexMatrix shifted =
      r + 0.01 * ep.values[0] * ComplexMatrix::Identity(r.rows(), r.cols());
  const auto base = estimator::esprit_delays(r, 6, 3, 1024, numerics::ShiftSolveMode::LS);
  const auto moved =
      estimator::esprit_delays(shifted, 6, 3, 1024, numerics::ShiftSolveMode::LS);
  for (int l = 0; l < 6; ++l) CHECK(std::abs(base[l] - moved[l]) < 1e-6);
}

TEST_CASE("esprit_delays handles the mirrored user with nu = -3") {
  const std::vector<int> pilots = reference_pilots(20, frame::UserRole::B);
  const ComplexMatrix r =
      oracles::stacked_covariance(pilots, kVehADelays, veh_a_powers(), 1.0, 0.0, -3, 1024);
  const auto taus = estimator::esprit_delays(r, 6, -3, 1024, numerics::ShiftSolveMode::TLS);
  REQUIRE(taus.size() == 6);
  for (int l = 0; l < 6; ++l) CHECK(std::abs(taus[l] - kVehADelays[l]) < 1e-6);
}

TEST_CASE("esprit_delays reports a vanishing eigen-gap") {
  const std::vector<int> pilots = reference_pilots(4, frame::UserRole::A);
  const ComplexMatrix r = oracles::clean_stacked_covariance(pilots, {5.0}, {1.0}, 3, 1024);
  CHECK_THROWS_AS(estimator::esprit_delays(r, 2, 3, 1024, numerics::ShiftSolveMode::LS),
                  DegenerateSubspaceError);
}

TEST_CASE("expand_delay_support windows, clipping and merging") {
  CHECK(estimator::expand_delay_support({5.0}, 2, 128, 16) ==
        std::vector<int>{3, 4, 5, 6, 7});
  CHECK(estimator::expand_delay_support({1.0}, 3, 128, 16) ==
        std::vector<int>{0, 1, 2, 3, 4});
  std::vector<int> merged;
  for (int i = 0; i <= 10; ++i) merged.push_back(i);
  CHECK(estimator::expand_delay_support({3.1, 7.1}, 3, 128, 16) == merged);
  // Rounding is half-up.
  CHECK(estimator::expand_delay_support({2.5}, 0, 128, 16) == std::vector<int>{3});
}

TEST_CASE("expand_delay_support respects the pilot budget") {
  // 24 estimated paths at beta = 3 violate 2*beta*L <= P for P = 120.
  std::vector<double> taus;
  for (int i = 0; i < 24; ++i) taus.push_back(5.0 * i);
  const auto support = estimator::expand_delay_support(taus, 3, 128, 120);
  CHECK(static_cast<int>(support.size()) <= 120);
  // beta was reduced to 2: windows are 5 wide, the first clipped at zero.
  CHECK(support.size() == 23 * 5 + 3);
}

TEST_CASE("expand_delay_support grows monotonically with beta") {
  const std::vector<double> taus = {4.2, 19.8, 40.0};
  std::vector<int> previous;
  for (int beta = 0; beta <= 5; ++beta) {
    const auto support = estimator::expand_delay_support(taus, beta, 128, 120);
    for (int v : previous) {
      CHECK(std::find(support.begin(), support.end(), v) != support.end());
    }
    previous = support;
  }
}

TEST_CASE("build_interpolator flat-channel averaging") {
  const std::vector<int> data = {10, 20, 30};
  const std::vector<int> pilots = {0, 5, 9};
  const ComplexMatrix g = estimator::build_interpolator(data, pilots, {0}, 1024);
  REQUIRE(g.rows() == 3);
  REQUIRE(g.cols() == 3);
  for (int r = 0; r < 3; ++r) {
    for (int c = 1; c < 3; ++c) CHECK(std::abs(g(r, c) - g(r, 0)) < 1e-12);
  }
  ComplexVector constant(3);
  constant.setConstant(Complex(0.7, -0.3));
  const ComplexVector est = estimator::interpolate_cfr(g, constant);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(est[i] - constant[0]) < 1e-10);
}

TEST_CASE("build_interpolator acts as an orthogonal projector on the pilot grid") {
  const std::vector<int> tones = {3, 17, 44, 70, 99, 130, 164};
  const std::vector<int> support = {0, 4, 9};
  const ComplexMatrix g = estimator::build_interpolator(tones, tones, support, 1024);
  CHECK((g * g - g).norm() < 1e-9);

  const oracles::Matrix f = oracles::vandermonde(tones, {0.0, 4.0, 9.0}, 1024);
  Eigen::HouseholderQR<ComplexMatrix> qr(f);
  const ComplexMatrix q = ComplexMatrix(qr.householderQ()).leftCols(3);
  const ComplexMatrix projector = q * q.adjoint();
  const ComplexVector v = oracles::random_matrix(7, 1, 5);
  CHECK((g * v - projector * v).norm() < 1e-9);
}

TEST_CASE("interpolation is exact when the support covers the true integer delays") {
  const std::vector<int> pilots = reference_pilots(20, frame::UserRole::A);
  const std::vector<int> data = reference_pilots(20, frame::UserRole::A, /*odd=*/true);
  const std::vector<double> true_delays = {0.0, 5.0, 12.0};
  const auto support = estimator::expand_delay_support(true_delays, 2, 128, 120);
  const ComplexMatrix g = estimator::build_interpolator(data, pilots, support, 1024);

  const ComplexVector gains = oracles::random_matrix(3, 1, 77);
  const oracles::Matrix f_p = oracles::vandermonde(pilots, true_delays, 1024);
  const oracles::Matrix f_d = oracles::vandermonde(data, true_delays, 1024);
  const ComplexVector h_p = f_p * gains;
  const ComplexVector h_d = f_d * gains;
  const ComplexVector est = estimator::interpolate_cfr(g, h_p);
  CHECK((est - h_d).squaredNorm() / h_d.squaredNorm() < 1e-18);
}

TEST_CASE("interpolate_cfr linearity and guards") {
  const ComplexMatrix g = oracles::random_matrix(4, 3, 9);
  const ComplexVector v = oracles::random_matrix(3, 1, 10);
  const Complex a(1.3, -2.0);
  CHECK((estimator::interpolate_cfr(g, ComplexVector(a * v)) -
         a * estimator::interpolate_cfr(g, v))
            .norm() < 1e-12);
  const ComplexVector wrong = oracles::random_matrix(5, 1, 11);
  CHECK_THROWS_AS(estimator::interpolate_cfr(g, wrong), DimensionError);
  CHECK_THROWS_AS(estimator::build_interpolator({1, 2}, {3, 4}, {}, 1024),
                  DegenerateInputError);
}

TEST_CASE("ll_baseline and middle_symbol_cfr") {
  ComplexVector even(2), odd(2);
  even << Complex(1.0, 1.0), Complex(0.5, 0.0);
  odd << Complex(1.0, -1.0), Complex(0.5, 0.0);
  const ComplexVector mean = estimator::ll_baseline(even, odd);
  CHECK(std::abs(mean[0] - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(mean[1] - Complex(0.5, 0.0)) < 1e-15);

  ComplexVector first(2), third(2);
  first << Complex(0.0, 0.0), Complex(2.0, 2.0);
  third << Complex(2.0, 0.0), Complex(2.0, 2.0);
  const ComplexVector mid = estimator::middle_symbol_cfr(first, third);
  CHECK(std::abs(mid[0] - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(mid[1] - Complex(2.0, 2.0)) < 1e-15);

  ComplexVector three(3);
  three.setZero();
  CHECK_THROWS_AS(estimator::middle_symbol_cfr(first, three), DimensionError);
  CHECK_THROWS_AS(estimator::ll_baseline(even, three), DimensionError);
}

TEST_CASE("DelayEstimate serializes to a plain-text record") {
  estimator::DelayEstimate de;
  de.eta_hat = 0.9791234;
  de.order = 2;
  de.taus = {0.0, 3.1};
  CHECK(de.to_record() == "0.9791234 2 0.000000 3.100000");
}

TEST_CASE("PhWindowEstimator validates the hopping identity") {
  estimator::WindowSetup setup;
  setup.pilots_even = {0, 10};
  setup.pilots_odd = {3, 12};  // second offset is 2, not nu
  setup.data_even = {1};
  setup.data_odd = {1};
  setup.data_middle = {1};
  CHECK_THROWS_AS(estimator::PhWindowEstimator{setup}, DomainError);
}

TEST_CASE("PhWindowEstimator noiseless static window is exact") {
  frame::SystemConfig cfg;
  const auto alloc = frame::random_tile_allocation(cfg, 4, 21, 0);
  const auto pattern = frame::pilot_pattern(alloc, frame::UserRole::A);
  const auto data = frame::data_tones(alloc);
  const auto profile = channel::make_profile({0.0, 400.0}, {0.0, 0.0}, cfg.bw_hz);
  // Normalized delays 0 and 4: integers well inside one capturing window.
  const long n_pairs = 24;
  const auto fading =
      channel::generate_fading(profile, 0.0, cfg.symbol_duration(), 3 * n_pairs, 33);

  estimator::WindowSetup setup;
  setup.pilots_even = pattern.pilots_even;
  setup.pilots_odd = pattern.pilots_odd;
  setup.data_even = data.even;
  setup.data_odd = data.odd;
  setup.data_middle = data.middle;
  setup.nu = pattern.nu;
  estimator::PhWindowEstimator ph(setup);

  std::vector<ComplexVector> t_even, t_odd, t_mid;
  for (long m = 0; m < n_pairs; ++m) {
    const ComplexVector g_ev = fading.gains.col(3 * m);
    const ComplexVector g_od = fading.gains.col(3 * m + 2);
    ph.add_pair(
        channel::cfr_at_tones(g_ev, profile.delays_norm, pattern.pilots_even, cfg.n_fft),
        channel::cfr_at_tones(g_od, profile.delays_norm, pattern.pilots_odd, cfg.n_fft));
    t_even.push_back(channel::cfr_at_tones(g_ev, profile.delays_norm, data.even, cfg.n_fft));
    t_odd.push_back(channel::cfr_at_tones(g_od, profile.delays_norm, data.odd, cfg.n_fft));
    t_mid.push_back(channel::cfr_at_tones(fading.gains.col(3 * m + 1), profile.delays_norm,
                                          data.middle, cfg.n_fft));
  }
  const auto res = ph.finalize();
  CHECK(res.delay_estimate.eta_hat == doctest::Approx(1.0));
  double err = 0.0, energy = 0.0;
  for (long m = 0; m < n_pairs; ++m) {
    err += (res.data_even_est[m] - t_even[m]).squaredNorm();
    err += (res.data_odd_est[m] - t_odd[m]).squaredNorm();
    err += (res.data_middle_est[m] - t_mid[m]).squaredNorm();
    energy += t_even[m].squaredNorm() + t_odd[m].squaredNorm() + t_mid[m].squaredNorm();
  }
  CHECK(err < 1e-12 * energy);
  // The expanded support covers both true taps.
  const auto& support = res.delay_estimate.support;
  CHECK(std::find(support.begin(), support.end(), 0) != support.end());
  CHECK(std::find(support.begin(), support.end(), 4) != support.end());
}

TEST_CASE("PhWindowEstimator noiseless fading window: pilot-bearing symbols are exact") {
  frame::SystemConfig cfg;
  const auto alloc = frame::random_tile_allocation(cfg, 4, 22, 0);
  const auto pattern = frame::pilot_pattern(alloc, frame::UserRole::A);
  const auto data = frame::data_tones(alloc);
  const auto profile = channel::make_profile({0.0, 500.0}, {0.0, 0.0}, cfg.bw_hz);
  // Normalized delays 0 and 5; a beta = 5 window around any delay mixture
  // of the two taps is guaranteed to cover both.
  const long n_pairs = 32;
  const auto fading =
      channel::generate_fading(profile, 200.0, cfg.symbol_duration(), 3 * n_pairs, 44);

  estimator::WindowSetup setup;
  setup.pilots_even = pattern.pilots_even;
  setup.pilots_odd = pattern.pilots_odd;
  setup.data_even = data.even;
  setup.data_odd = data.odd;
  setup.data_middle = data.middle;
  setup.nu = pattern.nu;
  setup.beta = 5;
  estimator::PhWindowEstimator ph(setup);

  std::vector<ComplexVector> t_even, t_odd, t_mid;
  for (long m = 0; m < n_pairs; ++m) {
    const ComplexVector g_ev = fading.gains.col(3 * m);
    const ComplexVector g_od = fading.gains.col(3 * m + 2);
    ph.add_pair(
        channel::cfr_at_tones(g_ev, profile.delays_norm, pattern.pilots_even, cfg.n_fft),
        channel::cfr_at_tones(g_od, profile.delays_norm, pattern.pilots_odd, cfg.n_fft));
    t_even.push_back(channel::cfr_at_tones(g_ev, profile.delays_norm, data.even, cfg.n_fft));
    t_odd.push_back(channel::cfr_at_tones(g_od, profile.delays_norm, data.odd, cfg.n_fft));
    t_mid.push_back(channel::cfr_at_tones(fading.gains.col(3 * m + 1), profile.delays_norm,
                                          data.middle, cfg.n_fft));
  }
  const auto res = ph.finalize();
  CHECK(res.delay_estimate.eta_hat <= 1.0);
  CHECK(res.delay_estimate.eta_hat > 0.9);

  double err_parity = 0.0, energy_parity = 0.0, err_mid = 0.0, energy_mid = 0.0;
  for (long m = 0; m < n_pairs; ++m) {
    err_parity += (res.data_even_est[m] - t_even[m]).squaredNorm();
    err_parity += (res.data_odd_est[m] - t_odd[m]).squaredNorm();
    energy_parity += t_even[m].squaredNorm() + t_odd[m].squaredNorm();
    err_mid += (res.data_middle_est[m] - t_mid[m]).squaredNorm();
    energy_mid += t_mid[m].squaredNorm();
  }
  // Same-symbol interpolation is exact once the support covers the taps.
  CHECK(err_parity < 1e-12 * energy_parity);
  // The middle symbol pays only the symmetric time-averaging penalty.
  CHECK(err_mid / energy_mid < 1e-3);
}
