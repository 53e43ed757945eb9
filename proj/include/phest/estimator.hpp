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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "phest/errors.hpp"
#include "phest/numerics.hpp"

namespace phest::estimator {

using numerics::Complex;
using numerics::ComplexMatrix;
using numerics::ComplexVector;
using numerics::RealVector;
using numerics::kPi;
using numerics::ShiftSolveMode;

/// Least-squares channel estimate on pilot tones: element-wise division
/// of the received values by the known pilot symbols. For PSK pilots the
/// post-division noise stays white with the channel noise variance.
inline ComplexVector ls_pilot_estimate(const ComplexVector& rx_pilots,
                                       const ComplexVector& pilot_tx) {
  if (rx_pilots.size() != pilot_tx.size()) {
    throw DimensionError("ls_pilot_estimate: length mismatch");
  }
  ComplexVector out(rx_pilots.size());
  for (Eigen::Index i = 0; i < rx_pilots.size(); ++i) {
    if (std::abs(pilot_tx[i]) < 1e-12) {
      throw DomainError("ls_pilot_estimate: zero pilot value");
    }
    out[i] = rx_pilots[i] / pilot_tx[i];
  }
  return out;
}

/// Two contiguous pilot estimates stacked even-on-top-of-odd (length 2P).
struct StackedPilotEstimate {
  ComplexVector vector;
  long pair_index = 0;
};

inline StackedPilotEstimate stack_pair(const ComplexVector& even_est,
                                       const ComplexVector& odd_est, long pair_index = 0) {
  if (even_est.size() != odd_est.size()) {
    throw DimensionError("stack_pair: even and odd estimates must have equal length");
  }
  StackedPilotEstimate s;
  s.vector.resize(2 * even_est.size());
  s.vector << even_est, odd_est;
  s.pair_index = pair_index;
  return s;
}

/// Running sample autocorrelation of stacked pilot estimates. finalize()
/// returns sum / count, i.e. the mean outer product over the accumulated
/// symbol pairs.
class CorrAccumulator {
 public:
  explicit CorrAccumulator(Eigen::Index dim)
      : sum_(ComplexMatrix::Zero(dim, dim)) {
    if (dim < 1) throw DimensionError("CorrAccumulator: dimension must be positive");
  }

  void accumulate(const ComplexVector& v) {
    if (v.size() != sum_.rows()) {
      throw DimensionError("CorrAccumulator: snapshot length mismatch");
    }
    sum_.noalias() += v * v.adjoint();
    ++count_;
  }

  void accumulate(const StackedPilotEstimate& s) { accumulate(s.vector); }

  long count() const { return count_; }
  Eigen::Index dim() const { return sum_.rows(); }

  ComplexMatrix finalize() const {
    if (count_ == 0) throw DegenerateInputError("CorrAccumulator: no snapshots accumulated");
    return sum_ / static_cast<double>(count_);
  }

 private:
  ComplexMatrix sum_;
  long count_ = 0;
};

namespace detail {

inline void require_even_square(const ComplexMatrix& r, const char* op) {
  if (r.rows() != r.cols()) throw DimensionError(std::string(op) + ": matrix must be square");
  if (r.rows() % 2 != 0 || r.rows() < 2) {
    throw DimensionError(std::string(op) + ": dimension must be even (2P x 2P)");
  }
}

}  // namespace detail

/// Estimates the symbol-pair correlation eta from the Frobenius norms of
/// the P x P blocks of the stacked covariance:
/// eta = sqrt((|A12|^2 + |A21|^2) / (|A11|^2 + |A22|^2)), clamped to
/// [eta_floor, 1]. Exact for equispaced pilots whose count divides N;
/// approximate otherwise.
inline double estimate_eta(const ComplexMatrix& r, double eta_floor = 0.05) {
  detail::require_even_square(r, "estimate_eta");
  const Eigen::Index p = r.rows() / 2;
  const double a11 = r.topLeftCorner(p, p).squaredNorm();
  const double a12 = r.topRightCorner(p, p).squaredNorm();
  const double a21 = r.bottomLeftCorner(p, p).squaredNorm();
  const double a22 = r.bottomRightCorner(p, p).squaredNorm();
  const double den = a11 + a22;
  if (!(den > 0.0) || !std::isfinite(den)) {
    throw DegenerateInputError("estimate_eta: zero or non-finite diagonal blocks");
  }
  const double eta = std::sqrt((a12 + a21) / den);
  return std::min(1.0, std::max(eta_floor, eta));
}

/// Removes the Doppler attenuation from the off-diagonal blocks of the
/// stacked covariance by dividing them by eta; the result is
/// re-symmetrized to Hermitian.
inline ComplexMatrix compensate_doppler(const ComplexMatrix& r, double eta) {
  detail::require_even_square(r, "compensate_doppler");
  if (!(eta > 0.0) || eta > 1.0) {
    throw DomainError("compensate_doppler: eta must lie in (0, 1]");
  }
  const Eigen::Index p = r.rows() / 2;
  ComplexMatrix out = r;
  out.topRightCorner(p, p) /= eta;
  out.bottomLeftCorner(p, p) /= eta;
  out = 0.5 * (out + out.adjoint()).eval();
  return out;
}

/// Single-symbol pilot covariance from the stacked one: (A11 + A22) / 2.
/// Both diagonal blocks estimate the same matrix because the phase twist
/// between even and odd pilot grids commutes with the diagonal tap
/// covariance.
inline ComplexMatrix reduce_to_Rp(const ComplexMatrix& r) {
  detail::require_even_square(r, "reduce_to_Rp");
  const Eigen::Index p = r.rows() / 2;
  ComplexMatrix out = 0.5 * (r.topLeftCorner(p, p) + r.bottomRightCorner(p, p));
  out = 0.5 * (out + out.adjoint()).eval();
  return out;
}

/// Minimum description length order selection (Wax-Kailath form) over a
/// descending eigenvalue spectrum:
///   MDL(k) = -n (p-k) log(G_k / A_k) + k (2p - k) log(n) / 2
/// with G_k / A_k the geometric/arithmetic means of the p-k smallest
/// eigenvalues. Eigenvalues are floored at 1e-12 * lambda_max before the
/// logarithms so that rank-deficient sample covariances stay defined.
/// Returns the argmin over k in [1, k_max].
inline int mdl_order(const RealVector& eigenvalues, long snapshots, int k_max) {
  const int p = static_cast<int>(eigenvalues.size());
  if (p < 2) throw DimensionError("mdl_order: need at least two eigenvalues");
  if (snapshots < 1) throw DomainError("mdl_order: snapshots must be positive");
  if (k_max < 1 || k_max >= p) throw DomainError("mdl_order: need 1 <= k_max < p");
  for (int i = 1; i < p; ++i) {
    if (eigenvalues[i] > eigenvalues[i - 1] + 1e-9 * std::abs(eigenvalues[0])) {
      throw DomainError("mdl_order: eigenvalues must be sorted descending");
    }
  }
  const double lambda_max = eigenvalues[0];
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw DegenerateInputError("mdl_order: degenerate (all-zero) spectrum");
  }
  const double floor_value = 1e-12 * lambda_max;
  const double log_n = std::log(static_cast<double>(snapshots));
  int best_k = 1;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    const int m = p - k;
    double log_sum = 0.0;
    double sum = 0.0;
    for (int i = k; i < p; ++i) {
      const double v = std::max(eigenvalues[i], floor_value);
      log_sum += std::log(v);
      sum += v;
    }
    const double log_geo = log_sum / m;
    const double log_arith = std::log(sum / m);
    const double mdl = -static_cast<double>(snapshots) * m * (log_geo - log_arith) +
                       0.5 * k * (2.0 * p - k) * log_n;
    if (mdl < best) {
      best = mdl;
      best_k = k;
    }
  }
  return best_k;
}

/// ESPRIT delay estimation from the Doppler-compensated stacked pilot
/// covariance: EVD, split the top-L eigenvectors into the even-pilot and
/// odd-pilot halves, solve the shift operator linking them, and map the
/// phase angles of its eigenvalues to delays
///   tau = arg(lambda^*) N / (2 pi nu), arg in [0, 2 pi),
/// reduced modulo N/|nu| into [0, N/|nu|). Returned sorted ascending.
/// A vanishing eigen-gap at position L throws DegenerateSubspaceError;
/// a TLS failure falls back to LS and sets *tls_fell_back.
inline std::vector<double> esprit_delays(const ComplexMatrix& r_tilde, int l_hat, int nu,
                                         int n_fft, ShiftSolveMode mode,
                                         bool* tls_fell_back = nullptr) {
  detail::require_even_square(r_tilde, "esprit_delays");
  if (nu == 0) throw DomainError("esprit_delays: nu must be nonzero");
  if (n_fft < 1) throw DomainError("esprit_delays: N must be positive");
  const Eigen::Index p = r_tilde.rows() / 2;
  if (l_hat < 1 || l_hat > p) throw DomainError("esprit_delays: need 1 <= L <= P");
  if (tls_fell_back) *tls_fell_back = false;

  const numerics::EigenPairs ep = numerics::hermitian_evd(r_tilde);
  const double lambda_max = std::max(std::abs(ep.values[0]), 1e-300);
  const double gap = ep.values[l_hat - 1] - ep.values[l_hat];
  if (gap < 1e-12 * lambda_max) {
    throw DegenerateSubspaceError("esprit_delays: vanishing eigen-gap at the requested order");
  }
  const ComplexMatrix u = ep.vectors.leftCols(l_hat);
  const ComplexMatrix u_up = u.topRows(p);
  const ComplexMatrix u_dw = u.bottomRows(p);

  ComplexMatrix q;
  try {
    q = numerics::solve_shift_operator(u_up, u_dw, mode);
  } catch (const DegenerateSubspaceError&) {
    if (mode != ShiftSolveMode::TLS) throw;
    q = numerics::solve_shift_operator(u_up, u_dw, ShiftSolveMode::LS);
    if (tls_fell_back) *tls_fell_back = true;
  }

  const std::vector<Complex> lambdas = numerics::general_eigenvalues(q);
  const double period = static_cast<double>(n_fft) / std::abs(nu);
  std::vector<double> taus;
  taus.reserve(lambdas.size());
  for (const Complex& lambda : lambdas) {
    double angle = std::arg(std::conj(lambda));
    if (angle < 0.0) angle += 2.0 * kPi;
    double tau = angle * n_fft / (2.0 * kPi * nu);
    tau = std::fmod(tau, period);
    if (tau < 0.0) tau += period;
    if (tau >= period) tau -= period;
    taus.push_back(tau);
  }
  std::sort(taus.begin(), taus.end());
  return taus;
}

/// Expands each estimated delay into an integer capturing window
/// [round(tau) - beta, round(tau) + beta], unions the windows, and clips
/// to the CP range [0, L_cp). beta is decremented while 2 beta L > P or
/// the support exceeds P entries. Rounding is nearest integer, half up.
inline std::vector<int> expand_delay_support(const std::vector<double>& taus, int beta,
                                             int l_cp, int p) {
  if (beta < 0) throw DomainError("expand_delay_support: beta must be non-negative");
  if (l_cp < 1) throw DomainError("expand_delay_support: L_cp must be positive");
  if (p < 1) throw DomainError("expand_delay_support: P must be positive");
  const long l = static_cast<long>(taus.size());
  auto build = [&](int b) {
    std::set<int> s;
    for (double tau : taus) {
      const int center = static_cast<int>(std::floor(tau + 0.5));
      for (int d = -b; d <= b; ++d) {
        const int v = center + d;
        if (v >= 0 && v < l_cp) s.insert(v);
      }
    }
    return std::vector<int>(s.begin(), s.end());
  };
  int b = beta;
  std::vector<int> support = build(b);
  while (b > 0 && (2L * b * l > p || static_cast<long>(support.size()) > p)) {
    --b;
    support = build(b);
  }
  return support;
}

/// Interpolation matrix G = F_d F_p^+ mapping pilot estimates to data
/// tones, where both Fourier blocks are evaluated on the expanded integer
/// delay support.
inline ComplexMatrix build_interpolator(const std::vector<int>& data_tones,
                                        const std::vector<int>& pilot_tones,
                                        const std::vector<int>& support, int n_fft,
                                        double rtol = 1e-10) {
  if (support.empty()) throw DegenerateInputError("build_interpolator: empty delay support");
  if (data_tones.empty() || pilot_tones.empty()) {
    throw DimensionError("build_interpolator: empty tone lists");
  }
  if (n_fft < 1) throw DomainError("build_interpolator: N must be positive");
  auto fourier = [&](const std::vector<int>& tones) {
    ComplexMatrix f(static_cast<Eigen::Index>(tones.size()),
                    static_cast<Eigen::Index>(support.size()));
    for (std::size_t r = 0; r < tones.size(); ++r) {
      for (std::size_t c = 0; c < support.size(); ++c) {
        const double phase = -2.0 * kPi * static_cast<double>(tones[r]) *
                             static_cast<double>(support[c]) / n_fft;
        f(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            Complex(std::cos(phase), std::sin(phase));
      }
    }
    return f;
  };
  const ComplexMatrix f_d = fourier(data_tones);
  const ComplexMatrix f_p = fourier(pilot_tones);
  return f_d * numerics::pseudo_inverse(f_p, rtol);
}

/// Applies an interpolator: H_data = G * H_pilot.
inline ComplexVector interpolate_cfr(const ComplexMatrix& g, const ComplexVector& pilot_est) {
  if (g.cols() != pilot_est.size()) {
    throw DimensionError("interpolate_cfr: interpolator and pilot estimate do not match");
  }
  return g * pilot_est;
}

/// Local linear baseline: each tile's data tones (all three symbols) get
/// the arithmetic mean of the tile's two pilot estimates. Returns the
/// per-tile mean; the caller broadcasts it onto the tile's data tones.
inline ComplexVector ll_baseline(const ComplexVector& even_pilot_est,
                                 const ComplexVector& odd_pilot_est) {
  if (even_pilot_est.size() != odd_pilot_est.size()) {
    throw DimensionError("ll_baseline: per-tile pilot estimates must pair up");
  }
  return 0.5 * (even_pilot_est + odd_pilot_est);
}

/// CFR of the pilot-free middle symbol: element-wise mean of the
/// estimates for the first and third symbols on the same tones.
inline ComplexVector middle_symbol_cfr(const ComplexVector& first, const ComplexVector& third) {
  if (first.size() != third.size()) throw DimensionError("middle_symbol_cfr: length mismatch");
  return 0.5 * (first + third);
}

/// Result of one estimation window: eta, selected order, delays, the
/// expanded integer support and the capturing half-width actually used.
struct DelayEstimate {
  double eta_hat = 1.0;
  int order = 0;
  std::vector<double> taus;
  std::vector<int> support;
  int beta = 0;

  /// Plain-text record: "eta_hat L_hat tau_0 ... tau_{L-1}".
  std::string to_record() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g %d", eta_hat, order);
    std::string out(buf);
    for (double tau : taus) {
      std::snprintf(buf, sizeof buf, " %.6f", tau);
      out += buf;
    }
    return out;
  }
};

/// Interpolators for one window, one per symbol parity.
struct Interpolator {
  ComplexMatrix g_even;
  ComplexMatrix g_odd;
  std::vector<int> data_tones_even;
  std::vector<int> data_tones_odd;
};

/// Static description of one estimation window.
struct WindowSetup {
  std::vector<int> pilots_even;
  std::vector<int> pilots_odd;
  std::vector<int> data_even;
  std::vector<int> data_odd;
  std::vector<int> data_middle;
  int n_fft = 1024;
  int l_cp = 128;
  int nu = 3;
  int beta = 5;
  ShiftSolveMode mode = ShiftSolveMode::TLS;
  double eta_floor = 0.05;
  double rtol = 1e-10;
  int order_cap = 24;
};

/// Drives the full pilot-hopping pipeline over one window of symbol
/// pairs: accumulate stacked LS estimates, estimate and compensate eta,
/// select the order by MDL on the reduced covariance, run ESPRIT, expand
/// the delay support, build the per-parity interpolators and apply them
/// to every stored pair (plus the middle-symbol average on the middle
/// grid).
class PhWindowEstimator {
 public:
  explicit PhWindowEstimator(WindowSetup setup)
      : setup_(std::move(setup)),
        acc_(2 * static_cast<Eigen::Index>(setup_.pilots_even.size())) {
    const std::size_t p = setup_.pilots_even.size();
    if (p == 0 || setup_.pilots_odd.size() != p) {
      throw DimensionError("PhWindowEstimator: pilot index sets must pair up");
    }
    for (std::size_t i = 0; i < p; ++i) {
      if (setup_.pilots_odd[i] - setup_.pilots_even[i] != setup_.nu) {
        throw DomainError("PhWindowEstimator: pilot sets violate the hopping identity");
      }
    }
    if (setup_.nu == 0) throw DomainError("PhWindowEstimator: nu must be nonzero");
    if (setup_.beta < 0 || setup_.beta > 5) {
      throw DomainError("PhWindowEstimator: beta must lie in [0, 5]");
    }
  }

  int pilot_count() const { return static_cast<int>(setup_.pilots_even.size()); }
  long pair_count() const { return acc_.count(); }

  void add_pair(const ComplexVector& ls_even, const ComplexVector& ls_odd) {
    if (ls_even.size() != pilot_count() || ls_odd.size() != pilot_count()) {
      throw DimensionError("PhWindowEstimator: estimate length does not match pilot count");
    }
    acc_.accumulate(stack_pair(ls_even, ls_odd, acc_.count()));
    pairs_even_.push_back(ls_even);
    pairs_odd_.push_back(ls_odd);
  }

  struct WindowResult {
    DelayEstimate delay_estimate;
    Interpolator interp;
    ComplexMatrix g_middle_even;  // middle grid from even pilots
    ComplexMatrix g_middle_odd;   // middle grid from odd pilots
    bool tls_fell_back = false;
    // Per-pair CFR estimates on the even/odd/middle data grids.
    std::vector<ComplexVector> data_even_est;
    std::vector<ComplexVector> data_odd_est;
    std::vector<ComplexVector> data_middle_est;
  };

  WindowResult finalize() const {
    const int p = pilot_count();
    const ComplexMatrix r = acc_.finalize();

    WindowResult res;
    res.delay_estimate.eta_hat = estimate_eta(r, setup_.eta_floor);
    const ComplexMatrix r_tilde = compensate_doppler(r, res.delay_estimate.eta_hat);

    const ComplexMatrix r_p = reduce_to_Rp(r);
    const numerics::EigenPairs ep = numerics::hermitian_evd(r_p);
    const double lambda_max = ep.values[0];
    if (!(lambda_max > 0.0)) {
      throw DegenerateInputError("PhWindowEstimator: zero pilot covariance");
    }
    int effective_rank = 0;
    for (Eigen::Index i = 0; i < ep.values.size(); ++i) {
      if (ep.values[i] > 1e-10 * lambda_max) ++effective_rank;
    }
    const int k_max =
        std::max(1, std::min({p - 1, effective_rank - 1, setup_.order_cap}));
    const long snapshots = 2 * acc_.count();  // N_t observed symbols
    res.delay_estimate.order = std::max(1, mdl_order(ep.values, snapshots, k_max));

    res.delay_estimate.taus =
        esprit_delays(r_tilde, res.delay_estimate.order, setup_.nu, setup_.n_fft,
                      setup_.mode, &res.tls_fell_back);
    // A tap at delay zero wobbles across the wrap-around point of the
    // phase mapping; estimates just below the period are small negative
    // errors and must window around zero, not outside the CP.
    const double period = static_cast<double>(setup_.n_fft) / std::abs(setup_.nu);
    std::vector<double> window_centers = res.delay_estimate.taus;
    for (double& t : window_centers) {
      if (t > period - (setup_.beta + 1.0)) t = 0.0;
    }
    res.delay_estimate.support =
        expand_delay_support(window_centers, setup_.beta, setup_.l_cp, p);
    res.delay_estimate.beta = setup_.beta;

    const auto& support = res.delay_estimate.support;
    res.interp.g_even =
        build_interpolator(setup_.data_even, setup_.pilots_even, support, setup_.n_fft,
                           setup_.rtol);
    res.interp.g_odd =
        build_interpolator(setup_.data_odd, setup_.pilots_odd, support, setup_.n_fft,
                           setup_.rtol);
    res.interp.data_tones_even = setup_.data_even;
    res.interp.data_tones_odd = setup_.data_odd;
    res.g_middle_even =
        build_interpolator(setup_.data_middle, setup_.pilots_even, support, setup_.n_fft,
                           setup_.rtol);
    res.g_middle_odd =
        build_interpolator(setup_.data_middle, setup_.pilots_odd, support, setup_.n_fft,
                           setup_.rtol);

    res.data_even_est.reserve(pairs_even_.size());
    res.data_odd_est.reserve(pairs_even_.size());
    res.data_middle_est.reserve(pairs_even_.size());
    for (std::size_t m = 0; m < pairs_even_.size(); ++m) {
      res.data_even_est.push_back(interpolate_cfr(res.interp.g_even, pairs_even_[m]));
      res.data_odd_est.push_back(interpolate_cfr(res.interp.g_odd, pairs_odd_[m]));
      res.data_middle_est.push_back(
          middle_symbol_cfr(interpolate_cfr(res.g_middle_even, pairs_even_[m]),
                            interpolate_cfr(res.g_middle_odd, pairs_odd_[m])));
    }
    return res;
  }

 private:
  WindowSetup setup_;
  CorrAccumulator acc_;
  std::vector<ComplexVector> pairs_even_;
  std::vector<ComplexVector> pairs_odd_;
};

}  // namespace phest::estimator
