#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace airsel {

using cd = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;

/// Shapes of two operands disagree.
struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the domain of the operation.
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

/// A value violates a documented invariant of a domain type.
struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A computation hit a numerically degenerate state that should be unreachable.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw validation_error(what);
}

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw dimension_error(what);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.derived().allFinite();
}

}  // namespace detail

struct SystemDims {
  int n_antennas = 1;
  int n_devices = 1;
  int n_rf_chains = 1;

  SystemDims() = default;
  SystemDims(int n, int k, int l) : n_antennas(n), n_devices(k), n_rf_chains(l) {
    detail::require(n >= 1, "SystemDims: N must be >= 1");
    detail::require(k >= 1, "SystemDims: K must be >= 1");
    detail::require(l >= 1 && l <= n, "SystemDims: L must satisfy 1 <= L <= N");
  }
};

/// Uplink gains; entry (n, k) is the channel from device k to antenna n.
class ChannelMatrix {
 public:
  ChannelMatrix() = default;
  explicit ChannelMatrix(cmat h) : h_(std::move(h)) {
    detail::require(detail::all_finite(h_), "ChannelMatrix: entries must be finite");
  }
  const cmat& matrix() const { return h_; }
  int n_antennas() const { return static_cast<int>(h_.rows()); }
  int n_devices() const { return static_cast<int>(h_.cols()); }

 private:
  cmat h_;
};

/// Federated-averaging weights: strictly positive and summing to one.
class AggregationWeights {
 public:
  AggregationWeights() = default;
  explicit AggregationWeights(rvec phi) : phi_(std::move(phi)) {
    detail::require(phi_.size() >= 1, "AggregationWeights: empty");
    for (Eigen::Index k = 0; k < phi_.size(); ++k)
      detail::require(std::isfinite(phi_(k)) && phi_(k) > 0.0,
                      "AggregationWeights: phi_k must be > 0");
    detail::require(std::abs(phi_.sum() - 1.0) <= 1e-9,
                    "AggregationWeights: weights must sum to one");
  }
  static AggregationWeights uniform(int k) {
    return AggregationWeights(rvec::Constant(k, 1.0 / k));
  }
  const rvec& phi() const { return phi_; }
  int size() const { return static_cast<int>(phi_.size()); }

 private:
  rvec phi_;
};

class ReceiverVector {
 public:
  ReceiverVector() = default;
  explicit ReceiverVector(cvec m) : m_(std::move(m)) {
    detail::require(detail::all_finite(m_), "ReceiverVector: entries must be finite");
  }
  const cvec& vec() const { return m_; }
  int size() const { return static_cast<int>(m_.size()); }

 private:
  cvec m_;
};

class TransmitScalars {
 public:
  TransmitScalars() = default;
  TransmitScalars(cvec b, double power_limit) : b_(std::move(b)), power_(power_limit) {
    detail::require(power_ > 0.0, "TransmitScalars: power limit must be > 0");
    for (Eigen::Index k = 0; k < b_.size(); ++k)
      detail::require(std::norm(b_(k)) <= power_ * (1.0 + 1e-9),
                      "TransmitScalars: |b_k|^2 exceeds power limit");
  }
  static TransmitScalars full_power(int k, double power_limit) {
    return TransmitScalars(cvec::Constant(k, cd(std::sqrt(power_limit), 0.0)), power_limit);
  }
  const cvec& vec() const { return b_; }
  double power_limit() const { return power_; }
  int size() const { return static_cast<int>(b_.size()); }

 private:
  cvec b_;
  double power_ = 1.0;
};

enum class SelectionMode { relaxed, binary };

class SelectionVector {
 public:
  SelectionVector() = default;

  static SelectionVector relaxed(rvec s) {
    for (Eigen::Index n = 0; n < s.size(); ++n)
      detail::require(s(n) >= 0.0 && s(n) <= 1.0, "SelectionVector: relaxed entries must lie in [0,1]");
    return SelectionVector(std::move(s), SelectionMode::relaxed);
  }

  /// Any real vector, for intermediate iterates that are allowed to leave the box.
  static SelectionVector unconstrained(rvec s) {
    detail::require(detail::all_finite(s), "SelectionVector: entries must be finite");
    return SelectionVector(std::move(s), SelectionMode::relaxed);
  }

  static SelectionVector binary(rvec s, int l) {
    int ones = 0;
    for (Eigen::Index n = 0; n < s.size(); ++n) {
      detail::require(s(n) == 0.0 || s(n) == 1.0, "SelectionVector: binary entries must be 0 or 1");
      ones += s(n) == 1.0;
    }
    detail::require(ones == l, "SelectionVector: binary selection must have exactly L ones");
    return SelectionVector(std::move(s), SelectionMode::binary);
  }

  static SelectionVector from_indices(int n, const std::vector<int>& idx) {
    rvec s = rvec::Zero(n);
    for (int i : idx) {
      detail::require(i >= 0 && i < n, "SelectionVector: index out of range");
      s(i) = 1.0;
    }
    return binary(std::move(s), static_cast<int>(idx.size()));
  }

  const rvec& vec() const { return s_; }
  SelectionMode mode() const { return mode_; }
  int size() const { return static_cast<int>(s_.size()); }

  std::vector<int> active_indices() const {
    std::vector<int> out;
    for (Eigen::Index n = 0; n < s_.size(); ++n)
      if (s_(n) != 0.0) out.push_back(static_cast<int>(n));
    return out;
  }

 private:
  SelectionVector(rvec s, SelectionMode mode) : s_(std::move(s)), mode_(mode) {}
  rvec s_;
  SelectionMode mode_ = SelectionMode::relaxed;
};

struct NoiseModel {
  double sigma2 = 1.0;

  NoiseModel() = default;
  explicit NoiseModel(double s2) : sigma2(s2) {
    detail::require(std::isfinite(s2) && s2 > 0.0, "NoiseModel: sigma^2 must be > 0");
  }
  static NoiseModel from_snr_db(double snr_db, double power_limit) {
    return NoiseModel(power_limit / std::pow(10.0, snr_db / 10.0));
  }
};

struct ProblemInstance {
  SystemDims dims;
  ChannelMatrix channel;
  AggregationWeights weights;
  NoiseModel noise;
  double power_limit = 1.0;

  ProblemInstance() = default;
  ProblemInstance(SystemDims d, ChannelMatrix h, AggregationWeights w, NoiseModel nm, double p)
      : dims(d), channel(std::move(h)), weights(std::move(w)), noise(nm), power_limit(p) {
    detail::require_dims(channel.n_antennas() == dims.n_antennas &&
                             channel.n_devices() == dims.n_devices,
                         "ProblemInstance: channel shape does not match dims");
    detail::require_dims(weights.size() == dims.n_devices,
                         "ProblemInstance: weight length does not match K");
    detail::require(p > 0.0, "ProblemInstance: power limit must be > 0");
  }

  const cmat& H() const { return channel.matrix(); }
  const rvec& phi() const { return weights.phi(); }
  double sigma2() const { return noise.sigma2; }
  int N() const { return dims.n_antennas; }
  int K() const { return dims.n_devices; }
};

/// The joint optimization variable shared by the iterative solvers.
struct DesignState {
  cvec m;
  cvec b;
  rvec s;
  rvec s_bar;
};

}  // namespace airsel
