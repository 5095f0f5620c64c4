#pragma once

#include "amlkit/quantum/random_source.hpp"
#include "amlkit/types.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace amlkit::quantum {

using Complex = std::complex<double>;
using AmpVec = Eigen::VectorXcd;

constexpr int kMaxQubits = 12;

/// n-qubit pure state. Qubit q maps to bit q of the basis index
/// (little-endian). Norm is preserved by every gate application.
class StateVector {
 public:
  explicit StateVector(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
      throw QubitOutOfRange("qubit count must be in [1, " +
                            std::to_string(kMaxQubits) + "]");
    amps_ = AmpVec::Zero(std::int64_t{1} << n_qubits);
    amps_[0] = 1.0;
  }

  static StateVector from_amplitudes(int n_qubits, AmpVec amps) {
    StateVector s(n_qubits);
    if (amps.size() != s.amps_.size()) throw ShapeMismatch("amplitude count mismatch");
    s.amps_ = std::move(amps);
    return s;
  }

  int n_qubits() const { return n_qubits_; }
  Index dim() const { return amps_.size(); }
  const AmpVec& amplitudes() const { return amps_; }
  Complex amplitude(Index i) const { return amps_[i]; }

  double norm_sq() const { return amps_.squaredNorm(); }

  void apply_rx(int q, double theta) { rotate(q, theta, Axis::X); }
  void apply_ry(int q, double theta) { rotate(q, theta, Axis::Y); }
  void apply_rz(int q, double theta) { rotate(q, theta, Axis::Z); }

  void apply_cnot(int control, int target) {
    check_qubit(control);
    check_qubit(target);
    if (control == target) throw QubitOutOfRange("cnot control equals target");
    const Index cbit = Index{1} << control;
    const Index tbit = Index{1} << target;
    for (Index i = 0; i < dim(); ++i) {
      if ((i & cbit) && !(i & tbit)) std::swap(amps_[i], amps_[i | tbit]);
    }
  }

 private:
  enum class Axis { X, Y, Z };

  void check_qubit(int q) const {
    if (q < 0 || q >= n_qubits_)
      throw QubitOutOfRange("qubit index " + std::to_string(q) + " out of range");
  }

  void rotate(int q, double theta, Axis axis) {
    check_qubit(q);
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    const Index bit = Index{1} << q;
    for (Index i = 0; i < dim(); ++i) {
      if (i & bit) continue;
      Complex a0 = amps_[i], a1 = amps_[i | bit];
      switch (axis) {
        case Axis::X:
          amps_[i] = c * a0 - Complex(0, s) * a1;
          amps_[i | bit] = -Complex(0, s) * a0 + c * a1;
          break;
        case Axis::Y:
          amps_[i] = c * a0 - s * a1;
          amps_[i | bit] = s * a0 + c * a1;
          break;
        case Axis::Z:
          amps_[i] = Complex(c, -s) * a0;
          amps_[i | bit] = Complex(c, s) * a1;
          break;
      }
    }
  }

  int n_qubits_;
  AmpVec amps_;
};

/// One circuit instruction: a single-qubit rotation or a controlled-not.
struct Gate {
  enum class Kind : std::uint8_t { Rx, Ry, Rz, Cnot };
  Kind kind = Kind::Ry;
  int qubit = 0;    // rotation target
  double theta = 0; // rotation angle
  int control = 0, target = 0;  // cnot wires

  static Gate rx(int q, double t) { return {Kind::Rx, q, t, 0, 0}; }
  static Gate ry(int q, double t) { return {Kind::Ry, q, t, 0, 0}; }
  static Gate rz(int q, double t) { return {Kind::Rz, q, t, 0, 0}; }
  static Gate cnot(int c, int t) { return {Kind::Cnot, 0, 0.0, c, t}; }
};

struct CircuitSpec {
  std::vector<Gate> gates;
};

/// Applies the gates in order, in place.
inline void apply_circuit_inplace(StateVector& state, const CircuitSpec& circuit) {
  for (const Gate& g : circuit.gates) {
    switch (g.kind) {
      case Gate::Kind::Rx:
        state.apply_rx(g.qubit, g.theta);
        break;
      case Gate::Kind::Ry:
        state.apply_ry(g.qubit, g.theta);
        break;
      case Gate::Kind::Rz:
        state.apply_rz(g.qubit, g.theta);
        break;
      case Gate::Kind::Cnot:
        state.apply_cnot(g.control, g.target);
        break;
    }
  }
}

inline StateVector apply_circuit(StateVector state, const CircuitSpec& circuit) {
  apply_circuit_inplace(state, circuit);
  return state;
}

/// Circuit with every rotation angle negated and the gate order reversed.
/// Inverts rotation-only circuits exactly.
inline CircuitSpec reversed_negated(const CircuitSpec& circuit) {
  CircuitSpec rev;
  rev.gates.assign(circuit.gates.rbegin(), circuit.gates.rend());
  for (Gate& g : rev.gates)
    if (g.kind != Gate::Kind::Cnot) g.theta = -g.theta;
  return rev;
}

/// Angle encoding: feature j becomes RY(x_j) on qubit j, remaining qubits
/// stay |0>. Expects at most one feature per qubit.
inline StateVector angle_encode(const Vec& x, int n_qubits) {
  if (x.size() > n_qubits)
    throw TooManyFeatures("angle encoding needs one qubit per feature");
  StateVector s(n_qubits);
  for (Index j = 0; j < x.size(); ++j) s.apply_ry(static_cast<int>(j), x[j]);
  return s;
}

/// Amplitude encoding: zero-pads to the next power of two (at least 2),
/// L2-normalizes and sets the result as real amplitudes.
inline StateVector amplitude_encode(const Vec& x) {
  const double nrm = x.norm();
  if (x.size() == 0 || nrm == 0.0)
    throw ZeroVector("amplitude encoding needs a nonzero vector");
  Index padded = 2;
  int n_qubits = 1;
  while (padded < x.size()) {
    padded <<= 1;
    ++n_qubits;
  }
  if (n_qubits > kMaxQubits) throw TooManyFeatures("vector needs too many qubits");
  AmpVec amps = AmpVec::Zero(padded);
  for (Index i = 0; i < x.size(); ++i) amps[i] = x[i] / nrm;
  return StateVector::from_amplitudes(n_qubits, std::move(amps));
}

/// Exact per-qubit Pauli-Z expectations: <Z_q> = sum_i |a_i|^2 * (+-1).
inline Vec expect_z(const StateVector& state) {
  Vec out = Vec::Zero(state.n_qubits());
  for (Index i = 0; i < state.dim(); ++i) {
    const double p = std::norm(state.amplitude(i));
    if (p == 0.0) continue;
    for (int q = 0; q < state.n_qubits(); ++q)
      out[q] += ((i >> q) & 1) ? -p : p;
  }
  return out;
}

/// Shot-sampled variant of expect_z: draws basis states from |a|^2 and
/// averages the observed +-1 outcomes.
inline Vec expect_z_sampled(const StateVector& state, int shots, RandomSource& rng) {
  if (shots <= 0) throw Error("shot count must be positive");
  Vec out = Vec::Zero(state.n_qubits());
  std::vector<double> cdf(state.dim());
  double acc = 0.0;
  for (Index i = 0; i < state.dim(); ++i) {
    acc += std::norm(state.amplitude(i));
    cdf[i] = acc;
  }
  for (int s = 0; s < shots; ++s) {
    const double u = rng.uniform() * acc;
    const Index i = static_cast<Index>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    for (int q = 0; q < state.n_qubits(); ++q)
      out[q] += ((i >> q) & 1) ? -1.0 : 1.0;
  }
  return out / static_cast<double>(shots);
}

/// Variational ansatz: depth blocks of per-qubit RY rotations followed by a
/// ring of CNOTs (skipped for a single qubit). thetas is depth x n_qubits.
inline CircuitSpec ring_ansatz(int n_qubits, const Mat& thetas) {
  if (thetas.cols() != n_qubits) throw ShapeMismatch("one angle column per qubit");
  CircuitSpec c;
  for (Index layer = 0; layer < thetas.rows(); ++layer) {
    for (int q = 0; q < n_qubits; ++q)
      c.gates.push_back(Gate::ry(q, thetas(layer, q)));
    if (n_qubits > 1)
      for (int q = 0; q < n_qubits; ++q)
        c.gates.push_back(Gate::cnot(q, (q + 1) % n_qubits));
  }
  return c;
}

}  // namespace amlkit::quantum
