#pragma once

#include "amlkit/nn/topology.hpp"
#include "amlkit/quantum/statevector.hpp"
#include "amlkit/types.hpp"

#include <cmath>
#include <vector>

namespace amlkit::quantum {

/// Hybrid message-passing layer: per node, the mean of the node's own and its
/// neighbors' embeddings is clamped to [0, pi], angle-encoded, pushed through
/// the ring ansatz U(theta), and read out as per-qubit Z expectations.
/// Output width equals n_qubits; input width must not exceed it.
struct QuantumLayerResult {
  Mat output;        // node_count x n_qubits, entries in [-1, 1]
  Mat aggregates;    // pre-clamp neighborhood means (cache for backward)
  bool clamped = false;
};

namespace detail {

inline Vec clamp_angles(const Vec& x, bool* clamped) {
  Vec out = x;
  for (Index j = 0; j < out.size(); ++j) {
    if (out[j] < 0.0) {
      out[j] = 0.0;
      if (clamped) *clamped = true;
    } else if (out[j] > M_PI) {
      out[j] = M_PI;
      if (clamped) *clamped = true;
    }
  }
  return out;
}

inline Vec node_expectations(const Vec& angles, const Mat& thetas, int n_qubits) {
  StateVector s = angle_encode(angles, n_qubits);
  apply_circuit_inplace(s, ring_ansatz(n_qubits, thetas));
  return expect_z(s);
}

}  // namespace detail

inline QuantumLayerResult quantum_message_layer(const nn::Topology& topo,
                                                const Mat& H, const Mat& thetas,
                                                int n_qubits) {
  if (H.rows() != topo.n) throw ShapeMismatch("feature rows != node count");
  if (H.cols() > n_qubits)
    throw TooManyFeatures("feature slice wider than the qubit register");

  QuantumLayerResult r;
  r.output.resize(topo.n, n_qubits);
  r.aggregates.resize(topo.n, H.cols());
  for (Index v = 0; v < topo.n; ++v) {
    RowVec mean = H.row(v);
    const auto nbrs = topo.neighbors(v);
    for (Index u : nbrs) mean += H.row(u);
    mean /= static_cast<Scalar>(nbrs.size() + 1);
    r.aggregates.row(v) = mean;
    const Vec angles = detail::clamp_angles(mean.transpose(), &r.clamped);
    r.output.row(v) = detail::node_expectations(angles, thetas, n_qubits).transpose();
  }
  return r;
}

struct QuantumLayerGrads {
  Mat dthetas;  // same shape as thetas
  Mat dH;       // same shape as H
};

/// Parameter-shift gradients of sum(G .* output) with respect to the circuit
/// angles and the input embeddings. Every angle (ansatz and encoding alike)
/// parameterizes an RY rotation, so d<Z>/dtheta = (<Z>(+pi/2) - <Z>(-pi/2))/2
/// holds exactly; input gradients chain through the clamp (zero outside
/// [0, pi]) and the neighborhood mean.
inline QuantumLayerGrads quantum_message_layer_backward(
    const nn::Topology& topo, const Mat& H, const Mat& thetas, int n_qubits,
    const Mat& grad_out) {
  if (grad_out.rows() != topo.n || grad_out.cols() != n_qubits)
    throw ShapeMismatch("upstream gradient shape mismatch");
  const QuantumLayerResult fwd = quantum_message_layer(topo, H, thetas, n_qubits);

  QuantumLayerGrads g;
  g.dthetas = Mat::Zero(thetas.rows(), thetas.cols());
  Mat dmean = Mat::Zero(topo.n, H.cols());
  const Scalar half_pi = M_PI / 2.0;

  for (Index v = 0; v < topo.n; ++v) {
    const Vec angles = detail::clamp_angles(fwd.aggregates.row(v).transpose(), nullptr);

    for (Index layer = 0; layer < thetas.rows(); ++layer) {
      for (Index q = 0; q < thetas.cols(); ++q) {
        Mat tp = thetas, tm = thetas;
        tp(layer, q) += half_pi;
        tm(layer, q) -= half_pi;
        const Vec dexp = 0.5 * (detail::node_expectations(angles, tp, n_qubits) -
                                detail::node_expectations(angles, tm, n_qubits));
        g.dthetas(layer, q) += grad_out.row(v).dot(dexp.transpose());
      }
    }

    for (Index j = 0; j < H.cols(); ++j) {
      const Scalar a = fwd.aggregates(v, j);
      if (a < 0.0 || a > M_PI) continue;  // clamp gradient is zero outside
      Vec ap = angles, am = angles;
      ap[j] += half_pi;
      am[j] -= half_pi;
      const Vec dexp = 0.5 * (detail::node_expectations(ap, thetas, n_qubits) -
                              detail::node_expectations(am, thetas, n_qubits));
      dmean(v, j) = grad_out.row(v).dot(dexp.transpose());
    }
  }

  // Chain through the neighborhood mean.
  g.dH = Mat::Zero(H.rows(), H.cols());
  for (Index v = 0; v < topo.n; ++v) {
    const auto nbrs = topo.neighbors(v);
    const Scalar inv = 1.0 / static_cast<Scalar>(nbrs.size() + 1);
    g.dH.row(v) += inv * dmean.row(v);
    for (Index u : nbrs) g.dH.row(u) += inv * dmean.row(v);
  }
  return g;
}

}  // namespace amlkit::quantum
