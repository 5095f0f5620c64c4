#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace amlkit {

using Scalar = double;
using Index = Eigen::Index;

template <typename T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using RowVecT = Eigen::Matrix<T, 1, Eigen::Dynamic>;

using Mat = MatT<Scalar>;
using Vec = VecT<Scalar>;
using RowVec = RowVecT<Scalar>;

/// Node label classes. Licit/illicit are the two loss classes; unknown nodes
/// stay in the graph for message passing but never enter loss or metrics.
enum class Label : std::uint8_t { Licit = 0, Illicit = 1, Unknown = 2 };

constexpr int kNumLabelClasses = 3;
constexpr int kNumLossClasses = 2;

inline const char* label_name(Label l) {
  switch (l) {
    case Label::Licit:
      return "licit";
    case Label::Illicit:
      return "illicit";
    default:
      return "unknown";
  }
}

/// Base type for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// graph-core
struct ConflictingLabel : Error { using Error::Error; };
struct EmptyGraph : Error { using Error::Error; };
struct FractionOutOfRange : Error { using Error::Error; };
struct DegenerateDegrees : Error { using Error::Error; };

// features
struct EmptyFitSet : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// splitting
struct ClassTooSmall : Error { using Error::Error; };
struct DegenerateWindow : Error { using Error::Error; };

// gnn-engine
struct ShapeMismatch : Error { using Error::Error; };
struct MissingClass : Error { using Error::Error; };
struct EmptyMask : Error { using Error::Error; };

// ensemble
struct InvalidWeights : Error { using Error::Error; };
struct DegenerateValidation : Error { using Error::Error; };

// metrics
struct LengthMismatch : Error { using Error::Error; };
struct NoPositives : Error { using Error::Error; };
struct SingleClass : Error { using Error::Error; };

// quantum
struct EntropyExhausted : Error { using Error::Error; };
struct TooManyFeatures : Error { using Error::Error; };
struct ZeroVector : Error { using Error::Error; };
struct QubitOutOfRange : Error { using Error::Error; };

// io / cli
struct FormatError : Error { using Error::Error; };
struct InvalidSpec : Error { using Error::Error; };
struct MissingArtifact : Error { using Error::Error; };

}  // namespace amlkit
