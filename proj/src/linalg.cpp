#include "fracrc/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>
#include <cmath>

#include "fracrc/core.hpp"
#include "fracrc/simd/kernels.hpp"

namespace fracrc {

namespace {
constexpr std::size_t kPendingRows = 64;
}

void Readout::apply(std::span<const double> feature, std::span<double> y) const {
  simd::kernels().gemv(weights.data(), outputs, features, feature.data(), y.data());
}

RidgeAccumulator::RidgeAccumulator(std::size_t features, std::size_t outputs)
    : features_(features),
      outputs_(outputs),
      g_upper_(features * features, 0.0),
      cross_(outputs * features, 0.0),
      pending_(kPendingRows * features, 0.0) {
  if (features == 0 || outputs == 0) throw ConfigError("RidgeAccumulator: empty problem");
}

void RidgeAccumulator::add(std::span<const double> feature, std::span<const double> target) {
  if (feature.size() != features_ || target.size() != outputs_) throw ConfigError("RidgeAccumulator: shape mismatch");
  const auto& k = simd::kernels();
  for (std::size_t o = 0; o < outputs_; ++o) k.axpy(target[o], feature.data(), cross_.data() + o * features_, features_);
  std::copy(feature.begin(), feature.end(), pending_.begin() + static_cast<std::ptrdiff_t>(pending_rows_ * features_));
  if (++pending_rows_ == kPendingRows) flush();
  ++count_;
}

void RidgeAccumulator::flush() const {
  if (pending_rows_ == 0) return;
  simd::kernels().syrk_upper(g_upper_.data(), features_, pending_.data(), pending_rows_);
  pending_rows_ = 0;
}

std::vector<double> RidgeAccumulator::gram() const {
  flush();
  std::vector<double> g(g_upper_);
  for (std::size_t i = 0; i < features_; ++i) {
    for (std::size_t j = 0; j < i; ++j) g[i * features_ + j] = g[j * features_ + i];
  }
  return g;
}

std::vector<double> RidgeAccumulator::cross() const { return cross_; }

Readout RidgeAccumulator::solve(double beta) const { return ridge_solve(gram(), cross_, features_, outputs_, beta); }

Readout ridge_solve(std::span<const double> gram, std::span<const double> cross, std::size_t features,
                    std::size_t outputs, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("ridge: beta must be positive and finite");
  if (gram.size() != features * features || cross.size() != outputs * features) {
    throw ConfigError("ridge: shape mismatch");
  }
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMat> g(gram.data(), static_cast<Eigen::Index>(features),
                                   static_cast<Eigen::Index>(features));
  const Eigen::Map<const RowMat> b(cross.data(), static_cast<Eigen::Index>(outputs),
                                   static_cast<Eigen::Index>(features));

  // Jacobi scaling: solve (S A S) Y = S B^T, W^T = S Y with S = diag(A)^(-1/2).
  Eigen::VectorXd s(static_cast<Eigen::Index>(features));
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double aii = g(i, i) + beta;
    if (!std::isfinite(aii) || aii <= 0.0) throw NumericalError("ridge: non-finite or non-positive diagonal");
    s(i) = 1.0 / std::sqrt(aii);
  }
  Eigen::MatrixXd a = s.asDiagonal() * g * s.asDiagonal();
  a.diagonal() += beta * s.cwiseProduct(s);
  const Eigen::MatrixXd rhs = s.asDiagonal() * b.transpose();
  if (!a.allFinite() || !rhs.allFinite()) throw NumericalError("ridge: non-finite normal equations");

  Eigen::MatrixXd y;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    y = llt.solve(rhs);
  }
  if (y.size() == 0 || !y.allFinite()) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    y = cod.solve(rhs);
  }
  if (!y.allFinite()) throw NumericalError("ridge: solve produced non-finite weights");

  const Eigen::MatrixXd wt = s.asDiagonal() * y;  // features x outputs
  Readout out;
  out.outputs = outputs;
  out.features = features;
  out.weights.resize(outputs * features);
  for (std::size_t o = 0; o < outputs; ++o) {
    for (std::size_t f = 0; f < features; ++f) {
      out.weights[o * features + f] = wt(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(o));
    }
  }
  return out;
}

}  // namespace fracrc
