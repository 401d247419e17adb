#pragma once

// Hyperbolic Laplacian eigenfunction features:
//
//   H[i][j] = P(z_i, ω_j)^α · cos(λ_j · log P(z_i, ω_j) + b_j),
//   P(z, ω) = (1 − ‖z‖²) / ‖z − ω‖²,   α = (d0 − 1) / 2,
//
// each column an eigenfunction of the Poincaré-ball Laplace-Beltrami operator
// with eigenvalue −((d0 − 1)² + 4λ_j²) / 4. The Euclidean random-Fourier map
// cos(λ_j ⟨ω_j, e⟩ + b_j) shares the same constants for ablations.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "hyla/dense.hpp"
#include "hyla/geometry.hpp"

namespace hyla::features {

inline constexpr double kDefaultClampMin = 1e-15;

/// Random constants of the feature map: boundary points, frequencies and
/// phases, one triple per output feature. Immutable once sampled.
class HyLaConstants {
 public:
  HyLaConstants() = default;
  // Validates unit-norm omegas, biases in [0, 2π) and matching lengths.
  HyLaConstants(Matrix omegas, std::vector<double> lambdas, std::vector<double> biases,
                double scale_s);

  std::size_t d0() const noexcept { return omegas_.cols(); }
  std::size_t d1() const noexcept { return omegas_.rows(); }
  const Matrix& omegas() const noexcept { return omegas_; }
  std::span<const double> lambdas() const noexcept { return lambdas_; }
  std::span<const double> biases() const noexcept { return biases_; }
  double scale_s() const noexcept { return scale_s_; }
  double alpha() const noexcept { return alpha_; }

  friend bool operator==(const HyLaConstants&, const HyLaConstants&) = default;

 private:
  Matrix omegas_;
  std::vector<double> lambdas_;
  std::vector<double> biases_;
  double scale_s_ = 0.0;
  double alpha_ = 0.0;
};

/// Draw order: all omega coordinates (row-major, standard normals, rows then
/// normalized), then the d1 lambdas, then the d1 biases, all from one
/// RandomStream(seed).
HyLaConstants sample_constants(std::size_t d0, std::size_t d1, double s, std::uint64_t seed);

// L[i][j] = log(1 − ‖z_i‖²) − log(max(‖z_i − ω_j‖², clamp_min)).
Matrix log_poisson_kernel(const geometry::EmbeddingMatrix& z, const Matrix& omegas,
                          double clamp_min = kDefaultClampMin);

Matrix hyla_forward(const geometry::EmbeddingMatrix& z, const HyLaConstants& c,
                    double clamp_min = kDefaultClampMin);

/// Euclidean gradient of a scalar loss with respect to Z, given dLoss/dH.
/// Entries whose kernel distance was clamped contribute nothing through the
/// ‖z − ω‖² term.
Matrix hyla_backward(const geometry::EmbeddingMatrix& z, const HyLaConstants& c, const Matrix& d_h,
                     double clamp_min = kDefaultClampMin);

// R[i][j] = cos(λ_j ⟨ω_j, e_i⟩ + b_j).
Matrix rff_forward(const Matrix& e, const HyLaConstants& c);
Matrix rff_backward(const Matrix& e, const HyLaConstants& c, const Matrix& d_r);

// Single HyLa eigenfunction evaluated at one point.
double hyla_value(std::span<const double> z, std::span<const double> omega, double lambda,
                  double bias);

// Eigenvalue of the HyLa eigenfunction with frequency λ on B^{d0}.
double hyla_eigenvalue(std::size_t d0, double lambda) noexcept;

using ScalarField = std::function<double(std::span<const double>)>;

/// Laplace-Beltrami operator of the Poincaré ball applied to `field` at z,
///   ¼(1−‖z‖²)² Σ ∂²f/∂z_i² + ((n−2)/2)(1−‖z‖²) Σ z_i ∂f/∂z_i,
/// with central differences of step h. Test oracle; throws DomainError when
/// the stencil would leave the ball.
double laplace_beltrami_fd(const ScalarField& field, std::span<const double> z, double h);

// "node<TAB>v_0<TAB>...<TAB>v_{d-1}\n" per row, shortest round-trip decimals.
void write_feature_tsv(std::ostream& out, const Matrix& features);

}  // namespace hyla::features
