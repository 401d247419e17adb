#include "hyla/hyla_features.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "hyla/errors.hpp"
#include "hyla/io_util.hpp"
#include "hyla/parallel.hpp"
#include "hyla/random.hpp"

namespace hyla::features {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_constants_match(std::size_t emb_dim, const HyLaConstants& c) {
  if (emb_dim != c.d0()) {
    throw ConfigError("embedding dimension " + std::to_string(emb_dim) +
                      " does not match constants d0 " + std::to_string(c.d0()));
  }
}

// ‖z − ω‖² for a boundary point ω, minus the rounding excess ‖ω‖² − 1 of the
// stored unit vector. Exact at z = 0 (gives 1), so P(0, ω) = 1 exactly.
double boundary_distance2(std::span<const double> z, std::span<const double> omega,
                          double omega_excess, std::span<double> diff) {
  double dist2 = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    diff[k] = z[k] - omega[k];
    dist2 += diff[k] * diff[k];
  }
  return dist2 - omega_excess;
}

std::vector<double> omega_excess(const Matrix& omegas) {
  std::vector<double> out(omegas.rows());
  for (std::size_t j = 0; j < omegas.rows(); ++j) out[j] = squared_norm(omegas.row(j)) - 1.0;
  return out;
}

}  // namespace

HyLaConstants::HyLaConstants(Matrix omegas, std::vector<double> lambdas,
                             std::vector<double> biases, double scale_s)
    : omegas_(std::move(omegas)),
      lambdas_(std::move(lambdas)),
      biases_(std::move(biases)),
      scale_s_(scale_s),
      alpha_((static_cast<double>(omegas_.cols()) - 1.0) / 2.0) {
  if (omegas_.rows() == 0) throw ConfigError("HyLaConstants: d1 must be at least 1");
  if (omegas_.cols() < 2) throw ConfigError("HyLaConstants: d0 must be at least 2");
  if (lambdas_.size() != omegas_.rows() || biases_.size() != omegas_.rows()) {
    throw ConfigError("HyLaConstants: lambdas/biases length differs from omega count");
  }
  for (std::size_t j = 0; j < omegas_.rows(); ++j) {
    if (std::abs(std::sqrt(squared_norm(omegas_.row(j))) - 1.0) > 1e-12) {
      throw ConfigError("HyLaConstants: omega " + std::to_string(j) + " is not unit length");
    }
    if (!(biases_[j] >= 0.0 && biases_[j] < kTwoPi)) {
      throw ConfigError("HyLaConstants: bias " + std::to_string(j) + " outside [0, 2pi)");
    }
  }
  if (!all_finite(lambdas_)) throw ConfigError("HyLaConstants: non-finite lambda");
}

HyLaConstants sample_constants(std::size_t d0, std::size_t d1, double s, std::uint64_t seed) {
  if (d0 < 2) throw ConfigError("sample_constants: d0 must be at least 2");
  if (d1 == 0) throw ConfigError("sample_constants: d1 must be at least 1");
  if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("sample_constants: s must be >= 0");

  RandomStream rng(seed);
  Matrix omegas(d1, d0);
  for (double& v : omegas.values()) v = rng.normal();
  for (std::size_t j = 0; j < d1; ++j) {
    auto w = omegas.row(j);
    double norm = std::sqrt(squared_norm(w));
    while (norm == 0.0) {  // measure-zero, but keep the draw well defined
      for (double& v : w) v = rng.normal();
      norm = std::sqrt(squared_norm(w));
    }
    for (double& v : w) v /= norm;
  }
  std::vector<double> lambdas(d1);
  for (double& l : lambdas) l = s * rng.normal();
  std::vector<double> biases(d1);
  for (double& b : biases) {
    b = kTwoPi * rng.uniform();
    if (b >= kTwoPi) b = 0.0;  // rounding of 2π·u for u just below 1
  }
  return HyLaConstants(std::move(omegas), std::move(lambdas), std::move(biases), s);
}

Matrix log_poisson_kernel(const geometry::EmbeddingMatrix& z, const Matrix& omegas,
                          double clamp_min) {
  if (z.cols() != omegas.cols()) throw ConfigError("log_poisson_kernel: dimension mismatch");
  Matrix out(z.rows(), omegas.rows());
  const auto excess = omega_excess(omegas);
  parallel_for(z.rows(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> diff(z.cols());
    for (std::size_t i = begin; i < end; ++i) {
      const auto zi = z.row(i);
      const double log_num = std::log(1.0 - squared_norm(zi));
      for (std::size_t j = 0; j < omegas.rows(); ++j) {
        const double dist2 = boundary_distance2(zi, omegas.row(j), excess[j], diff);
        out(i, j) = log_num - std::log(std::max(dist2, clamp_min));
      }
    }
  });
  return out;
}

Matrix hyla_forward(const geometry::EmbeddingMatrix& z, const HyLaConstants& c, double clamp_min) {
  check_constants_match(z.cols(), c);
  Matrix h = log_poisson_kernel(z, c.omegas(), clamp_min);
  const double alpha = c.alpha();
  const auto lambdas = c.lambdas();
  const auto biases = c.biases();
  parallel_for(h.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto row = h.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        const double log_p = row[j];
        row[j] = std::exp(alpha * log_p) * std::cos(lambdas[j] * log_p + biases[j]);
      }
    }
  });
  return h;
}

Matrix hyla_backward(const geometry::EmbeddingMatrix& z, const HyLaConstants& c, const Matrix& d_h,
                     double clamp_min) {
  check_constants_match(z.cols(), c);
  if (d_h.rows() != z.rows() || d_h.cols() != c.d1()) {
    throw ConfigError("hyla_backward: dL/dH shape does not match (n_emb, d1)");
  }
  const Matrix& omegas = c.omegas();
  const double alpha = c.alpha();
  const auto lambdas = c.lambdas();
  const auto biases = c.biases();
  const std::size_t d0 = z.cols();

  Matrix grad(z.rows(), d0);
  const auto excess = omega_excess(omegas);
  parallel_for(z.rows(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> diff(d0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto zi = z.row(i);
      auto gi = grad.row(i);
      const double one_minus = 1.0 - squared_norm(zi);
      const double log_num = std::log(one_minus);
      // Σ_j g_ij, the coefficient of ∂log(1−‖z‖²)/∂z = −2z/(1−‖z‖²).
      double radial = 0.0;
      for (std::size_t j = 0; j < omegas.rows(); ++j) {
        const double upstream = d_h(i, j);
        if (upstream == 0.0) continue;
        const double dist2 = boundary_distance2(zi, omegas.row(j), excess[j], diff);
        const bool clamped = dist2 < clamp_min;
        const double log_p = log_num - std::log(clamped ? clamp_min : dist2);
        const double theta = lambdas[j] * log_p + biases[j];
        // dH/dlogP
        const double g = upstream * std::exp(alpha * log_p) *
                         (alpha * std::cos(theta) - lambdas[j] * std::sin(theta));
        radial += g;
        if (!clamped) {
          const double coeff = -2.0 * g / dist2;
          for (std::size_t k = 0; k < d0; ++k) gi[k] += coeff * diff[k];
        }
      }
      const double coeff = -2.0 * radial / one_minus;
      for (std::size_t k = 0; k < d0; ++k) gi[k] += coeff * zi[k];
    }
  });
  return grad;
}

Matrix rff_forward(const Matrix& e, const HyLaConstants& c) {
  check_constants_match(e.cols(), c);
  Matrix r = matmul_nt(e, c.omegas());
  const auto lambdas = c.lambdas();
  const auto biases = c.biases();
  for (std::size_t i = 0; i < r.rows(); ++i) {
    auto row = r.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = std::cos(lambdas[j] * row[j] + biases[j]);
  }
  return r;
}

Matrix rff_backward(const Matrix& e, const HyLaConstants& c, const Matrix& d_r) {
  check_constants_match(e.cols(), c);
  if (d_r.rows() != e.rows() || d_r.cols() != c.d1()) {
    throw ConfigError("rff_backward: dL/dR shape does not match (n_emb, d1)");
  }
  Matrix proj = matmul_nt(e, c.omegas());
  const auto lambdas = c.lambdas();
  const auto biases = c.biases();
  // dL/d⟨ω_j, e_i⟩ = −dR_ij · λ_j · sin(λ_j⟨ω_j, e_i⟩ + b_j)
  for (std::size_t i = 0; i < proj.rows(); ++i) {
    auto row = proj.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = -d_r(i, j) * lambdas[j] * std::sin(lambdas[j] * row[j] + biases[j]);
    }
  }
  return matmul(proj, c.omegas());
}

double hyla_value(std::span<const double> z, std::span<const double> omega, double lambda,
                  double bias) {
  if (z.size() != omega.size()) throw ConfigError("hyla_value: dimension mismatch");
  std::vector<double> diff(z.size());
  const double dist2 = boundary_distance2(z, omega, squared_norm(omega) - 1.0, diff);
  const double log_p = std::log(1.0 - squared_norm(z)) - std::log(dist2);
  const double alpha = (static_cast<double>(z.size()) - 1.0) / 2.0;
  return std::exp(alpha * log_p) * std::cos(lambda * log_p + bias);
}

double hyla_eigenvalue(std::size_t d0, double lambda) noexcept {
  const double a = static_cast<double>(d0) - 1.0;
  return -0.25 * (a * a + 4.0 * lambda * lambda);
}

double laplace_beltrami_fd(const ScalarField& field, std::span<const double> z, double h) {
  if (!(h > 0.0)) throw ConfigError("laplace_beltrami_fd: step must be positive");
  const double r2 = squared_norm(z);
  if (std::sqrt(r2) + h >= 1.0) {
    throw DomainError("laplace_beltrami_fd: stencil leaves the ball");
  }
  const auto n = static_cast<double>(z.size());
  std::vector<double> probe(z.begin(), z.end());
  const double f0 = field(probe);
  double second = 0.0;
  double radial = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    probe[i] = z[i] + h;
    const double fp = field(probe);
    probe[i] = z[i] - h;
    const double fm = field(probe);
    probe[i] = z[i];
    second += (fp - 2.0 * f0 + fm) / (h * h);
    radial += z[i] * (fp - fm) / (2.0 * h);
  }
  const double one_minus = 1.0 - r2;
  return 0.25 * one_minus * one_minus * second + 0.5 * (n - 2.0) * one_minus * radial;
}

void write_feature_tsv(std::ostream& out, const Matrix& features) {
  std::string line;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    line = std::to_string(i);
    for (double v : features.row(i)) {
      line += '\t';
      line += format_double(v);
    }
    line += '\n';
    out << line;
  }
}

}  // namespace hyla::features
