#include "hyla/geometry.hpp"

#include <cmath>
#include <string>

#include "hyla/errors.hpp"
#include "hyla/random.hpp"

namespace hyla::geometry {

void check_inside(const EmbeddingMatrix& emb, double radius) {
  for (std::size_t i = 0; i < emb.rows(); ++i) {
    const double r2 = squared_norm(emb.row(i));
    if (!(r2 < 1.0) || std::sqrt(r2) > radius) {
      throw DomainError("embedding row " + std::to_string(i) + " has norm " +
                        std::to_string(std::sqrt(r2)) + " outside the ball");
    }
  }
}

double poincare_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("poincare_distance: dimension mismatch");
  const double x2 = squared_norm(x);
  const double y2 = squared_norm(y);
  if (!(x2 < 1.0) || !(y2 < 1.0)) throw DomainError("poincare_distance: point outside the open ball");
  double diff2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) diff2 += (x[i] - y[i]) * (x[i] - y[i]);
  return std::acosh(1.0 + 2.0 * diff2 / ((1.0 - x2) * (1.0 - y2)));
}

void project_to_ball_inplace(std::span<double> z, double ball_eps) {
  if (!(ball_eps > 0.0 && ball_eps < 0.1)) throw ConfigError("ball_eps must lie in (0, 0.1)");
  if (!all_finite(z)) throw NumericError("project_to_ball: non-finite coordinate");
  const double radius = 1.0 - ball_eps;
  const double norm = std::sqrt(squared_norm(z));
  if (norm <= radius) return;
  double factor = radius / norm;
  for (double& v : z) v *= factor;
  // Rounding can leave the result an ulp outside; shrink until it is not.
  while (std::sqrt(squared_norm(z)) > radius) {
    factor = std::nextafter(1.0, 0.0);
    for (double& v : z) v *= factor;
  }
}

std::vector<double> project_to_ball(std::span<const double> z, double ball_eps) {
  std::vector<double> out(z.begin(), z.end());
  project_to_ball_inplace(out, ball_eps);
  return out;
}

std::vector<double> riemannian_rescale(std::span<const double> z, std::span<const double> g_euclid) {
  if (z.size() != g_euclid.size()) throw ConfigError("riemannian_rescale: dimension mismatch");
  const double one_minus = 1.0 - squared_norm(z);
  const double factor = one_minus * one_minus / 4.0;
  std::vector<double> out(g_euclid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * g_euclid[i];
  return out;
}

void rsgd_step(std::span<double> z, std::span<const double> g_euclid, double lr1, double ball_eps,
               std::size_t row) {
  if (z.size() != g_euclid.size()) throw ConfigError("rsgd_step: dimension mismatch");
  if (!(lr1 >= 0.0)) throw ConfigError("rsgd_step: lr1 must be non-negative");
  if (!all_finite(g_euclid)) {
    throw NumericError("rsgd_step: non-finite gradient for embedding row " + std::to_string(row));
  }
  if (lr1 == 0.0) return;
  const auto step = riemannian_rescale(z, g_euclid);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] -= lr1 * step[i];
  project_to_ball_inplace(z, ball_eps);
}

void rsgd_update(EmbeddingMatrix& emb, const Matrix& g_euclid, double lr1, double ball_eps) {
  if (g_euclid.rows() != emb.rows() || g_euclid.cols() != emb.cols()) {
    throw ConfigError("rsgd_update: gradient shape does not match embeddings");
  }
  for (std::size_t i = 0; i < emb.rows(); ++i) {
    const auto g = g_euclid.row(i);
    bool nonzero = false;
    for (double v : g) nonzero = nonzero || v != 0.0 || std::isnan(v);
    if (nonzero) rsgd_step(emb.row(i), g, lr1, ball_eps, i);
  }
}

EmbeddingMatrix init_embeddings(std::size_t n_emb, std::size_t d0, std::uint64_t seed,
                                double init_range) {
  if (n_emb == 0) throw ConfigError("init_embeddings: need at least one embedding");
  if (d0 < 2) throw ConfigError("init_embeddings: d0 must be at least 2");
  if (!(init_range > 0.0) || init_range * std::sqrt(static_cast<double>(d0)) >= 1.0) {
    throw ConfigError("init_embeddings: init_range must keep points inside the ball");
  }
  RandomStream rng(seed);
  Matrix coords(n_emb, d0);
  for (double& v : coords.values()) v = rng.uniform(-init_range, init_range);
  return coords;
}

}  // namespace hyla::geometry
