#pragma once

// Poincaré-ball primitives used to train hyperbolic embeddings.

#include <cstdint>
#include <span>
#include <vector>

#include "hyla/dense.hpp"

namespace hyla::geometry {

inline constexpr double kDefaultBallEps = 1e-5;
inline constexpr double kDefaultInitRange = 1e-5;

/// n_emb × d0 matrix of ball points, one per row. Rows are kept at
/// norm ≤ 1 − ball_eps by the optimizer; check_inside() verifies it.
using EmbeddingMatrix = Matrix;

// Throws DomainError naming the first row whose norm is ≥ 1 or > radius.
void check_inside(const EmbeddingMatrix& emb, double radius = 1.0);

// arcosh(1 + 2‖x−y‖² / ((1−‖x‖²)(1−‖y‖²))). Throws DomainError if either
// point is not strictly inside the ball.
double poincare_distance(std::span<const double> x, std::span<const double> y);

// Rescales z onto radius 1 − ball_eps when it lies outside; otherwise returns z.
std::vector<double> project_to_ball(std::span<const double> z, double ball_eps = kDefaultBallEps);
void project_to_ball_inplace(std::span<double> z, double ball_eps = kDefaultBallEps);

// Inverse Poincaré metric applied to a Euclidean gradient: ((1−‖z‖²)²/4)·g.
std::vector<double> riemannian_rescale(std::span<const double> z, std::span<const double> g_euclid);

// z ← proj(z − lr1 · riemannian_rescale(z, g)). `row` only labels errors.
void rsgd_step(std::span<double> z, std::span<const double> g_euclid, double lr1,
               double ball_eps = kDefaultBallEps, std::size_t row = 0);

// Applies rsgd_step to every row whose gradient is not identically zero.
void rsgd_update(EmbeddingMatrix& emb, const Matrix& g_euclid, double lr1,
                 double ball_eps = kDefaultBallEps);

// Coordinates i.i.d. uniform in [−init_range, init_range], drawn row-major
// from a RandomStream seeded with `seed`.
EmbeddingMatrix init_embeddings(std::size_t n_emb, std::size_t d0, std::uint64_t seed,
                                double init_range = kDefaultInitRange);

}  // namespace hyla::geometry
