#pragma once

#include <span>
#include <vector>

namespace mtsdp::decode {

// Euclidean projection of `a` onto the probability simplex, in place.
void project_simplex(std::span<double> a);

// Projection onto {x >= 0, sum x <= 1}.
void project_at_most_one(std::span<double> x);

// Projection onto the XOR-with-output polytope {x >= 0, y = sum x, y <= 1}.
// `x` holds the inputs, `y` the output; both are updated in place.
void project_xor_with_output(std::span<double> x, double& y);

// Projection onto the OR-with-output polytope
// {0 <= x_i <= y <= 1, y <= sum x}.
void project_or_with_output(std::span<double> x, double& y);

// Local subproblem of a factor that adds `potential` when all of its k binary
// variables are on (k <= 3):
//   argmin over conv{(c, prod c) : c in {0,1}^k} of
//     rho/2 * ||q - z||^2 - potential * u
// Writes the variable marginals to q and returns u, the all-ones mass.
double solve_dense_and(std::span<const double> z, double potential, double rho,
                       std::span<double> q);

// Same subproblem solved over distributions on the 2^k vertex assignments by
// exhaustive support enumeration. Slow; kept as an independent check.
double solve_dense_and_by_vertices(std::span<const double> z, double potential, double rho,
                                   std::span<double> q);

// Local MAP values used for the dual objective: the maximum of
// sum_i a_i x_i over the vertices of each factor (plus the potential on the
// all-ones vertex for DENSE-AND). For the output-bearing factors the last
// entry of `a` scores the output.
double map_xor_with_output(std::span<const double> a);
double map_or_with_output(std::span<const double> a);
double map_at_most_one(std::span<const double> a);
double map_dense_and(std::span<const double> a, double potential);

}  // namespace mtsdp::decode
