#pragma once

#include "gdse/types.hpp"

namespace gdse {

/// Nodes and weights of a rule normalised to a probability measure
/// (weights sum to one).
struct QuadratureRule {
  Vector nodes;
  Vector weights;
};

/// Gauss-Hermite rule for the standard normal law (probabilists' polynomials),
/// computed once per size by Golub-Welsch and cached.
const QuadratureRule& gauss_hermite(int n);

/// Gauss-Legendre rule for the uniform law on [0, 1].
const QuadratureRule& gauss_legendre_unit(int n);

} // namespace gdse
