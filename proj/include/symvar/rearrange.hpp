#pragma once

#include <vector>

#include <json.hpp>

#include "symvar/funcspace.hpp"

namespace symvar {

// All grid-compatible polarizers of `space`, in deterministic order: for each
// direction (axes, then diagonals in 2D), offsets beta = 0, step, 2 step, ...
// until no cell lies outside H. At beta = 0 only the direction pointing into
// the perturbed origin is kept (see README, "Polarizer family").
std::vector<Polarizer> build_family(const GridSpace& space);

// u^H on raw values; applies theta first so any u is accepted.
Vec polarize(const Vec& u, const Polarizer& H);
GridFunction polarize(const GridFunction& u, const Polarizer& H);

// Cells sorted by (|center|^2, index); the schwarz target order.
std::vector<int> radial_order(const GridSpace& space);
Vec schwarz(const GridSpace& space, const Vec& u);
GridFunction schwarz(const GridFunction& u);

struct Symmetrized {
  GridFunction u;
  std::vector<int> sequence;  // indices into space.family()
  double residual = 0.0;      // ||u - schwarz(u)||_V
};

// T_rho: greedy iterated polarization until ||u - u*||_V < rho.
// max_steps <= 0 selects the default cap 10 * cells * |family|.
Symmetrized approx_symmetrize(const GridFunction& u, double rho, long max_steps = 0);

nlohmann::ordered_json polarizer_json(const Polarizer& H);
nlohmann::ordered_json sequence_json(const GridSpace& space, const std::vector<int>& seq);

}  // namespace symvar
