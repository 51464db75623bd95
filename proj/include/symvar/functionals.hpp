#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "symvar/funcspace.hpp"

namespace symvar {

// Strictly decreasing in |x|: amp * (1 - |x|^2 / (2 R^2)). Fixed by every
// registered polarizer and by schwarz.
GridFunction symmetric_profile(SpacePtr space, double amp);

// c ||u - a||_X^2; closed-form prox for p_exp = 2 when the X-norm is Hilbert.
Functional quadratic_x(const GridFunction& a, double c = 1.0);
// ||u - a||_V^2
Functional quadratic_v(const GridFunction& a);
// 1/2 ||u||_X^2
Functional half_norm_sq(SpacePtr space);
// (||u||_{L^2}^2 - 1)^2
Functional norm_double_well(SpacePtr space);
// 1/2 u^T K u + sum m (u_i^2 - 1)^2 / 4
Functional ginzburg_landau(SpacePtr space);
// 1/2 ||u||_X^2 - 1/4 ||u||_X^4 on the X-ball of radius 1, +inf outside
Functional quartic_ball(SpacePtr space);
// c sum m u_i
Functional linear(SpacePtr space, double c);
// r^2 (r - 1)^2 with r = ||u||_{L^2}: wells at 0 and 1, ridge at r = 1/2
Functional radial_double_well(SpacePtr space);

// Registry used by the CLI. Parameters: "a_amp" (profile amplitude) for the
// quadratics, "c" for quadratic_x and linear.
Functional make_functional(const std::string& name, SpacePtr space,
                           const nlohmann::json& params = nlohmann::json::object());
std::vector<std::string> functional_names();

}  // namespace symvar
