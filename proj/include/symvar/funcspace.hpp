#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace symvar {

using Vec = Eigen::VectorXd;

// A reflection half-space H = {x : axis.x <= offset} compatible with the grid.
// partner[i] is the mirror cell of i, or -1 when the mirror falls outside the
// domain (the value there is 0 under zero extension).
struct Polarizer {
  std::array<double, 2> axis{0.0, 0.0};
  double offset = 0.0;
  std::vector<int> partner;
  std::vector<char> inside;
  // identifies the grid the pairing was built for
  std::array<double, 3> grid_key{0.0, 0.0, 0.0};
};

class GridSpace;
using SpacePtr = std::shared_ptr<const GridSpace>;

// Discrete triple X <= V <= W on a uniform symmetric grid over [-R,R]^N.
// X carries the zero-extended forward-difference W^{1,p} norm, V = L^p cap
// L^{qV}, W = L^{qW}, and S is the cone of nonnegative grid functions.
class GridSpace {
 public:
  int dimension() const { return dim_; }
  int n() const { return n_; }
  int size() const { return size_; }
  double radius() const { return radius_; }
  double spacing() const { return h_; }
  double cell_measure() const { return measure_; }
  double p() const { return p_; }
  double q_v() const { return qv_; }
  double q_w() const { return qw_; }
  double K() const { return K_; }
  double c_theta() const { return 1.0; }

  // coordinates in units of h/2, always odd
  std::array<int, 2> lattice(int cell) const { return lattice_[cell]; }
  std::array<double, 2> center(int cell) const;
  int cell_at(int lx, int ly) const;
  long radius_key(int cell) const;

  // each edge joins two cells along an axis; -1 is the zero ghost cell
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  double lr_norm(const Vec& u, double r) const;
  double norm_x(const Vec& u) const;
  double norm_v(const Vec& u) const;
  double norm_w(const Vec& u) const;

  // ||u||_X^p and its gradient
  double x_power(const Vec& u) const;
  Vec x_power_gradient(const Vec& u) const;
  // gradient of ||u||_X, zero at u = 0
  Vec norm_x_gradient(const Vec& u) const;
  // gradient of the active branch of ||u||_V, zero at u = 0
  Vec norm_v_gradient(const Vec& u) const;

  // p = 2 structure: ||u||_X^2 = u^T gram u, stiffness = gradient part only
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& stiffness() const { return stiffness_; }
  Vec riesz(const Vec& g) const;

  // sup of <g, v> over ||v||_X <= 1
  double dual_norm_x(const Vec& g) const;
  double dual_norm_x_solve(const Vec& g) const;
  double dual_norm_x_ascent(const Vec& g, int starts = 4) const;

  const std::vector<Polarizer>& family() const { return family_; }
  std::array<double, 3> key() const { return {double(dim_), double(n_), radius_}; }
  bool same_grid(const GridSpace& o) const { return key() == o.key(); }

 private:
  friend SpacePtr make_grid(int, int, double, double, double, std::optional<double>);
  friend double estimate_embedding_constant(const GridSpace&);
  GridSpace() = default;

  int dim_ = 1, n_ = 2, size_ = 2;
  double radius_ = 1, h_ = 1, measure_ = 1;
  double p_ = 2, qv_ = 4, qw_ = 3, K_ = 1;
  std::vector<std::array<int, 2>> lattice_;
  std::vector<std::pair<int, int>> edges_;
  Eigen::MatrixXd gram_, stiffness_;
  Eigen::LDLT<Eigen::MatrixXd> gram_ldlt_;
  std::vector<Polarizer> family_;
};

// q_w defaults to the midpoint of (p, qV); q_v overrides the p* / 2p rule.
// Without p* (p >= N) a q_w >= 2p raises the default qV to 2 q_w.
SpacePtr make_grid(int dimension, int n_cells_per_axis, double domain_radius,
                   double p, double q_w = 0.0, std::optional<double> q_v = std::nullopt);

// max of ||u||_V / ||u||_X over the deterministic probe set, refined by ascent
double estimate_embedding_constant(const GridSpace& space);

class GridFunction {
 public:
  GridFunction(SpacePtr space, Vec values);
  static GridFunction zeros(SpacePtr space);

  const GridSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const Vec& values() const { return values_; }
  int size() const { return int(values_.size()); }
  double operator[](int i) const { return values_[i]; }
  bool in_cone() const { return (values_.array() >= 0.0).all(); }

 private:
  SpacePtr space_;
  Vec values_;
};

GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double c, const GridFunction& a);

double norm_X(const GridFunction& u);
double norm_V(const GridFunction& u);
double norm_W(const GridFunction& u);
GridFunction theta(const GridFunction& u);

enum class SymmetryClass { PolarizationNonincreasing, PolarizationInvariant, Unverified };
std::string to_string(SymmetryClass c);

// f: X -> R cup {+inf}. eval and gradient act on raw cell values of `space`;
// gradient returns partial derivatives (riesz() gives the representative).
struct Functional {
  std::string name;
  SpacePtr space;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> gradient;
  SymmetryClass symmetry = SymmetryClass::Unverified;
  std::optional<double> lower_bound;
  // closed-form argmin of w -> f(w) + weight * ||w - center||_X^p_exp, when known
  std::function<std::optional<Vec>(const Vec& center, double weight, double p_exp)> prox;

  double operator()(const GridFunction& u) const { return eval(u.values()); }
  bool has_gradient() const { return static_cast<bool>(gradient); }
};

nlohmann::ordered_json to_json(const GridFunction& u);
GridFunction grid_function_from_json(const nlohmann::json& j);

}  // namespace symvar
