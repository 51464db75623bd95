#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "symvar/certificate.hpp"
#include "symvar/engine.hpp"
#include "symvar/funcspace.hpp"
#include "symvar/principles.hpp"

namespace symvar {

// ---- quasi-linear energies  f(u) = int L(u, |Du|) - int F(u)

// L(s, t) with t = |xi| >= 0, and its partials. The growth envelope reads
// |L| <= alpha(|s|) t^p + b t^p + a, |L_s| <= beta(|s|) t^p,
// |L_t| <= gamma(|s|) t^(p-1) + b t^(p-1) + a.
struct QuasilinearIntegrand {
  std::string name;
  std::function<double(double, double)> L, L_s, L_t;
  double p = 2.0;
  double a = 0.0, b = 0.0;
  std::function<double(double)> alpha, beta, gamma;
  // linear forcing F(s) = forcing * s, kept outside L so that L >= 0 holds
  double forcing = 0.0;
};

// t^2 / 2
QuasilinearIntegrand dirichlet_integrand(double forcing = 0.0);
// t^p / p
QuasilinearIntegrand p_dirichlet_integrand(double p, double forcing = 0.0);
// sqrt(1 + t^2) - 1
QuasilinearIntegrand area_integrand(double forcing = 0.0);
QuasilinearIntegrand integrand_by_name(const std::string& name, double p, double forcing);

// Samples L >= 0, L(-s, t) <= L(s, t) for s <= 0 and the growth envelope;
// throws AssumptionViolated with the first failing (s, t).
void check_integrand(const QuasilinearIntegrand& I, int samples = 2000, std::uint64_t seed = 0);

// Edge quadrature: each edge contributes m L(mean of its two cells, |forward
// difference| / h); the ghost cell outside the domain is 0.
double quasilinear_energy(const QuasilinearIntegrand& I, const GridFunction& u);
// int L_t(u,|Du|) Du/|Du| . Dv + int L_s(u,|Du|) v - int F'(u) v
double quasilinear_residual(const QuasilinearIntegrand& I, const GridFunction& u,
                            const GridFunction& v);
// the residual functional w as a vector of pairings with cell indicators
Vec quasilinear_residual_vector(const QuasilinearIntegrand& I, const SpacePtr& space,
                                const Vec& u);
Functional quasilinear_functional(const QuasilinearIntegrand& I, SpacePtr space);

// Symmetric Ekeland (variant II, sigma = eps, rho = eps / (2K + 1)) on the
// discretized energy. Records the dual norm of w_eps two ways for p = 2 and,
// for the Dirichlet integrand with forcing, the distance to the linear solve.
Certificate quasilinear_experiment(const QuasilinearIntegrand& I, SpacePtr space, double eps,
                                   const PrincipleOptions& opts = {});

// ---- semi-linear energies  f(u) = 1/2 int |Du|^2 - int G(u)

struct SemilinearNonlinearity {
  std::string name;
  std::function<double(double)> g, G;
  double a1 = 0.0, a2 = 0.0, b = 0.0, p = 4.0;
  // f = +inf outside |u_i| <= box
  std::optional<double> box;
};

SemilinearNonlinearity nonlinearity_by_name(const std::string& name);

void check_nonlinearity(const SemilinearNonlinearity& N, int samples = 2000,
                        std::uint64_t seed = 0);

// min over pairs t = delta a / K, tau = delta b / K (a != b in [-K, K],
// K = floor((sqrt(n) - 1) / 2)) of (g(s + t) - g(s + tau)) / (t - tau)
double lower_derivative(const std::function<double(double)>& g, double s, double delta, int n);

Functional semilinear_functional(const SemilinearNonlinearity& N, SpacePtr space);

struct SemilinearStep {
  SqpsStep sqps;
  double energy = 0.0;
  double residual_dual = 0.0;  // ||psi_h||_{X'}, psi_h = df(u_h)
  double symmetry_residual = 0.0;
  double second_order_min = 0.0;        // sampled min over ||w||_X = 1
  double second_order_min_exact = 0.0;  // generalized eigenvalue
};

// Bounded-below probe, then the SQPS pipeline with the oracle
// u(eps) = c phi, f(c phi) = inf_est + eps^3 / 2, phi a fixed non-symmetric
// positive profile.
std::vector<SemilinearStep> semilinear_experiment(const SemilinearNonlinearity& N, SpacePtr space,
                                                  const std::vector<double>& eps_schedule,
                                                  const PrincipleOptions& opts = {});

// ---- fixed points

using Map = std::function<Vec(const Vec&)>;

struct FixedPointResult {
  GridFunction xi;
  double residual = 0.0;  // ||F(xi) - xi||
  double slack = 0.0;     // deficit of the Ekeland inequality at the test point
  double bound = 0.0;
  double t = 1.0;  // Clarke: the t of the directional contraction at xi
  Certificate certificate;
};

// Symmetric Caristi: variant II with sigma = rho = eps in the X-norm.
FixedPointResult caristi_fixed_point(const Map& F, const Functional& f, double eps,
                                     const PrincipleOptions& opts = {});

// Symmetric Clarke: variant II on ||u - F(u)||_V in the V metric.
FixedPointResult clarke_fixed_point(const Map& F, SpacePtr space, double sigma_contraction,
                                    double eps, const PrincipleOptions& opts = {});

// ---- drops and petals (plain l^p norms on the cell values)

struct Ball {
  Vec center;
  double radius = 1.0;
};

struct Drop {
  Vec x;
  Ball B;
};

struct Petal {
  double eps = 0.5;
  Vec x0, x1;
};

double lp_norm(const Vec& v, double p);

// Euclidean drops are decided in closed form; other norms by convex 1D
// minimization over the drop parameter.
bool drop_membership(const Vec& y, const Drop& D, double p = 2.0, double tol = 1e-12);
bool petal_membership(const Vec& y, const Petal& P, double p = 2.0, double tol = 1e-12);
// Euclidean projection onto the drop
Vec project_drop(const Vec& y, const Drop& D);

struct InclusionReport {
  double radius = 0.0;  // (1 - eps) / (1 + eps) ||x0 - x1||
  int ball_samples = 0, ball_failures = 0;
  int drop_samples = 0, drop_failures = 0;
  double worst = 0.0;  // max of eps||y - x0|| + ||y - x1|| - ||x0 - x1||
};

InclusionReport petal_inclusions(const Petal& P, int samples, double p = 2.0,
                                 std::uint64_t seed = 0);

// {u : A u <= b} with a Dykstra projection
Domain polyhedron(const Eigen::MatrixXd& A, const Vec& b, double tol = 1e-9);

Certificate symmetric_drop_point(const GridFunction& x, const Ball& B, const Domain& C, double eps,
                                 int minimality_samples = 10000,
                                 const PrincipleOptions& opts = {});

Certificate symmetric_petal_point(const GridFunction& x, const GridFunction& y, const Domain& C,
                                  double eps, const std::string& norm = "l1",
                                  int minimality_samples = 10000,
                                  const PrincipleOptions& opts = {});

}  // namespace symvar
