#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "symvar/certificate.hpp"
#include "symvar/engine.hpp"
#include "symvar/funcspace.hpp"
#include "symvar/slopes.hpp"

namespace symvar {

enum class EkelandVariant { I, II, III, IV, V };

struct PrincipleOptions {
  std::uint64_t seed = 0;
  int verify_samples = 10000;
  double slack_rel = 1e-6;  // slack = slack_rel * (1 + |f(v)|)
  double tol_cert = 1e-7;
  double tol_sym = 1e-10;
  int symmetry_probes = 48;
  int restarts = 4;
  bool check_symmetry = true;
  std::string metric = "X";  // engine metric: "X" or "V"
  // variant I: the closed set S' (default S); also used by the set-restricted
  // applications
  std::optional<Domain> domain;
  // variant II: xi(u) in S with f(xi) <= f(u); default theta
  std::function<Vec(const Vec&)> dominating;
  // variant IV: rho_2 (default rho)
  double rho2 = 0.0;
  // variant III: f_h sequence, recovery oracle u -> u_h (the recovery sequence), point set Y
  std::vector<Functional> f_seq;
  std::function<Vec(const Vec&, int)> recovery;
  std::vector<GridFunction> Y;
  int h0 = 0;
  // skip the multi-start probe when inf f is known
  std::optional<double> inf_est;
};

// Problem view of f for the engines, in the chosen metric and domain.
Problem make_problem(const Functional& f, const std::string& metric, const Domain& domain);

// Samples f(u^H) <= f(u) + tol_sym (1 + |f(u)|) on u in S with values up to
// `scale`; throws SymmetryViolation naming the probe and polarizer.
void check_polarization(const Functional& f, double scale, const PrincipleOptions& opts);

// Multi-start estimate of inf f over the domain, with the probe log.
ProbeLog infimum_probe(const Functional& f, const Problem& P, const GridFunction& u0,
                       const PrincipleOptions& opts);

Certificate ekeland_point(const Functional& f, const Domain& domain, const GridFunction& u0,
                          double sigma, double rho, const PrincipleOptions& opts = {});

Certificate symmetric_ekeland(const Functional& f, const GridFunction& u0, double sigma,
                              double rho, EkelandVariant variant,
                              const PrincipleOptions& opts = {});

Certificate symmetric_borwein_preiss(const Functional& f, const GridFunction& u0, double sigma,
                                     double rho, double p_exp,
                                     const PrincipleOptions& opts = {});

// Minimal r with int_0^r ds / (1 + h(s)) = rho, absolute tolerance 1e-10.
double zhong_radius(const std::function<double(double)>& h, double rho);
std::function<double(double)> weight_by_name(const std::string& name);

Certificate symmetric_zhong(const Functional& f, const GridFunction& u0, double sigma,
                            double rho, const std::function<double(double)>& h,
                            const PrincipleOptions& opts = {});

// g(w) = -eps * c * b(||w - v||_X / delta) with b(t) = (1 - t^2)^2 on [0,1] and
// c = 3 sqrt(3) / 8, so sup |g| <= eps and sup ||g'|| = eps / delta.
Functional dgz_bump(const GridFunction& v, double eps, double delta);

Certificate dgz_check(const Functional& f, const Functional& g, const GridFunction& v,
                      double eps, const PrincipleOptions& opts = {});

// Constraint G_j with j < n_eq an equality G_j = 0, otherwise G_j >= 0.
struct ConstrainedOptions {
  PrincipleOptions base;
  double tol_con = 1e-8;
  double rank_tol = 1e-9;
};

struct Multipliers {
  std::vector<double> lambda;
  std::vector<int> saturated;
  double residual = 0.0;  // ||df - sum lambda_j dG_j||_{X'}
};

// {G_j = 0, j < n_eq; G_j >= 0 otherwise} up to tol_con, with a Gauss-Newton
// minimum-norm restoration (X-metric) as the retraction.
Domain constraint_domain(const std::vector<Functional>& G, int n_eq, double tol_con);

Multipliers extract_multipliers(const Functional& f, const std::vector<Functional>& G, int n_eq,
                                const Vec& u, double tol_con, double rank_tol);

Certificate constrained_symmetric_ekeland(const Functional& f, const std::vector<Functional>& G,
                                          int n_eq, const GridFunction& u0, double eps,
                                          const ConstrainedOptions& opts = {});

struct PathOptions {
  PrincipleOptions base;
  int subdivisions = 8;  // evaluation points per segment, nodes included
  int geometry_probes = 16;
};

Certificate path_minimax(const Functional& f, const GridFunction& psi, int m_nodes, double eps,
                         const PathOptions& opts = {});

struct QBoundReport {
  double min_quotient = 0.0;  // min of [second difference]/t^2 + 2 eps ||zeta||^2
  int probes = 0;
  double tol_q = 1e-6;
  bool ok = true;
};

struct SqpsStep {
  double eps = 0.0;
  Certificate certificate;
  SlopeEstimate slope;
  double slope_bound = 0.0;  // 2 eps ||v - eta|| from the proof
  double symmetry_residual = 0.0;
  QBoundReport q;
};

// Bounded minimizing-sequence oracle: eps -> u with f(u) < inf + eps^3.
using MinimizingOracle = std::function<GridFunction(double eps)>;

std::vector<SqpsStep> sqps_sequence(const Functional& f, const std::vector<double>& eps_schedule,
                                    const MinimizingOracle& oracle,
                                    const PrincipleOptions& opts = {});

// Re-samples the certificate's inequality with an independent seed.
ViolationReport verify_certificate(const Functional& f, const Certificate& cert, int n_samples,
                                   std::optional<SamplerSpec> sampler = std::nullopt,
                                   const std::optional<Domain>& domain = std::nullopt);

}  // namespace symvar
