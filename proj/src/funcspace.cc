#include "symvar/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "symvar/errors.hpp"
#include "symvar/rearrange.hpp"

namespace symvar {

namespace {

double signed_pow(double x, double e) {
  return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), e), x);
}

// maximize ratio(u) by normalized gradient ascent with backtracking
template <class Ratio, class Grad>
double ascend(Vec u, const Ratio& ratio, const Grad& grad, int iters) {
  double best = ratio(u);
  double step = 1.0;
  for (int it = 0; it < iters; ++it) {
    Vec g = grad(u);
    double gn = g.norm();
    if (!(gn > 0.0)) break;
    bool moved = false;
    while (step > 1e-14) {
      Vec cand = u + (step * u.norm() / gn) * g;
      double r = ratio(cand);
      if (r > best) {
        u = cand / cand.norm();
        best = r;
        moved = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return best;
}

}  // namespace

std::array<double, 2> GridSpace::center(int cell) const {
  return {0.5 * h_ * lattice_[cell][0], 0.5 * h_ * lattice_[cell][1]};
}

int GridSpace::cell_at(int lx, int ly) const {
  auto index = [&](int l) { return (l + n_ - 1) / 2; };
  if (std::abs(lx) % 2 != 1 || lx < -(n_ - 1) || lx > n_ - 1) return -1;
  if (dim_ == 1) return ly == 0 ? index(lx) : -1;
  if (std::abs(ly) % 2 != 1 || ly < -(n_ - 1) || ly > n_ - 1) return -1;
  return index(ly) * n_ + index(lx);
}

long GridSpace::radius_key(int cell) const {
  long x = lattice_[cell][0], y = lattice_[cell][1];
  return x * x + y * y;
}

double GridSpace::lr_norm(const Vec& u, double r) const {
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i]), r);
  return std::pow(s * measure_, 1.0 / r);
}

double GridSpace::x_power(const Vec& u) const {
  double s = 0.0;
  for (auto [a, b] : edges_) {
    double d = ((b >= 0 ? u[b] : 0.0) - (a >= 0 ? u[a] : 0.0)) / h_;
    s += std::pow(std::abs(d), p_);
  }
  for (int i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i]), p_);
  return s * measure_;
}

double GridSpace::norm_x(const Vec& u) const { return std::pow(x_power(u), 1.0 / p_); }

double GridSpace::norm_v(const Vec& u) const {
  return std::max(lr_norm(u, p_), lr_norm(u, qv_));
}

double GridSpace::norm_w(const Vec& u) const { return lr_norm(u, qw_); }

Vec GridSpace::x_power_gradient(const Vec& u) const {
  Vec g = Vec::Zero(u.size());
  for (auto [a, b] : edges_) {
    double d = ((b >= 0 ? u[b] : 0.0) - (a >= 0 ? u[a] : 0.0)) / h_;
    double c = p_ * signed_pow(d, p_ - 1.0) / h_ * measure_;
    if (b >= 0) g[b] += c;
    if (a >= 0) g[a] -= c;
  }
  for (int i = 0; i < u.size(); ++i) g[i] += p_ * signed_pow(u[i], p_ - 1.0) * measure_;
  return g;
}

Vec GridSpace::norm_x_gradient(const Vec& u) const {
  double nx = norm_x(u);
  if (nx == 0.0) return Vec::Zero(u.size());
  return x_power_gradient(u) * (std::pow(nx, 1.0 - p_) / p_);
}

Vec GridSpace::norm_v_gradient(const Vec& u) const {
  double a = lr_norm(u, p_), b = lr_norm(u, qv_);
  double r = a >= b ? p_ : qv_;
  double nr = std::max(a, b);
  Vec g = Vec::Zero(u.size());
  if (nr == 0.0) return g;
  for (int i = 0; i < u.size(); ++i)
    g[i] = std::pow(nr, 1.0 - r) * signed_pow(u[i], r - 1.0) * measure_;
  return g;
}

Vec GridSpace::riesz(const Vec& g) const { return gram_ldlt_.solve(g); }

double GridSpace::dual_norm_x_solve(const Vec& g) const {
  if (p_ != 2.0) throw InvalidExponent("dual norm by linear solve needs p = 2");
  return std::sqrt(std::max(0.0, g.dot(gram_ldlt_.solve(g))));
}

double GridSpace::dual_norm_x_ascent(const Vec& g, int starts) const {
  if (g.norm() == 0.0) return 0.0;
  auto ratio = [&](const Vec& v) {
    double nx = norm_x(v);
    return nx > 0.0 ? g.dot(v) / nx : 0.0;
  };
  auto grad = [&](const Vec& v) {
    double nx = norm_x(v);
    return Vec(g / nx - (g.dot(v) / (nx * nx)) * norm_x_gradient(v));
  };
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  double best = 0.0;
  for (int s = 0; s < starts; ++s) {
    Vec v;
    if (s == 0) {
      v = g;
    } else if (s == 1) {
      v = g.array().sign().matrix();
    } else {
      v = Vec(g.size());
      for (int i = 0; i < v.size(); ++i) v[i] = normal(rng);
      if (g.dot(v) < 0) v = -v;
    }
    if (v.norm() == 0.0) continue;
    best = std::max(best, ascend(Vec(v / v.norm()), ratio, grad, 20000));
  }
  return best;
}

double GridSpace::dual_norm_x(const Vec& g) const {
  return p_ == 2.0 ? dual_norm_x_solve(g) : dual_norm_x_ascent(g);
}

double estimate_embedding_constant(const GridSpace& s) {
  const int n = s.size();
  auto ratio = [&](const Vec& u) {
    double nx = s.norm_x(u);
    return nx > 0.0 ? s.norm_v(u) / nx : 0.0;
  };
  auto grad = [&](const Vec& u) {
    double nx = s.norm_x(u), nv = s.norm_v(u);
    return Vec(s.norm_v_gradient(u) / nx - (nv / (nx * nx)) * s.norm_x_gradient(u));
  };
  std::vector<Vec> probes;
  for (int i = 0; i < n; ++i) probes.push_back(Vec::Unit(n, i));
  probes.push_back(Vec::Ones(n));
  for (int k = 1; k <= 3; ++k) {
    Vec u(n);
    for (int i = 0; i < n; ++i) {
      auto c = s.center(i);
      double v = std::cos(k * std::numbers::pi * c[0] / (2.0 * s.radius()));
      if (s.dimension() == 2) v *= std::cos(k * std::numbers::pi * c[1] / (2.0 * s.radius()));
      u[i] = v;
    }
    probes.push_back(u);
  }
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 8; ++k) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = unif(rng);
    probes.push_back(u);
  }
  std::vector<std::pair<double, int>> ranked;
  for (int k = 0; k < int(probes.size()); ++k) ranked.push_back({ratio(probes[k]), k});
  std::sort(ranked.begin(), ranked.end(), std::greater<>());
  double best = ranked.front().first;
  for (int k = 0; k < std::min<int>(4, ranked.size()); ++k) {
    Vec u = probes[ranked[k].second];
    best = std::max(best, ascend(Vec(u / u.norm()), ratio, grad, 500));
  }
  return best * (1.0 + 1e-6);
}

SpacePtr make_grid(int dimension, int n, double radius, double p, double q_w,
                   std::optional<double> q_v) {
  if (dimension != 1 && dimension != 2)
    throw InvalidGrid("dimension must be 1 or 2, got " + std::to_string(dimension));
  if (n < 2 || n % 2 != 0)
    throw InvalidGrid("cells per axis must be even and >= 2, got " + std::to_string(n));
  if (!(radius > 0.0)) throw InvalidGrid("domain radius must be positive");
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidExponent("p must exceed 1");
  double qv = q_v ? *q_v : (p < dimension ? dimension * p / (dimension - p) : 2.0 * p);
  // no p*: a requested qW at or above the 2p default pushes qV to 2 qW
  if (!q_v && p >= dimension && q_w >= qv) qv = 2.0 * q_w;
  double qw = q_w > 0.0 ? q_w : 0.5 * (p + qv);
  if (!(p < qw && qw < qv))
    throw InvalidExponent("need p < qW < qV (p=" + std::to_string(p) +
                          ", qW=" + std::to_string(qw) + ", qV=" + std::to_string(qv) + ")");

  auto s = std::shared_ptr<GridSpace>(new GridSpace());
  s->dim_ = dimension;
  s->n_ = n;
  s->size_ = dimension == 1 ? n : n * n;
  s->radius_ = radius;
  s->h_ = 2.0 * radius / n;
  s->measure_ = std::pow(s->h_, dimension);
  s->p_ = p;
  s->qv_ = qv;
  s->qw_ = qw;
  for (int c = 0; c < s->size_; ++c) {
    int ix = c % n, iy = c / n;
    s->lattice_.push_back({2 * ix - n + 1, dimension == 2 ? 2 * iy - n + 1 : 0});
  }
  auto at = [&](int ix, int iy) {
    if (ix < 0 || ix >= n || iy < 0 || iy >= n) return -1;
    return dimension == 1 ? ix : iy * n + ix;
  };
  int lines = dimension == 1 ? 1 : n;
  for (int axis = 0; axis < dimension; ++axis) {
    for (int line = 0; line < lines; ++line) {
      for (int k = 0; k <= n; ++k) {
        int a = axis == 0 ? at(k - 1, line) : at(line, k - 1);
        int b = axis == 0 ? at(k, line) : at(line, k);
        s->edges_.push_back({a, b});
      }
    }
  }
  const int m = s->size_;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(s->edges_.size(), m);
  for (size_t e = 0; e < s->edges_.size(); ++e) {
    auto [a, b] = s->edges_[e];
    if (b >= 0) d(e, b) += 1.0;
    if (a >= 0) d(e, a) -= 1.0;
  }
  s->stiffness_ = s->measure_ / (s->h_ * s->h_) * (d.transpose() * d);
  s->gram_ = s->stiffness_ + s->measure_ * Eigen::MatrixXd::Identity(m, m);
  s->gram_ldlt_.compute(s->gram_);
  s->family_ = build_family(*s);
  s->K_ = estimate_embedding_constant(*s);
  return s;
}

GridFunction::GridFunction(SpacePtr space, Vec values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (!space_) throw InvalidArgument("grid function without a space");
  if (values_.size() != space_->size())
    throw SpaceMismatch("expected " + std::to_string(space_->size()) + " values, got " +
                        std::to_string(values_.size()));
  if (!values_.allFinite()) throw InvalidArgument("grid function values must be finite");
}

GridFunction GridFunction::zeros(SpacePtr space) {
  int n = space->size();
  return GridFunction(std::move(space), Vec::Zero(n));
}

static void require_same(const GridFunction& a, const GridFunction& b) {
  if (!a.space().same_grid(b.space())) throw SpaceMismatch("grid functions on different grids");
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  require_same(a, b);
  return GridFunction(a.space_ptr(), a.values() + b.values());
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  require_same(a, b);
  return GridFunction(a.space_ptr(), a.values() - b.values());
}

GridFunction operator*(double c, const GridFunction& a) {
  return GridFunction(a.space_ptr(), c * a.values());
}

double norm_X(const GridFunction& u) { return u.space().norm_x(u.values()); }
double norm_V(const GridFunction& u) { return u.space().norm_v(u.values()); }
double norm_W(const GridFunction& u) { return u.space().norm_w(u.values()); }

GridFunction theta(const GridFunction& u) {
  return GridFunction(u.space_ptr(), u.values().cwiseAbs());
}

std::string to_string(SymmetryClass c) {
  switch (c) {
    case SymmetryClass::PolarizationNonincreasing: return "polarization-nonincreasing";
    case SymmetryClass::PolarizationInvariant: return "polarization-invariant";
    case SymmetryClass::Unverified: return "unverified";
  }
  return "unverified";
}

nlohmann::ordered_json to_json(const GridFunction& u) {
  const GridSpace& s = u.space();
  nlohmann::ordered_json j;
  j["dimension"] = s.dimension();
  j["n"] = s.n();
  j["radius"] = s.radius();
  j["p"] = s.p();
  j["qV"] = s.q_v();
  j["qW"] = s.q_w();
  j["values"] = std::vector<double>(u.values().data(), u.values().data() + u.size());
  return j;
}

GridFunction grid_function_from_json(const nlohmann::json& j) {
  auto space = make_grid(j.at("dimension").get<int>(), j.at("n").get<int>(),
                         j.at("radius").get<double>(), j.at("p").get<double>(),
                         j.at("qW").get<double>(), j.at("qV").get<double>());
  auto v = j.at("values").get<std::vector<double>>();
  return GridFunction(space, Eigen::Map<Vec>(v.data(), v.size()));
}

}  // namespace symvar
