#include "symvar/functionals.hpp"

#include <cmath>
#include <limits>

#include "symvar/errors.hpp"

namespace symvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Functional base(const std::string& name, SpacePtr space, SymmetryClass sym,
                std::optional<double> lb) {
  if (!space) throw InvalidArgument("functional without a space");
  Functional f;
  f.name = name;
  f.space = std::move(space);
  f.symmetry = sym;
  f.lower_bound = lb;
  return f;
}

GridFunction profile_param(SpacePtr space, const nlohmann::json& params) {
  if (params.contains("a")) return GridFunction(space, [&] {
      auto v = params.at("a").get<std::vector<double>>();
      if (int(v.size()) != space->size()) throw InvalidArgument("'a' has the wrong length");
      return Vec(Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size())));
    }());
  return symmetric_profile(space, params.value("a_amp", 0.0));
}

}  // namespace

GridFunction symmetric_profile(SpacePtr space, double amp) {
  const GridSpace& s = *space;
  Vec a(s.size());
  const double R = s.radius();
  for (int i = 0; i < s.size(); ++i) {
    auto c = s.center(i);
    double r2 = c[0] * c[0] + c[1] * c[1];
    a[i] = amp * (1.0 - r2 / (2.0 * R * R));
  }
  return GridFunction(std::move(space), std::move(a));
}

Functional quadratic_x(const GridFunction& a, double c) {
  if (!(c > 0.0)) throw InvalidArgument("quadratic_x needs c > 0");
  SpacePtr s = a.space_ptr();
  const Vec av = a.values();
  Functional f = base("quadratic_x", s,
                      av.isZero() ? SymmetryClass::PolarizationNonincreasing
                                  : SymmetryClass::Unverified,
                      0.0);
  f.eval = [s, av, c](const Vec& u) {
    double n = s->norm_x(u - av);
    return c * n * n;
  };
  f.gradient = [s, av, c](const Vec& u) {
    Vec d = u - av;
    return Vec(2.0 * c * s->norm_x(d) * s->norm_x_gradient(d));
  };
  if (s->p() == 2.0) {
    f.prox = [av, c](const Vec& center, double w, double p_exp) -> std::optional<Vec> {
      if (p_exp != 2.0) return std::nullopt;
      return Vec((c * av + w * center) / (c + w));
    };
  }
  return f;
}

Functional quadratic_v(const GridFunction& a) {
  SpacePtr s = a.space_ptr();
  const Vec av = a.values();
  Functional f = base("quadratic_v", s, SymmetryClass::PolarizationNonincreasing, 0.0);
  f.eval = [s, av](const Vec& u) {
    double n = s->norm_v(u - av);
    return n * n;
  };
  f.gradient = [s, av](const Vec& u) {
    Vec d = u - av;
    return Vec(2.0 * s->norm_v(d) * s->norm_v_gradient(d));
  };
  return f;
}

Functional half_norm_sq(SpacePtr space) {
  SpacePtr s = space;
  Functional f = base("half_norm_sq", s, SymmetryClass::PolarizationNonincreasing, 0.0);
  f.eval = [s](const Vec& u) {
    double n = s->norm_x(u);
    return 0.5 * n * n;
  };
  f.gradient = [s](const Vec& u) { return Vec(s->norm_x(u) * s->norm_x_gradient(u)); };
  if (s->p() == 2.0) {
    f.prox = [](const Vec& center, double w, double p_exp) -> std::optional<Vec> {
      if (p_exp != 2.0) return std::nullopt;
      return Vec(2.0 * w * center / (1.0 + 2.0 * w));
    };
  }
  return f;
}

Functional norm_double_well(SpacePtr space) {
  SpacePtr s = space;
  const double m = s->cell_measure();
  Functional f = base("norm_double_well", s, SymmetryClass::PolarizationNonincreasing, 0.0);
  f.eval = [m](const Vec& u) {
    double q = m * u.squaredNorm() - 1.0;
    return q * q;
  };
  f.gradient = [m](const Vec& u) {
    double q = m * u.squaredNorm() - 1.0;
    return Vec(4.0 * q * m * u);
  };
  return f;
}

Functional ginzburg_landau(SpacePtr space) {
  SpacePtr s = space;
  const double m = s->cell_measure();
  Functional f = base("ginzburg_landau", s, SymmetryClass::PolarizationNonincreasing, 0.0);
  f.eval = [s, m](const Vec& u) {
    double pot = 0.0;
    for (int i = 0; i < u.size(); ++i) pot += (u[i] * u[i] - 1.0) * (u[i] * u[i] - 1.0);
    return 0.5 * u.dot(s->stiffness() * u) + 0.25 * m * pot;
  };
  f.gradient = [s, m](const Vec& u) {
    Vec g = s->stiffness() * u;
    for (int i = 0; i < u.size(); ++i) g[i] += m * u[i] * (u[i] * u[i] - 1.0);
    return g;
  };
  return f;
}

Functional quartic_ball(SpacePtr space) {
  SpacePtr s = space;
  Functional f = base("quartic_ball", s, SymmetryClass::PolarizationNonincreasing, 0.0);
  f.eval = [s](const Vec& u) {
    double n = s->norm_x(u);
    if (n > 1.0) return kInf;
    return 0.5 * n * n - 0.25 * n * n * n * n;
  };
  f.gradient = [s](const Vec& u) {
    double n = s->norm_x(u);
    return Vec((n - n * n * n) * s->norm_x_gradient(u));
  };
  return f;
}

Functional linear(SpacePtr space, double c) {
  SpacePtr s = space;
  const double m = s->cell_measure();
  Functional f = base("linear", s, SymmetryClass::Unverified, std::nullopt);
  f.eval = [m, c](const Vec& u) { return c * m * u.sum(); };
  f.gradient = [m, c](const Vec& u) { return Vec(Vec::Constant(u.size(), c * m)); };
  return f;
}

Functional radial_double_well(SpacePtr space) {
  SpacePtr s = space;
  const double m = s->cell_measure();
  Functional f = base("radial_double_well", s, SymmetryClass::PolarizationNonincreasing, 0.0);
  f.eval = [m](const Vec& u) {
    double r = std::sqrt(m * u.squaredNorm());
    return r * r * (r - 1.0) * (r - 1.0);
  };
  f.gradient = [m](const Vec& u) {
    double r = std::sqrt(m * u.squaredNorm());
    return Vec(2.0 * (r - 1.0) * (2.0 * r - 1.0) * m * u);
  };
  return f;
}

Functional make_functional(const std::string& name, SpacePtr space, const nlohmann::json& params) {
  if (name == "quadratic_x") return quadratic_x(profile_param(space, params), params.value("c", 1.0));
  if (name == "quadratic_v") return quadratic_v(profile_param(space, params));
  if (name == "half_norm_sq") return half_norm_sq(space);
  if (name == "norm_double_well") return norm_double_well(space);
  if (name == "ginzburg_landau") return ginzburg_landau(space);
  if (name == "quartic_ball") return quartic_ball(space);
  if (name == "linear") return linear(space, params.value("c", 1.0));
  if (name == "radial_double_well") return radial_double_well(space);
  throw InvalidArgument("unknown functional '" + name + "'");
}

std::vector<std::string> functional_names() {
  return {"quadratic_x",     "quadratic_v",  "half_norm_sq", "norm_double_well",
          "ginzburg_landau", "quartic_ball", "linear",       "radial_double_well"};
}

}  // namespace symvar
