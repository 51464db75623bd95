#include "symvar/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "symvar/errors.hpp"

namespace symvar {

std::vector<Polarizer> build_family(const GridSpace& space) {
  std::vector<std::array<int, 2>> dirs;
  if (space.dimension() == 1) {
    dirs = {{1, 0}, {-1, 0}};
  } else {
    dirs = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  }
  std::vector<Polarizer> family;
  for (auto d : dirs) {
    const int d2 = d[0] * d[0] + d[1] * d[1];
    const double len = std::sqrt(double(d2));
    // perturbed origin v = (eps, 1) in 2D, v = 1 in 1D
    bool keep_zero = space.dimension() == 1 ? d[0] > 0 : (d[1] > 0 || (d[1] == 0 && d[0] > 0));
    for (int k = keep_zero ? 0 : 1;; ++k) {
      Polarizer H;
      H.axis = {d[0] / len, d[1] / len};
      H.offset = k * len * 0.5 * space.spacing();
      H.grid_key = space.key();
      H.partner.assign(space.size(), -1);
      H.inside.assign(space.size(), 1);
      bool any_outside = false;
      for (int i = 0; i < space.size(); ++i) {
        auto L = space.lattice(i);
        int s = d[0] * L[0] + d[1] * L[1] - k * d2;
        int mx = L[0] - 2 * s * d[0] / d2, my = L[1] - 2 * s * d[1] / d2;
        H.partner[i] = space.cell_at(mx, my);
        if (s > 0) {
          H.inside[i] = 0;
          any_outside = true;
          if (H.partner[i] < 0)
            throw InvalidGrid("reflection maps an outside cell off the grid");
        }
      }
      if (!any_outside) break;
      family.push_back(std::move(H));
    }
  }
  if (family.empty()) throw InvalidGrid("empty polarizer family");
  return family;
}

Vec polarize(const Vec& u, const Polarizer& H) {
  Vec out = u.cwiseAbs();
  for (int i = 0; i < int(u.size()); ++i) {
    if (!H.inside[i]) continue;
    int j = H.partner[i];
    if (j < 0 || j == i) continue;
    double a = std::abs(u[i]), b = std::abs(u[j]);
    out[i] = std::max(a, b);
    out[j] = std::min(a, b);
  }
  return out;
}

GridFunction polarize(const GridFunction& u, const Polarizer& H) {
  if (H.grid_key != u.space().key() || int(H.partner.size()) != u.size())
    throw SpaceMismatch("polarizer is not registered for this grid");
  return GridFunction(u.space_ptr(), polarize(u.values(), H));
}

std::vector<int> radial_order(const GridSpace& space) {
  std::vector<int> order(space.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return space.radius_key(a) < space.radius_key(b);
  });
  return order;
}

Vec schwarz(const GridSpace& space, const Vec& u) {
  std::vector<double> vals(u.data(), u.data() + u.size());
  for (double& v : vals) v = std::abs(v);
  std::sort(vals.begin(), vals.end(), std::greater<>());
  Vec out(u.size());
  auto order = radial_order(space);
  for (size_t k = 0; k < order.size(); ++k) out[order[k]] = vals[k];
  return out;
}

GridFunction schwarz(const GridFunction& u) {
  return GridFunction(u.space_ptr(), schwarz(u.space(), u.values()));
}

Symmetrized approx_symmetrize(const GridFunction& u, double rho, long max_steps) {
  if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
  const GridSpace& s = u.space();
  const auto& fam = s.family();
  if (max_steps <= 0) max_steps = 10L * s.size() * long(fam.size());
  Vec cur = u.values().cwiseAbs();
  const Vec target = schwarz(s, cur);
  double res = s.norm_v(cur - target);
  std::vector<int> seq;
  for (long step = 0; res >= rho; ++step) {
    if (step >= max_steps)
      throw ConvergenceFailure("iteration cap reached in approx_symmetrize", res);
    int pick = -1;
    double pick_res = res;
    Vec pick_val;
    for (int k = 0; k < int(fam.size()); ++k) {
      Vec w = polarize(cur, fam[k]);
      double r = s.norm_v(w - target);
      if (r < pick_res) {
        pick = k;
        pick_res = r;
        pick_val = std::move(w);
      }
    }
    if (pick < 0) {
      // no strict decrease: take the first polarizer that moves u at all
      for (int k = 0; k < int(fam.size()) && pick < 0; ++k) {
        Vec w = polarize(cur, fam[k]);
        if (w != cur) {
          pick = k;
          pick_res = s.norm_v(w - target);
          pick_val = std::move(w);
        }
      }
      if (pick < 0)
        throw ConvergenceFailure("stalled at a common fixed point of the family", res);
    }
    cur = std::move(pick_val);
    res = pick_res;
    seq.push_back(pick);
  }
  return {GridFunction(u.space_ptr(), cur), seq, res};
}

nlohmann::ordered_json polarizer_json(const Polarizer& H) {
  nlohmann::ordered_json j;
  j["axis"] = {H.axis[0], H.axis[1]};
  j["offset"] = H.offset;
  return j;
}

nlohmann::ordered_json sequence_json(const GridSpace& space, const std::vector<int>& seq) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (int k : seq) arr.push_back(polarizer_json(space.family().at(k)));
  return arr;
}

}  // namespace symvar
