#include "wattops/curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "wattops/errors.hpp"

namespace wattops {

namespace {

double lerp_at(const std::vector<CurvePoint>& anchors, double p,
               const char* what) {
  if (anchors.size() < 2)
    throw ConfigError(std::string(what) + ": need at least two anchors");
  if (p < anchors.front().p || p > anchors.back().p)
    throw ConfigError(std::string(what) + ": power limit " + std::to_string(p) +
                      " outside anchor span [" +
                      std::to_string(anchors.front().p) + ", " +
                      std::to_string(anchors.back().p) + "]");
  auto hi = std::lower_bound(
      anchors.begin(), anchors.end(), p,
      [](const CurvePoint& a, double v) { return a.p < v; });
  if (hi == anchors.begin()) return hi->value;
  auto lo = hi - 1;
  if (hi == anchors.end()) return lo->value;
  const double span = hi->p - lo->p;
  if (span <= 0.0) throw ConfigError(std::string(what) + ": duplicate anchor power");
  const double t = (p - lo->p) / span;
  return lo->value + t * (hi->value - lo->value);
}

void check_sorted(const std::vector<CurvePoint>& anchors, const char* what) {
  for (std::size_t i = 1; i < anchors.size(); ++i)
    if (anchors[i].p <= anchors[i - 1].p)
      throw ConfigError(std::string(what) + ": anchors must be strictly increasing in p");
}

}  // namespace

CurveSet CurveSet::gb200_defaults() {
  CurveSet c;
  c.f_anchors = {{900.0, 0.88}, {960.0, 0.935}, {1000.0, 0.95}, {1200.0, 1.0}};
  c.hbm_anchors = {{800.0, 0.85}, {1000.0, 1.0}, {1200.0, 1.0}};
  // Low arithmetic intensity is bandwidth-bound and barely reacts to the
  // limit; dense kernels track it almost linearly.
  c.gemm_anchors = {
      {500.0, 900.0, 1.00},  {500.0, 1000.0, 1.00},  {500.0, 1100.0, 1.00},  {500.0, 1200.0, 1.00},
      {1500.0, 900.0, 0.90}, {1500.0, 1000.0, 0.95}, {1500.0, 1100.0, 0.98}, {1500.0, 1200.0, 1.00},
      {3000.0, 900.0, 0.84}, {3000.0, 1000.0, 0.91}, {3000.0, 1100.0, 0.96}, {3000.0, 1200.0, 1.00},
  };
  c.p_min = 900.0;
  c.p_max = 1200.0;
  return c;
}

double f_eval(const CurveSet& curves, double p) {
  check_sorted(curves.f_anchors, "f curve");
  return lerp_at(curves.f_anchors, p, "f curve");
}

double hbm_eval(const CurveSet& curves, double p) {
  check_sorted(curves.hbm_anchors, "hbm curve");
  return lerp_at(curves.hbm_anchors, p, "hbm curve");
}

GemmResult gemm_eval(const CurveSet& curves, double intensity, double p) {
  const auto& g = curves.gemm_anchors;
  if (g.empty()) throw ConfigError("gemm grid: empty");
  std::set<double> is, ps;
  for (const auto& a : g) {
    is.insert(a.intensity);
    ps.insert(a.p);
  }
  if (is.size() < 2 || ps.size() < 2)
    throw ConfigError("gemm grid: need at least a 2x2 grid");
  if (g.size() != is.size() * ps.size())
    throw ConfigError("gemm grid: not rectangular");

  const std::vector<double> iv(is.begin(), is.end());
  const std::vector<double> pv(ps.begin(), ps.end());
  auto value_at = [&](double i, double q) {
    for (const auto& a : g)
      if (a.intensity == i && a.p == q) return a.rel_flops;
    throw ConfigError("gemm grid: missing grid point");
  };

  GemmResult out;
  double qi = intensity, qp = p;
  if (qi < iv.front()) { qi = iv.front(); out.clamped = true; }
  if (qi > iv.back())  { qi = iv.back();  out.clamped = true; }
  if (qp < pv.front()) { qp = pv.front(); out.clamped = true; }
  if (qp > pv.back())  { qp = pv.back();  out.clamped = true; }

  auto cell = [](const std::vector<double>& v, double q) {
    auto hi = std::lower_bound(v.begin(), v.end(), q);
    std::size_t j = (hi == v.begin()) ? 1 : std::size_t(hi - v.begin());
    if (j >= v.size()) j = v.size() - 1;
    return j;
  };
  const std::size_t j = cell(iv, qi);
  const std::size_t k = cell(pv, qp);
  const double ti = (qi - iv[j - 1]) / (iv[j] - iv[j - 1]);
  const double tp = (qp - pv[k - 1]) / (pv[k] - pv[k - 1]);
  const double v00 = value_at(iv[j - 1], pv[k - 1]);
  const double v01 = value_at(iv[j - 1], pv[k]);
  const double v10 = value_at(iv[j], pv[k - 1]);
  const double v11 = value_at(iv[j], pv[k]);
  out.rel_flops = (1 - ti) * ((1 - tp) * v00 + tp * v01) +
                  ti * ((1 - tp) * v10 + tp * v11);
  return out;
}

double eta_eval(const CurveSet& curves,
                const std::function<double(double)>& g_of_p, double p) {
  const double g = g_of_p(p);
  if (!(g > 0.0))
    throw ConfigError("eta: provisioned cost must be positive at p = " +
                      std::to_string(p));
  return f_eval(curves, p) / g;
}

EtaOptimum maximize_eta(const CurveSet& curves,
                        const std::function<double(double)>& g_of_p,
                        double grid_w) {
  if (!(grid_w > 0.0)) throw ConfigError("eta: grid step must be positive");
  if (!(curves.p_min < curves.p_max))
    throw ConfigError("eta: p_min must be below p_max");

  EtaOptimum out;
  auto eval = [&](double p) {
    ++out.evaluations;
    return eta_eval(curves, g_of_p, p);
  };

  std::vector<double> grid;
  for (double p = curves.p_min; p < curves.p_max - 1e-9; p += grid_w)
    grid.push_back(p);
  grid.push_back(curves.p_max);

  std::vector<double> vals(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vals[i] = eval(grid[i]);
    if (vals[i] > vals[best]) best = i;
  }

  // Ties resolve to the lowest power, so a flat profile lands on p_min.
  const double tol = 1e-12 * std::max(1.0, std::abs(vals[best]));
  for (std::size_t i = 0; i < best; ++i) {
    if (vals[i] >= vals[best] - tol) {
      best = i;
      break;
    }
  }

  // Weak unimodality over the grid: no rise after a fall (tolerance scaled
  // to the peak, so flat plateaus pass).
  bool unimodal = true;
  bool falling = false;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double d = vals[i] - vals[i - 1];
    if (d < -tol) falling = true;
    else if (d > tol && falling) { unimodal = false; break; }
  }

  out.unimodal = unimodal;
  if (!unimodal) {
    out.p_star = grid[best];
    out.eta = vals[best];
    return out;
  }

  constexpr double kInvPhi = 0.6180339887498949;
  double a = curves.p_min, b = curves.p_max;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  while (b - a > 1.0) {
    if (f1 < f2) {
      a = x1;
      x1 = x2; f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = eval(x2);
    } else {
      b = x2;
      x2 = x1; f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = eval(x1);
    }
  }

  // Snap to the grid: candidates bracketing the refined point, plus the
  // pre-scan winner so the answer can never lose to a grid point.
  const double mid = 0.5 * (a + b);
  const double lo = curves.p_min +
      std::floor((mid - curves.p_min) / grid_w) * grid_w;
  double best_p = grid[best];
  double best_v = vals[best];
  for (double cand : {lo, lo + grid_w}) {
    if (cand < curves.p_min - 1e-9 || cand > curves.p_max + 1e-9) continue;
    const double c = std::min(std::max(cand, curves.p_min), curves.p_max);
    const double v = eval(c);
    if (v > best_v + tol || (std::abs(v - best_v) <= tol && c < best_p)) {
      best_v = v;
      best_p = c;
    }
  }
  out.p_star = best_p;
  out.eta = best_v;
  return out;
}

}  // namespace wattops
