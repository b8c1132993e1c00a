#pragma once

#include <functional>
#include <string>
#include <vector>

namespace wattops {

struct CurvePoint {
  double p = 0.0;      // GPU power limit, watts
  double value = 0.0;  // relative to the p_max setting
};

struct GemmPoint {
  double intensity = 0.0;  // arithmetic intensity, FLOPs/byte
  double p = 0.0;
  double rel_flops = 0.0;
};

// Measured performance curves for one accelerator generation, normalized so
// that value(p_max) = 1.
struct CurveSet {
  std::vector<CurvePoint> f_anchors;    // training throughput vs power limit
  std::vector<CurvePoint> hbm_anchors;  // memory bandwidth vs power limit
  std::vector<GemmPoint> gemm_anchors;  // rectangular (intensity, p) grid
  double p_min = 900.0;
  double p_max = 1200.0;

  static CurveSet gb200_defaults();
};

// Piecewise-linear interpolation over the anchor span. No extrapolation:
// querying outside the span throws ConfigError.
double f_eval(const CurveSet& curves, double p);
double hbm_eval(const CurveSet& curves, double p);

struct GemmResult {
  double rel_flops = 0.0;
  bool clamped = false;  // query fell outside the anchor hull
};
GemmResult gemm_eval(const CurveSet& curves, double intensity, double p);

// Perf per provisioned watt at limit p. g_of_p maps a limit to the
// per-GPU datacenter cost in watts and must be positive over the span.
double eta_eval(const CurveSet& curves,
                const std::function<double(double)>& g_of_p, double p);

struct EtaOptimum {
  double p_star = 0.0;  // on the grid
  double eta = 0.0;
  bool unimodal = true;  // false: fell back to exhaustive grid scan
  int evaluations = 0;
};

// Maximizes f(p)/g(p) over [p_min, p_max]. A coarse grid pre-scan checks
// unimodality; if it holds, golden-section search narrows to 1 W and the
// result is rounded to the neighboring grid point with the higher eta
// (ties resolve to the lower power). Otherwise the scan result is returned
// with unimodal = false.
EtaOptimum maximize_eta(const CurveSet& curves,
                        const std::function<double(double)>& g_of_p,
                        double grid_w = 10.0);

}  // namespace wattops
