#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "wattops/errors.hpp"
#include "wattops/rack_model.hpp"

using namespace wattops;

namespace {

// Non-GPU derated DC load, summed from the component table by hand:
// cpu_dimm 3600, backend_nic 2138.4, frontend_nic 518.4, ssd 324, misc 450,
// nvswitch 9396, osfp 583.2, fabric_mgmt 450, fe_switch_optics 700,
// mgmt_logic 100.
constexpr double kFixedDc = 18260.0;

}  // namespace

TEST_CASE("derated DC load is affine in the gpu limit") {
  const RackModel model = RackModel::gb200_nvl72();
  CHECK(rack_dc_power(model, 0.0) == doctest::Approx(kFixedDc).epsilon(1e-12));
  CHECK(rack_dc_power(model, 960.0) ==
        doctest::Approx(52820.0).epsilon(1e-12));
  CHECK(rack_dc_power(model, 1200.0) ==
        doctest::Approx(kFixedDc + 36.0 * 1200.0).epsilon(1e-12));

  // affine: midpoint value is the mean of the endpoints
  const double lo = rack_dc_power(model, 930.0);
  const double hi = rack_dc_power(model, 1130.0);
  CHECK(rack_dc_power(model, 1030.0) ==
        doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
}

TEST_CASE("conversion chain and planning budget") {
  const RackModel model = RackModel::gb200_nvl72();
  CHECK(rack_ac_power(model, 960.0) ==
        doctest::Approx(52820.0 / (0.96 * 0.98)).epsilon(1e-12));
  CHECK(provisioned_rack_power(model, 960.0) ==
        doctest::Approx(49518.75).epsilon(1e-12));
  CHECK(provisioned_rack_power(model, 1020.0) ==
        doctest::Approx(51543.75).epsilon(1e-12));
  CHECK(provisioned_rack_power(model, 1200.0) ==
        doctest::Approx(57618.75).epsilon(1e-12));
  CHECK(aalc_power(model, 960.0) ==
        doctest::Approx(0.03 * 52820.0).epsilon(1e-12));
  CHECK(gpu_power_fraction(model, 960.0) ==
        doctest::Approx(34560.0 / 52820.0).epsilon(1e-12));
}

TEST_CASE("worst-case AC recomputed from the component table") {
  const RackModel model = RackModel::gb200_nvl72();
  // un-derated at p = 1200: gpu 43200, cpu_dimm 3600, backend_nic 2376,
  // frontend_nic 648, ssd 540, misc 900, nvswitch 10440, osfp 648,
  // fabric_mgmt 900, fe_switch_optics 700, mgmt_logic 100
  const double undecorated = 64052.0;
  const double vr = 0.15 * (2376.0 + 648.0 + 540.0 + 900.0 + 10440.0 + 648.0 +
                            900.0);
  const double fan = 0.07 * (648.0 + 540.0 + 900.0 + 900.0 + vr);
  const double expected = (undecorated + vr + fan) / (0.96 * 0.98);
  CHECK(max_ac_power(model, 1200.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(max_ac_power(model, 1200.0) == doctest::Approx(71111.51).epsilon(1e-6));
}

TEST_CASE("published-figure bands hold") {
  const RackModel model = RackModel::gb200_nvl72();
  CHECK(std::abs(rack_dc_power(model, 960.0) / 52820.0 - 1.0) < 0.02);
  CHECK(std::abs(rack_ac_power(model, 960.0) / 55966.0 - 1.0) < 0.02);
  CHECK(std::abs(provisioned_rack_power(model, 960.0) / 49200.0 - 1.0) < 0.03);
  CHECK(std::abs(max_ac_power(model, 1200.0) / 72124.0 - 1.0) < 0.05);
}

TEST_CASE("breakdown rows reconcile with the totals") {
  const RackModel model = RackModel::gb200_nvl72();
  const RackBreakdown bd = rack_breakdown(model, 960.0);

  double row_sum = 0.0;
  for (const auto& row : bd.rows) row_sum += row.power;
  CHECK(row_sum == doctest::Approx(52820.0).epsilon(1e-12));
  CHECK(bd.dc_total == doctest::Approx(52820.0).epsilon(1e-12));

  // derated loss rows: vr over the non-cpu/gpu set, fan over air-cooled + vr
  CHECK(bd.vr_loss == doctest::Approx(0.15 * 13860.0).epsilon(1e-12));
  CHECK(bd.fan_loss == doctest::Approx(0.07 * (1742.4 + 2079.0)).epsilon(1e-12));

  CHECK(bd.psu_loss ==
        doctest::Approx(52820.0 / 0.96 - 52820.0).epsilon(1e-12));
  CHECK(bd.ac_total == doctest::Approx(rack_ac_power(model, 960.0)).epsilon(1e-12));
  CHECK(bd.provisioned == doctest::Approx(49518.75).epsilon(1e-12));
  CHECK(bd.max_ac == doctest::Approx(max_ac_power(model, 960.0)).epsilon(1e-12));
  CHECK(bd.aalc == doctest::Approx(aalc_power(model, 960.0)).epsilon(1e-12));
}

TEST_CASE("model validation rejects bad values") {
  RackModel model = RackModel::gb200_nvl72();
  CHECK_NOTHROW(validate(model));

  RackModel bad = model;
  bad.components[0].derate = 1.5;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = model;
  bad.components[1].count = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = model;
  bad.gpu_component = "absent";
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = model;
  bad.losses.psu_loss = 0.6;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = model;
  bad.losses.vr_loss.base_components.push_back("nonexistent");
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = model;
  bad.components.push_back(bad.components[0]);  // duplicate name
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = model;
  bad.gpu_count_per_rack = 72;  // gpu component count no longer matches
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("backend fabric power per rack pair and per gpu") {
  const NetworkPowerModel net = NetworkPowerModel::backend_defaults();
  CHECK(network_power_per_two_racks(net) ==
        doctest::Approx(11057.5).epsilon(1e-12));
  CHECK(std::abs(network_power_per_two_racks(net) / 11100.0 - 1.0) < 0.01);
  CHECK(network_power_per_gpu(net, 36) ==
        doctest::Approx(11057.5 / 72.0).epsilon(1e-12));
  CHECK_THROWS_AS(network_power_per_gpu(net, 0), ConfigError);
}

TEST_CASE("per-gpu provisioning cost") {
  const RackModel model = RackModel::gb200_nvl72();
  const NetworkPowerModel net = NetworkPowerModel::backend_defaults();
  const PerGpuCost cost = g_of_p(model, net);
  CHECK(cost.delta == doctest::Approx(0.90).epsilon(1e-12));
  CHECK(cost.fixed_per_gpu == doctest::Approx(kFixedDc / 36.0).epsilon(1e-12));
  CHECK(cost.network_per_gpu ==
        doctest::Approx(11057.5 / 72.0).epsilon(1e-12));
  CHECK(cost(960.0) ==
        doctest::Approx((960.0 + 18260.0 / 36.0 + 11057.5 / 72.0) / 0.9)
            .epsilon(1e-12));
}
