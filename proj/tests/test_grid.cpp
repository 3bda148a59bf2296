#include <complex>
#include <fstream>
#include <stdexcept>

#include "doctest.h"
#include "psse/grid.hpp"
#include "test_util.hpp"

using namespace psse;

namespace {

// generated by tests/oracles/ybus_case6ww.py
constexpr double kCase6wwYbus[6][6][2] = {
    {{4.0063461069074933, -11.817915547961924}, {-2, 4}, {0, 0},
     {-1.1764705882352939, 4.7058823529411757}, {-0.82987551867219922, 3.1120331950207474},
     {0, 0}},
    {{-2, 4}, {9.3282508137741988, -23.300496830563645},
     {-0.76923076923076927, 3.8461538461538458}, {-4, 8}, {-1.0000000000000002, 3},
     {-1.5590200445434299, 4.4543429844097995}},
    {{0, 0}, {-0.76923076923076927, 3.8461538461538458},
     {4.1557223264540335, -16.632270168855534}, {0, 0},
     {-1.4634146341463414, 3.1707317073170733}, {-1.9230769230769227, 9.615384615384615}},
    {{-1.1764705882352939, 4.7058823529411757}, {-4, 8}, {0, 0},
     {6.1764705882352935, -14.705882352941176}, {-1, 2}, {0, 0}},
    {{-0.82987551867219922, 3.1120331950207474}, {-1.0000000000000002, 3},
     {-1.4634146341463414, 3.1707317073170733}, {-1, 2},
     {5.2932901528185408, -14.282764902337821}, {-1.0000000000000002, 3}},
    {{0, 0}, {-1.5590200445434299, 4.4543429844097995},
     {-1.9230769230769227, 9.615384615384615}, {0, 0}, {-1.0000000000000002, 3},
     {4.482096967620353, -17.069727599794415}},
};

}  // namespace

TEST_CASE("admittance of an empty two-bus network is zero") {
  GridModel grid;
  grid.bus_count = 2;
  grid.bus_shunts = {Complex(0, 0), Complex(0, 0)};
  CMatrix Y = build_admittance(grid);
  CHECK(Y.norm() == doctest::Approx(0.0));
}

TEST_CASE("admittance of a single unit line") {
  CMatrix Y = build_admittance(test::two_bus());
  CHECK(std::abs(Y(0, 0) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(Y(0, 1) - Complex(-1, 0)) < 1e-15);
  CHECK(std::abs(Y(1, 0) - Complex(-1, 0)) < 1e-15);
  CHECK(std::abs(Y(1, 1) - Complex(1, 0)) < 1e-15);
}

TEST_CASE("six-bus admittance matches the scripted oracle") {
  CMatrix Y = build_admittance(case6ww());
  for (int m = 0; m < 6; ++m) {
    for (int n = 0; n < 6; ++n) {
      Complex expected(kCase6wwYbus[m][n][0], kCase6wwYbus[m][n][1]);
      CHECK(std::abs(Y(m, n) - expected) < 1e-12);
    }
  }
  CHECK((Y - Y.transpose()).norm() < 1e-12);  // reciprocal lines
}

TEST_CASE("admittance rows sum to zero without bus shunts") {
  CMatrix Y = build_admittance(case6ww());
  for (int m = 0; m < 6; ++m) {
    CHECK(std::abs(Y.row(m).sum()) < 1e-12);
  }
}

TEST_CASE("grid validation rejects malformed models") {
  GridModel grid = test::two_bus();
  SUBCASE("index out of range") {
    grid.lines.front().to_bus = 5;
    CHECK_THROWS_AS(build_admittance(grid), std::invalid_argument);
  }
  SUBCASE("self loop") {
    grid.lines.front().to_bus = 0;
    CHECK_THROWS_AS(build_admittance(grid), std::invalid_argument);
  }
  SUBCASE("duplicate line either orientation") {
    grid.lines.push_back({1, 0, Complex(2, 0), {}, {}});
    CHECK_THROWS_AS(build_admittance(grid), std::invalid_argument);
  }
  SUBCASE("shunt count mismatch") {
    grid.bus_shunts.pop_back();
    CHECK_THROWS_AS(build_admittance(grid), std::invalid_argument);
  }
}

TEST_CASE("flow matrix of a unit line") {
  CMatrix Y12 = flow_matrix(test::two_bus(), 0, 1);
  CHECK(std::abs(Y12(0, 0) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(Y12(0, 1) - Complex(-1, 0)) < 1e-15);
  CHECK(Y12.row(1).norm() == doctest::Approx(0.0));
}

TEST_CASE("flow matrix includes the sending-end shunt") {
  CMatrix Y12 = flow_matrix(test::two_bus(Complex(1, 0), Complex(0, 0.5)), 0, 1);
  CHECK(std::abs(Y12(0, 0) - Complex(1, 0.5)) < 1e-15);
  CHECK(std::abs(Y12(0, 1) - Complex(-1, 0)) < 1e-15);
}

TEST_CASE("flow matrices have single-row support on the six-bus case") {
  GridModel grid = case6ww();
  for (const LineParams& line : grid.lines) {
    for (auto [m, n] : {std::pair{line.from_bus, line.to_bus},
                        std::pair{line.to_bus, line.from_bus}}) {
      CMatrix Ymn = flow_matrix(grid, m, n);
      for (int row = 0; row < grid.bus_count; ++row) {
        if (row != m) CHECK(Ymn.row(row).norm() == doctest::Approx(0.0));
      }
      CHECK(std::abs(Ymn(m, m)) > 0.0);
      CHECK(std::abs(Ymn(m, n)) > 0.0);
      for (int col = 0; col < grid.bus_count; ++col) {
        if (col != m && col != n) CHECK(std::abs(Ymn(m, col)) == doctest::Approx(0.0));
      }
    }
  }
}

TEST_CASE("flow matrix lookup fails for a non-line") {
  CHECK_THROWS_AS(flow_matrix(case6ww(), 0, 2), std::out_of_range);  // no line 1-3
}

TEST_CASE("voltage magnitude matrix is an indicator") {
  MeasurementDescriptor d{MeasurementKind::kSquaredVoltageMagnitude, 0, -1, -1, 1.0};
  CMatrix H = measurement_matrix(test::two_bus(), d);
  CHECK(std::abs(H(0, 0) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(H(0, 1)) + std::abs(H(1, 0)) + std::abs(H(1, 1)) == doctest::Approx(0.0));
}

TEST_CASE("active flow matrix of a unit line by hand") {
  MeasurementDescriptor d{MeasurementKind::kActiveFlow, -1, 0, 1, 1.0};
  CMatrix H = measurement_matrix(test::two_bus(), d);
  CHECK(std::abs(H(0, 0) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(H(0, 1) - Complex(-0.5, 0)) < 1e-15);
  CHECK(std::abs(H(1, 0) - Complex(-0.5, 0)) < 1e-15);
  CHECK(std::abs(H(1, 1)) < 1e-15);
}

TEST_CASE("every measurement matrix is Hermitian") {
  GridModel grid = case6ww();
  for (const MeasurementDescriptor& d : test::full_plan(grid)) {
    CMatrix H = measurement_matrix(grid, d);
    CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("injection matrix reproduces complex power at bus 3") {
  GridModel grid = case6ww();
  CMatrix Y = build_admittance(grid);
  MeasurementDescriptor d{MeasurementKind::kActiveInjection, 2, -1, -1, 1.0};
  CMatrix H = measurement_matrix(grid, d);
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    CVector v = test::random_state(rng, 6);
    Complex injection = v(2) * std::conj((Y * v)(2));
    CHECK(std::abs(evaluate_measurement(H, v) - injection.real()) < 1e-10);
  }
}

TEST_CASE("evaluate_measurement basics") {
  Rng rng(5);
  CVector v = test::random_state(rng, 4);
  CHECK(evaluate_measurement(CMatrix::Identity(4, 4), v) ==
        doctest::Approx(v.squaredNorm()).epsilon(1e-12));

  CMatrix Hv = CMatrix::Zero(4, 4);
  Hv(2, 2) = 1.0;
  CHECK(evaluate_measurement(Hv, v) == doctest::Approx(std::norm(v(2))).epsilon(1e-12));

  CHECK_THROWS_AS(evaluate_measurement(CMatrix::Identity(3, 3), v), std::invalid_argument);
}

TEST_CASE("lifted measurements agree with the direct power-flow computation") {
  GridModel grid = case6ww();
  MeasurementPlan plan = test::full_plan(grid);
  std::vector<CMatrix> matrices = plan_matrices(grid, plan);
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    CVector v = test::random_state(rng, grid.bus_count);
    PowerFlowValues pf = power_flow_oracle(grid, v);
    for (std::size_t l = 0; l < plan.size(); ++l) {
      double lifted = evaluate_measurement(matrices[l], v);
      double direct = oracle_value(grid, pf, plan[l]);
      CHECK(std::abs(lifted - direct) < 1e-10);
    }
  }
}

TEST_CASE("reactive injection uses the skew-Hermitian combination") {
  GridModel grid = case6ww();
  CMatrix Y = build_admittance(grid);
  Rng rng(7);
  for (int n = 0; n < grid.bus_count; ++n) {
    MeasurementDescriptor d{MeasurementKind::kReactiveInjection, n, -1, -1, 1.0};
    CMatrix H = measurement_matrix(grid, d);
    CVector v = test::random_state(rng, grid.bus_count);
    Complex injection = v(n) * std::conj((Y * v)(n));
    CHECK(std::abs(evaluate_measurement(H, v) - injection.imag()) < 1e-10);
  }
}

TEST_CASE("power flow oracle hand values") {
  GridModel grid = test::two_bus();
  SUBCASE("flat voltages carry no power") {
    CVector v = CVector::Ones(2);
    PowerFlowValues pf = power_flow_oracle(grid, v);
    CHECK(std::abs(pf.flow_from[0]) < 1e-15);
    CHECK(std::abs(pf.flow_to[0]) < 1e-15);
    CHECK(std::abs(pf.injection[0]) < 1e-15);
    CHECK(std::abs(pf.injection[1]) < 1e-15);
    CHECK(pf.vmag2[0] == doctest::Approx(1.0));
    CHECK(pf.vmag2[1] == doctest::Approx(1.0));
  }
  SUBCASE("quarter-turn voltage difference") {
    CVector v(2);
    v << Complex(1, 0), Complex(0, 1);
    PowerFlowValues pf = power_flow_oracle(grid, v);
    CHECK(pf.flow_from[0].real() == doctest::Approx(1.0));  // P^12
    CHECK(pf.flow_from[0].imag() == doctest::Approx(1.0));  // Q^12
  }
}

TEST_CASE("grid file round trip matches the embedded case") {
  GridModel loaded = load_grid_file(std::string(PSSE_DATA_DIR) + "/case6ww.grid");
  GridModel builtin = case6ww();
  REQUIRE(loaded.bus_count == builtin.bus_count);
  REQUIRE(loaded.lines.size() == builtin.lines.size());
  for (std::size_t i = 0; i < builtin.lines.size(); ++i) {
    CHECK(loaded.lines[i].from_bus == builtin.lines[i].from_bus);
    CHECK(loaded.lines[i].to_bus == builtin.lines[i].to_bus);
    CHECK(std::abs(loaded.lines[i].series_admittance - builtin.lines[i].series_admittance) <
          1e-13);
    CHECK(std::abs(loaded.lines[i].shunt_from - builtin.lines[i].shunt_from) < 1e-15);
    CHECK(std::abs(loaded.lines[i].shunt_to - builtin.lines[i].shunt_to) < 1e-15);
  }
  for (int n = 0; n < builtin.bus_count; ++n) {
    CHECK(std::abs(loaded.bus_shunts[n] - builtin.bus_shunts[n]) < 1e-15);
  }
}

TEST_CASE("grid file parser rejects malformed input") {
  auto write_and_load = [](const std::string& body) {
    std::string path = "bad_grid_test.tmp";
    {
      std::ofstream out(path);
      out << body;
    }
    return load_grid_file(path);
  };
  CHECK_THROWS_AS(write_and_load("buses 2\n"), std::runtime_error);  // missing header
  CHECK_THROWS_AS(write_and_load("psse-grid 1\nbuses 2\nwidget 1\n"), std::runtime_error);
  CHECK_THROWS_AS(write_and_load("psse-grid 1\nbuses 2\nbranch 1 5 1 0 0 0 0 0\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(
      write_and_load("psse-grid 1\nbuses 2\nbranch 1 2 1 0 0 0 0 0\nbranch 2 1 1 0 0 0 0 0\n"),
      std::runtime_error);
  CHECK_THROWS_AS(write_and_load("psse-grid 1\nbuses 2\nbranch 1 2 1 0 0 0 0 0 9\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(write_and_load("psse-grid 1\nshunt 1 0 0\n"), std::runtime_error);
  CHECK_NOTHROW(write_and_load("psse-grid 1\nbuses 2\n# ok\nbranch 1 2 1 -2 0 0.1 0 0.1\n"));
}
