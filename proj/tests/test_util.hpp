#pragma once

#include <vector>

#include "psse/dynamics.hpp"
#include "psse/grid.hpp"
#include "psse/rng.hpp"
#include "psse/types.hpp"

namespace psse::test {

inline GridModel two_bus(Complex series = Complex(1.0, 0.0),
                         Complex shunt_from = Complex(0.0, 0.0),
                         Complex shunt_to = Complex(0.0, 0.0)) {
  GridModel grid;
  grid.bus_count = 2;
  grid.bus_shunts = {Complex(0.0, 0.0), Complex(0.0, 0.0)};
  grid.lines.push_back({0, 1, series, shunt_from, shunt_to});
  return grid;
}

inline GridModel triangle() {
  GridModel grid;
  grid.bus_count = 3;
  grid.bus_shunts = {Complex(0.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0)};
  grid.lines.push_back({0, 1, Complex(2.0, -4.0), Complex(0.0, 0.01), Complex(0.0, 0.01)});
  grid.lines.push_back({0, 2, Complex(1.0, -3.0), Complex(0.0, 0.02), Complex(0.0, 0.02)});
  grid.lines.push_back({1, 2, Complex(1.5, -2.5), Complex(0.0, 0.015), Complex(0.0, 0.015)});
  return grid;
}

// Every measurable quantity: P/Q injections everywhere, P/Q flows in both
// orientations of every line, squared magnitudes everywhere.
inline MeasurementPlan full_plan(const GridModel& grid) {
  MeasurementPlan plan;
  for (int n = 0; n < grid.bus_count; ++n) {
    plan.push_back({MeasurementKind::kActiveInjection, n, -1, -1, 1.0});
    plan.push_back({MeasurementKind::kReactiveInjection, n, -1, -1, 1.0});
  }
  for (const LineParams& line : grid.lines) {
    plan.push_back({MeasurementKind::kActiveFlow, -1, line.from_bus, line.to_bus, 1.0});
    plan.push_back({MeasurementKind::kReactiveFlow, -1, line.from_bus, line.to_bus, 1.0});
    plan.push_back({MeasurementKind::kActiveFlow, -1, line.to_bus, line.from_bus, 1.0});
    plan.push_back({MeasurementKind::kReactiveFlow, -1, line.to_bus, line.from_bus, 1.0});
  }
  for (int n = 0; n < grid.bus_count; ++n) {
    plan.push_back({MeasurementKind::kSquaredVoltageMagnitude, n, -1, -1, 1.0});
  }
  return plan;
}

// P and Q flows across the first `line_count` lines plus squared voltage
// magnitudes at every bus.
inline MeasurementPlan flows_and_magnitudes(const GridModel& grid, int line_count) {
  MeasurementPlan plan;
  for (int i = 0; i < line_count; ++i) {
    const LineParams& line = grid.lines.at(i);
    plan.push_back({MeasurementKind::kActiveFlow, -1, line.from_bus, line.to_bus, 1.0});
  }
  for (int i = 0; i < line_count; ++i) {
    const LineParams& line = grid.lines.at(i);
    plan.push_back({MeasurementKind::kReactiveFlow, -1, line.from_bus, line.to_bus, 1.0});
  }
  for (int n = 0; n < grid.bus_count; ++n) {
    plan.push_back({MeasurementKind::kSquaredVoltageMagnitude, n, -1, -1, 1.0});
  }
  return plan;
}

// Magnitudes near one, angles across the half circle.
inline CVector random_state(Rng& rng, int n) {
  CVector v(n);
  for (int i = 0; i < n; ++i) {
    v(i) = std::polar(rng.uniform(0.7, 1.3), rng.uniform(-0.5 * kPi, 0.5 * kPi));
  }
  return v;
}

inline CMatrix random_complex_matrix(Rng& rng, int n, double scale = 1.0) {
  CMatrix a(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      a(i, j) = Complex(rng.uniform(-scale, scale), rng.uniform(-scale, scale));
    }
  }
  return a;
}

inline CMatrix random_hermitian(Rng& rng, int n, double scale = 1.0) {
  CMatrix a = random_complex_matrix(rng, n, scale);
  return 0.5 * (a + a.adjoint());
}

inline CMatrix random_psd(Rng& rng, int n, double scale = 1.0) {
  CMatrix a = random_complex_matrix(rng, n, scale);
  return a * a.adjoint();
}

}  // namespace psse::test
