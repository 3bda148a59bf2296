#pragma once

#include <string>
#include <utility>
#include <vector>

#include "psse/types.hpp"

namespace psse {

// Bus indices are 0-based everywhere in memory. Case files, scenario
// configs, and CSV output use 1-based indices and are converted at the
// boundary.

struct LineParams {
  int from_bus = 0;
  int to_bus = 0;
  Complex series_admittance;  // y_mn
  Complex shunt_from;         // line-end shunt at the from bus
  Complex shunt_to;           // line-end shunt at the to bus
};

struct GridModel {
  int bus_count = 0;
  std::vector<LineParams> lines;    // order is meaningful: it defines line numbering
  std::vector<Complex> bus_shunts;  // ybar_nn, one per bus

  // Throws std::invalid_argument on out-of-range indices, self-loops,
  // duplicate unordered (from,to) pairs, or non-finite admittances.
  void validate() const;
};

enum class MeasurementKind {
  kActiveInjection,
  kReactiveInjection,
  kActiveFlow,
  kReactiveFlow,
  kSquaredVoltageMagnitude,
};

struct MeasurementDescriptor {
  MeasurementKind kind = MeasurementKind::kSquaredVoltageMagnitude;
  int bus = -1;   // injections and magnitudes
  int from = -1;  // flows
  int to = -1;
  double weight = 1.0;
};

using MeasurementPlan = std::vector<MeasurementDescriptor>;

void validate_plan(const GridModel& grid, const MeasurementPlan& plan);

// Bus admittance matrix: Y[m][n] = -y_mn for lines, diagonal = bus shunt
// plus the sum of incident series admittances, zero elsewhere.
CMatrix build_admittance(const GridModel& grid);

// Row matrix e_n e_n^T Y used by injection measurements at bus n.
CMatrix injection_matrix(const GridModel& grid, int n);

// Row matrix for the flow from m to n:
//   (shunt_at_m + y_mn) e_m e_m^T - y_mn e_m e_n^T.
// (m,n) may be given in either orientation; the orientation selects which
// end's shunt applies. Throws std::out_of_range if (m,n) is not a line.
CMatrix flow_matrix(const GridModel& grid, int m, int n);

// Hermitian matrix H such that the measured quantity equals v^H H v.
CMatrix measurement_matrix(const GridModel& grid, const MeasurementDescriptor& d);

std::vector<CMatrix> plan_matrices(const GridModel& grid, const MeasurementPlan& plan);

// v^H H v for Hermitian H; the imaginary part is discarded.
double evaluate_measurement(const CMatrix& H, const CVector& v);

// Direct (non-lifted) evaluation of every measurable quantity, used as the
// reference the lifted matrices are checked against.
struct PowerFlowValues {
  std::vector<Complex> injection;  // S^n per bus
  std::vector<Complex> flow_from;  // S^{mn} per line, from->to orientation
  std::vector<Complex> flow_to;    // S^{nm} per line, to->from orientation
  std::vector<double> vmag2;       // |V^n|^2 per bus
};

PowerFlowValues power_flow_oracle(const GridModel& grid, const CVector& v);
double oracle_value(const GridModel& grid, const PowerFlowValues& pf,
                    const MeasurementDescriptor& d);

// Line lookup in either orientation: (line index, true when m is the from
// end). Throws std::out_of_range when no such line exists.
std::pair<int, bool> find_line(const GridModel& grid, int m, int n);

// Embedded Wood-Wollenberg 6-bus, 11-line test system (per unit). Matches
// data/case6ww.grid.
GridModel case6ww();

// Case file parser for the documented "psse-grid 1" text format.
// Throws std::runtime_error with a line-numbered message on any violation.
GridModel load_grid_file(const std::string& path);

}  // namespace psse
