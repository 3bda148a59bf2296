#include "psse/grid.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace psse {

namespace {

bool finite(Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

void check_bus(const GridModel& grid, int n, const char* what) {
  if (n < 0 || n >= grid.bus_count) {
    throw std::invalid_argument(std::string(what) + ": bus index " + std::to_string(n + 1) +
                                " out of range 1.." + std::to_string(grid.bus_count));
  }
}

}  // namespace

void GridModel::validate() const {
  if (bus_count <= 0) throw std::invalid_argument("grid: bus_count must be positive");
  if (static_cast<int>(bus_shunts.size()) != bus_count) {
    throw std::invalid_argument("grid: expected one shunt per bus");
  }
  for (Complex s : bus_shunts) {
    if (!finite(s)) throw std::invalid_argument("grid: non-finite bus shunt");
  }
  std::set<std::pair<int, int>> seen;
  for (const LineParams& line : lines) {
    check_bus(*this, line.from_bus, "line");
    check_bus(*this, line.to_bus, "line");
    if (line.from_bus == line.to_bus) {
      throw std::invalid_argument("grid: line endpoints must differ");
    }
    if (!finite(line.series_admittance) || !finite(line.shunt_from) || !finite(line.shunt_to)) {
      throw std::invalid_argument("grid: non-finite line admittance");
    }
    auto key = std::minmax(line.from_bus, line.to_bus);
    if (!seen.insert(key).second) {
      throw std::invalid_argument("grid: duplicate line between buses " +
                                  std::to_string(key.first + 1) + " and " +
                                  std::to_string(key.second + 1));
    }
  }
}

void validate_plan(const GridModel& grid, const MeasurementPlan& plan) {
  for (const MeasurementDescriptor& d : plan) {
    if (d.weight <= 0.0 || !std::isfinite(d.weight)) {
      throw std::invalid_argument("plan: measurement weight must be positive");
    }
    switch (d.kind) {
      case MeasurementKind::kActiveInjection:
      case MeasurementKind::kReactiveInjection:
      case MeasurementKind::kSquaredVoltageMagnitude:
        check_bus(grid, d.bus, "plan");
        break;
      case MeasurementKind::kActiveFlow:
      case MeasurementKind::kReactiveFlow:
        find_line(grid, d.from, d.to);  // throws when absent
        break;
    }
  }
}

CMatrix build_admittance(const GridModel& grid) {
  grid.validate();
  const int n = grid.bus_count;
  CMatrix Y = CMatrix::Zero(n, n);
  for (int b = 0; b < n; ++b) Y(b, b) = grid.bus_shunts[b];
  for (const LineParams& line : grid.lines) {
    Complex y = line.series_admittance;
    Y(line.from_bus, line.to_bus) -= y;
    Y(line.to_bus, line.from_bus) -= y;
    Y(line.from_bus, line.from_bus) += y;
    Y(line.to_bus, line.to_bus) += y;
  }
  return Y;
}

CMatrix injection_matrix(const GridModel& grid, int n) {
  check_bus(grid, n, "injection_matrix");
  CMatrix Y = build_admittance(grid);
  CMatrix out = CMatrix::Zero(grid.bus_count, grid.bus_count);
  out.row(n) = Y.row(n);
  return out;
}

std::pair<int, bool> find_line(const GridModel& grid, int m, int n) {
  for (int i = 0; i < static_cast<int>(grid.lines.size()); ++i) {
    const LineParams& line = grid.lines[i];
    if (line.from_bus == m && line.to_bus == n) return {i, true};
    if (line.from_bus == n && line.to_bus == m) return {i, false};
  }
  throw std::out_of_range("no line between buses " + std::to_string(m + 1) + " and " +
                          std::to_string(n + 1));
}

CMatrix flow_matrix(const GridModel& grid, int m, int n) {
  check_bus(grid, m, "flow_matrix");
  check_bus(grid, n, "flow_matrix");
  auto [index, forward] = find_line(grid, m, n);
  const LineParams& line = grid.lines[index];
  Complex y = line.series_admittance;
  Complex shunt = forward ? line.shunt_from : line.shunt_to;
  CMatrix out = CMatrix::Zero(grid.bus_count, grid.bus_count);
  out(m, m) = shunt + y;
  out(m, n) = -y;
  return out;
}

CMatrix measurement_matrix(const GridModel& grid, const MeasurementDescriptor& d) {
  const Complex half(0.5, 0.0);
  const Complex half_j(0.0, 0.5);
  switch (d.kind) {
    case MeasurementKind::kActiveInjection: {
      CMatrix Yn = injection_matrix(grid, d.bus);
      return half * (Yn + Yn.adjoint()).eval();
    }
    case MeasurementKind::kReactiveInjection: {
      CMatrix Yn = injection_matrix(grid, d.bus);
      return half_j * (Yn - Yn.adjoint()).eval();
    }
    case MeasurementKind::kActiveFlow: {
      CMatrix Ymn = flow_matrix(grid, d.from, d.to);
      return half * (Ymn + Ymn.adjoint()).eval();
    }
    case MeasurementKind::kReactiveFlow: {
      CMatrix Ymn = flow_matrix(grid, d.from, d.to);
      return half_j * (Ymn - Ymn.adjoint()).eval();
    }
    case MeasurementKind::kSquaredVoltageMagnitude: {
      check_bus(grid, d.bus, "measurement_matrix");
      CMatrix out = CMatrix::Zero(grid.bus_count, grid.bus_count);
      out(d.bus, d.bus) = 1.0;
      return out;
    }
  }
  throw std::invalid_argument("measurement_matrix: unknown measurement kind");
}

std::vector<CMatrix> plan_matrices(const GridModel& grid, const MeasurementPlan& plan) {
  validate_plan(grid, plan);
  std::vector<CMatrix> out;
  out.reserve(plan.size());
  for (const MeasurementDescriptor& d : plan) out.push_back(measurement_matrix(grid, d));
  return out;
}

double evaluate_measurement(const CMatrix& H, const CVector& v) {
  if (H.rows() != v.size() || H.cols() != v.size()) {
    throw std::invalid_argument("evaluate_measurement: dimension mismatch");
  }
  return (v.adjoint() * H * v)(0, 0).real();
}

PowerFlowValues power_flow_oracle(const GridModel& grid, const CVector& v) {
  if (v.size() != grid.bus_count) {
    throw std::invalid_argument("power_flow_oracle: dimension mismatch");
  }
  PowerFlowValues pf;
  CMatrix Y = build_admittance(grid);
  CVector current = Y * v;
  pf.injection.resize(grid.bus_count);
  pf.vmag2.resize(grid.bus_count);
  for (int n = 0; n < grid.bus_count; ++n) {
    pf.injection[n] = v(n) * std::conj(current(n));
    pf.vmag2[n] = std::norm(v(n));
  }
  pf.flow_from.reserve(grid.lines.size());
  pf.flow_to.reserve(grid.lines.size());
  for (const LineParams& line : grid.lines) {
    Complex vm = v(line.from_bus);
    Complex vn = v(line.to_bus);
    Complex i_from = line.shunt_from * vm + line.series_admittance * (vm - vn);
    Complex i_to = line.shunt_to * vn + line.series_admittance * (vn - vm);
    pf.flow_from.push_back(vm * std::conj(i_from));
    pf.flow_to.push_back(vn * std::conj(i_to));
  }
  return pf;
}

double oracle_value(const GridModel& grid, const PowerFlowValues& pf,
                    const MeasurementDescriptor& d) {
  switch (d.kind) {
    case MeasurementKind::kActiveInjection:
      return pf.injection.at(d.bus).real();
    case MeasurementKind::kReactiveInjection:
      return pf.injection.at(d.bus).imag();
    case MeasurementKind::kActiveFlow: {
      auto [index, forward] = find_line(grid, d.from, d.to);
      return (forward ? pf.flow_from : pf.flow_to).at(index).real();
    }
    case MeasurementKind::kReactiveFlow: {
      auto [index, forward] = find_line(grid, d.from, d.to);
      return (forward ? pf.flow_from : pf.flow_to).at(index).imag();
    }
    case MeasurementKind::kSquaredVoltageMagnitude:
      return pf.vmag2.at(d.bus);
  }
  throw std::invalid_argument("oracle_value: unknown measurement kind");
}

GridModel case6ww() {
  // Wood-Wollenberg 6-bus system: from, to, r, x, total charging b (per
  // unit). Series admittance 1/(r+jx); half of b at each line end; no bus
  // shunts.
  static constexpr double kBranch[11][5] = {
      {1, 2, 0.10, 0.20, 0.04}, {1, 4, 0.05, 0.20, 0.04}, {1, 5, 0.08, 0.30, 0.06},
      {2, 3, 0.05, 0.25, 0.06}, {2, 4, 0.05, 0.10, 0.02}, {2, 5, 0.10, 0.30, 0.04},
      {2, 6, 0.07, 0.20, 0.05}, {3, 5, 0.12, 0.26, 0.05}, {3, 6, 0.02, 0.10, 0.02},
      {4, 5, 0.20, 0.40, 0.08}, {5, 6, 0.10, 0.30, 0.08},
  };
  GridModel grid;
  grid.bus_count = 6;
  grid.bus_shunts.assign(6, Complex(0.0, 0.0));
  for (const auto& row : kBranch) {
    LineParams line;
    line.from_bus = static_cast<int>(row[0]) - 1;
    line.to_bus = static_cast<int>(row[1]) - 1;
    Complex z(row[2], row[3]);
    line.series_admittance = std::conj(z) / std::norm(z);
    Complex shunt(0.0, row[4] / 2.0);
    line.shunt_from = shunt;
    line.shunt_to = shunt;
    grid.lines.push_back(line);
  }
  return grid;
}

GridModel load_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("grid file: cannot open " + path);

  GridModel grid;
  bool saw_header = false;
  bool saw_buses = false;
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string keyword;
    if (!(ls >> keyword)) continue;  // blank or comment-only line

    if (!saw_header) {
      int version = 0;
      if (keyword != "psse-grid" || !(ls >> version) || version != 1) {
        fail("expected header 'psse-grid 1'");
      }
      saw_header = true;
      continue;
    }

    if (keyword == "buses") {
      if (saw_buses) fail("duplicate 'buses' line");
      int count = 0;
      if (!(ls >> count) || count <= 0) fail("'buses' expects a positive count");
      grid.bus_count = count;
      grid.bus_shunts.assign(count, Complex(0.0, 0.0));
      saw_buses = true;
    } else if (keyword == "shunt") {
      if (!saw_buses) fail("'shunt' before 'buses'");
      int bus = 0;
      double re = 0.0, im = 0.0;
      if (!(ls >> bus >> re >> im)) fail("'shunt' expects: bus re im");
      if (bus < 1 || bus > grid.bus_count) fail("shunt bus index out of range");
      grid.bus_shunts[bus - 1] = Complex(re, im);
    } else if (keyword == "branch") {
      if (!saw_buses) fail("'branch' before 'buses'");
      int from = 0, to = 0;
      double yre, yim, ffre, ffim, ttre, ttim;
      if (!(ls >> from >> to >> yre >> yim >> ffre >> ffim >> ttre >> ttim)) {
        fail("'branch' expects: from to y_re y_im from_shunt_re from_shunt_im "
             "to_shunt_re to_shunt_im");
      }
      if (from < 1 || from > grid.bus_count || to < 1 || to > grid.bus_count) {
        fail("branch bus index out of range");
      }
      LineParams line;
      line.from_bus = from - 1;
      line.to_bus = to - 1;
      line.series_admittance = Complex(yre, yim);
      line.shunt_from = Complex(ffre, ffim);
      line.shunt_to = Complex(ttre, ttim);
      grid.lines.push_back(line);
    } else {
      fail("unknown keyword '" + keyword + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing tokens after '" + keyword + "' entry");
  }

  if (!saw_header) throw std::runtime_error(path + ": missing 'psse-grid 1' header");
  if (!saw_buses) throw std::runtime_error(path + ": missing 'buses' line");
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return grid;
}

}  // namespace psse
