#include "psse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "psse/csv.hpp"
#include "psse/sdr.hpp"

namespace psse {

namespace {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& context) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + context);
  }
}

Complex parse_complex(const json& j, const std::string& context) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return Complex(j[0].get<double>(), j[1].get<double>());
  }
  throw ConfigError(context + ": expected a number or [re, im] pair");
}

MeasurementKind parse_kind(const std::string& name, const std::string& context) {
  if (name == "active_injection") return MeasurementKind::kActiveInjection;
  if (name == "reactive_injection") return MeasurementKind::kReactiveInjection;
  if (name == "active_flow") return MeasurementKind::kActiveFlow;
  if (name == "reactive_flow") return MeasurementKind::kReactiveFlow;
  if (name == "vmag2") return MeasurementKind::kSquaredVoltageMagnitude;
  throw ConfigError(context + ": unknown measurement kind '" + name + "'");
}

MeasurementDescriptor parse_measurement(const json& j, const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + ": expected an object");
  require_keys(j, {"kind", "bus", "from", "to", "weight"}, context);
  MeasurementDescriptor d;
  d.kind = parse_kind(j.at("kind").get<std::string>(), context);
  if (j.contains("weight")) d.weight = j.at("weight").get<double>();
  switch (d.kind) {
    case MeasurementKind::kActiveFlow:
    case MeasurementKind::kReactiveFlow:
      if (!j.contains("from") || !j.contains("to") || j.contains("bus")) {
        throw ConfigError(context + ": flow measurements take 'from' and 'to'");
      }
      d.from = j.at("from").get<int>() - 1;
      d.to = j.at("to").get<int>() - 1;
      break;
    default:
      if (!j.contains("bus") || j.contains("from") || j.contains("to")) {
        throw ConfigError(context + ": this measurement takes 'bus'");
      }
      d.bus = j.at("bus").get<int>() - 1;
      break;
  }
  return d;
}

CVector parse_diagonal(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) throw ConfigError(context + ": expected a non-empty array");
  CVector diag(static_cast<int>(j.size()));
  for (int i = 0; i < diag.size(); ++i) {
    diag(i) = parse_complex(j[i], context);
  }
  return diag;
}

TransitionSpec parse_transition(const json& j) {
  if (!j.is_object()) throw ConfigError("transition: expected an object");
  require_keys(j, {"kind", "diagonal", "diagonals"}, "transition");
  TransitionSpec spec;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant_diagonal") {
    spec.constant = true;
    spec.diagonals.push_back(parse_diagonal(j.at("diagonal"), "transition.diagonal"));
    if (j.contains("diagonals")) throw ConfigError("transition: 'diagonals' not allowed here");
  } else if (kind == "per_step_diagonal") {
    spec.constant = false;
    if (j.contains("diagonal")) throw ConfigError("transition: 'diagonal' not allowed here");
    const json& list = j.at("diagonals");
    if (!list.is_array() || list.empty()) {
      throw ConfigError("transition.diagonals: expected a non-empty array");
    }
    for (const json& entry : list) {
      spec.diagonals.push_back(parse_diagonal(entry, "transition.diagonals"));
    }
  } else {
    throw ConfigError("transition: unknown kind '" + kind + "'");
  }
  return spec;
}

NoiseModel parse_noise(const json& j) {
  require_keys(j,
               {"process_mag_bound", "process_angle_bound", "meas_bound", "init_mag_mean",
                "init_mag_std", "init_angle_bound"},
               "noise");
  NoiseModel noise;
  if (j.contains("process_mag_bound")) noise.process_mag_bound = j.at("process_mag_bound");
  if (j.contains("process_angle_bound")) {
    noise.process_angle_bound = j.at("process_angle_bound");
  }
  if (j.contains("meas_bound")) noise.meas_bound = j.at("meas_bound");
  if (j.contains("init_mag_mean")) noise.init_mag_mean = j.at("init_mag_mean");
  if (j.contains("init_mag_std")) noise.init_mag_std = j.at("init_mag_std");
  if (j.contains("init_angle_bound")) noise.init_angle_bound = j.at("init_angle_bound");
  return noise;
}

bool finite_states(const std::vector<CVector>& states) {
  for (const CVector& v : states) {
    if (!v.allFinite()) return false;
  }
  return true;
}

struct SharedInputs {
  std::vector<CMatrix> transitions;
  std::vector<CMatrix> plan_H;
  MheConfig mhe;
  CVector flat_prior;
  EkfState ekf_init;
  RMatrix Q;
  RMatrix R;
};

ReplicationRecord run_replication(const ScenarioConfig& cfg, const SharedInputs& shared,
                                  int index) {
  ReplicationRecord record;
  Rng rng(cfg.base_seed + static_cast<std::uint64_t>(index));
  record.trajectory = simulate(cfg.grid, cfg.plan, shared.transitions, cfg.noise, cfg.horizon,
                               rng);
  const int first_k = cfg.window;
  const int last_k = cfg.horizon - 1;
  std::vector<CVector> truth(record.trajectory.states.begin() + first_k,
                             record.trajectory.states.end());

  for (const std::string& name : cfg.estimators) {
    std::vector<CVector> estimates;
    double mean_window = 0.0;
    if (name == "mhe") {
      Rng extraction_rng((cfg.base_seed + static_cast<std::uint64_t>(index)) ^
                         0xda3e39cb94b95bdbULL);
      Rng* extraction = cfg.extraction == ExtractionMethod::kRandomized ? &extraction_rng
                                                                        : nullptr;
      MheRunResult mhe = run_mhe(shared.plan_H, record.trajectory.measurements,
                                 record.trajectory.transitions, shared.flat_prior, shared.mhe,
                                 0, extraction);
      estimates = std::move(mhe.filtered);
      for (double s : mhe.window_seconds) mean_window += s;
      if (!mhe.window_seconds.empty()) mean_window /= mhe.window_seconds.size();
    } else {  // "ekf"
      auto start = std::chrono::steady_clock::now();
      EkfResult ekf = ekf_run(cfg.grid, cfg.plan, record.trajectory.measurements,
                              record.trajectory.transitions, shared.ekf_init, shared.Q,
                              shared.R);
      std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      estimates.assign(ekf.estimates.begin() + first_k, ekf.estimates.end());
      mean_window = elapsed.count() / static_cast<double>(last_k + 1);
    }

    bool ok = finite_states(estimates);
    record.diverged[name] = ok ? 0 : 1;
    record.mean_window_seconds[name] = mean_window;
    if (ok) record.rmse[name] = rmse_series(truth, estimates, 0);
    record.estimates[name] = std::move(estimates);
  }
  return record;
}

std::ofstream open_report(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("emit_reports: cannot write " + (dir / name).string());
  return out;
}

}  // namespace

std::vector<CMatrix> TransitionSpec::materialize(int steps) const {
  if (steps < 1) throw std::invalid_argument("transition: steps must be >= 1");
  if (diagonals.empty()) throw std::invalid_argument("transition: no diagonals");
  std::vector<CMatrix> out;
  out.reserve(steps - 1);
  for (int k = 0; k + 1 < steps; ++k) {
    const CVector& diag = constant ? diagonals.front() : diagonals.at(k);
    out.push_back(CMatrix(diag.asDiagonal()));
  }
  return out;
}

void ScenarioConfig::validate() const {
  try {
    grid.validate();
    validate_plan(grid, plan);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (plan.empty()) throw ConfigError("scenario: measurement plan is empty");
  if (horizon < 1) throw ConfigError("scenario: horizon must be >= 1");
  if (window < 0) throw ConfigError("scenario: window must be >= 0");
  if (window > horizon - 1) throw ConfigError("scenario: window must be < horizon");
  if (mu < 0.0 || lambda < 0.0) throw ConfigError("scenario: weights must be nonnegative");
  if (replications < 1) throw ConfigError("scenario: replications must be >= 1");
  if (randomized_count < 1) throw ConfigError("scenario: randomized count must be >= 1");
  if (threads < 0) throw ConfigError("scenario: threads must be >= 0");
  if (solver.max_iterations < 1 || solver.rel_tolerance <= 0.0) {
    throw ConfigError("scenario: bad solver settings");
  }
  if (noise.process_mag_bound < 0.0 || noise.process_angle_bound < 0.0 ||
      noise.meas_bound < 0.0 || noise.init_mag_std < 0.0 || noise.init_angle_bound < 0.0) {
    throw ConfigError("scenario: noise bounds must be nonnegative");
  }
  for (const std::string& name : estimators) {
    if (name != "mhe" && name != "ekf") throw ConfigError("scenario: unknown estimator " + name);
    if (std::count(estimators.begin(), estimators.end(), name) != 1) {
      throw ConfigError("scenario: duplicate estimator " + name);
    }
  }
  if (transition.diagonals.empty()) throw ConfigError("scenario: transition has no diagonals");
  if (!transition.constant &&
      static_cast<int>(transition.diagonals.size()) < horizon - 1) {
    throw ConfigError("scenario: need a transition diagonal per step");
  }
  for (const CVector& diag : transition.diagonals) {
    if (static_cast<int>(diag.size()) != grid.bus_count) {
      throw ConfigError("scenario: transition diagonal size must match bus count");
    }
  }
}

MheConfig ScenarioConfig::mhe_config() const {
  MheConfig mhe;
  mhe.window = window;
  mhe.mu = mu;
  mhe.lambda = lambda;
  mhe.solver = solver;
  mhe.extraction = extraction;
  mhe.randomized_count = randomized_count;
  return mhe;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError(path + ": top level must be an object");

  try {
    require_keys(root,
                 {"grid", "measurements", "transition", "noise", "horizon", "window", "mu",
                  "lambda", "replications", "base_seed", "estimators", "output_dir", "solver",
                  "extraction", "threads"},
                 "scenario");

    ScenarioConfig cfg;
    std::filesystem::path grid_rel = root.at("grid").get<std::string>();
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    cfg.grid_path = grid_rel.is_absolute() ? grid_rel.string() : (base / grid_rel).string();
    try {
      cfg.grid = load_grid_file(cfg.grid_path);
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }

    const json& measurements = root.at("measurements");
    if (!measurements.is_array() || measurements.empty()) {
      throw ConfigError("measurements: expected a non-empty array");
    }
    for (std::size_t i = 0; i < measurements.size(); ++i) {
      cfg.plan.push_back(
          parse_measurement(measurements[i], "measurements[" + std::to_string(i) + "]"));
    }

    cfg.transition = parse_transition(root.at("transition"));
    if (root.contains("noise")) cfg.noise = parse_noise(root.at("noise"));
    cfg.horizon = root.at("horizon").get<int>();
    cfg.window = root.at("window").get<int>();
    cfg.mu = root.at("mu").get<double>();
    cfg.lambda = root.at("lambda").get<double>();
    cfg.replications = root.at("replications").get<int>();
    cfg.base_seed = root.at("base_seed").get<std::uint64_t>();

    const json& estimators = root.at("estimators");
    if (!estimators.is_array()) throw ConfigError("estimators: expected an array");
    for (const json& e : estimators) cfg.estimators.push_back(e.get<std::string>());

    if (root.contains("output_dir")) cfg.output_dir = root.at("output_dir").get<std::string>();
    if (root.contains("threads")) cfg.threads = root.at("threads").get<int>();

    if (root.contains("solver")) {
      const json& solver = root.at("solver");
      require_keys(solver, {"max_iterations", "rel_tolerance", "acceleration"}, "solver");
      if (solver.contains("max_iterations")) {
        cfg.solver.max_iterations = solver.at("max_iterations").get<int>();
      }
      if (solver.contains("rel_tolerance")) {
        cfg.solver.rel_tolerance = solver.at("rel_tolerance").get<double>();
      }
      if (solver.contains("acceleration")) {
        cfg.solver.acceleration = solver.at("acceleration").get<bool>();
      }
    }

    if (root.contains("extraction")) {
      const json& extraction = root.at("extraction");
      require_keys(extraction, {"method", "count"}, "extraction");
      std::string method = extraction.at("method").get<std::string>();
      if (method == "eig") {
        cfg.extraction = ExtractionMethod::kEigen;
        if (extraction.contains("count")) {
          throw ConfigError("extraction: 'count' only applies to randomized");
        }
      } else if (method == "randomized") {
        cfg.extraction = ExtractionMethod::kRandomized;
        if (extraction.contains("count")) {
          cfg.randomized_count = extraction.at("count").get<int>();
        }
      } else {
        throw ConfigError("extraction: unknown method '" + method + "'");
      }
    }

    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

RVector rmse_series(const std::vector<CVector>& truth, const std::vector<CVector>& estimates,
                    int reference_bus) {
  if (truth.size() != estimates.size()) {
    throw std::invalid_argument("rmse_series: length mismatch");
  }
  RVector out(static_cast<int>(truth.size()));
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k].size() != estimates[k].size()) {
      throw std::invalid_argument("rmse_series: state dimension mismatch");
    }
    CVector t = align_phase(truth[k], reference_bus);
    CVector e = align_phase(estimates[k], reference_bus);
    out(static_cast<int>(k)) =
        (e - t).norm() / std::sqrt(static_cast<double>(truth[k].size()));
  }
  return out;
}

RVector aggregate_rmse(const std::vector<RVector>& per_replication,
                       const std::vector<char>& excluded) {
  if (per_replication.size() != excluded.size()) {
    throw std::invalid_argument("aggregate_rmse: flag count mismatch");
  }
  int length = -1;
  for (std::size_t r = 0; r < per_replication.size(); ++r) {
    if (excluded[r]) continue;
    if (length < 0) length = static_cast<int>(per_replication[r].size());
    if (static_cast<int>(per_replication[r].size()) != length) {
      throw std::invalid_argument("aggregate_rmse: series length mismatch");
    }
  }
  if (length < 0) return RVector();
  RVector sums = RVector::Zero(length);
  int included = 0;
  for (std::size_t r = 0; r < per_replication.size(); ++r) {
    if (excluded[r]) continue;
    sums += per_replication[r].cwiseAbs2();
    ++included;
  }
  return (sums / static_cast<double>(included)).cwiseSqrt();
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();

  SharedInputs shared;
  shared.transitions = cfg.transition.materialize(cfg.horizon);
  shared.plan_H = plan_matrices(cfg.grid, cfg.plan);
  shared.mhe = cfg.mhe_config();
  shared.flat_prior = CVector::Ones(cfg.grid.bus_count);
  shared.ekf_init = flat_start(cfg.grid.bus_count, cfg.noise.init_mag_std);
  shared.Q = process_covariance(cfg.noise, cfg.grid.bus_count);
  shared.R = measurement_covariance(cfg.noise, static_cast<int>(cfg.plan.size()));

  RunResult result;
  result.config = cfg;
  result.first_k = cfg.window;
  result.replications.resize(cfg.replications);

  int thread_count = cfg.threads > 0 ? cfg.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
  thread_count = std::clamp(thread_count, 1, cfg.replications);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (int r = next.fetch_add(1); r < cfg.replications; r = next.fetch_add(1)) {
      try {
        result.replications[r] = run_replication(cfg, shared, r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (const std::string& name : cfg.estimators) {
    std::vector<RVector> series;
    std::vector<char> excluded;
    double time_sum = 0.0;
    int diverged = 0;
    for (const ReplicationRecord& record : result.replications) {
      bool bad = record.diverged.at(name) != 0;
      excluded.push_back(bad ? 1 : 0);
      series.push_back(bad ? RVector() : record.rmse.at(name));
      diverged += bad ? 1 : 0;
      time_sum += record.mean_window_seconds.at(name);
    }
    RVector aggregate = aggregate_rmse(series, excluded);
    result.rmse[name] = aggregate;
    result.divergence_rate[name] =
        static_cast<double>(diverged) / static_cast<double>(cfg.replications);
    result.mean_window_seconds[name] = time_sum / static_cast<double>(cfg.replications);
    double mean = std::numeric_limits<double>::quiet_NaN();
    if (aggregate.size() > 0) {
      double sum = 0.0;
      for (int k = 0; k < aggregate.size(); ++k) sum += aggregate(k);
      mean = sum / static_cast<double>(aggregate.size());
    }
    result.mean_rmse[name] = mean;
  }
  return result;
}

void emit_reports(const RunResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  const ScenarioConfig& cfg = result.config;
  fs::path out_dir(dir);
  fs::create_directories(out_dir);

  const bool have_estimators = !cfg.estimators.empty();
  const int first_k = result.first_k;
  const int last_k = cfg.horizon - 1;

  {
    std::ofstream out = open_report(out_dir, "rmse.csv");
    out << "k,estimator,rmse\n";
    if (have_estimators) {
      for (int k = first_k; k <= last_k; ++k) {
        for (const std::string& name : cfg.estimators) {
          const RVector& series = result.rmse.at(name);
          double value = series.size() > 0 ? series(k - first_k)
                                           : std::numeric_limits<double>::quiet_NaN();
          out << k << ',' << name << ',' << format_g17(value) << '\n';
        }
      }
    }
  }

  {
    std::ofstream out = open_report(out_dir, "summary.csv");
    out << "estimator,mean_rmse,divergence_rate,mean_window_seconds,replications\n";
    for (const std::string& name : cfg.estimators) {
      out << name << ',' << format_g17(result.mean_rmse.at(name)) << ','
          << format_g17(result.divergence_rate.at(name)) << ','
          << format_g17(result.mean_window_seconds.at(name)) << ',' << cfg.replications << '\n';
    }
  }

  for (int bus = 0; bus < cfg.grid.bus_count; ++bus) {
    std::ofstream out = open_report(out_dir, "trajectory_bus" + std::to_string(bus + 1) + ".csv");
    out << "k,truth_re,truth_im";
    for (const std::string& name : cfg.estimators) {
      out << ',' << name << "_re," << name << "_im";
    }
    out << '\n';
    if (!have_estimators || result.replications.empty()) continue;
    const ReplicationRecord& rep0 = result.replications.front();
    for (int k = first_k; k <= last_k; ++k) {
      Complex truth = rep0.trajectory.states[k](bus);
      out << k << ',' << format_g17(truth.real()) << ',' << format_g17(truth.imag());
      for (const std::string& name : cfg.estimators) {
        Complex est = rep0.estimates.at(name)[k - first_k](bus);
        out << ',' << format_g17(est.real()) << ',' << format_g17(est.imag());
      }
      out << '\n';
    }
  }

  {
    std::ofstream out = open_report(out_dir, "estimates_rep0.csv");
    out << "k,bus,re,im,estimator\n";
    if (have_estimators && !result.replications.empty()) {
      const ReplicationRecord& rep0 = result.replications.front();
      for (int k = first_k; k <= last_k; ++k) {
        for (int bus = 0; bus < cfg.grid.bus_count; ++bus) {
          for (const std::string& name : cfg.estimators) {
            Complex est = rep0.estimates.at(name)[k - first_k](bus);
            out << k << ',' << (bus + 1) << ',' << format_g17(est.real()) << ','
                << format_g17(est.imag()) << ',' << name << '\n';
          }
        }
      }
    }
  }

  {
    std::ofstream out = open_report(out_dir, "truth_rep0.csv");
    out << "k,bus,re,im\n";
    if (have_estimators && !result.replications.empty()) {
      const ReplicationRecord& rep0 = result.replications.front();
      for (int k = 0; k <= last_k; ++k) {
        for (int bus = 0; bus < cfg.grid.bus_count; ++bus) {
          Complex v = rep0.trajectory.states[k](bus);
          out << k << ',' << (bus + 1) << ',' << format_g17(v.real()) << ','
              << format_g17(v.imag()) << '\n';
        }
      }
    }
  }

  {
    std::ofstream out = open_report(out_dir, "measurements_rep0.csv");
    out << "k,descriptor,value\n";
    if (have_estimators && !result.replications.empty()) {
      const ReplicationRecord& rep0 = result.replications.front();
      for (int k = 0; k <= last_k; ++k) {
        const RVector& z = rep0.trajectory.measurements[k];
        for (int l = 0; l < z.size(); ++l) {
          out << k << ',' << (l + 1) << ',' << format_g17(z(l)) << '\n';
        }
      }
    }
  }

  {
    std::ofstream out = open_report(out_dir, "replications.csv");
    out << "rep,k,bus,estimator,re,im\n";
    if (have_estimators) {
      for (int r = 0; r < static_cast<int>(result.replications.size()); ++r) {
        const ReplicationRecord& record = result.replications[r];
        for (int k = 0; k <= last_k; ++k) {
          for (int bus = 0; bus < cfg.grid.bus_count; ++bus) {
            Complex v = record.trajectory.states[k](bus);
            out << r << ',' << k << ',' << (bus + 1) << ",truth," << format_g17(v.real()) << ','
                << format_g17(v.imag()) << '\n';
          }
        }
        for (int k = first_k; k <= last_k; ++k) {
          for (int bus = 0; bus < cfg.grid.bus_count; ++bus) {
            for (const std::string& name : cfg.estimators) {
              Complex est = record.estimates.at(name)[k - first_k](bus);
              out << r << ',' << k << ',' << (bus + 1) << ',' << name << ','
                  << format_g17(est.real()) << ',' << format_g17(est.imag()) << '\n';
            }
          }
        }
      }
    }
  }
}

}  // namespace psse
