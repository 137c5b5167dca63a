#include "cfmimo/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace cfm {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += fmt(v[i]);
  }
  return s;
}

Vec split_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) out.push_back(std::stod(item));
  return Eigen::Map<const Vec>(out.data(), static_cast<Eigen::Index>(out.size()));
}

int stage_rank(const std::string& stage) {
  if (stage == "init") return 0;
  if (stage == "after-power") return 1;
  if (stage == "after-position") return 2;
  if (stage == "after-bits") return 3;
  if (stage == "converged") return 4;
  return 5;
}

}  // namespace

std::uint64_t realization_seed(std::uint64_t base_seed, int realization) {
  // splitmix64 finalizer over the (seed, realization) pair.
  std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(realization) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<RunRecord> run_realization(const ExperimentConfig& config, double sweep_value,
                                       int realization) {
  ExperimentConfig c = config;
  if (!config.sweep_param.empty()) apply_sweep_value(c, config.sweep_param, sweep_value);
  if (c.antenna_mode == AntennaMode::Fixed) {
    c.scenario.region_side_m = 0.0;  // antenna pinned at the region center
  }

  const Scenario sc = generate_scenario(c.scenario, realization_seed(c.seed, realization));

  FasPositions positions;
  positions.u.assign(c.scenario.num_users, Vec2::Zero());

  const bool opt_bits = c.bit_mode == BitMode::Optimize;
  Vec bits = Vec::Constant(c.scenario.num_aps, opt_bits ? c.b_max : c.equal_bits);
  const ZetaMode zmode = opt_bits ? ZetaMode::Analytic : c.zeta_mode;

  LinkState state;
  state.channels = build_channels(sc.topology, sc.geometry, positions);
  state.zeta = quantization_factors(bits, zmode);
  state.eta = Vec::Ones(c.scenario.num_users);
  state.p_u = c.p_u_w;
  state.noise_w = c.noise_w;
  state.combiners = mmse_combiners(state.channels, state.zeta, state.eta, state.p_u, state.noise_w);

  AoOptions opt;
  opt.optimize_power = c.power_mode == PowerMode::Fp;
  opt.optimize_positions = c.antenna_mode == AntennaMode::Fas && c.scenario.region_side_m > 0.0;
  opt.optimize_bits = opt_bits;
  opt.tolerance = c.tolerance;
  opt.max_outer = c.max_outer;
  opt.s_min = c.s_min;
  opt.power.tolerance = c.tolerance;
  opt.power.max_iter = c.inner_max_iter;
  opt.position.tolerance = c.tolerance;
  opt.position.max_iter = c.inner_max_iter;
  opt.position.line_search.initial_step = 0.1 * c.scenario.wavelength;
  opt.position.init_grid = 5;
  opt.position.scan_refresh = true;
  opt.bits.tolerance = c.tolerance;
  opt.bits.max_iter = c.inner_max_iter;
  opt.bits.b_min = c.b_min;
  opt.bits.b_max = c.b_max;

  const AoResult ao = ao_optimize(state, sc.topology, sc.geometry, positions, bits,
                                  c.power, opt);

  std::vector<RunRecord> records;
  auto emit = [&](const StageRecord& s, const std::string& name) {
    RunRecord r;
    r.sweep_value = sweep_value;
    r.realization = realization;
    r.stage = name;
    r.outer_iter = s.outer_iter;
    r.sum_se = s.sum_se;
    r.p_tot = s.p_tot;
    r.ee = s.ee;
    r.eta = s.eta;
    r.u_x.resize(static_cast<Eigen::Index>(s.u.size()));
    r.u_y.resize(static_cast<Eigen::Index>(s.u.size()));
    for (std::size_t k = 0; k < s.u.size(); ++k) {
      r.u_x[static_cast<Eigen::Index>(k)] = s.u[k].x();
      r.u_y[static_cast<Eigen::Index>(k)] = s.u[k].y();
    }
    r.bits = s.bits;
    records.push_back(std::move(r));
  };
  for (const StageRecord& s : ao.stages) {
    if (s.stage == "init")
      emit(s, "init");
    else if (s.stage == "power")
      emit(s, "after-power");
    else if (s.stage == "position")
      emit(s, "after-position");
    else if (s.stage == "bits")
      emit(s, "after-bits");
    // combiner refresh folds into the converged row
  }
  StageRecord fin = ao.stages.back();
  fin.outer_iter = ao.iterations;
  fin.sum_se = ao.sum_se;
  fin.ee = ao.ee;
  fin.p_tot =
      total_power(c.power, state.eta, state.p_u, bits, state.antennas(), ao.sum_se);
  fin.eta = state.eta;
  fin.u = positions.u;
  fin.bits = bits;
  emit(fin, "converged");
  return records;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  std::vector<double> values = config.sweep_values;
  if (config.sweep_param.empty() || values.empty()) values = {0.0};

  struct Job {
    double value;
    int realization;
  };
  std::vector<Job> jobs;
  for (double v : values)
    for (int r = 0; r < config.realizations; ++r) jobs.push_back({v, r});

  std::vector<std::vector<RunRecord>> slots(jobs.size());
  std::atomic<std::size_t> next{0};
  unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));

  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      try {
        slots[i] = run_realization(config, jobs[i].value, jobs[i].realization);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "realization %d (sweep %.17g) failed: %s\n", jobs[i].realization,
                     jobs[i].value, e.what());
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SweepResult result;
  for (auto& s : slots)
    for (auto& r : s) result.records.push_back(std::move(r));
  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const RunRecord& a, const RunRecord& b) {
                     if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
                     if (a.realization != b.realization) return a.realization < b.realization;
                     const int ra = stage_rank(a.stage), rb = stage_rank(b.stage);
                     if (a.outer_iter != b.outer_iter) return a.outer_iter < b.outer_iter;
                     return ra < rb;
                   });
  return result;
}

void write_records_csv(const std::vector<RunRecord>& records, std::ostream& out) {
  out << "sweep_value,realization,stage,outer_iter,sum_se_bps_hz,p_tot_w,ee_bit_per_joule,"
         "eta,u_x,u_y,bits\n";
  for (const RunRecord& r : records) {
    out << fmt(r.sweep_value) << ',' << r.realization << ',' << r.stage << ',' << r.outer_iter
        << ',' << fmt(r.sum_se) << ',' << fmt(r.p_tot) << ',' << fmt(r.ee) << ',' << join(r.eta)
        << ',' << join(r.u_x) << ',' << join(r.u_y) << ',' << join(r.bits) << '\n';
  }
}

std::vector<RunRecord> parse_records(std::istream& in) {
  std::vector<RunRecord> records;
  std::string line;
  if (!std::getline(in, line)) return records;  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 11) throw IoError("malformed record row: " + line);
    RunRecord r;
    r.sweep_value = std::stod(fields[0]);
    r.realization = std::stoi(fields[1]);
    r.stage = fields[2];
    r.outer_iter = std::stoi(fields[3]);
    r.sum_se = std::stod(fields[4]);
    r.p_tot = std::stod(fields[5]);
    r.ee = std::stod(fields[6]);
    r.eta = split_list(fields[7]);
    r.u_x = split_list(fields[8]);
    r.u_y = split_list(fields[9]);
    r.bits = split_list(fields[10]);
    records.push_back(std::move(r));
  }
  return records;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string s = canonical_string(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void emit_report(const SweepResult& result, const ExperimentConfig& config,
                 const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  const fs::path dir(out_dir);
  {
    std::ofstream out(dir / "records.csv", std::ios::binary);
    if (!out) throw IoError("cannot write records.csv in " + out_dir);
    write_records_csv(result.records, out);
    if (!out) throw IoError("write failure on records.csv");
  }
  {
    // Mean converged SE/EE per sweep value, plot-ready.
    struct Acc {
      double se = 0.0, ee = 0.0;
      int n = 0;
    };
    std::map<double, Acc> groups;
    for (const RunRecord& r : result.records) {
      if (r.stage != "converged") continue;
      Acc& a = groups[r.sweep_value];
      a.se += r.sum_se;
      a.ee += r.ee;
      a.n += 1;
    }
    std::ofstream out(dir / "summary.csv", std::ios::binary);
    if (!out) throw IoError("cannot write summary.csv in " + out_dir);
    out << "sweep_value,realizations,mean_sum_se_bps_hz,mean_ee_bit_per_joule\n";
    for (const auto& [value, a] : groups)
      out << fmt(value) << ',' << a.n << ',' << fmt(a.se / a.n) << ',' << fmt(a.ee / a.n) << '\n';
  }
  {
    std::ofstream out(dir / "manifest.txt", std::ios::binary);
    if (!out) throw IoError("cannot write manifest.txt in " + out_dir);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(config)));
    out << "config_hash=" << buf << '\n';
    out << "seed=" << config.seed << '\n';
    out << "code_version=cfmimo-0.1.0\n";
  }
}

}  // namespace cfm
