#include "bfd/config.hpp"
#include "bfd/error.hpp"
#include "bfd/snapshot.hpp"
#include "bfd/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;  // a hard verification failure
constexpr int kExitError = 2;    // bad input, I/O

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw bfd::Error(bfd::ErrorCode::Io, "cannot write " + p.string());
  os << std::setprecision(12);
  return os;
}

bfd::SimulationConfig load(const std::string& path, const std::vector<std::string>& overrides,
                           const std::string& out_dir) {
  bfd::SimulationConfig c = path.empty() ? bfd::parse_config_text("", overrides) : bfd::parse_config(path, overrides);
  if (!out_dir.empty()) c.output_dir = out_dir;
  return c;
}

void write_echo(const bfd::SimulationConfig& c) {
  fs::create_directories(c.output_dir);
  auto os = open_out(fs::path(c.output_dir) / "config.ini");
  os << "# fingerprint " << bfd::config_fingerprint(c) << '\n' << bfd::config_echo(c);
}

int cmd_run(const bfd::SimulationConfig& c) {
  write_echo(c);
  const auto traj = bfd::run_simulation(c);
  const fs::path dir(c.output_dir);
  {
    auto os = open_out(dir / "diagnostics.csv");
    bfd::write_csv_header(os);
    for (const auto& r : traj.records) bfd::write_csv_row(os, r);
  }
  {
    auto os = open_out(dir / "steps.csv");
    os << "t,dt,min_f,max_f,pre_min,pre_max,S,mass,px,py,pz,energy,defect,flags\n";
    for (const auto& s : traj.steps) {
      os << s.t << ',' << s.dt << ',' << s.min_f << ',' << s.max_f << ',' << s.pre_min << ',' << s.pre_max << ','
         << s.S;
      for (int k = 0; k < 5; ++k) os << ',' << s.invariants[k];
      os << ',' << s.defect << ',' << bfd::flags_to_string(s.flags) << '\n';
    }
  }
  if (c.write_snapshots) {
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%05zu.bin", i);
      bfd::write_snapshot((dir / name).string(), {traj.snapshots[i], c.kernel.gamma, traj.times[i]});
    }
  }
  const auto& last = traj.records.back();
  std::cout << "t_end = " << last.t << "\nsteps = " << traj.steps.size() - 1 << "\nrecords = " << traj.records.size()
            << "\nS = " << last.S << "\nmin_f = " << last.min_f << "\nmax_f = " << last.max_f
            << "\noutput = " << c.output_dir << '\n';
  return 0;
}

int cmd_equilibrium(double rho, double T, const std::vector<double>& u) {
  const bfd::Vec3d uv = u.size() == 3 ? bfd::Vec3d(u[0], u[1], u[2]) : bfd::Vec3d::Zero();
  const double TF = bfd::fermi_temperature(rho);
  std::cout << std::setprecision(12) << "rho = " << rho << "\nT = " << T << "\nT_F = " << TF
            << "\nr_F = " << bfd::fermi_radius(rho) << '\n';
  try {
    const auto p = bfd::solve_fd_params(rho, T, uv);
    std::cout << "a = " << p.a << "\nc = " << p.c << "\nregime = fermi-dirac\n";
  } catch (const bfd::Error& e) {
    if (e.code() != bfd::ErrorCode::SaturationRegime) throw;
    std::cout << "regime = saturated\n";
  }
  return 0;
}

int cmd_verify(const bfd::SimulationConfig& c, const std::string& suite) {
  write_echo(c);
  const auto rep = bfd::run_suite(suite, c);
  const fs::path dir(c.output_dir);
  {
    auto os = open_out(dir / "verify_report.txt");
    rep.write_kv(os);
  }
  {
    auto os = open_out(dir / "verify_report.csv");
    rep.write_csv(os);
  }
  for (const auto& ch : rep.checks) {
    const char* tag = ch.skipped ? "SKIP" : ch.pass ? "PASS" : ch.informative ? "INFO" : "FAIL";
    std::cout << tag << ' ' << ch.name << ' ' << std::setprecision(6) << ch.measured << ' ' << ch.relation << ' '
              << ch.threshold << '\n';
  }
  std::cout << "verdict = " << (rep.passed() ? "pass" : "fail") << '\n';
  std::cerr << "runtime_seconds = " << rep.runtime_seconds << '\n';
  return rep.passed() ? 0 : kExitFailure;
}

int cmd_compare(const std::string& a, const std::string& b) {
  const auto fa = bfd::read_snapshot(a);
  const auto fb = bfd::read_snapshot(b);
  std::cout << std::setprecision(15) << "distance_l12 = " << bfd::l12_distance(fa.field, fb.field) << '\n';
  return 0;
}

int cmd_moments(const std::string& path, const std::vector<double>& orders) {
  const auto snap = bfd::read_snapshot(path);
  const auto& f = snap.field;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::cout << std::setprecision(12) << "t = " << snap.time << "\nn = " << f.grid.n() << "\nradius = " << f.grid.radius()
            << '\n';
  for (double s : orders) std::cout << "m_" << s << " = " << bfd::moment(f, s) << '\n';
  std::cout << "norm_1_2 = " << bfd::weighted_norm(f, 1.0, 2.0) << "\nnorm_2_0 = " << bfd::weighted_norm(f, 2.0, 0.0)
            << "\nnorm_inf_0 = " << bfd::weighted_norm(f, inf, 0.0) << "\nentropy = " << bfd::entropy(f)
            << "\nmin_f = " << f.values.minCoeff() << "\nmax_f = " << f.values.maxCoeff() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatially homogeneous Boltzmann-Fermi-Dirac solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir, suite = "all";
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "INI configuration file");
    sub->add_option("-s,--set", overrides, "override, section.key=value (repeatable)");
    sub->add_option("-o,--output", out_dir, "output directory (overrides output.dir)");
  };

  auto* run = app.add_subcommand("run", "integrate and write snapshots, diagnostics and the config echo");
  add_config(run);

  double rho = 1.0, T = 1.0;
  std::vector<double> u;
  auto* eq = app.add_subcommand("equilibrium", "Fermi-Dirac parameters for a density and temperature");
  eq->add_option("--rho", rho, "density")->required();
  eq->add_option("--T", T, "temperature")->required();
  eq->add_option("--u", u, "bulk velocity")->expected(3);

  auto* ver = app.add_subcommand("verify", "run a verification suite and write reports");
  add_config(ver);
  ver->add_option("suite", suite, "suite name or 'all'");

  std::string snap_a, snap_b;
  auto* cmp = app.add_subcommand("compare", "weighted L1 distance of two snapshots");
  cmp->add_option("a", snap_a)->required();
  cmp->add_option("b", snap_b)->required();

  std::vector<double> orders = {0, 2, 4, 6};
  auto* mom = app.add_subcommand("moments", "moments and norms of one snapshot");
  mom->add_option("snapshot", snap_a)->required();
  mom->add_option("--orders", orders, "moment orders");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitError;
  }

  try {
    if (run->parsed()) return cmd_run(load(config_path, overrides, out_dir));
    if (eq->parsed()) return cmd_equilibrium(rho, T, u);
    if (ver->parsed()) return cmd_verify(load(config_path, overrides, out_dir), suite);
    if (cmp->parsed()) return cmd_compare(snap_a, snap_b);
    if (mom->parsed()) return cmd_moments(snap_a, orders);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
