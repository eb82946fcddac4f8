#include <cmath>
#include <cstdio>
#include <set>

#include "apspic/experiments.hpp"
#include "output_util.hpp"

namespace apspic {

namespace {

void write_row(std::ostream& out, const TimeSeriesRow& r) {
  out << r.step << ',' << format_double(r.t) << ',' << format_double(r.Q) << ',' << format_double(r.H) << ','
      << r.removed << ',' << format_double(r.mode_amplitude.value_or(std::nan(""))) << ','
      << detail::csv_field(r.mode_status) << ',' << format_double(r.exterior_fraction) << ','
      << format_double(r.poisson_residual) << '\n';
}

std::string snapshot_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rho_%06zu.bin", step);
  return buf;
}

}  // namespace

DiocotronResult run_diocotron(const DiocotronConfig& cfg, const std::filesystem::path& out_dir, int workers) {
  cfg.validate();
  const bool write = !out_dir.empty();
  const Grid2D grid = cfg.grid();
  const ScaleParams<double> params(cfg.eps, cfg.tau, cfg.sigma, cfg.dt);
  const PicSetup setup(grid, cfg.poisson, params, MagneticProfile<double>::uniform(cfg.b0), cfg.scheme, workers);

  Ensemble e = sample_initial(cfg.init, cfg.n_particles, cfg.seed, workers);
  if (cfg.charge_scale != 1.0) {
    for (Particle& p : e.particles) p.weight *= cfg.charge_scale;
    e.total_weight0 *= cfg.charge_scale;
  }

  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
  std::set<std::size_t> snap_steps;
  for (double ts : cfg.snapshot_times) snap_steps.insert(static_cast<std::size_t>(std::llround(ts / cfg.dt)));
  const RadiusBand band{cfg.init.r_minus, cfg.init.r_plus};

  DiocotronResult res;
  res.initial_charge = total_charge(e);
  std::ofstream csv;
  if (write) {
    csv = detail::open_output(out_dir / "timeseries.csv");
    csv << "step,t,Q,H,removed,A_l,a_status,exterior_fraction,poisson_residual\n";
  }
  auto file_names = [&] {
    nlohmann::json files = nlohmann::json::array({"timeseries.csv"});
    for (const auto& p : res.snapshots) {
      files.push_back(p.filename().string());
      files.push_back(std::filesystem::path(p).replace_extension(".json").filename().string());
    }
    return files;
  };

  for (std::size_t n = 0; n <= n_steps; ++n) {
    StepReport rep;
    try {
      rep = pic_observe(e, setup);
    } catch (const SolverError& err) {
      if (write) {
        csv.flush();
        detail::write_manifest(out_dir, to_json(cfg), "failed",
                               {{"threads", workers},
                                {"completed_steps", n},
                                {"error", err.what()},
                                {"residual", err.residual()},
                                {"files", file_names()}});
      }
      throw;
    }

    TimeSeriesRow row;
    row.step = n;
    row.t = static_cast<double>(n) * cfg.dt;
    row.Q = rep.alive_charge;
    row.H = total_energy(e, *rep.E);
    row.removed = rep.removed.count;
    try {
      row.mode_amplitude = mode_amplitude(*rep.rho, cfg.init.l_modes, band);
    } catch (const DiagnosticError& err) {
      row.mode_status = std::string("error: ") + err.what();
    }
    row.exterior_fraction = exterior_charge_fraction(e, band);
    row.poisson_residual = rep.poisson_residual;
    if (write) write_row(csv, row);
    res.series.push_back(row);

    if (write && snap_steps.count(n)) {
      const auto path = out_dir / snapshot_name(n);
      write_snapshot(*rep.rho, row.t, n, path);
      res.snapshots.push_back(path);
    }
    if (n < n_steps) push_particles(e, setup, *rep.E);
  }

  if (write) {
    csv.close();
    detail::write_manifest(out_dir, to_json(cfg), "ok",
                           {{"threads", workers},
                            {"completed_steps", n_steps},
                            {"initial_charge", res.initial_charge},
                            {"files", file_names()}});
  }
  return res;
}

}  // namespace apspic
