#include <cmath>

#include "apspic/experiments.hpp"
#include "apspic/noise.hpp"
#include "apspic/parallel.hpp"
#include "apspic/pushers.hpp"
#include "output_util.hpp"

namespace apspic {

const SlopeRow* BenchmarkResult::slope(const std::string& axis, double fixed, int component) const {
  for (const SlopeRow& s : slopes)
    if (s.axis == axis && s.fixed == fixed && s.component == component) return &s;
  return nullptr;
}

namespace {

const auto kBenchmarkE = [](const Vec2d& x) -> Vec2d { return -x; };

std::size_t step_count(double T, double dt) { return static_cast<std::size_t>(std::llround(T / dt)); }

PhaseState<double> scheme_step(Scheme scheme, const PhaseState<double>& s, const MagneticProfile<double>& b,
                               const ScaleParams<double>& p, const Vec2d& xi) {
  const NoiseDraw<double> noise{xi};
  return scheme == Scheme::apsi1 ? apsi1_step(s, kBenchmarkE, b, p, noise) : apsi2_step(s, kBenchmarkE, b, p, noise);
}

Vec2d initial_velocity(const BenchmarkConfig& cfg, double eps) {
  return cfg.v0_mode == V0Mode::fixed ? cfg.v0 : Vec2d(eps * cfg.v0);
}

Vec2d guiding_center(const BenchmarkConfig& cfg, double eps, double dt) {
  const auto b = MagneticProfile<double>::benchmark();
  const std::size_t n = step_count(cfg.T, dt);
  GCState<double> g{cfg.x0};
  for (std::size_t k = 0; k < n; ++k) {
    switch (cfg.gc_model) {
      case GcModel::r0_euler:
        g = gc_euler_step(g, kBenchmarkE, b.b0(), dt);
        break;
      case GcModel::r0_si2:
        g = gc_si2_step(g, kBenchmarkE, b.b0(), dt);
        break;
      case GcModel::r_euler:
        g = gcR_euler_step(g, kBenchmarkE, b, eps, cfg.tau, dt);
        break;
    }
  }
  return g.u;
}

struct PathEnd {
  Vec2d x = Vec2d::Zero();
  double max_abs_xi = 0;
};

// Terminal positions of paths [0, n_paths) for one (eps, dt); the Brownian
// increments depend only on (seed, path, step), so every eps sees the same path.
std::vector<PathEnd> run_paths(const BenchmarkConfig& cfg, double eps, double dt, int n_paths, int workers) {
  const ScaleParams<double> p(eps, cfg.tau, cfg.sigma, dt);
  const auto b = MagneticProfile<double>::benchmark();
  const NoiseStream noise(cfg.seed, StreamTag::path_noise);
  const std::size_t n = step_count(cfg.T, dt);
  std::vector<PathEnd> ends(static_cast<std::size_t>(n_paths));
  parallel_chunks(ends.size(), workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t path = begin; path < end; ++path) {
      PhaseState<double> s{cfg.x0, initial_velocity(cfg, eps)};
      double m = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const Vec2d xi = noise.gaussian_pair(path, k);
        m = std::max(m, xi.cwiseAbs().maxCoeff());
        s = scheme_step(cfg.scheme, s, b, p, xi);
      }
      ends[path] = {s.x, m};
    }
  });
  return ends;
}

std::vector<ErrorRow> trajectory_or_expectation(const BenchmarkConfig& cfg, int workers) {
  std::vector<ErrorRow> rows;
  const int paths = cfg.study == Study::trajectory ? 1 : cfg.n_paths;
  for (double dt : cfg.dt_list) {
    for (double eps : cfg.eps_list) {
      const Vec2d u = guiding_center(cfg, eps, dt);
      const auto ends = run_paths(cfg, eps, dt, paths, workers);
      ErrorRow row;
      row.eps = eps;
      row.dt = dt;
      row.n_paths = paths;
      PathBundle bundle;
      for (const PathEnd& e : ends) bundle.add(e.x, e.max_abs_xi);
      row.max_abs_xi = bundle.max_abs_xi();
      if (paths < 2) {
        row.error = traj_error(ends.front().x, u);
      } else {
        const ExpectationError err = expectation_error(bundle, u);
        row.error = err.error;
        row.standard_error = err.standard_error;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

// Coupled-noise weak error: every level and the fine APSI2 reference are
// driven by the same fine Gaussian increments, summed and rescaled per level.
std::vector<ErrorRow> weak_order(const BenchmarkConfig& cfg, int workers) {
  const double dt_min = *std::min_element(cfg.dt_list.begin(), cfg.dt_list.end());
  const std::size_t n_ref = step_count(cfg.T, dt_min) * static_cast<std::size_t>(cfg.reference_refinement);
  const double dt_ref = cfg.T / static_cast<double>(n_ref);
  const auto b = MagneticProfile<double>::benchmark();
  const NoiseStream noise(cfg.seed, StreamTag::path_noise);
  const std::size_t levels = cfg.dt_list.size();
  const auto n_paths = static_cast<std::size_t>(cfg.n_paths);

  std::vector<ErrorRow> rows;
  for (double eps : cfg.eps_list) {
    const ScaleParams<double> p_ref(eps, cfg.tau, cfg.sigma, dt_ref);
    std::vector<ScaleParams<double>> p_lvl;
    std::vector<std::size_t> ratio;
    for (double dt : cfg.dt_list) {
      const std::size_t n = step_count(cfg.T, dt);
      p_lvl.emplace_back(eps, cfg.tau, cfg.sigma, cfg.T / static_cast<double>(n));
      ratio.push_back(n_ref / n);
    }
    // diffs[path * levels + l] = x_level - x_ref
    std::vector<Vec2d> diffs(n_paths * levels);
    std::vector<double> max_xi(n_paths, 0.0);
    parallel_chunks(n_paths, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
      std::vector<Vec2d> fine(n_ref);
      for (std::size_t path = begin; path < end; ++path) {
        for (std::size_t k = 0; k < n_ref; ++k) {
          fine[k] = noise.gaussian_pair(path, k);
          max_xi[path] = std::max(max_xi[path], fine[k].cwiseAbs().maxCoeff());
        }
        PhaseState<double> ref{cfg.x0, initial_velocity(cfg, eps)};
        for (std::size_t k = 0; k < n_ref; ++k) ref = scheme_step(Scheme::apsi2, ref, b, p_ref, fine[k]);
        for (std::size_t l = 0; l < levels; ++l) {
          const std::size_t r = ratio[l];
          const double scale = 1.0 / std::sqrt(static_cast<double>(r));
          PhaseState<double> s{cfg.x0, initial_velocity(cfg, eps)};
          for (std::size_t k0 = 0; k0 < n_ref; k0 += r) {
            Vec2d xi = Vec2d::Zero();
            for (std::size_t k = k0; k < k0 + r; ++k) xi += fine[k];
            s = scheme_step(cfg.scheme, s, b, p_lvl[l], scale * xi);
          }
          diffs[path * levels + l] = s.x - ref.x;
        }
      }
    });
    for (std::size_t l = 0; l < levels; ++l) {
      PathBundle bundle;
      for (std::size_t path = 0; path < n_paths; ++path) bundle.add(diffs[path * levels + l], max_xi[path]);
      ErrorRow row;
      row.eps = eps;
      row.dt = cfg.dt_list[l];
      row.n_paths = cfg.n_paths;
      row.error = bundle.mean().cwiseAbs();
      row.standard_error = bundle.standard_error();
      row.max_abs_xi = bundle.max_abs_xi();
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<SlopeRow> fit_slopes(const BenchmarkConfig& cfg, const std::vector<ErrorRow>& rows) {
  std::vector<SlopeRow> out;
  auto fit = [&](const std::string& axis, double fixed, auto&& select, auto&& abscissa) {
    for (int c = 1; c <= 2; ++c) {
      ErrorSeries series;
      for (const ErrorRow& r : rows) {
        if (!select(r)) continue;
        series.abscissae.push_back(abscissa(r));
        series.errors.push_back(r.error[c - 1]);
        series.standard_errors.push_back(r.standard_error[c - 1]);
      }
      SlopeRow s{axis, fixed, c, std::nullopt, "ok"};
      try {
        s.fit = convergence_slope(series);
      } catch (const DiagnosticError& e) {
        s.status = e.what();
      }
      out.push_back(std::move(s));
    }
  };
  if (cfg.study != Study::weak_order && cfg.eps_list.size() > 1)
    for (double dt : cfg.dt_list)
      fit("eps", dt, [dt](const ErrorRow& r) { return r.dt == dt; }, [](const ErrorRow& r) { return r.eps; });
  if (cfg.dt_list.size() > 1)
    for (double eps : cfg.eps_list)
      fit("dt", eps, [eps](const ErrorRow& r) { return r.eps == eps; }, [](const ErrorRow& r) { return r.dt; });
  return out;
}

void write_benchmark(const BenchmarkConfig& cfg, const BenchmarkResult& res, const std::filesystem::path& dir,
                     int workers) {
  {
    auto out = detail::open_output(dir / "errors.csv");
    out << "study,scheme,eps,dt,n_paths,error1,error2,stderr1,stderr2,m_xi\n";
    for (const ErrorRow& r : res.rows)
      out << to_string(cfg.study) << ',' << to_string(cfg.scheme) << ',' << format_double(r.eps) << ','
          << format_double(r.dt) << ',' << r.n_paths << ',' << format_double(r.error[0]) << ','
          << format_double(r.error[1]) << ',' << format_double(r.standard_error[0]) << ','
          << format_double(r.standard_error[1]) << ',' << format_double(r.max_abs_xi) << '\n';
  }
  {
    auto out = detail::open_output(dir / "slopes.csv");
    out << "axis,fixed_eps,fixed_dt,component,slope,ci_low,ci_high,n_used,excluded,status\n";
    for (const SlopeRow& s : res.slopes) {
      const bool by_eps = s.axis == "eps";
      out << s.axis << ',' << (by_eps ? "" : format_double(s.fixed)) << ',' << (by_eps ? format_double(s.fixed) : "")
          << ',' << s.component << ',';
      if (s.fit) {
        std::string excluded;
        for (std::size_t k : s.fit->excluded) excluded += (excluded.empty() ? "" : ";") + std::to_string(k);
        out << format_double(s.fit->slope) << ',' << format_double(s.fit->ci_low) << ','
            << format_double(s.fit->ci_high) << ',' << s.fit->used.size() << ',' << excluded << ',';
      } else {
        out << "nan,nan,nan,0,,";
      }
      out << detail::csv_field(s.status) << '\n';
    }
  }
  detail::write_manifest(dir, to_json(cfg), "ok",
                         {{"threads", workers}, {"files", {"errors.csv", "slopes.csv"}}});
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg, const std::filesystem::path& out_dir, int workers) {
  cfg.validate();
  BenchmarkResult res;
  res.rows = cfg.study == Study::weak_order ? weak_order(cfg, workers) : trajectory_or_expectation(cfg, workers);
  res.slopes = fit_slopes(cfg, res.rows);
  if (!out_dir.empty()) write_benchmark(cfg, res, out_dir, workers);
  return res;
}

}  // namespace apspic
