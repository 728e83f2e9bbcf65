#include "ifit/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "ifit/config.hpp"
#include "ifit/expr.hpp"
#include "ifit/format.hpp"
#include "ifit/parallel.hpp"
#include "ifit/solver.hpp"
#include "ifit/systems.hpp"

namespace ifit::cli {

namespace {

namespace fs = std::filesystem;

// Files produced by a command, written together once everything succeeded.
using Artifacts = std::map<std::string, std::string>;

void write_artifacts(const fs::path& dir, const Artifacts& files) {
  fs::create_directories(dir);
  for (const auto& [name, content] : files) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / name).string());
    os << content;
  }
}

std::string box_text(const Rect& r) {
  std::string s;
  for (std::size_t k = 0; k < r.dim(); ++k) {
    if (k) s += " x ";
    s += "[" + format_double(r.lo(k)) + ", " + format_double(r.hi(k)) + "]";
  }
  return s;
}

std::string list_text(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

std::vector<std::string> all_variables(const RunConfig& cfg) {
  std::vector<std::string> vars = cfg.independent;
  vars.insert(vars.end(), cfg.dependent.begin(), cfg.dependent.end());
  return vars;
}

FitOptions effective_options(const RunConfig& cfg, const Options& opt, unsigned threads) {
  FitOptions o = cfg.options;
  o.threads = threads;
  if (opt.seed) o.seed = *opt.seed;
  if (opt.force) o.clamp = true;
  return o;
}

fs::path output_dir(const RunConfig& cfg, const Options& opt) {
  if (opt.out_dir) return *opt.out_dir;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  return fs::path("out") / cfg.label;
}

ImplicitProblem single_problem(const RunConfig& cfg, const FitOptions& o) {
  const Expr f = Expr::parse(cfg.equations.front(), all_variables(cfg));
  return make_problem(f.field(), cfg.R, cfg.I.side(0), cfg.center, o, cfg.label);
}

SystemProblem system_problem(const RunConfig& cfg, const FitOptions& o) {
  SystemProblem p;
  const auto vars = all_variables(cfg);
  for (std::size_t i = 0; i < cfg.equations.size(); ++i) {
    p.equations.push_back(Expr::parse(cfg.equations[i], vars).field());
    p.labels.push_back("f" + std::to_string(i + 1));
  }
  p.R = cfg.R;
  p.I = cfg.I;
  p.order = cfg.order;
  p.stages = cfg.stages;
  p.options = o;
  return p;
}

std::vector<FitReport> fit_single(const ImplicitProblem& p, const RunConfig& cfg) {
  switch (cfg.mode) {
    case Mode::Polynomial: return {fit_polynomial(p, cfg.N)};
    case Mode::Analytic: return fit_analytic(p, cfg.schedule);
    case Mode::Dyadic: return {fit_dyadic(p, cfg.depth)};
    case Mode::System: break;
  }
  throw Error("system configs are not single-equation fits");
}

std::string header(const RunConfig& cfg) {
  std::ostringstream os;
  os << "label = " << cfg.label << "\n";
  os << "mode = " << to_string(cfg.mode) << "\n";
  os << "independent = " << list_text(cfg.independent) << "\n";
  os << "dependent = " << list_text(cfg.dependent) << "\n";
  for (std::size_t i = 0; i < cfg.equations.size(); ++i) os << "equation_" << (i + 1) << " = " << cfg.equations[i] << "\n";
  os << "R = " << box_text(cfg.R) << "\n";
  os << "I = " << box_text(cfg.I) << "\n";
  return os.str();
}

std::string jump_text(const JumpReport& j) {
  std::ostringstream os;
  os << "sections_checked = " << j.samples_checked << "\n";
  os << "violations = " << j.violations.size() << "\n";
  for (const auto& v : j.violations) os << "violation x = (" << join(v.x) << ") sign_changes = " << v.sign_changes << "\n";
  return os.str();
}

std::string coefficient_csv(const CoeffTensor& c) {
  std::ostringstream os;
  write_csv(os, c);
  return os.str();
}

int run_single(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  const FitOptions o = effective_options(cfg, opt, opt.threads);
  const Expr f = Expr::parse(cfg.equations.front(), all_variables(cfg));
  const JumpReport jumps = verify_single_jump(f.field(), cfg.R, cfg.I.side(0), 64, 512, o.seed, o.threads);
  if (!jumps.clean() && !opt.force) {
    err << "verification failed: " << jumps.violations.size() << " of " << jumps.samples_checked
        << " sampled sections lack a single jump (use --force to continue)\n";
    return kVerificationFailed;
  }
  const ImplicitProblem p = single_problem(cfg, o);
  const auto fits = fit_single(p, cfg);
  const FitReport& last = fits.back();

  Artifacts files;
  files["coefficients.csv"] = coefficient_csv(last.coeffs);
  if (fits.size() > 1)
    for (const auto& r : fits) files["coefficients_N" + std::to_string(r.N[0]) + ".csv"] = coefficient_csv(r.coeffs);

  std::ostringstream rep;
  rep << header(cfg);
  rep << "center = (" << join(cfg.center) << ")\n";
  rep << "orientation = " << to_string(p.orientation) << "\n";
  rep << jump_text(jumps);
  for (const auto& r : fits) {
    rep << "\n[fit " << r.N.to_string() << "]\n";
    write_report(rep, r);
  }
  files["report.txt"] = rep.str();

  std::ostringstream surf;
  write_surface_csv(surf, sample_surface(p, last.coeffs, cfg.surface_points));
  files["surface.csv"] = surf.str();

  const fs::path dir = output_dir(cfg, opt);
  write_artifacts(dir, files);
  out << cfg.label << ": " << to_string(cfg.mode) << " fit " << last.N.to_string()
      << " residual_max = " << format_double(last.residual_max)
      << " block_mismatch_max = " << format_double(last.block_mismatch_max) << "\n";
  out << "wrote " << files.size() << " files to " << dir.string() << "\n";
  return kSuccess;
}

std::string exponent_text(const std::vector<std::size_t>& idx) {
  std::string s;
  for (std::size_t k = 0; k < idx.size(); ++k) s += (k ? ";" : "") + std::to_string(idx[k]);
  return s;
}

int run_system(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  const FitOptions o = effective_options(cfg, opt, opt.threads);
  SystemProblem p = system_problem(cfg, o);
  std::vector<int> order;
  if (p.order) {
    order = *p.order;
  } else {
    try {
      order = choose_order(p);
    } catch (const NoValidOrder& e) {
      err << "verification failed: " << e.what() << "\n";
      return kVerificationFailed;
    }
  }
  EliminationChain chain;
  try {
    chain = eliminate(p, order, opt.force);
  } catch (const VerificationError& e) {
    err << "verification failed: " << e.what() << " (use --force to continue)\n";
    return kVerificationFailed;
  }
  const int points = cfg.surface_points > 0 ? cfg.surface_points : default_validation_points(p.n());
  const SystemResidual res = system_residual(p, chain, points);

  Artifacts files;
  std::ostringstream combined;
  combined << "stage,exponents,coefficient\n";
  for (std::size_t i = 0; i < chain.stages.size(); ++i) {
    const CoeffTensor& c = chain.stages[i].surrogate;
    files["stage" + std::to_string(i + 1) + "_coefficients.csv"] = coefficient_csv(c);
    const auto& shape = c.coeffs.shape();
    std::vector<std::size_t> idx(shape.size());
    for (std::size_t j = 0; j < c.coeffs.size(); ++j) {
      std::size_t rem = j;
      for (std::size_t k = shape.size(); k-- > 0;) {
        idx[k] = rem % shape[k];
        rem /= shape[k];
      }
      combined << (i + 1) << "," << exponent_text(idx) << "," << format_double(c.coeffs[j]) << "\n";
    }
  }
  files["coefficients.csv"] = combined.str();
  std::ostringstream manifest;
  write_manifest(manifest, chain);
  files["manifest.txt"] = manifest.str();

  std::ostringstream rep;
  rep << header(cfg);
  rep << "order =";
  for (std::size_t i = 0; i < order.size(); ++i) rep << (i ? ", " : " ") << (order[i] + 1);
  rep << "\n";
  for (std::size_t e = 0; e < res.max_abs.size(); ++e)
    rep << "system_residual_f" << (e + 1) << " = " << format_double(res.max_abs[e]) << "\n";
  rep << "validation_points = " << res.points << "\n";
  rep << "out_of_range_points = " << res.out_of_range << "\n";
  for (std::size_t i = 0; i < chain.stages.size(); ++i) {
    const Stage& st = chain.stages[i];
    rep << "\n[stage " << (i + 1) << "]\n";
    rep << "equation = " << (st.equation + 1) << "\n";
    rep << "domain = " << box_text(st.domain) << "\n";
    rep << "orientation_checked_sections = " << st.verification.samples_checked << "\n";
    rep << "jump_violations = " << st.verification.violations.size() << "\n";
    write_report(rep, st.report);
  }
  files["report.txt"] = rep.str();

  std::ostringstream surf;
  for (std::size_t k = 0; k < p.n(); ++k) surf << "x" << (k + 1) << ",";
  for (std::size_t k = 0; k < p.m(); ++k) surf << "y" << (k + 1) << ",";
  for (std::size_t k = 0; k < p.m(); ++k) surf << "f" << (k + 1) << (k + 1 < p.m() ? "," : "\n");
  for (const auto& x : validation_grid(p.R, points)) {
    auto full = x;
    const auto y = compose(chain, x);
    full.insert(full.end(), y.begin(), y.end());
    for (double v : full) surf << format_double(v) << ",";
    for (std::size_t e = 0; e < p.m(); ++e) surf << format_double(p.equations[e](full)) << (e + 1 < p.m() ? "," : "\n");
  }
  files["surface.csv"] = surf.str();

  const fs::path dir = output_dir(cfg, opt);
  write_artifacts(dir, files);
  out << cfg.label << ": system of " << p.m() << " equations, residuals";
  for (double r : res.max_abs) out << " " << format_double(r);
  out << "\nwrote " << files.size() << " files to " << dir.string() << "\n";
  return kSuccess;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const VerificationError& e) {
    err << "verification failed: " << e.what() << "\n";
    return kVerificationFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kHardError;
  }
}

Timings total_timings(const std::vector<FitReport>& fits) {
  Timings t;
  for (const auto& r : fits) {
    t.moments += r.timings.moments;
    t.solve += r.timings.solve;
    t.diagnostics += r.timings.diagnostics;
  }
  return t;
}

Timings timed_run(const RunConfig& cfg, const Options& opt, unsigned threads) {
  const FitOptions o = effective_options(cfg, opt, threads);
  if (cfg.mode != Mode::System) return total_timings(fit_single(single_problem(cfg, o), cfg));
  const SystemProblem p = system_problem(cfg, o);
  const auto chain = eliminate(p, p.order ? *p.order : choose_order(p), opt.force);
  std::vector<FitReport> fits;
  for (const auto& st : chain.stages) fits.push_back(st.report);
  return total_timings(fits);
}

}  // namespace

int run(const std::string& config_path, const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_config(config_path);
    return cfg.mode == Mode::System ? run_system(cfg, opt, out, err) : run_single(cfg, opt, out, err);
  });
}

int verify(const std::string& config_path, const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_config(config_path);
    const FitOptions o = effective_options(cfg, opt, opt.threads);
    out << header(cfg);
    if (cfg.mode != Mode::System) {
      const Expr f = Expr::parse(cfg.equations.front(), all_variables(cfg));
      const JumpReport j = verify_single_jump(f.field(), cfg.R, cfg.I.side(0), 64, 512, o.seed, o.threads);
      out << jump_text(j);
      out << (j.clean() ? "clean\n" : "violations found\n");
      return j.clean() ? kSuccess : kVerificationFailed;
    }
    const SystemProblem p = system_problem(cfg, o);
    std::vector<int> order;
    if (p.order) {
      order = *p.order;
    } else {
      try {
        order = choose_order(p);
      } catch (const NoValidOrder& e) {
        out << e.what() << "\nviolations found\n";
        return kVerificationFailed;
      }
    }
    out << "order =";
    for (std::size_t i = 0; i < order.size(); ++i) out << (i ? ", " : " ") << (order[i] + 1);
    out << "\n";
    const OrderCheck check = check_order(p, order);
    for (const auto& line : check.problems) out << line << "\n";
    out << (check.ok ? "clean\n" : "violations found\n");
    return check.ok ? kSuccess : kVerificationFailed;
  });
}

int bench(const std::string& config_path, const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.reps < 1) throw Error("--reps must be at least 1");
    const RunConfig cfg = load_config(config_path);
    const unsigned parallel = resolve_threads(opt.threads);
    std::ostringstream csv;
    csv << "rep,threads,serial_moments_s,serial_solve_s,serial_diagnostics_s,serial_total_s,"
           "parallel_moments_s,parallel_solve_s,parallel_diagnostics_s,parallel_total_s,speedup\n";
    for (int rep = 1; rep <= opt.reps; ++rep) {
      const Timings s = timed_run(cfg, opt, 1);
      const Timings q = timed_run(cfg, opt, parallel);
      const double st = s.moments + s.solve + s.diagnostics;
      const double qt = q.moments + q.solve + q.diagnostics;
      csv << rep << "," << parallel << "," << format_double(s.moments) << "," << format_double(s.solve) << ","
          << format_double(s.diagnostics) << "," << format_double(st) << "," << format_double(q.moments) << ","
          << format_double(q.solve) << "," << format_double(q.diagnostics) << "," << format_double(qt) << ","
          << format_double(qt > 0 ? st / qt : 1.0) << "\n";
    }
    const fs::path dir = output_dir(cfg, opt);
    write_artifacts(dir, {{"bench.csv", csv.str()}});
    out << csv.str();
    return static_cast<int>(kSuccess);
  });
}

int main(int argc, char** argv) {
  CLI::App app{"Polynomial approximation of implicit functions"};
  app.require_subcommand(1);
  Options opt;
  std::string config;
  long long threads = 0;
  unsigned long long seed = 0;
  std::string out_dir;
  int which = 0;
  auto add = [&](const char* name, const char* help, int id) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "Config file")->required();
    sub->add_option("--threads", threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--force", opt.force, "Continue past failed verification, clamping flat sections");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Sampling seed for the verifiers");
    if (id == 3) sub->add_option("--reps", opt.reps, "Repetitions")->check(CLI::PositiveNumber);
    sub->callback([&which, id] { which = id; });
    return sub;
  };
  CLI::App* run_cmd = add("run", "Fit and write coefficients, report and surface samples", 1);
  CLI::App* verify_cmd = add("verify", "Check the single-jump hypothesis on sampled sections", 2);
  CLI::App* bench_cmd = add("bench", "Time the pipeline stages, serial against parallel", 3);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kHardError;
  }
  opt.threads = static_cast<unsigned>(threads);
  if (!out_dir.empty()) opt.out_dir = out_dir;
  const CLI::App* used = which == 1 ? run_cmd : which == 2 ? verify_cmd : bench_cmd;
  if (used->count("--seed")) opt.seed = seed;
  switch (which) {
    case 1: return run(config, opt, std::cout, std::cerr);
    case 2: return verify(config, opt, std::cout, std::cerr);
    case 3: return bench(config, opt, std::cout, std::cerr);
  }
  return kHardError;
}

}  // namespace ifit::cli
