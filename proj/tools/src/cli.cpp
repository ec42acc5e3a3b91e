#include "clustergas_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "clustergas/cluster_thermo.hpp"
#include "clustergas/config.hpp"
#include "clustergas/errors.hpp"
#include "clustergas/gibbs_mc.hpp"
#include "clustergas/ground_state.hpp"
#include "clustergas/io.hpp"
#include "clustergas/oracle.hpp"
#include "clustergas/parallel.hpp"
#include "clustergas/potential.hpp"
#include "clustergas/rng.hpp"
#include "clustergas/variational.hpp"

namespace clustergas::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

/// Thrown for problems the user can fix by changing the command line.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_range(text)) {
    if (v != std::floor(v)) throw UsageError("expected integers, got " + text);
    out.push_back(static_cast<int>(v));
  }
  return out;
}

/// "k:q,k:q" into a map of cluster mass fractions.
std::map<int, double> parse_q(const std::string& text) {
  std::map<int, double> out;
  if (text.empty()) return out;
  for (const auto& item : split(text, ',')) {
    const auto kv = split(item, ':');
    if (kv.size() != 2) throw UsageError("expected k:q pairs, got '" + item + "'");
    out[static_cast<int>(to_double(kv[0]))] = to_double(kv[1]);
  }
  return out;
}

struct Run {
  std::string command;
  std::vector<std::string> args;
  fs::path dir;
  std::optional<Config> config;
  json seeds = json::object();
  json extra = json::object();
  std::vector<std::string> outputs;

  void write(const std::string& name, const std::string& content) {
    write_text_file(dir / name, content);
    outputs.push_back(name);
  }

  void finish(int status) {
    json m;
    m["tool"] = "clustergas";
    m["version"] = CLUSTERGAS_VERSION;
    m["command"] = command;
    m["args"] = args;
    m["status"] = status;
    m["seeds"] = seeds;
    if (config) {
      m["config_toml"] = to_toml(*config);
      m["potential_fingerprint"] = config->potential_spec().fingerprint();
    }
    m["threads"] = max_threads();
    for (auto& [k, v] : extra.items()) m[k] = v;
    m["outputs"] = outputs;
    write_text_file(dir / "manifest.json", m.dump(2) + "\n");
  }
};

Config require_config(const std::string& path) {
  if (path.empty()) throw UsageError("--config is required");
  return load_config(path);
}

GroundStateTable require_table(const std::string& path) {
  if (path.empty()) throw UsageError("--table is required");
  return table_from_json(read_text_file(path));
}

json validation_json(const ValidationReport& rep) {
  json j;
  j["structural_ok"] = rep.structural_ok();
  j["blow_up_suspected"] = rep.blow_up_suspected;
  j["stability_lower_bound"] =
      rep.stability_lower_bound ? json(*rep.stability_lower_bound) : json(nullptr);
  auto& checks = j["checks"] = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"witness", c.witness}, {"detail", c.detail}});
  auto& ev = j["stability_evidence"] = json::array();
  for (const auto& p : rep.stability_evidence)
    ev.push_back({{"n", p.n}, {"energy_per_particle", p.energy_per_particle}});
  return j;
}

void write_summary_csv(std::ostream& os, const GroundStateTable& t) {
  os << "k,energy,energy_per_particle,r_min,diameter,multistarts,converged\n";
  for (const auto& e : t.entries)
    os << e.k << ',' << fmt_double(e.energy) << ',' << fmt_double(e.energy / e.k) << ','
       << fmt_double(e.r_min) << ',' << fmt_double(e.diameter) << ',' << e.multistart_count << ','
       << (e.converged ? 1 : 0) << '\n';
}

}  // namespace

std::vector<double> parse_range(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError("range must be start:stop:count, got '" + text + "'");
    const double a = to_double(parts[0]), b = to_double(parts[1]);
    const double n = to_double(parts[2]);
    if (n < 1 || n != std::floor(n)) throw UsageError("range count must be a positive integer");
    const int count = static_cast<int>(n);
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = count == 1 ? a : a + (b - a) * i / (count - 1);
    return out;
  }
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(to_double(item));
  if (out.empty()) throw UsageError("empty value list");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster-size statistics of dilute low-temperature particle systems", "clustergas"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker cap (also CLUSTERGAS_THREADS)")->check(CLI::PositiveNumber);

  std::string config_path, table_path, out_dir;
  std::optional<std::uint64_t> seed_opt;
  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "Run configuration file");
    if (needs_config) c->required();
    sub->add_option("--out", out_dir, "Run directory (default runs/<subcommand>)");
    sub->add_option("--seed", seed_opt, "Base seed (default mc.seed or variational.seed)");
  };

  auto* validate = app.add_subcommand("validate-potential", "Check the potential hypotheses");
  common(validate, true);
  std::string probes = "2:8:7";
  int budget = 40;
  validate->add_option("--probes", probes, "Cluster sizes for the stability probe");
  validate->add_option("--budget", budget, "Multistarts per probe size");

  auto* ground = app.add_subcommand("ground-state", "Build the ground-state table E_1..E_kmax");
  common(ground, true);
  std::optional<int> k_max;
  ground->add_option("--k-max", k_max, "Largest cluster size (default variational.k_max)");

  auto* prof = app.add_subcommand("variational-profile", "mu(nu), minimisers and kinks");
  common(prof, false);
  std::string nu_range;
  prof->add_option("--table", table_path, "Ground-state table JSON")->required();
  prof->add_option("--nu", nu_range, "nu grid start:stop:count (default from config)");

  auto* cz = app.add_subcommand("cluster-z", "Cluster partition functions with bound certificates");
  common(cz, true);
  std::string ks = "1:4:4", betas = "1", method = "quadrature";
  std::optional<double> a_side;
  long samples = 1 << 18;
  cz->add_option("--k", ks, "Cluster sizes");
  cz->add_option("--beta", betas, "Inverse temperatures");
  cz->add_option("--a", a_side, "Box side for the constrained function");
  cz->add_option("--method", method, "quadrature or importance_sampling");
  cz->add_option("--samples", samples, "Importance-sampling sample count");
  cz->add_option("--table", table_path, "Ground-state table JSON for the Cayley bound");

  auto* sw = app.add_subcommand("sandwich", "Lower and upper bounds on the constrained free energy");
  common(sw, true);
  double beta = 5.0;
  std::optional<double> rho, nu;
  std::string q_text;
  int sw_kmax = 4;
  sw->add_option("--beta", beta, "Inverse temperature");
  sw->add_option("--rho", rho, "Density");
  sw->add_option("--nu", nu, "Chemical-potential scale; rho = exp(-beta nu)");
  sw->add_option("--q", q_text, "Cluster mass fractions k:q,k:q (default: ideal minimiser)");
  sw->add_option("--k-max", sw_kmax, "Largest tabulated cluster size");
  sw->add_option("--table", table_path, "Ground-state table JSON for the uniform certificate");
  sw->add_option("--method", method, "quadrature or importance_sampling");

  auto* sim = app.add_subcommand("simulate", "Canonical Metropolis sampling");
  common(sim, true);
  std::optional<int> n_particles;
  std::optional<double> box_L, sim_beta;
  sim->add_option("--n", n_particles, "Particle number (default box.N)");
  sim->add_option("--L", box_L, "Box side (default box.L)");
  sim->add_option("--beta", sim_beta, "Inverse temperature (default box.beta)");

  auto* lln = app.add_subcommand("lln", "Cluster-size trend along the dilute low-temperature limit");
  common(lln, true);
  double lln_nu = 0.0;
  std::string lln_betas;
  int lln_n = 200, lln_K = 3;
  lln->add_option("--table", table_path, "Ground-state table JSON")->required();
  lln->add_option("--nu", lln_nu, "nu (off the kink set)")->required();
  lln->add_option("--betas", lln_betas, "Inverse temperatures")->required();
  lln->add_option("--n", lln_n, "Particle number");
  lln->add_option("--K", lln_K, "Cutoff for the unbounded-regime observable");

  auto* orc = app.add_subcommand("oracle", "Independent checks in d = 1");
  common(orc, true);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  if (threads > 0) set_max_threads(static_cast<std::size_t>(threads));

  CLI::App* sub = app.get_subcommands().front();
  Run run;
  run.command = sub->get_name();
  run.args = args;
  run.dir = out_dir.empty() ? fs::path("runs") / run.command : fs::path(out_dir);

  try {
    if (!config_path.empty()) run.config = require_config(config_path);
    const bool mc_command = sub == sim || sub == lln;
    std::uint64_t seed = 1;
    if (run.config) seed = mc_command ? run.config->mc.seed : run.config->variational.seed;
    seed = seed_opt.value_or(seed);
    run.seeds["base"] = seed;
    fs::create_directories(run.dir);
    int status = 0;

    if (sub == validate) {
      const Config& c = *run.config;
      const auto sizes = parse_ints(probes);
      const auto rep = validate_assumption_v(c.potential_spec(), sizes, budget, c.box.dim, seed);
      run.write("validation.json", validation_json(rep).dump(2) + "\n");
      status = rep.structural_ok() ? 0 : 1;
      for (const auto& ch : rep.checks) out << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << '\n';
    } else if (sub == ground) {
      const Config& c = *run.config;
      GroundStateOptions o;
      o.dim = c.box.dim;
      o.R = c.box.R;
      o.multistarts = c.variational.multistarts;
      o.hops = c.variational.hops;
      const int K = k_max.value_or(c.variational.k_max);
      const auto t = build_table(c.potential_spec(), K, o, seed);
      run.write("table.json", table_to_json(t));
      std::ostringstream csv;
      write_summary_csv(csv, t);
      run.write("summary.csv", csv.str());
      out << "k_max=" << K << " e_infty=" << (t.e_infty ? fmt_double(*t.e_infty) : "none")
          << " nu_star=" << (t.nu_star ? fmt_double(*t.nu_star) : "none") << '\n';
      status = t.warning ? 1 : 0;
    } else if (sub == prof) {
      const auto t = require_table(table_path);
      std::vector<double> grid;
      if (!nu_range.empty()) {
        grid = parse_range(nu_range);
      } else {
        const VariationalConfig v = run.config ? run.config->variational : VariationalConfig{};
        grid = parse_range(fmt_double(v.nu_min) + ":" + fmt_double(v.nu_max) + ":" +
                           std::to_string(v.grid_count));
      }
      if (grid.size() < 2) throw UsageError("--nu needs at least two grid points");
      const auto p = profile(t, grid.front(), grid.back(), static_cast<int>(grid.size()));
      std::ostringstream pc, kc;
      write_profile_csv(pc, p);
      write_kinks_csv(kc, p.kinks);
      run.write("profile.csv", pc.str());
      run.write("kinks.csv", kc.str());
      out << "nu_star=" << fmt_double(p.nu_star) << " kinks=" << p.kinks.size() << '\n';
    } else if (sub == cz) {
      const Config& c = *run.config;
      ZOptions o;
      o.method = parse_z_method(method);
      o.samples = samples;
      std::optional<GroundStateTable> t;
      if (!table_path.empty()) t = require_table(table_path);
      std::vector<ClusterFreeEnergyEstimate> rows;
      for (double b : parse_range(betas))
        for (int k : parse_ints(ks)) {
          o.E_k.reset();
          if (t && k <= t->k_max()) o.E_k = t->E(k);
          rows.push_back(z_cluster(c.potential_spec(), k, b, c.box.dim, c.box.R, a_side, o,
                                   derive_seed(seed, static_cast<std::uint64_t>(k), 0x2A)));
        }
      std::ostringstream csv;
      write_estimates_csv(csv, rows);
      run.write("estimates.csv", csv.str());
      run.write("estimates.json", estimates_to_json(rows));
      for (const auto& r : rows) {
        const bool ok = !(r.z > r.cayley_upper) && !(r.a && r.lattice_lower > std::pow(*r.a, r.dim) * r.z);
        if (!ok) status = 1;
      }
    } else if (sub == sw) {
      const Config& c = *run.config;
      if (rho.has_value() == nu.has_value()) throw UsageError("give exactly one of --rho and --nu");
      const double r = rho ? *rho : std::exp(-beta * *nu);
      ZOptions o;
      o.method = parse_z_method(method);
      const auto spec = c.potential_spec();
      const auto in = build_sandwich_input(spec, c.box.dim, c.box.R, beta, r, sw_kmax, o, seed);
      IdealModel model{beta, r, {}, in.f_inf, "largest-k estimate, k=" + std::to_string(sw_kmax)};
      for (const auto& [k, term] : in.terms) model.f[k] = term.f_cl;
      const auto ideal = minimize_ideal(model);
      std::map<int, double> rho_vec;
      if (q_text.empty()) {
        rho_vec = ideal.rho_vec;
      } else {
        for (auto [k, q] : parse_q(q_text)) rho_vec[k] = r * q / k;
      }
      const auto s = sandwich(in, rho_vec);
      json j;
      j["beta"] = beta;
      j["rho"] = r;
      j["f_inf_source"] = model.f_inf_source;
      auto& rv = j["rho_vec"] = json::object();
      for (auto [k, v] : rho_vec) rv[std::to_string(k)] = v;
      j["lower"] = s.lower;
      j["upper"] = s.upper;
      j["lower_stderr"] = s.lower_stderr;
      j["upper_stderr"] = s.upper_stderr;
      j["consistent"] = s.consistent;
      j["ideal_minimum"] = {{"value", ideal.value}, {"lambda", ideal.lambda}, {"eta", ideal.eta},
                            {"binding", ideal.binding}};
      auto& terms = j["terms"] = json::array();
      for (const auto& [k, t] : in.terms)
        terms.push_back({{"k", k}, {"f_cl", t.f_cl}, {"f_cl_stderr", t.f_cl_stderr}, {"a", t.a},
                         {"f_cla", t.f_cla}, {"f_cla_stderr", t.f_cla_stderr}});
      if (!table_path.empty() && spec.holder()) {
        const auto t = require_table(table_path);
        std::map<int, double> qm;
        for (auto [k, v] : rho_vec) qm[k] = k * v / r;
        const auto u = uniform_certificate(spec, t, QVector(qm), beta, r);
        j["uniform_certificate"] = {{"center", u.center}, {"lower", u.lower}, {"upper", u.upper},
                                    {"epsilon", u.epsilon}, {"n_max", u.n_max}};
      }
      run.write("sandwich.json", j.dump(2) + "\n");
      out << "lower=" << fmt_double(s.lower) << " upper=" << fmt_double(s.upper) << '\n';
      status = s.consistent ? 0 : 1;
    } else if (sub == sim) {
      const Config& c = *run.config;
      const auto N = n_particles ? n_particles : c.box.N;
      const auto L = box_L ? box_L : c.box.L;
      const auto b = sim_beta ? sim_beta : c.box.beta;
      if (!N || !L || !b) throw UsageError("simulate needs N, L and beta (flags or [box])");
      MCParams p = c.mc;
      p.seed = seed;
      const auto res = run_canonical(c.potential_spec(), c.box.dim, *N, *L, *b, c.box.R, p);
      run.write("result.json", mc_result_to_json(res));
      std::ostringstream tr, fc;
      write_trace_csv(tr, res);
      write_configuration_csv(fc, res.final_configuration);
      run.write("trace.csv", tr.str());
      run.write("final_configuration.csv", fc.str());
      for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
        std::ostringstream sc;
        write_configuration_csv(sc, res.snapshots[i]);
        run.write("snapshot_" + std::to_string(i) + ".csv", sc.str());
      }
      for (std::size_t r = 0; r < res.replicas.size(); ++r)
        run.seeds["replica_" + std::to_string(r)] = res.replicas[r].seed;
      const auto eq = equilibration_check(res);
      out << "acceptance=" << fmt_double(res.acceptance_rate) << " equilibrated=" << (eq.pass ? 1 : 0) << '\n';
    } else if (sub == lln) {
      const Config& c = *run.config;
      const auto t = require_table(table_path);
      MCParams p = c.mc;
      p.seed = seed;
      const auto rep = lln_experiment(c.potential_spec(), t, lln_nu, parse_range(lln_betas), lln_n, p, lln_K);
      run.write("report.json", lln_report_to_json(rep));
      for (const auto& pt : rep.points)
        out << "beta=" << fmt_double(pt.beta) << " observable=" << fmt_double(pt.observable.mean)
            << " stderr=" << fmt_double(pt.observable.stderr_) << '\n';
    } else if (sub == orc) {
      const auto spec = run.config->potential_spec();
      json j;
      auto& cases = j["supermultiplicativity"] = json::array();
      for (double b : {0.5, 2.0})
        for (int n1 = 1; n1 <= 3; ++n1)
          for (int n2 = 1; n1 + n2 <= 4; ++n2) {
            const Interval left{0.0, 2.5 * n1}, right{2.5 * n1 + 2.0, 2.5 * (n1 + n2) + 2.0};
            const auto rep = check_supermultiplicativity(spec, n1, n2, left, right,
                                                         Interval{0.0, right.hi}, b, run.config->box.R);
            if (!rep.holds) status = 1;
            cases.push_back({{"beta", b}, {"N1", n1}, {"N2", n2}, {"margin", rep.margin},
                             {"error", rep.error}, {"holds", rep.holds}});
          }
      auto& quad = j["quadrature_vs_sampling"] = json::array();
      ZOptions is;
      is.method = ZMethod::importance_sampling;
      for (int k = 2; k <= 3; ++k) {
        const auto q = quadrature_z_cluster(spec, k, 1.0, 1, run.config->box.R);
        const auto s = z_cluster(spec, k, 1.0, 1, run.config->box.R, std::nullopt, is, derive_seed(seed, k, 0x0C));
        const double z = std::abs(q.value - s.z) / s.z_stderr;
        if (!(z <= 4.0)) status = 1;
        quad.push_back(json{{"k", k}, {"quadrature", q.value}, {"sampled", s.z}, {"stderr", s.z_stderr}, {"z", z}});
      }
      const auto [h, m] = geometric_entropy(0.5);
      j["geometric_entropy"] = {{"u", 0.5}, {"entropy", h}, {"mean", m}};
      run.write("oracle.json", j.dump(2) + "\n");
      out << (status == 0 ? "all oracle checks passed\n" : "oracle check failed\n");
    }
    run.finish(status);
    return status;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace clustergas::cli
