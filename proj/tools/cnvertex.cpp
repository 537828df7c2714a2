// cnvertex: verification campaigns, spectrum dumps and Bethe-ansatz runs with JSON reports.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cnvertex/suites.hpp"

using nlohmann::json;
using namespace cnv;

namespace {

constexpr const char* kSchemaVersion = "1.0";

struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

// Accepts "1.5", "-2i", "0.3+0.1i", "0.3-1e-2i".
cd parse_complex(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw ConfigFailure("empty number");
  auto to_double = [&](const std::string& t) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw ConfigFailure("cannot parse number '" + text + "'");
    }
    if (used != t.size()) throw ConfigFailure("cannot parse number '" + text + "'");
    return v;
  };
  if (s.back() != 'i') return {to_double(s), 0.0};
  const std::string body = s.substr(0, s.size() - 1);
  // Split at the last sign that is not at the front and not part of an exponent.
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      const std::string im = body.substr(k);
      return {to_double(body.substr(0, k)), to_double(im == "+" || im == "-" ? im + "1" : im)};
    }
  }
  if (body.empty() || body == "+" || body == "-") return {0.0, body == "-" ? -1.0 : 1.0};
  return {0.0, to_double(body)};
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

json cjson(cd z) { return json::array({z.real(), z.imag()}); }

json witness_json(const std::vector<std::pair<std::string, cd>>& w) {
  json o = json::object();
  for (const auto& [k, v] : w) o[k] = cjson(v);
  return o;
}

json check_json(const Check& c) {
  json o{{"name", c.name},
         {"anchor", c.anchor},
         {"residual", json::array({c.residual, c.tolerance})},
         {"pass", c.pass},
         {"witness", witness_json(c.witness)}};
  if (c.measured_ratio) o["measured_ratio"] = cjson(*c.measured_ratio);
  if (!c.note.empty()) o["note"] = c.note;
  return o;
}

json checks_json(const VerificationReport& r) {
  json a = json::array();
  for (const auto& c : r.checks) a.push_back(check_json(c));
  return a;
}

json poly_json(const PolynomialFit& f) {
  json coeffs = json::array();
  for (const cd& c : f.coefficients) coeffs.push_back(cjson(c));
  return {{"degree", f.degree}, {"coefficients", coeffs}, {"heldout_residual", f.residual}};
}

json config_json(const RunConfig& cfg, const ChainSpec& chain, bool theta_given) {
  json th = json::array();
  for (const cd& t : chain.theta) th.push_back(cjson(t));
  const BoundaryParams& p = cfg.params;
  json counts = json::array();
  for (int c : cfg.counts) counts.push_back(c);
  return {{"rank", cfg.n},
          {"sites", cfg.sites},
          {"theta", th},
          {"theta_source", theta_given ? "given" : "seed"},
          {"boundary", to_string(cfg.boundary)},
          {"params",
           {{"zeta", cjson(p.zeta)},
            {"c1", cjson(p.c1)},
            {"c2", cjson(p.c2)},
            {"zeta_t", cjson(p.zeta_t)},
            {"c1_t", cjson(p.c1_t)},
            {"c2_t", cjson(p.c2_t)}}},
          {"seed", cfg.seed},
          {"tolerance_override", cfg.tol ? json(*cfg.tol) : json(nullptr)},
          {"suite", to_string(cfg.suite)},
          {"counts", counts},
          {"solver_seeds", cfg.solver_seeds}};
}

json capacity_json(const ChainSpec& chain) {
  const std::int64_t q = chain.quantum_dim();
  const std::int64_t aux = chain.has_fused() ? 14 : chain.site_dim();
  return {{"cap_entries", capacity_cap()},
          {"quantum_dim", q},
          {"aux_dim", aux},
          {"largest_dense_entries", (q * aux) * (q * aux)}};
}

json summary_json(const VerificationReport& r) {
  return {{"checks", r.checks.size()}, {"failures", r.failures()}, {"pass", r.all_pass()}};
}

void check_env() {
  if (const char* env = std::getenv("CNV_MAX_ENTRIES")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end == env || *end != '\0' || v <= 0)
      throw ConfigFailure(std::string("CNV_MAX_ENTRIES must be a positive integer, got '") + env + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification and Bethe-ansatz campaigns for C_n vertex models"};
  app.set_config("--config", "", "TOML/INI file with option values (command-line flags win)");
  app.require_subcommand(1);
  app.fallthrough();

  int rank = 3, sites = 1, solver_seeds = 40;
  std::uint64_t seed = 7;
  std::optional<double> tol;
  std::string theta, suite = "all", boundary = "open", counts, out;
  std::string zeta, c1, c2, zeta_t, c1_t, c2_t;
  bool no_timing = false;

  auto* o_sites = app.add_option("--sites", sites, "number of sites N");
  app.add_option("--rank", rank, "rank n of C_n");
  app.add_option("--theta", theta, "comma list of inhomogeneities (default: drawn from the seed)");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--tol", tol, "override every tolerance");
  app.add_option("--suite", suite, "r-properties|fusion|operator-identities|asymptotics|spectrum|bethe|all");
  app.add_option("--boundary", boundary, "periodic|open");
  app.add_option("--zeta", zeta, "K- parameter zeta (e.g. 0.7+0.1i)");
  app.add_option("--c1", c1, "K- parameter c1");
  app.add_option("--c2", c2, "K- parameter c2");
  app.add_option("--zeta-t", zeta_t, "K+ parameter zeta~");
  app.add_option("--c1-t", c1_t, "K+ parameter c1~");
  app.add_option("--c2-t", c2_t, "K+ parameter c2~");
  app.add_option("--counts", counts, "Bethe root counts per level, comma list (default: minimal)");
  app.add_option("--solver-seeds", solver_seeds, "random starts of the Bethe solver");
  app.add_option("--out", out, "report file (default: standard output)");
  app.add_flag("--no-timing", no_timing, "omit the timing block from the report");

  auto* verify = app.add_subcommand("verify", "run verification suites");
  auto* spec = app.add_subcommand("spectrum", "eigenvalue polynomials of the transfer matrices");
  auto* bethe = app.add_subcommand("bethe", "solve the Bethe equations and match the exact spectrum");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RunConfig cfg;
  json doc;
  VerificationReport report;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    check_env();
    cfg.n = rank;
    cfg.seed = seed;
    cfg.tol = tol;
    cfg.suite = parse_suite(suite);
    cfg.boundary = parse_boundary(boundary);
    cfg.solver_seeds = solver_seeds;
    for (const auto& t : split(theta)) cfg.theta.push_back(parse_complex(t));
    cfg.sites = (!cfg.theta.empty() && o_sites->count() == 0) ? static_cast<int>(cfg.theta.size()) : sites;
    for (const auto& c : split(counts)) {
      try {
        cfg.counts.push_back(std::stoi(c));
      } catch (const std::exception&) {
        throw ConfigFailure("cannot parse root count '" + c + "'");
      }
    }
    BoundaryParams& p = cfg.params;
    const std::pair<const std::string*, cd*> ps[] = {{&zeta, &p.zeta}, {&c1, &p.c1},     {&c2, &p.c2},
                                                     {&zeta_t, &p.zeta_t}, {&c1_t, &p.c1_t}, {&c2_t, &p.c2_t}};
    for (const auto& [text, target] : ps)
      if (!text->empty()) *target = parse_complex(*text);

    const ChainSpec chain = cfg.chain();  // validates before any computation
    doc["schema_version"] = kSchemaVersion;
    doc["config"] = config_json(cfg, chain, !cfg.theta.empty());
    doc["capacity"] = capacity_json(chain);

    if (verify->parsed()) {
      doc["command"] = "verify";
      json suites = json::array();
      for (const SuiteReport& part : run_suites(cfg.suite, cfg)) {
        suites.push_back({{"name", to_string(part.suite)},
                          {"applicable", part.applicable},
                          {"checks", part.report.checks.size()},
                          {"failures", part.report.failures()}});
        report.merge(part.report);
      }
      doc["suites"] = suites;
    } else if (spec->parsed()) {
      doc["command"] = "spectrum";
      const SpectrumRun run = run_spectrum(cfg);
      report = run.report;
      json lines = json::array();
      for (std::size_t k = 0; k < run.spectrum.lines.size(); ++k) {
        const EigenLine& l = run.spectrum.lines[k];
        json o{{"index", k}, {"lambda", poly_json(l.lambda)}, {"lambda_at_0", cjson(l.lambda.coefficients.front())}};
        if (run.spectrum.has_fused) {
          o["lambda2"] = poly_json(l.lambda2);
          o["lambda3"] = poly_json(l.lambda3);
        }
        o["checks"] = checks_json(run.lines[k]);
        lines.push_back(o);
      }
      doc["spectrum"] = {{"lines", lines},
                         {"basis_residual", run.spectrum.basis_residual},
                         {"degenerate_clusters", run.spectrum.degenerate_clusters},
                         {"fit_residual", run.spectrum.fit_residual}};
    } else if (bethe->parsed()) {
      doc["command"] = "bethe";
      const BetheRun run = run_bethe(cfg);
      report = run.report;
      const TQEvaluator ev(run.chain, run.model);
      json states = json::array();
      for (std::size_t k = 0; k < run.solve.states.size(); ++k) {
        const BetheState& st = run.solve.states[k];
        json roots = json::array();
        for (const auto& level : st.roots) {
          json lv = json::array();
          for (const cd& r : level) lv.push_back(cjson(r));
          roots.push_back(lv);
        }
        double fmax = 0.0;
        for (const cd& u : comparison_grid())
          for (const cd& f : ev.f_terms(st, u)) fmax = std::max(fmax, std::abs(f));
        json o{{"index", k},
               {"roots", roots},
               {"bae_residual", run.solve.residuals[k]},
               {"pole_residue", run.pole_residues[k]},
               {"lambda_at_0", cjson(run.lambda0[k])},
               {"energy", std::isfinite(run.energies[k].real()) ? cjson(run.energies[k]) : json(nullptr)},
               {"f_terms_max", fmax}};
        for (const auto& e : run.match.entries)
          if (e.state == static_cast<int>(k))
            o["match"] = {{"ed_index", e.ed_index}, {"distance", e.distance}, {"matched", e.matched}};
        states.push_back(o);
      }
      json cnt = json::array();
      for (int c : run.counts) cnt.push_back(c);
      doc["bethe"] = {{"model", to_string(run.model)},
                      {"counts", cnt},
                      {"xbar", cjson(ev.xbar())},
                      {"states", states},
                      {"best_residual", run.solve.best_residual},
                      {"converged_seeds", run.solve.converged_seeds},
                      {"attempted_seeds", run.solve.attempted_seeds},
                      {"coverage", run.match.coverage},
                      {"notes", run.notes}};
    }
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigFailure& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }

  doc["checks"] = checks_json(report);
  doc["summary"] = summary_json(report);
  if (!no_timing)
    doc["timing"] = {{"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};

  const std::string text = doc.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) {
      std::cerr << "configuration error: cannot write " << out << "\n";
      return 2;
    }
    f << text;
    std::cout << doc["command"].get<std::string>() << ": " << report.checks.size() << " checks, "
              << report.failures() << " failed -> " << out << "\n";
  }
  return report.all_pass() ? 0 : 1;
}
