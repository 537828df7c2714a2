// Acceptance run: one PASS/FAIL line per criterion. argv[1] is the path of the command line tool.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cnvertex/suites.hpp"

using namespace cnv;

namespace {

struct Outcome {
  VerificationReport report;
  std::vector<std::string> extra_failures;  // criterion-level conditions that are not checks
  std::string summary;
};

std::string fmt(double x) {
  std::ostringstream o;
  o << std::setprecision(3) << std::scientific << x;
  return o.str();
}

std::string fmt(cd z) {
  std::ostringstream o;
  o << std::setprecision(6) << z.real();
  if (std::abs(z.imag()) > 1e-12) o << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
  return o.str();
}

double max_residual(const VerificationReport& r) {
  double m = 0.0;
  for (const auto& c : r.checks) m = std::max(m, c.residual / c.tolerance);
  return m;
}

bool run_criterion(int id, const std::string& title, double time_limit, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.extra_failures.push_back(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit > 0 && secs > time_limit)
    o.extra_failures.push_back("runtime " + fmt(secs) + " s exceeds " + fmt(time_limit) + " s");
  const bool pass = o.report.all_pass() && o.extra_failures.empty();
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << o.report.checks.size()
            << " checks, " << o.report.failures() << " failed, worst residual/tol " << fmt(max_residual(o.report))
            << ", " << std::fixed << std::setprecision(1) << secs << " s)";
  std::cout.unsetf(std::ios::floatfield);
  if (!o.summary.empty()) std::cout << " " << o.summary;
  std::cout << "\n";
  for (const auto& c : o.report.checks) {
    if (c.pass) continue;
    std::cout << "    failed " << c.name << ": residual " << fmt(c.residual) << " > " << fmt(c.tolerance);
    if (c.measured_ratio) std::cout << ", measured ratio " << fmt(*c.measured_ratio);
    std::cout << "\n";
  }
  for (const auto& f : o.extra_failures) std::cout << "    failed " << f << "\n";
  std::cout.flush();
  return pass;
}

void prefix_all(VerificationReport& r, const std::string& p) {
  for (auto& c : r.checks) c.name = p + c.name;
}

BoundaryParams diagonal_params() {
  BoundaryParams p;
  p.c1 = p.c2 = p.c1_t = p.c2_t = 0.0;
  return p;
}

ChainSpec chain(int n, int sites, BoundaryKind b, std::uint64_t seed, const BoundaryParams& p = {}) {
  Sampler s(seed);
  ChainSpec c{n, random_theta(sites, s), b, p};
  c.validate();
  return c;
}

// Operator identities, special values and asymptotics of the open chain (criterion 6).
VerificationReport open_operator_checks(const BoundaryParams& p, const std::string& tag) {
  VerificationReport rep;
  for (int N : {1, 2}) {
    const TransferMatrices tm(chain(3, N, BoundaryKind::open, 100 + N, p));
    VerificationReport r = verify_operator_identities(tm, 1e-9);
    r.merge(verify_asymptotics_and_special_values(tm, 1e-8));
    prefix_all(r, tag + "N" + std::to_string(N) + ".");
    rep.merge(r);
  }
  return rep;
}

// Eigenvalue functional relations, degrees and held-out fits (criterion 7).
VerificationReport eigen_checks(BoundaryKind b, const std::vector<int>& sizes, const BoundaryParams& p,
                                const std::string& tag) {
  VerificationReport rep;
  for (int N : sizes) {
    const TransferMatrices tm(chain(3, N, b, 200 + N, p));
    const Spectrum sp = spectrum(tm, 7);
    VerificationReport r = verify_spectrum(tm, sp, 1e-8);
    r.add("fit.heldout", "held-out residual of the eigenvalue fits", sp.fit_residual, 1e-8);
    prefix_all(r, tag + "N" + std::to_string(N) + ".");
    rep.merge(r);
  }
  return rep;
}

std::vector<std::function<cd(cd)>> tq_lines(const TQEvaluator& ev, const std::vector<BetheState>& states) {
  std::vector<std::function<cd(cd)>> out;
  for (const auto& s : states) out.push_back([&ev, s](cd u) { return ev.lambda(s, TransferKind::t, u); });
  return out;
}

std::vector<PolynomialFit> ed_lines(const ChainSpec& c) {
  std::vector<PolynomialFit> out;
  for (const auto& l : spectrum(TransferMatrices(c), 7).lines) out.push_back(l.lambda);
  return out;
}

// Solves at the given counts (empty: minimal) and requires every converged state to match an exact eigenvalue.
Outcome bethe_end_to_end(const ChainSpec& c, TQModel model, const std::vector<int>& counts, double match_tol,
                         const std::string& tag) {
  Outcome o;
  const TQEvaluator ev(c, model);
  const SolveResult r = solve_bae(ev, counts.empty() ? ev.minimal_counts() : counts);
  o.report.add(tag + "solve", "Bethe equations solved", r.states.empty() ? r.best_residual : 0.0, 1e-11);
  if (r.states.empty()) {
    o.extra_failures.push_back(tag + "no converged state, best residual " + fmt(r.best_residual));
    return o;
  }
  const MatchReport m = match_spectrum(tq_lines(ev, r.states), ed_lines(c), comparison_grid(), match_tol);
  for (std::size_t k = 0; k < r.states.size(); ++k) {
    const std::string pre = tag + "state" + std::to_string(k) + ".";
    o.report.add(pre + "bae_residual", "max Bethe residual", r.residuals[k], 1e-11);
    for (const auto& e : m.entries)
      if (e.state == static_cast<int>(k)) o.report.add(pre + "match", "distance to nearest exact eigenvalue", e.distance, match_tol);
  }
  o.summary = std::to_string(r.states.size()) + " states";
  return o;
}

std::string run_cli(const std::string& cli, const std::string& args, int& code) {
  std::string out;
  FILE* p = ::popen(("\"" + cli + "\" " + args + " 2>/dev/null").c_str(), "r");
  if (!p) {
    code = -1;
    return out;
  }
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) out += buf;
  const int st = ::pclose(p);
  code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path to cnvertex>\n";
    return 2;
  }
  const std::string cli = argv[1];
  int failed = 0;
  auto tally = [&](bool ok) { failed += ok ? 0 : 1; };

  tally(run_criterion(1, "R-matrix properties for n = 2, 3, 4", 10.0, [] {
    Outcome o;
    for (int n : {2, 3, 4}) {
      Sampler s(1000 + n);
      o.report.merge(verify_r_properties(n, 100, 1e-10, s));
    }
    return o;
  }));

  tally(run_criterion(2, "degeneration ranks and tabulated subspaces", 5.0, [] {
    Outcome o;
    const RMatrixFamily R(3);
    const std::pair<std::string, std::pair<Mat, int>> ranks[] = {
        {"rank.R(-4)", {R(-4.0), 1}},
        {"rank.R(-1)", {R(-1.0), 14}},
        {"rank.R_bar(-7/2)", {c3::r_bar_poly(-3.5), 6}},
        {"rank.R_bar(-3/2)", {c3::r_bar_poly(-1.5), 14}},
        {"rank.R_tilde(-3)", {c3::r_tilde_poly(-3.0), 14}}};
    for (const auto& [name, mr] : ranks) {
      const int got = svd_rank(mr.first, 1e-10).rank;
      o.report.add(name, "numerical rank " + std::to_string(got) + " vs " + std::to_string(mr.second),
                   got == mr.second ? 0.0 : 1.0, 0.5);
    }
    o.report.merge(c3::verify_projectors(1e-8));
    return o;
  }));

  tally(run_criterion(3, "fusion closure and the six-factor product", 30.0, [] {
    Outcome o;
    Sampler s(3000);
    o.report = c3::verify_closure(10, 1e-10, s);
    return o;
  }));

  tally(run_criterion(4, "reflection equations, fused K-matrices and quantum determinants", 60.0, [] {
    Outcome o;
    const BoundaryParams p;
    for (int n : {2, 3, 4}) {
      Sampler s(4000 + n);
      VerificationReport r = verify_reflection_equations(n, p, 20, 1e-10, s);
      o.report.merge(r);
    }
    Sampler s(4100);
    o.report.merge(c3::verify_fused_reflection(p, 20, 1e-10, s));
    o.report.merge(c3::verify_quantum_determinants(p, 20, 1e-9, s));
    o.report.merge(c3::verify_fused_k_values(p, 5, 1e-8, s));
    return o;
  }));

  tally(run_criterion(5, "periodic operator identities and asymptotics, N = 1, 2, 3", 300.0, [] {
    Outcome o;
    for (int N : {1, 2, 3}) {
      const TransferMatrices tm(chain(3, N, BoundaryKind::periodic, 500 + N));
      VerificationReport r = verify_operator_identities(tm, 1e-9);
      r.merge(verify_asymptotics_and_special_values(tm, 1e-8));
      prefix_all(r, "N" + std::to_string(N) + ".");
      o.report.merge(r);
    }
    return o;
  }));

  tally(run_criterion(6, "open operator identities, special values and asymptotics, N = 1, 2", 300.0, [] {
    Outcome o;
    o.report = open_operator_checks(BoundaryParams{}, "");
    return o;
  }));

  tally(run_criterion(7, "eigenvalue functional relations (periodic N <= 3, open N <= 2)", 0.0, [] {
    Outcome o;
    o.report = eigen_checks(BoundaryKind::periodic, {1, 2, 3}, BoundaryParams{}, "periodic.");
    o.report.merge(eigen_checks(BoundaryKind::open, {1, 2}, BoundaryParams{}, "open."));
    return o;
  }));

  tally(run_criterion(8, "periodic vacuum eigenvalue and energy", 0.0, [] {
    Outcome o;
    for (int N : {1, 2, 3}) {
      const std::string pre = "N" + std::to_string(N) + ".";
      const ChainSpec c = chain(3, N, BoundaryKind::periodic, 800 + N);
      const TransferMatrices tm(c);
      const TQEvaluator ev(c, TQModel::periodic_c3);
      const BetheState vac{std::vector<std::vector<cd>>(3)};
      double r = 0.0, leak = 0.0;
      for (cd u : comparison_grid()) {
        const Mat t = tm(TransferKind::t, u);
        r = std::max(r, rel_diff(ev.lambda(vac, TransferKind::t, u), t(0, 0)));
        leak = std::max(leak, t.col(0).tail(t.rows() - 1).norm() / t.norm());
      }
      o.report.add(pre + "vacuum.lambda", "empty-state Lambda vs transfer matrix on |1...1>", std::max(r, leak), 1e-9);
      if (N >= 2) {
        const ChainSpec h{3, std::vector<cd>(static_cast<std::size_t>(N), cd(0.0)), BoundaryKind::periodic, {}};
        const cd e_tq = energy(TQEvaluator(h, TQModel::periodic_c3), vac);
        const cd e_ed = hamiltonian(3, N, BoundaryKind::periodic, {})(0, 0);
        const double expect = 5.0 * N / 4.0;
        o.report.add(pre + "vacuum.energy.tq", "T-Q vacuum energy = 5N/4", std::abs(e_tq - expect) / expect, 1e-8);
        o.report.add(pre + "vacuum.energy.ed", "Hamiltonian on |1...1> = 5N/4", std::abs(e_ed - expect) / expect, 1e-8);
      }
    }
    return o;
  }));

  tally(run_criterion(9, "open Bethe equations end to end, n = 3, N = 1, counts (1,0,0)", 60.0, [] {
    return bethe_end_to_end(chain(3, 1, BoundaryKind::open, 900), TQModel::open_c3, {1, 0, 0}, 1e-8, "");
  }));

  tally(run_criterion(10, "diagonal-boundary limit", 0.0, [] {
    Outcome o;
    const BoundaryParams p = diagonal_params();
    o.report.add("x", "x = 0 exactly (0 when it is, 1 otherwise)", p.x() == cd(0.0) ? 0.0 : 1.0, 0.5);
    double f = 0.0;
    for (int n : {2, 3}) {
      const ChainSpec c = chain(n, 1, BoundaryKind::open, 1000 + n, p);
      const TQEvaluator ev(c, n == 3 ? TQModel::open_c3 : TQModel::open_cn);
      Sampler s(1010);
      BetheState st;
      for (int k : ev.minimal_counts()) {
        st.roots.emplace_back();
        for (int j = 0; j < k; ++j) st.roots.back().push_back(s.spectral());
      }
      for (cd u : comparison_grid())
        for (cd v : ev.f_terms(st, u)) f = std::max(f, std::abs(v));
    }
    o.report.add("f_terms", "inhomogeneous terms vanish", f, 1e-12);
    VerificationReport ops = open_operator_checks(p, "open.");
    o.report.merge(ops);
    o.report.merge(eigen_checks(BoundaryKind::open, {1, 2}, p, "eigen.open."));
    return o;
  }));

  tally(run_criterion(11, "C_n relations: n = 2 open chain and n = 3 consistency", 0.0, [] {
    Outcome o = bethe_end_to_end(chain(2, 1, BoundaryKind::open, 1100), TQModel::open_cn, {}, 1e-7, "n2.");
    const ChainSpec c3c = chain(3, 1, BoundaryKind::open, 1103);
    const SolveResult r = solve_bae(TQEvaluator(c3c, TQModel::open_c3), {1, 0, 0});
    for (std::size_t k = 0; k < r.states.size(); ++k) {
      VerificationReport cmp = compare_cn_with_c3(c3c, r.states[k], 1e-7);
      prefix_all(cmp, "n3.state" + std::to_string(k) + ".");
      o.report.merge(cmp);
    }
    if (r.states.empty()) o.extra_failures.push_back("n = 3 reference state not found");
    return o;
  }));

  tally(run_criterion(12, "determinism of verify --suite all --seed 7", 0.0, [&cli] {
    Outcome o;
    int c1 = -1, c2 = -1;
    const std::string args = "verify --suite all --seed 7";
    auto strip = [](const std::string& text) {
      nlohmann::json j = nlohmann::json::parse(text);
      j.erase("timing");
      return j.dump();
    };
    const std::string a = run_cli(cli, args, c1), b = run_cli(cli, args, c2);
    if (c1 != c2) o.extra_failures.push_back("exit codes differ: " + std::to_string(c1) + " vs " + std::to_string(c2));
    if (c1 != 0 && c1 != 1) o.extra_failures.push_back("tool exited with " + std::to_string(c1));
    const bool same = !a.empty() && strip(a) == strip(b);
    o.report.add("identical_reports", "byte-identical reports excluding timing", same ? 0.0 : 1.0, 0.5);
    o.summary = "(exit code " + std::to_string(c1) + ")";
    return o;
  }));

  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " of 12 criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
