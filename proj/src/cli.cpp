#include "bubbelator/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bubbelator/charfn.hpp"
#include "bubbelator/equilibria.hpp"
#include "bubbelator/errors.hpp"
#include "bubbelator/hopf.hpp"
#include "bubbelator/linalg.hpp"
#include "bubbelator/model.hpp"
#include "bubbelator/roots.hpp"
#include "bubbelator/sim.hpp"

namespace bubbelator {

namespace {

using json = nlohmann::json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json cjson(cplx c) { return {{"re", c.real()}, {"im", c.imag()}}; }

const char* kind_name(EigenClass k) {
  switch (k) {
    case EigenClass::Unstable: return "unstable";
    case EigenClass::Zero: return "zero";
    case EigenClass::RealNegative: return "real_negative";
    case EigenClass::ComplexStable: return "complex_stable";
    case EigenClass::RealPositive: return "real_positive";
  }
  return "unknown";
}

// Failed --verify checks are collected and reported together.
class Verifier {
 public:
  explicit Verifier(std::ostream& err) : err_(err) {}
  void check(bool ok, const std::string& what) {
    err_ << (ok ? "verify ok:   " : "verify FAIL: ") << what << '\n';
    if (!ok) ++failures_;
  }
  int failures() const { return failures_; }

 private:
  std::ostream& err_;
  int failures_ = 0;
};

struct ParamOpts {
  int M = 0;
  std::optional<double> K;
  std::optional<double> kappa;
};

void add_param_opts(CLI::App* sub, ParamOpts& po) {
  sub->add_option("--M", po.M, "largest cluster size (>= 3)")->required();
  auto* k = sub->add_option("--K", po.K, "atomization rate K > 0");
  auto* kp = sub->add_option("--kappa", po.kappa, "scaled rate kappa = K sqrt(M)");
  k->excludes(kp);
}

ModelParams make_params(const ParamOpts& po, std::ostream& err) {
  if (po.kappa) {
    ModelParams p = ModelParams::from_kappa(po.M, *po.kappa);
    err << "kappa=" << num(*po.kappa) << " -> K=" << num(p.K()) << " (M=" << po.M << ")\n";
    return p;
  }
  if (!po.K) throw UsageError("one of --K or --kappa is required");
  return ModelParams(po.M, *po.K);
}

// Writes to the --output file if given, otherwise to `out`.
void emit(const std::string& path, std::ostream& out, const std::string& text) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open output file " + path);
  f << text;
  if (!f) throw NumericError("failed writing " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// --- subcommands -----------------------------------------------------------

struct SimulateOpts {
  ParamOpts po;
  std::optional<double> n1, fill, perturb;
  double t_end = 200.0;
  double atol = 1e-10, rtol = 1e-8;
  int stride = 100;
  std::string summary;
};

int cmd_simulate(const SimulateOpts& o, bool verify, const std::string& path, std::ostream& out, std::ostream& err) {
  const ModelParams p = make_params(o.po, err);
  StateVector s0;
  if (o.perturb) {
    if (o.n1 || o.fill) throw UsageError("--perturb cannot be combined with --n1/--fill");
    s0 = perturbed_equilibrium(p, *o.perturb);
  } else {
    s0 = step_initial_data(p, o.n1.value_or(p.A()), o.fill.value_or(p.A()));
  }
  IntegratorOptions io;
  io.atol = o.atol;
  io.rtol = o.rtol;
  io.state_stride = o.stride;
  if (verify) io.mass_drift_bound = std::numeric_limits<double>::infinity();
  const Trajectory tr = integrate(p, s0, o.t_end, io);

  std::ostringstream csv;
  csv << 't';
  for (int l = 1; l <= p.M(); ++l) csv << ",n_" << l;
  csv << ",mass\n";
  for (const auto& s : tr.states) {
    csv << num(s.t);
    for (double v : s.n) csv << ',' << num(v);
    csv << ',' << num(total_mass(p, s.n)) << '\n';
  }
  emit(path, out, csv.str());

  const OscillationMetrics m = oscillation_metrics(tr);
  if (!o.summary.empty()) {
    json j = {{"M", p.M()},
              {"K", p.K()},
              {"t_end", o.t_end},
              {"accepted_steps", tr.step_stats.accepted},
              {"rejected_steps", tr.step_stats.rejected},
              {"min_dt", tr.step_stats.min_dt},
              {"max_dt", tr.step_stats.max_dt},
              {"max_mass_drift", tr.max_mass_drift},
              {"positive", tr.positive},
              {"amplitude", m.amplitude},
              {"mean", m.mean},
              {"period", m.period ? json(*m.period) : json(nullptr)},
              {"component", m.component}};
    emit(o.summary, out, j.dump(2) + "\n");
  }
  err << "steps accepted=" << tr.step_stats.accepted << " rejected=" << tr.step_stats.rejected
      << " max mass drift=" << tr.max_mass_drift << " late amplitude of n_1=" << m.amplitude << '\n';
  if (verify) {
    Verifier v(err);
    v.check(tr.max_mass_drift <= 1e-8, "relative mass drift " + num(tr.max_mass_drift) + " <= 1e-8");
    v.check(tr.positive, "all densities stayed positive (min " + num(tr.min_density) + ")");
    return v.failures() ? kExitNumeric : kExitOk;
  }
  return kExitOk;
}

struct EquilibriumOpts {
  ParamOpts po;
  std::optional<double> z, mass;
};

int cmd_equilibrium(const EquilibriumOpts& o, bool verify, const std::string& path, std::ostream& out,
                    std::ostream& err) {
  const ModelParams p = make_params(o.po, err);
  if (o.z.has_value() == o.mass.has_value()) throw UsageError("give exactly one of --z or --mass");
  const double z = o.z ? *o.z : find_z_for_mass(p, *o.mass);
  const EquilibriumProfile e = general_equilibrium(p, z);
  json j = {{"M", p.M()},         {"K", p.K()},       {"z", e.z},
            {"alpha", e.alpha ? json(*e.alpha) : json(nullptr)},
            {"mass", e.mass},     {"flux", e.flux},   {"densities", e.densities}};
  emit(path, out, j.dump(2) + "\n");
  if (verify) {
    Verifier v(err);
    const auto r = rhs(p, e.densities);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      worst = std::max(worst, std::abs(r[i]));
      scale = std::max(scale, e.densities[i] * e.densities[0] + e.densities[i]);
    }
    v.check(worst <= 1e-10 * scale * p.M(), "rhs at the profile vanishes (max " + num(worst) + ")");
    v.check(std::all_of(e.densities.begin(), e.densities.end(), [](double d) { return d >= 0.0; }),
            "densities nonnegative (tails may underflow)");
    if (o.mass) v.check(std::abs(e.mass - *o.mass) <= 1e-9 * *o.mass, "mass matches target");
    return v.failures() ? kExitNumeric : kExitOk;
  }
  return kExitOk;
}

json spectrum_json(const ModelParams& p, const SpectrumResult& s) {
  json eig = json::array();
  for (const auto& e : s.eigenvalues) {
    json je = {{"lambda", cjson(e.lambda)}, {"simple", e.simple}, {"kind", kind_name(e.kind)}};
    je["phi"] = e.phi ? cjson(*e.phi) : json(nullptr);
    eig.push_back(je);
  }
  return {{"M", p.M()},
          {"K", p.K()},
          {"kappa", p.kappa()},
          {"complete", s.complete},
          {"warning", s.warning},
          {"unstable_pairs", s.unstable_pairs},
          {"complex_pairs", s.complex_pairs},
          {"real_negative", s.real_negative},
          {"zero_count", s.zero_count},
          {"eigenvalues", eig}};
}

// Re-evaluates F at every stored phi; the residual is relative to the
// magnitude of F's terms.
int verify_spectrum_json(const json& j, std::ostream& err) {
  Verifier v(err);
  const ModelParams p(j.at("M").get<int>(), j.at("K").get<double>());
  double worst = 0.0, worst_lambda = 0.0;
  std::size_t n = 0;
  for (const auto& e : j.at("eigenvalues")) {
    ++n;
    if (e.at("phi").is_null()) continue;
    const cplx phi(e["phi"]["re"].get<double>(), e["phi"]["im"].get<double>());
    const cplx lam(e["lambda"]["re"].get<double>(), e["lambda"]["im"].get<double>());
    const CharfnValue f = f_of_phi_scaled(p, phi);
    worst = std::max(worst, std::abs(f.value) / f.term_scale);
    worst_lambda = std::max(worst_lambda, std::abs(lambda_of_phi(p, phi) - lam) / (1.0 + std::abs(lam)));
  }
  v.check(n == static_cast<std::size_t>(p.M()), "eigenvalue count equals M");
  v.check(worst <= 1e-8, "max relative |F(phi)| " + num(worst) + " <= 1e-8");
  v.check(worst_lambda <= 1e-12, "lambda(phi) reproduces stored lambda (max " + num(worst_lambda) + ")");
  return v.failures() ? kExitNumeric : kExitOk;
}

struct SpectrumOpts {
  ParamOpts po;
  std::string check;
};

int cmd_spectrum(const SpectrumOpts& o, bool verify, const std::string& path, std::ostream& out,
                 std::ostream& err) {
  if (!o.check.empty()) {
    json j;
    try {
      j = json::parse(read_file(o.check));
    } catch (const json::exception& e) {
      throw UsageError(std::string("malformed spectrum file: ") + e.what());
    }
    return verify_spectrum_json(j, err);
  }
  if (o.po.M == 0) throw UsageError("--M is required");
  const ModelParams p = make_params(o.po, err);
  const SpectrumResult s = spectrum_via_F(p);
  const json j = spectrum_json(p, s);
  emit(path, out, j.dump(2) + "\n");
  if (!s.complete) err << "warning: " << s.warning << '\n';
  if (verify) {
    int rc = verify_spectrum_json(j, err);
    Verifier v(err);
    bool conj = true;
    const auto lams = s.lambdas();
    for (const auto& l : lams) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& m : lams) best = std::min(best, std::abs(m - std::conj(l)));
      if (best > 1e-8 * (1.0 + std::abs(l))) conj = false;
    }
    v.check(conj, "spectrum closed under conjugation");
    v.check(check_lambda0_simple(assemble_B(p)), "lambda = 0 is simple");
    if (p.M() <= 14) {
      const double d = hausdorff_distance(lams, charpoly_oracle_spectrum(assemble_B(p)).lambdas());
      v.check(d <= 1e-8, "matches characteristic-polynomial eigenvalues (distance " + num(d) + ")");
    }
    return (rc || v.failures()) ? kExitNumeric : kExitOk;
  }
  return s.complete ? kExitOk : kExitNumeric;
}

struct QRootsOpts {
  int j_max = 3;
  double kappa_min = 0.5, kappa_max = 6.0;
  int steps = 56;
};

int cmd_qroots(const QRootsOpts& o, bool verify, const std::string& path, std::ostream& out, std::ostream& err) {
  if (o.j_max < 1) throw UsageError("--j-max must be >= 1");
  if (!(o.kappa_min > 0.0 && o.kappa_max > o.kappa_min) || o.steps < 1)
    throw UsageError("need 0 < kappa-min < kappa-max and steps >= 1");
  std::vector<double> grid;
  for (int i = 0; i <= o.steps; ++i) grid.push_back(o.kappa_min + (o.kappa_max - o.kappa_min) * i / o.steps);
  const auto t = tan_eq_t_roots(o.j_max);
  std::ostringstream csv;
  csv << "j,t_j,kappa_j0,kappa,re_z,im_z\n";
  double worst = 0.0;
  for (int j = 1; j <= o.j_max; ++j) {
    const QRootCurve c = q_root_curve(j, grid);
    for (const auto& s : c.samples) {
      csv << j << ',' << num(c.t_j) << ',' << num(c.kappa_j0) << ',' << num(s.kappa) << ',' << num(s.z.real())
          << ',' << num(s.z.imag()) << '\n';
      const CharfnValue q = q_of_z(s.z, s.kappa);
      worst = std::max(worst, std::abs(q.value) / (1.0 + q.term_scale));
    }
  }
  emit(path, out, csv.str());
  if (verify) {
    Verifier v(err);
    v.check(worst <= 1e-10, "max relative |Q(z; kappa)| " + num(worst) + " <= 1e-10");
    bool tan_ok = true;
    for (double tj : t) tan_ok = tan_ok && std::abs(std::sin(tj) - tj * std::cos(tj)) <= 1e-12 * tj;
    v.check(tan_ok, "tan t_j = t_j");
    return v.failures() ? kExitNumeric : kExitOk;
  }
  return kExitOk;
}

json hopf_json(const HopfPoint& h) {
  return {{"M", h.M},
          {"j", h.j},
          {"K", h.K},
          {"kappa", h.kappa},
          {"omega", h.omega},
          {"lambda", cjson(h.lambda)},
          {"phi", cjson(h.phi)},
          {"z", cjson(h.z)},
          {"residual_F", h.residual_F},
          {"residual_ReLambda", h.residual_re_lambda},
          {"simple", h.simple},
          {"iterations", h.iterations}};
}

void verify_hopf(const HopfPoint& h, Verifier& v) {
  const std::string tag = "M=" + std::to_string(h.M) + ": ";
  v.check(h.residual_F <= 1e-10, tag + "relative |F(phi)| " + num(h.residual_F) + " <= 1e-10");
  v.check(h.residual_re_lambda <= 1e-12, tag + "|Re lambda|/|lambda| " + num(h.residual_re_lambda) + " <= 1e-12");
  v.check(h.simple, tag + "crossing eigenvalue is simple");
  v.check(h.omega > 0.0, tag + "omega > 0");
}

struct HopfOpts {
  int M = 0;
  int j = 1;
  std::optional<double> seed_re, seed_im, seed_kappa;
};

int cmd_hopf(const HopfOpts& o, bool verify, const std::string& path, std::ostream& out, std::ostream& err) {
  std::optional<HopfSeed> seed;
  const int given = o.seed_re.has_value() + o.seed_im.has_value() + o.seed_kappa.has_value();
  if (given != 0 && given != 3) throw UsageError("--seed-re, --seed-im and --seed-kappa go together");
  if (given == 3) seed = HopfSeed{cplx(*o.seed_re, *o.seed_im), *o.seed_kappa};
  const HopfPoint h = find_hopf(o.M, o.j, seed);
  emit(path, out, hopf_json(h).dump(2) + "\n");
  if (verify) {
    Verifier v(err);
    verify_hopf(h, v);
    return v.failures() ? kExitNumeric : kExitOk;
  }
  return kExitOk;
}

struct Table1Opts {
  std::vector<int> M_list;
  unsigned threads = 0;
};

int cmd_table1(const Table1Opts& o, bool verify, const std::string& path, std::ostream& out, std::ostream& err) {
  for (int M : o.M_list)
    if (M < 25) throw UsageError("table1 requires every M >= 25");
  const auto rows = table1(o.M_list, o.threads);
  emit(path, out, table1_csv(rows));
  err << table1_text(rows);
  const bool all_ok = std::all_of(rows.begin(), rows.end(), [](const Table1Row& r) { return r.point.has_value(); });
  if (verify) {
    Verifier v(err);
    for (const auto& r : rows) {
      if (r.point) verify_hopf(*r.point, v);
      else v.check(false, "M=" + std::to_string(r.M) + ": " + r.error);
    }
    return v.failures() ? kExitNumeric : kExitOk;
  }
  return all_ok ? kExitOk : kExitNumeric;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Becker-Doring system with linear atomization: equilibria, spectra, Hopf points, simulation"};
  app.name(argc > 0 ? argv[0] : "bubbelator");
  app.require_subcommand(1);
  bool verify = false;
  std::string output;
  app.add_flag("--verify", verify, "run invariant checks on the results (exit 1 if any fails)");
  app.add_option("-o,--output", output, "output file (default: stdout)");

  SimulateOpts so;
  auto* sim = app.add_subcommand("simulate", "integrate the system; CSV of full-state snapshots");
  add_param_opts(sim, so.po);
  sim->add_option("--n1", so.n1, "initial monomer density (default 1+K)");
  sim->add_option("--fill", so.fill, "initial density of sizes 2..M (default 1+K)");
  sim->add_option("--perturb", so.perturb, "start from the equilibrium perturbed along the leading oscillatory mode");
  sim->add_option("--t-end", so.t_end, "final time")->capture_default_str();
  sim->add_option("--atol", so.atol, "absolute tolerance")->capture_default_str();
  sim->add_option("--rtol", so.rtol, "relative tolerance")->capture_default_str();
  sim->add_option("--stride", so.stride, "store the full state every this many steps")->capture_default_str();
  sim->add_option("--summary", so.summary, "write a JSON summary with oscillation metrics to this file");

  EquilibriumOpts eo;
  auto* eq = app.add_subcommand("equilibrium", "equilibrium profile by monomer density or total mass (JSON)");
  add_param_opts(eq, eo.po);
  auto* zopt = eq->add_option("--z", eo.z, "monomer density");
  auto* mopt = eq->add_option("--mass", eo.mass, "total mass");
  zopt->excludes(mopt);

  SpectrumOpts spo;
  auto* sp = app.add_subcommand("spectrum", "eigenvalues of the linearization at the constant equilibrium (JSON)");
  sp->add_option("--M", spo.po.M, "largest cluster size (>= 3)");
  sp->add_option("--K", spo.po.K, "atomization rate K > 0")->excludes(sp->add_option("--kappa", spo.po.kappa, "kappa = K sqrt(M)"));
  sp->add_option("--check", spo.check, "re-verify a spectrum JSON file written earlier");

  QRootsOpts qo;
  auto* qr = app.add_subcommand("qroots", "roots t_j of tan t = t and root curves of the limit function (CSV)");
  qr->add_option("--j-max", qo.j_max, "number of branches")->capture_default_str();
  qr->add_option("--kappa-min", qo.kappa_min, "")->capture_default_str();
  qr->add_option("--kappa-max", qo.kappa_max, "")->capture_default_str();
  qr->add_option("--steps", qo.steps, "grid intervals")->capture_default_str();

  HopfOpts ho;
  auto* hp = app.add_subcommand("hopf", "locate the j-th Hopf point at fixed M (JSON)");
  hp->add_option("--M", ho.M, "largest cluster size (>= 25)")->required();
  hp->add_option("--j", ho.j, "branch index")->capture_default_str();
  hp->add_option("--seed-re", ho.seed_re, "seed: Re z with phi = 1 + z/M");
  hp->add_option("--seed-im", ho.seed_im, "seed: Im z");
  hp->add_option("--seed-kappa", ho.seed_kappa, "seed: kappa");

  Table1Opts to;
  auto* tb = app.add_subcommand("table1", "first Hopf points for a list of M (CSV on stdout, table on stderr)");
  tb->add_option("--M", to.M_list, "comma-separated sizes")->required()->delimiter(',');
  tb->add_option("--threads", to.threads, "worker threads (0: up to BUBBELATOR_THREADS)")->capture_default_str();

  for (auto* s : {sim, eq, sp, qr, hp, tb}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sim) return cmd_simulate(so, verify, output, out, err);
    if (*eq) return cmd_equilibrium(eo, verify, output, out, err);
    if (*sp) return cmd_spectrum(spo, verify, output, out, err);
    if (*qr) return cmd_qroots(qo, verify, output, out, err);
    if (*hp) return cmd_hopf(ho, verify, output, out, err);
    if (*tb) return cmd_table1(to, verify, output, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    // Raised for inputs outside a function's domain, e.g. z <= 0.
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"bubbelator"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace bubbelator
