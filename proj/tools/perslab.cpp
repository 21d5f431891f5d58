// perslab: command-line front end for the persistence laboratory.
//
// Data goes to stdout, diagnostics to stderr. Every run writes its CSV to
// --out (default <subcommand>.csv) and the resolved configuration next to
// it as <out>.manifest, which can be fed back with --config.
//
// Exit status: 0 ok, 1 an enabled assertion failed, 2 configuration or
// evaluation error.

#include "perslab/estimators.hpp"
#include "perslab/exact.hpp"
#include "perslab/fluctuation.hpp"
#include "perslab/increments.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using namespace perslab;

namespace {

struct Settings {
  std::string family = "simple";
  std::string spec_file;
  std::size_t n = 3;
  std::vector<std::size_t> grid;
  std::size_t samples = 100000;
  std::size_t samples_b = 0;
  std::size_t cap = 4096;
  std::size_t horizon = 12;
  std::uint64_t seed = 20240601;
  unsigned shards = 1;
  std::string mode;
  std::string convention = "all";
  std::string probs = "half";
  std::string bspec = "correlated-coin";
  std::string bspec_atoms;
  std::string input;
  std::string out;
  std::string sample_out;
  double alpha = 0.0;
  double prune = 0.0;
  double expect_slope = NAN;
  double tolerance = 0.03;
  bool no_jitter = false;
  bool check = false;
};

struct AssertionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string num(const Rational& q) { return q.get_num().get_str(); }
std::string den(const Rational& q) { return q.get_den().get_str(); }

IncrementSpec resolve_spec(const Settings& s) {
  if (!s.spec_file.empty()) {
    std::ifstream in(s.spec_file);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read spec file '" + s.spec_file + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
  }
  return preset(s.family);
}

class Csv {
 public:
  explicit Csv(const std::string& path) : path_(path) {
    if (path_ == "-") return;
    file_.open(path_);
    if (!file_) throw Error(ErrorCode::ConfigError, "cannot write '" + path_ + "'");
  }
  std::ostream& os() { return path_ == "-" ? std::cout : file_; }
  void row(std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) os() << ',';
      os() << c;
      first = false;
    }
    os() << '\n';
  }
  bool to_stdout() const { return path_ == "-"; }

 private:
  std::string path_;
  std::ofstream file_;
};

// Human-readable data goes to stdout unless the CSV itself does.
std::ostream& data(const Csv& csv) { return csv.to_stdout() ? std::cerr : std::cout; }

void require(bool ok, const std::string& what) {
  if (!ok) throw AssertionFailure(what);
}

McOptions mc_options(const Settings& s) {
  McOptions mc;
  mc.seed = s.seed;
  mc.shards = s.shards;
  return mc;
}

void mc_row(Csv& csv, const Settings& s, const std::string& spec_id, const std::string& quantity, double n,
            const Estimate& e) {
  csv.row({spec_id, quantity, fmt(n), fmt(e.value), fmt(e.std_error), std::to_string(e.n_samples),
           std::to_string(s.seed), std::to_string(s.shards)});
}

const char* kMcHeader[] = {"spec_id", "quantity", "n", "value", "stderr", "n_samples", "seed", "shards"};

void mc_header(Csv& csv) {
  csv.row({kMcHeader[0], kMcHeader[1], kMcHeader[2], kMcHeader[3], kMcHeader[4], kMcHeader[5], kMcHeader[6],
           kMcHeader[7]});
}

std::vector<std::size_t> grid_or_n(const Settings& s) {
  return s.grid.empty() ? std::vector<std::size_t>{s.n} : s.grid;
}

std::vector<CrossingConvention> conventions(const Settings& s) {
  if (s.convention == "all")
    return {CrossingConvention::WeakUp, CrossingConvention::StrictUp, CrossingConvention::LastNegative,
            CrossingConvention::LeaveZero};
  return {parse_convention(s.convention)};
}

// Reads (n, value, stderr) rows from a CSV written by mc-p or exact-p.
std::vector<GridPoint> read_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read '" + path + "'");
  std::string line;
  std::getline(in, line);
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) head.push_back(c);
  }
  const auto col = [&](const std::string& name) -> long {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return static_cast<long>(i);
    return -1;
  };
  const long cn = col("n"), cv = col("value"), cs = col("stderr"), cnum = col("value_num"), cden = col("value_den"),
             cnum_samples = col("n_samples");
  if (cn < 0 || (cv < 0 && (cnum < 0 || cden < 0)))
    throw Error(ErrorCode::ConfigError, "'" + path + "' lacks n and value columns");
  std::vector<GridPoint> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    const auto at = [&](long i) { return cells.at(static_cast<std::size_t>(i)); };
    GridPoint p;
    p.n = std::stod(at(cn));
    if (cv >= 0) {
      const double se = cs >= 0 ? std::stod(at(cs)) : 0.0;
      const std::size_t k = cnum_samples >= 0 ? std::stoul(at(cnum_samples)) : 0;
      p.estimate = Estimate::from_value(std::stod(at(cv)), se, k);
    } else {
      p.estimate = Estimate::from_value(to_double(Rational(at(cnum) + "/" + at(cden))), 0.0, 0);
    }
    pts.push_back(p);
  }
  return pts;
}

// Grid values from the exact DP (rational, converted) or from simulation.
std::vector<GridPoint> persistence_grid(const Settings& s, const IncrementSpec& spec, bool exact) {
  if (s.grid.size() < 4) throw Error(ErrorCode::DegenerateGrid, "--grid needs at least 4 points");
  if (!exact) return mc_persistence_grid(spec, s.grid, s.samples, mc_options(s));
  std::vector<GridPoint> pts;
  for (std::size_t n : s.grid) {
    const double v = spec.has_rational_pmf() ? to_double(exact_persistence(spec, n))
                                             : exact_persistence_float(spec, n, s.prune).value;
    pts.push_back({static_cast<double>(n), Estimate::from_value(v, 0.0, 0)});
  }
  return pts;
}

void fit_rows(Csv& csv, const ExponentFit& f) {
  csv.row({"slope", "slope_lo", "slope_hi", "intercept", "r2"});
  csv.row({fmt(f.slope), fmt(f.slope_lo), fmt(f.slope_hi), fmt(f.intercept), fmt(f.r2)});
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void run_exact_p(const Settings& s, Csv& csv) {
  const auto spec = resolve_spec(s);
  const bool flt = s.mode == "float";
  if (flt) {
    csv.row({"spec_id", "n", "quantity", "value", "lower", "upper"});
  } else {
    csv.row({"spec_id", "n", "quantity", "value_num", "value_den"});
  }
  for (std::size_t n : grid_or_n(s)) {
    if (flt) {
      const auto r = exact_persistence_float(spec, n, s.prune);
      csv.row({spec.id(), std::to_string(n), "pN", fmt(r.value), fmt(r.lower), fmt(r.upper)});
      data(csv) << fmt(r.value) << '\n';
    } else {
      const Rational p = exact_persistence(spec, n);
      csv.row({spec.id(), std::to_string(n), "pN", num(p), den(p)});
      data(csv) << p.get_str() << '\n';
      if (s.check && spec.has_finite_support()) {
        const Rational e = enumerate_persistence(spec, n);
        require(e == p, "exact-p n=" + std::to_string(n) + ": DP " + p.get_str() + " vs enumeration " + e.get_str());
      }
    }
  }
}

void run_exact_bridge(const Settings& s, Csv& csv) {
  const auto spec = resolve_spec(s);
  csv.row({"spec_id", "n", "quantity", "value_num", "value_den"});
  if (!s.grid.empty()) {
    const std::size_t top = *std::max_element(s.grid.begin(), s.grid.end());
    std::map<std::size_t, Rational> by_n;
    for (const auto& b : bridge_series(spec, top)) by_n[b.n] = b.value;
    for (std::size_t n : s.grid) {
      auto it = by_n.find(n);
      if (it == by_n.end()) throw Error(ErrorCode::NotInBridgeSet, "P(S_" + std::to_string(n) + " = 0) = 0");
      csv.row({spec.id(), std::to_string(n), "pStarN", num(it->second), den(it->second)});
      data(csv) << it->second.get_str() << '\n';
    }
    return;
  }
  const Rational p = exact_bridge_persistence(spec, s.n);
  csv.row({spec.id(), std::to_string(s.n), "pStarN", num(p), den(p)});
  data(csv) << p.get_str() << '\n';
}

void run_enumerate(const Settings& s, Csv& csv) {
  const auto spec = resolve_spec(s);
  csv.row({"spec_id", "n", "quantity", "value_num", "value_den"});
  for (std::size_t n : grid_or_n(s)) {
    const Rational p = enumerate_persistence(spec, n);
    csv.row({spec.id(), std::to_string(n), "pN", num(p), den(p)});
    data(csv) << p.get_str() << '\n';
  }
}

void run_cycle_law(const Settings& s, Csv& csv) {
  const auto spec = resolve_spec(s);
  csv.row({"spec_id", "convention", "law", "length", "area", "mass_num", "mass_den"});
  for (auto c : conventions(s)) {
    const auto law = exact_cycle_law(spec, s.horizon, c);
    const std::string name(convention_name(c));
    for (const auto& [k, q] : law.pair_law.atoms) {
      csv.row({spec.id(), name, "theta_psi", std::to_string(k.first), std::to_string(k.second), num(q), den(q)});
      data(csv) << name << ' ' << k.first << ' ' << k.second << ' ' << q.get_str() << '\n';
    }
    for (const auto& [k, q] : law.hat_law.atoms)
      csv.row({spec.id(), name, "theta_hat_area", std::to_string(k.first), std::to_string(k.second), num(q), den(q)});
    csv.row({spec.id(), name, "residual", "", "", num(law.residual), den(law.residual)});
    data(csv) << name << " residual " << law.residual.get_str() << '\n';
    if (s.check) require(law.pair_law.total() + law.residual == 1, name + ": masses plus residual differ from 1");
  }
}

void run_symmetry_audit(const Settings& s, Csv& csv) {
  const auto spec = resolve_spec(s);
  csv.row({"spec_id", "convention", "horizon", "asymmetry_num", "asymmetry_den", "worst_length", "worst_area"});
  for (auto c : conventions(s)) {
    const auto law = exact_cycle_law(spec, s.horizon, c);
    const auto a = symmetry_audit(law.pair_law);
    const std::string wl = a.worst_atom ? std::to_string(a.worst_atom->first) : "";
    const std::string wa = a.worst_atom ? std::to_string(a.worst_atom->second) : "";
    csv.row({spec.id(), std::string(convention_name(c)), std::to_string(s.horizon), num(a.max_abs_asymmetry),
             den(a.max_abs_asymmetry), wl, wa});
    data(csv) << convention_name(c) << ' ' << a.max_abs_asymmetry.get_str();
    if (a.worst_atom) data(csv) << " at (" << wl << ", " << wa << ")";
    data(csv) << '\n';
  }
}

PositivitySeq<Rational> probs_for(const Settings& s, std::size_t n, PositivityMode mode) {
  if (s.probs == "half") return constant_positivity(Rational(1, 2), n);
  if (s.probs == "one") return constant_positivity(Rational(1), n);
  if (s.probs == "zero") return constant_positivity(Rational(0), n);
  if (s.probs == "family") return positivity_probs(resolve_spec(s), n, mode);
  throw Error(ErrorCode::ConfigError, "--probs must be half, one, zero or family");
}

PositivityMode positivity_mode(const Settings& s) {
  if (s.mode.empty() || s.mode == "strict") return PositivityMode::Strict;
  if (s.mode == "weak") return PositivityMode::Weak;
  throw Error(ErrorCode::ConfigError, "--mode must be strict or weak");
}

void run_spitzer(const Settings& s, Csv& csv) {
  const auto seq = probs_for(s, s.n, positivity_mode(s));
  const auto q = sparre_andersen(seq);
  csv.row({"n", "prob_num", "prob_den", "q_num", "q_den"});
  for (std::size_t k = 1; k <= s.n; ++k) {
    csv.row({std::to_string(k), num(seq.probs[k]), den(seq.probs[k]), num(q[k]), den(q[k])});
    if (s.check && s.probs == "half")
      require(q[k] == symmetric_continuous_qn(k), "q_" + std::to_string(k) + " differs from C(2n,n)/4^n");
  }
  data(csv) << q[s.n].get_str() << '\n';
}

void run_series(const Settings& s, Csv& csv) {
  std::vector<double> sums;
  if (s.probs == "family") {
    const auto spec = resolve_spec(s);
    const double alpha = s.alpha > 0 ? s.alpha : spec.alpha();
    sums = spec.has_rational_pmf() ? series_diagnostic(positivity_probs(spec, s.n), alpha)
                                   : series_diagnostic(positivity_probs_real(spec, s.n), alpha);
  } else {
    sums = series_diagnostic(probs_for(s, s.n, PositivityMode::Strict), s.alpha > 0 ? s.alpha : 2.0);
  }
  csv.row({"n", "partial_sum"});
  for (std::size_t k = 0; k < sums.size(); ++k) csv.row({std::to_string(k + 1), fmt(sums[k])});
  if (!sums.empty()) data(csv) << fmt(sums.back()) << '\n';
}

void run_prop2(const Settings& s, Csv& csv) {
  const auto b = s.bspec_atoms.empty() ? bivariate_preset(s.bspec) : parse_bivariate(s.bspec, s.bspec_atoms);
  if (!b.y_symmetric) std::cerr << "note: " << b.id << " is not y-symmetric; the inequalities are not implied\n";
  csv.row({"bspec_id", "n", "x", "lhs1_num", "lhs1_den", "rhs1_num", "rhs1_den", "lhs2_num", "lhs2_den", "rhs2_num",
           "rhs2_den"});
  std::size_t violations = 0;
  for (std::size_t n : grid_or_n(s)) {
    const auto t = halfplane_measures(b, n);
    data(csv) << "n x lhs1 rhs1 lhs2 rhs2 indep1 indep2\n";
    for (const auto& r : t.rows) {
      csv.row({b.id, std::to_string(n), std::to_string(r.x), num(r.lhs1), den(r.lhs1), num(r.rhs1), den(r.rhs1),
               num(r.lhs2), den(r.lhs2), num(r.rhs2), den(r.rhs2)});
      data(csv) << n << ' ' << r.x << ' ' << r.lhs1.get_str() << ' ' << r.rhs1.get_str() << ' ' << r.lhs2.get_str()
                << ' ' << r.rhs2.get_str() << ' ' << (r.indep1_holds() ? "PASS" : "FAIL") << ' '
                << (r.indep2_holds() ? "PASS" : "FAIL") << '\n';
    }
    violations += t.violations();
  }
  std::cerr << "violations: " << violations << '\n';
  if (s.check && b.y_symmetric) require(violations == 0, b.id + ": " + std::to_string(violations) + " violations");
}

void run_corollary(const Settings& s, Csv& csv) {
  const auto spec = resolve_spec(s);
  const auto r = corollary_independence_check(spec, s.n, s.samples, mc_options(s), s.cap);
  mc_header(csv);
  mc_row(csv, s, spec.id(), "ks_statistic", static_cast<double>(s.n), Estimate::from_value(r.ks.statistic, 0, r.accepted));
  mc_row(csv, s, spec.id(), "ks_p_value", static_cast<double>(s.n), Estimate::from_value(r.ks.p_value, 0, r.accepted));
  mc_row(csv, s, spec.id(), "acceptance", static_cast<double>(s.n), Estimate::from_count(r.accepted, r.attempted));
  data(csv) << fmt(r.ks.statistic) << ' ' << fmt(r.ks.p_value) << '\n';
  if (s.check) require(r.ks.p_value > 0.01, "corollary KS p = " + fmt(r.ks.p_value));
}

void run_mc_p(const Settings& s, Csv& csv) {
  const auto spec = resolve_spec(s);
  mc_header(csv);
  for (std::size_t n : grid_or_n(s)) {
    const auto e = mc_persistence(spec, n, s.samples, mc_options(s));
    mc_row(csv, s, spec.id(), "pN", static_cast<double>(n), e);
    data(csv) << n << ' ' << fmt(e.value) << ' ' << fmt(e.std_error) << '\n';
  }
}

void run_cycle_tail(const Settings& s, Csv& csv) {
  const auto spec = resolve_spec(s);
  const auto t = mc_cycle_tail(spec, grid_or_n(s), s.samples, s.cap, mc_options(s));
  mc_header(csv);
  for (const auto& p : t.points) {
    const double n = static_cast<double>(p.n);
    mc_row(csv, s, spec.id(), "cycle_tail", n, p.tail);
    mc_row(csv, s, spec.id(), "cycle_tail_scaled", n, p.scaled);
    mc_row(csv, s, spec.id(), "cycle_tail_scaled_lo", n, Estimate::from_value(p.scaled_lo, 0, t.samples));
    mc_row(csv, s, spec.id(), "cycle_tail_scaled_hi", n, Estimate::from_value(p.scaled_hi, 0, t.samples));
    data(csv) << p.n << ' ' << fmt(p.scaled.value) << ' ' << fmt(p.scaled_lo) << ' ' << fmt(p.scaled_hi) << '\n';
  }
  mc_row(csv, s, spec.id(), "censored_fraction", static_cast<double>(t.cap), Estimate::from_count(t.censored, t.samples));
  if (t.log_slope) {
    mc_row(csv, s, spec.id(), "log_slope", 0, Estimate::from_value(t.log_slope->slope, t.log_slope->slope_se, t.samples));
    std::cerr << "log-slope " << fmt(t.log_slope->slope) << '\n';
    if (s.check && !std::isnan(s.expect_slope))
      require(std::abs(t.log_slope->slope - s.expect_slope) <= s.tolerance, "cycle-tail slope " + fmt(t.log_slope->slope));
  }
}

void run_eta(const Settings& s, Csv& csv) {
  const auto spec = resolve_spec(s);
  const auto e = mc_eta_scaling(spec, s.n, s.samples, mc_options(s), !s.no_jitter);
  mc_header(csv);
  const double n = static_cast<double>(s.n);
  mc_row(csv, s, spec.id(), "eta_scaled_mean", n, Estimate::from_samples(e.scaled));
  if (e.ks) {
    mc_row(csv, s, spec.id(), "ks_statistic", n, Estimate::from_value(e.ks->statistic, 0, e.scaled.size()));
    mc_row(csv, s, spec.id(), "ks_p_value", n, Estimate::from_value(e.ks->p_value, 0, e.scaled.size()));
    data(csv) << fmt(e.ks->statistic) << ' ' << fmt(e.ks->p_value) << '\n';
  } else {
    std::cerr << "NoReferenceLaw: no limit law is available for this family; sample emitted only\n";
  }
  if (!s.sample_out.empty()) {
    std::ofstream f(s.sample_out);
    for (double x : e.scaled) f << fmt(x) << '\n';
  }
  if (s.check) {
    require(e.ks.has_value(), "NoReferenceLaw");
    require(e.ks->p_value > 0.01, "eta-scaling KS p = " + fmt(e.ks->p_value));
  }
}

void run_key(const Settings& s, Csv& csv) {
  const auto spec = resolve_spec(s);
  const std::size_t b = s.samples_b ? s.samples_b : s.samples;
  const auto k = check_key_identity(spec, s.n, s.samples, s.samples, b, mc_options(s), s.cap);
  mc_header(csv);
  const double n = static_cast<double>(s.n);
  mc_row(csv, s, spec.id(), "lhs", n, k.lhs);
  mc_row(csv, s, spec.id(), "rhs", n, k.rhs);
  mc_row(csv, s, spec.id(), "z", n, Estimate::from_value(k.z, 0, 0));
  for (std::size_t j = 0; j < k.cycle_minimum.size(); ++j)
    mc_row(csv, s, spec.id(), "cycle_minimum", static_cast<double>(j), k.cycle_minimum[j]);
  data(csv) << fmt(k.lhs.value) << ' ' << fmt(k.rhs.value) << ' ' << fmt(k.z) << '\n';
  if (s.check) require(std::abs(k.z) < 3.0, "key identity z = " + fmt(k.z));
}

void run_positivity(const Settings& s, Csv& csv) {
  const auto spec = resolve_spec(s);
  const auto e = positivity_limit_check(spec, s.n, s.samples, mc_options(s));
  mc_header(csv);
  mc_row(csv, s, spec.id(), "positivity", static_cast<double>(s.n), e);
  data(csv) << fmt(e.value) << ' ' << fmt(e.std_error) << '\n';
  if (s.check) require(std::abs(e.value - 1.0 / spec.alpha()) <= s.tolerance, "P(S_n > 0) = " + fmt(e.value));
}

std::vector<GridPoint> grid_input(const Settings& s) {
  if (!s.input.empty()) return read_grid(s.input);
  return persistence_grid(s, resolve_spec(s), s.mode != "mc");
}

void run_fit(const Settings& s, Csv& csv) {
  const auto f = fit_exponent(grid_input(s));
  fit_rows(csv, f);
  data(csv) << fmt(f.slope) << ' ' << fmt(f.slope_lo) << ' ' << fmt(f.slope_hi) << '\n';
  if (s.check && !std::isnan(s.expect_slope))
    require(std::abs(f.slope - s.expect_slope) <= s.tolerance, "slope " + fmt(f.slope));
}

void run_constant(const Settings& s, Csv& csv) {
  const auto pts = grid_input(s);
  const double alpha = s.alpha > 0 ? s.alpha : (s.input.empty() ? resolve_spec(s).alpha() : 2.0);
  const auto c = estimate_constant(pts, alpha);
  csv.row({"alpha", "constant", "stderr", "ci_lo", "ci_hi"});
  csv.row({fmt(alpha), fmt(c.value), fmt(c.std_error), fmt(c.ci_lo), fmt(c.ci_hi)});
  data(csv) << fmt(c.value) << ' ' << fmt(c.std_error) << '\n';
}

void run_scaling_report(const Settings& s, Csv& csv) {
  const auto spec = resolve_spec(s);
  const bool exact = s.mode == "exact";
  if (exact && !spec.is_lattice()) throw Error(ErrorCode::NotLattice, "exact mode needs a lattice family");
  const auto pts = persistence_grid(s, spec, exact);
  const auto fit = fit_exponent(pts);
  const double target = theoretical_slope(spec.alpha());
  mc_header(csv);
  for (const auto& p : pts) mc_row(csv, s, spec.id(), exact ? "pN_exact" : "pN", p.n, p.estimate);
  const Estimate slope = Estimate::from_value(fit.slope, fit.slope_se, 0);
  mc_row(csv, s, spec.id(), "slope", 0, slope);
  data(csv) << "slope " << fmt(fit.slope) << " [" << fmt(fit.slope_lo) << ", " << fmt(fit.slope_hi) << "] target "
            << fmt(target) << '\n';
  bool ok = true;
  try {
    const auto c = estimate_constant(pts, spec.alpha());
    mc_row(csv, s, spec.id(), "constant", 0, c);
    data(csv) << "constant " << fmt(c.value) << " +- " << fmt(c.std_error) << '\n';
    const auto ref = reference_constants(spec);
    if (spec.is_right_exponential() && ref.eqc_interval) {
      const auto [lo, hi] = *ref.eqc_interval;
      const bool inside = c.value >= lo - 3 * c.std_error && c.value <= hi + 3 * c.std_error;
      data(csv) << "interval [" << fmt(lo) << ", " << fmt(hi) << "] " << (inside ? "PASS" : "FAIL") << '\n';
      ok = inside;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ExponentMismatch) throw;
    data(csv) << "constant " << e.what() << '\n';
    ok = false;
  }
  if (s.check) {
    require(std::abs(fit.slope - target) <= s.tolerance, "slope " + fmt(fit.slope) + " vs " + fmt(target));
    require(ok, "constant check failed");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persistence probabilities of integrated random walks"};
  app.set_version_flag("--version", std::string("perslab ") + PERSLAB_VERSION);
  app.set_config("--config", "", "Read options from a key = value file; [subcommand] sections select the run");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  Settings s;
  if (const char* env = std::getenv("PERSLAB_SEED")) {
    try {
      s.seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "error: ConfigError: PERSLAB_SEED is not an integer\n";
      return 2;
    }
  }

  using Runner = std::function<void(const Settings&, Csv&)>;
  std::map<std::string, Runner> runners;
  std::map<std::string, CLI::App*> subs;

  const auto add = [&](const std::string& name, const std::string& help, Runner run) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->configurable();
    sub->add_option("--out", s.out, "CSV output path ('-' for stdout)");
    runners[name] = std::move(run);
    subs[name] = sub;
    return sub;
  };
  const auto spec_opts = [&](CLI::App* sub) {
    sub->add_option("--family", s.family, "Family preset: simple, lazy[:s], geometric, laplace[:a], heavy[:alpha[:k0]]")
        ->capture_default_str();
    sub->add_option("--spec-file", s.spec_file, "Increment spec in key = value form");
  };
  const auto mc_opts = [&](CLI::App* sub) {
    sub->add_option("--samples", s.samples, "Monte Carlo sample count")->capture_default_str();
    sub->add_option("--seed", s.seed, "Base seed (default from PERSLAB_SEED)")->capture_default_str();
    sub->add_option("--shards", s.shards, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  };
  const auto n_opt = [&](CLI::App* sub) { sub->add_option("--n", s.n, "Horizon N")->capture_default_str(); };
  const auto grid_opt = [&](CLI::App* sub) { sub->add_option("--grid", s.grid, "List of horizons")->delimiter(','); };
  const auto check_opt = [&](CLI::App* sub) {
    sub->add_flag("--assert", s.check, "Exit with status 1 when the built-in check fails");
  };

  {
    auto* c = add("exact-p", "Exact p_N by dynamic programming", run_exact_p);
    spec_opts(c), n_opt(c), grid_opt(c), check_opt(c);
    c->add_option("--mode", s.mode, "rational (default) or float");
    c->add_option("--prune", s.prune, "float mode: drop states lighter than this");
  }
  {
    auto* c = add("exact-bridge", "Exact bridge persistence p*_N", run_exact_bridge);
    spec_opts(c), n_opt(c), grid_opt(c);
  }
  {
    auto* c = add("enumerate", "p_N by exhaustive path enumeration", run_enumerate);
    spec_opts(c), n_opt(c), grid_opt(c);
  }
  {
    auto* c = add("cycle-law", "Exact first-cycle law up to a horizon", run_cycle_law);
    spec_opts(c), check_opt(c);
    c->add_option("--horizon", s.horizon)->capture_default_str();
    c->add_option("--convention", s.convention, "weak-up, strict-up, last-negative, leave-zero or all")
        ->capture_default_str();
  }
  {
    auto* c = add("symmetry-audit", "max |P(t,a) - P(t,-a)| of the exact cycle law", run_symmetry_audit);
    spec_opts(c);
    c->add_option("--horizon", s.horizon)->capture_default_str();
    c->add_option("--convention", s.convention)->capture_default_str();
  }
  {
    auto* c = add("spitzer", "q_n from P(S_n > 0) by the Sparre-Andersen recursion", run_spitzer);
    spec_opts(c), n_opt(c), check_opt(c);
    c->add_option("--probs", s.probs, "half, one, zero or family")->capture_default_str();
    c->add_option("--mode", s.mode, "strict (default) or weak");
  }
  {
    auto* c = add("series-diagnostic", "Partial sums of sum (P(S_n > 0) - 1/alpha)/n", run_series);
    spec_opts(c), n_opt(c);
    c->add_option("--probs", s.probs, "half, one, zero or family")->capture_default_str();
    c->add_option("--alpha", s.alpha, "Index (default: the family's)");
  }
  {
    auto* c = add("prop2", "Exact half-plane inequalities for a bivariate walk", run_prop2);
    n_opt(c), grid_opt(c), check_opt(c);
    c->add_option("--bspec", s.bspec, "correlated-coin, perfectly-correlated, independent-coins, asymmetric-x")
        ->capture_default_str();
    c->add_option("--bspec-atoms", s.bspec_atoms, "Custom law 'x,y:mass; ...' (named by --bspec)");
  }
  {
    auto* c = add("corollary-check", "KS test of Theta_n against min Psi > 0", run_corollary);
    spec_opts(c), n_opt(c), mc_opts(c), check_opt(c);
    c->add_option("--cap", s.cap, "Longest cycle kept")->capture_default_str();
  }
  {
    auto* c = add("mc-p", "Monte Carlo p_N", run_mc_p);
    spec_opts(c), n_opt(c), grid_opt(c), mc_opts(c);
  }
  {
    auto* c = add("mc-cycle-tail", "n^(1-1/alpha) P(theta_1 >= n) by simulation", run_cycle_tail);
    spec_opts(c), n_opt(c), grid_opt(c), mc_opts(c), check_opt(c);
    c->add_option("--cap", s.cap, "Steps walked per cycle")->capture_default_str();
    c->add_option("--expect-slope", s.expect_slope, "Expected log-tail slope for --assert");
    c->add_option("--tolerance", s.tolerance)->capture_default_str();
  }
  {
    auto* c = add("eta-scaling", "Law of eta(N)/N^(1-1/alpha) against its limit", run_eta);
    spec_opts(c), n_opt(c), mc_opts(c), check_opt(c);
    c->add_flag("--no-jitter", s.no_jitter, "Use the raw integer counts");
    c->add_option("--sample-out", s.sample_out, "Write the scaled sample, one value per line");
  }
  {
    auto* c = add("key-identity", "Direct vs conditioned estimate of the cycle-minimum probability", run_key);
    spec_opts(c), n_opt(c), mc_opts(c), check_opt(c);
    c->add_option("--samples-cycles", s.samples_b, "Cycle walks for the per-k factors (default --samples)");
    c->add_option("--cap", s.cap, "Longest cycle kept")->capture_default_str();
  }
  {
    auto* c = add("positivity-limit", "P(S_n > 0) by simulation", run_positivity);
    spec_opts(c), n_opt(c), mc_opts(c), check_opt(c);
    c->add_option("--tolerance", s.tolerance, "Allowed distance from 1/alpha for --assert")->capture_default_str();
  }
  {
    auto* c = add("fit-exponent", "Log-log slope of p_N", run_fit);
    spec_opts(c), grid_opt(c), mc_opts(c), check_opt(c);
    c->add_option("--input", s.input, "CSV from mc-p or exact-p");
    c->add_option("--mode", s.mode, "exact (default) or mc, when no --input");
    c->add_option("--expect-slope", s.expect_slope, "Expected slope for --assert");
    c->add_option("--tolerance", s.tolerance)->capture_default_str();
  }
  {
    auto* c = add("estimate-constant", "C_alpha from the largest half of the grid", run_constant);
    spec_opts(c), grid_opt(c), mc_opts(c);
    c->add_option("--input", s.input, "CSV from mc-p or exact-p");
    c->add_option("--mode", s.mode, "exact (default) or mc, when no --input");
    c->add_option("--alpha", s.alpha, "Index (default: the family's)");
  }
  {
    auto* c = add("scaling-report", "Grid, slope, constant and interval verdict", run_scaling_report);
    spec_opts(c), grid_opt(c), mc_opts(c), check_opt(c);
    c->add_option("--mode", s.mode, "exact or mc (default)");
    c->add_option("--tolerance", s.tolerance, "Allowed slope deviation for --assert")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: ConfigError: " << e.what() << '\n';
    return 2;
  }

  std::string name;
  for (const auto& [k, sub] : subs)
    if (sub->parsed()) name = k;
  if (s.out.empty()) s.out = name + ".csv";

  try {
    Csv csv(s.out);
    runners.at(name)(s, csv);
    if (s.out != "-") {
      std::ofstream manifest(s.out + ".manifest");
      manifest << "# perslab " << PERSLAB_VERSION << '\n'
               << "[" << name << "]\n"
               << subs.at(name)->config_to_str(true, false);
    }
  } catch (const AssertionFailure& e) {
    std::cerr << "error: AssertionFailed: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::AssertionFailed ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: ConfigError: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
