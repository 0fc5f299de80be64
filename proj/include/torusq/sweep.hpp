#pragma once

/**
 * @file sweep.hpp
 * @brief Prime sweeps: run the enabled checks per prime and emit JSON / CSV reports.
 *
 * This is the engine behind the command-line tool; it is kept in a header so
 * the tests can drive it directly.
 */

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "torusq/classical.hpp"
#include "torusq/quevaluator.hpp"

namespace torusq {

/// A configuration problem: the tool exits with status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& all_check_names() {
  static const std::vector<std::string> names = {"relations", "egorov",        "multiplicativity", "decomposition", "bound",
                                                 "refined",   "trace-formula", "factorization",    "demo",          "twist"};
  return names;
}

struct SweepConfig {
  int n = 1;
  /// "cat", "auto-sp4", "auto-sp4-split" or row-major integer entries.
  std::string matrix = "cat";
  Residue pmin = 3;
  Residue pmax = 13;
  std::set<std::string> checks{all_check_names().begin(), all_check_names().end()};
  std::uint64_t seed = 1;
  bool deterministic = false;
  std::string out_json;
  std::string out_csv;
  double budget_seconds = 600.0;
  /// 0 = one worker per hardware thread.
  unsigned threads = 0;
};

/// "all" or a comma-separated subset of all_check_names().
inline std::set<std::string> parse_checks(const std::string& text) {
  std::set<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove(tok.begin(), tok.end(), ' '), tok.end());
    if (tok.empty()) continue;
    if (tok == "all") {
      out.insert(all_check_names().begin(), all_check_names().end());
      continue;
    }
    if (std::find(all_check_names().begin(), all_check_names().end(), tok) == all_check_names().end())
      throw ConfigError("unknown check '" + tok + "'");
    out.insert(tok);
  }
  if (out.empty()) throw ConfigError("no checks selected");
  return out;
}

/// The validated ergodic element named by the configuration.
inline ErgodicElement resolve_matrix(const std::string& spec, int n) {
  if (n != 1 && n != 2) throw ConfigError("n must be 1 or 2");
  if (spec == "cat") {
    if (n != 1) throw ConfigError("matrix 'cat' needs n = 1");
    return cat_map();
  }
  if (spec == "auto-sp4" || spec == "auto-sp4-split") {
    if (n != 2) throw ConfigError("matrix '" + spec + "' needs n = 2");
    Sp4SearchFilter filter;
    if (spec == "auto-sp4-split") filter.split_at_one_of = {5, 7, 11, 13};
    return find_ergodic_sp4(filter);
  }
  IntMatrix m;
  try {
    m = IntMatrix::parse_square(spec);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("matrix: ") + e.what());
  }
  if (m.rows() != static_cast<std::size_t>(2 * n))
    throw ConfigError("matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.rows()) + " but n = " + std::to_string(n));
  auto v = validate_ergodic(m);
  if (!v.accepted()) throw ConfigError(std::string("matrix rejected: ") + to_string(v.rejection) + " (" + v.reason + ")");
  return *v.element;
}

inline std::vector<Residue> odd_primes_in(Residue lo, Residue hi) {
  std::vector<Residue> out;
  for (Residue p = std::max<Residue>(lo, 3); p <= hi; ++p)
    if (is_prime(p)) out.push_back(p);
  return out;
}

inline void validate_config(const SweepConfig& c) {
  if (c.n != 1 && c.n != 2) throw ConfigError("n must be 1 or 2");
  if (c.pmin < 3) throw ConfigError("pmin must be an odd prime >= 3");
  if (c.pmax < c.pmin) throw ConfigError("pmax < pmin");
  if (odd_primes_in(c.pmin, c.pmax).empty()) throw ConfigError("no odd prime in [pmin, pmax]");
  if (c.budget_seconds <= 0) throw ConfigError("budget-seconds must be positive");
}

struct CheckResult {
  std::string name;
  std::string status;  ///< pass, fail, skipped or aborted
  double max_dev = 0.0;
  double max_ratio = 0.0;
  std::vector<std::string> witnesses;
  double millis = 0.0;
  std::string note;

  bool ok() const { return status == "pass" || status == "skipped"; }
};

struct PrimeReport {
  Residue p = 0;
  int n = 0;
  std::string split_type;
  std::size_t torus_order = 0;
  double max_abs_over_sqrt = 0.0;  ///< max |a_chi| / p^{n/2}, when the bound check ran
  std::vector<CheckResult> checks;

  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.ok(); });
  }
};

struct SkippedPrime {
  Residue p;
  std::string reason;
};

struct SweepResult {
  SweepConfig config;
  std::string matrix;
  int relation_sign = 0;
  int trace_orientation = 0;
  std::vector<PrimeReport> reports;
  std::vector<SkippedPrime> skipped;

  bool ok() const {
    return std::all_of(reports.begin(), reports.end(), [](const PrimeReport& r) { return r.ok(); });
  }
  int exit_code() const { return ok() ? 0 : 1; }
};

namespace detail {

inline std::string xi_string(const std::vector<Residue>& xi) {
  std::string s = "(";
  for (std::size_t i = 0; i < xi.size(); ++i) s += (i ? "," : "") + std::to_string(xi[i]);
  return s + ")";
}

inline std::string status_of(bool pass) { return pass ? "pass" : "fail"; }

/// Elements used for the Egorov check: all of SL_2(F_p) for n = 1 and p <= 7,
/// otherwise the generators, short words in them, and the torus.
inline std::vector<FpMatrix> egorov_elements(const PrimeModulus& pm, const HeckeTorus& t, std::mt19937_64& rng) {
  const Residue p = pm.p();
  const int n = pm.n();
  std::vector<FpMatrix> out;
  if (n == 1 && p <= 7) {
    for (Residue a = 0; a < p; ++a)
      for (Residue b = 0; b < p; ++b)
        for (Residue c = 0; c < p; ++c)
          for (Residue d = 0; d < p; ++d)
            if (mod(a * d - b * c, p) == 1) out.emplace_back(2, 2, p, std::vector<Residue>{a, b, c, d});
    return out;
  }
  const std::size_t k = static_cast<std::size_t>(n);
  std::vector<SpGenerator> gens{SpGenerator::w()};
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      FpMatrix s(k, k, p);
      s(i, j) = s(j, i) = 1;
      gens.push_back(SpGenerator::u(s));
    }
  FpMatrix m = FpMatrix::identity(k, p);
  m(0, 0) = 2 % p == 0 ? 1 : 2;
  gens.push_back(SpGenerator::t(m));
  if (k == 2) {
    FpMatrix e = FpMatrix::identity(2, p);
    e(0, 1) = 1;
    gens.push_back(SpGenerator::t(e));
  }
  for (const auto& g : gens) out.push_back(generator_matrix(g, n, p));
  std::uniform_int_distribution<std::size_t> pick(0, gens.size() - 1);
  for (int i = 0; i < 24; ++i) {
    FpMatrix acc = FpMatrix::identity(2 * k, p);
    for (int len = 0; len < 3; ++len) acc = acc * generator_matrix(gens[pick(rng)], n, p);
    out.push_back(acc);
  }
  out.insert(out.end(), t.elements().begin(), t.elements().end());
  return out;
}

}  // namespace detail

/// Runs every enabled check at one non-degenerate prime.
inline PrimeReport run_prime(const ErgodicElement& a, Residue p, const SweepConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto deadline = start + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(cfg.budget_seconds));
  PrimeReport rep;
  rep.p = p;
  rep.n = a.n();
  HeckeContext ctx(a, p, cfg.seed);
  const PrimeModulus& pm = ctx.modulus();
  const double scale = std::pow(static_cast<double>(p), 0.5 * pm.n());
  rep.split_type = ctx.torus().split().label();
  rep.torus_order = ctx.torus().size();
  std::mt19937_64 rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(p));
  std::unique_ptr<HeckeAnalysis> analysis;
  auto an = [&]() -> const HeckeAnalysis& {
    if (!analysis) analysis = std::make_unique<HeckeAnalysis>(ctx);
    return *analysis;
  };

  auto run = [&](const std::string& name, auto&& body) {
    if (!cfg.checks.count(name)) return;
    CheckResult r;
    r.name = name;
    if (clock::now() > deadline) {
      r.status = "aborted";
      r.note = "per-prime budget of " + std::to_string(cfg.budget_seconds) + " s exhausted";
    } else {
      auto t0 = clock::now();
      try {
        body(r);
      } catch (const std::exception& e) {
        r.status = "fail";
        r.witnesses.push_back(std::string("exception: ") + e.what());
      }
      r.millis = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    }
    rep.checks.push_back(std::move(r));
  };

  run("relations", [&](CheckResult& r) {
    auto rr = check_relations(pm, 1e-10);
    r.max_dev = rr.max_deviation;
    PhaseSpace space(pm);
    for (auto [i, j] : rr.witnesses)
      r.witnesses.push_back("xi=" + detail::xi_string(space.decode_phase(i)) + " eta=" + detail::xi_string(space.decode_phase(j)));
    r.status = detail::status_of(rr.failures == 0);
    r.note = std::to_string(rr.pairs) + " pairs, sign " + std::to_string(rr.epsilon);
  });

  run("egorov", [&](CheckResult& r) {
    const WeilRep& w = ctx.weil();
    auto xis = standard_phase_basis(pm.n());
    auto extra = random_phase_points(pm, 4, rng);
    xis.insert(xis.end(), extra.begin(), extra.end());
    std::size_t count = 0;
    for (const auto& b : detail::egorov_elements(pm, ctx.torus(), rng)) {
      double dev = egorov_deviation(w.rho(b), b, xis, pm);
      ++count;
      r.max_dev = std::max(r.max_dev, dev);
      if (dev > w.tolerance() && r.witnesses.size() < 8) r.witnesses.push_back("B=" + b.str());
    }
    r.max_ratio = r.max_dev / w.tolerance();
    r.status = detail::status_of(r.witnesses.empty());
    r.note = std::to_string(count) + " elements, tolerance 1e-9 p^{n/2}";
  });

  run("multiplicativity", [&](CheckResult& r) {
    const WeilRep& w = ctx.weil();
    std::vector<std::pair<FpMatrix, FpMatrix>> pairs;
    if (pm.n() == 1 && p <= 5) {
      std::mt19937_64 dummy(0);
      auto elems = detail::egorov_elements(pm, ctx.torus(), dummy);
      for (const auto& x : elems)
        for (const auto& y : elems) pairs.emplace_back(x, y);
    } else {
      for (int tries = 0; pairs.size() < 300 && tries < 20000; ++tries) {
        FpMatrix x = random_symplectic_mod_p(pm.n(), p, rng), y = random_symplectic_mod_p(pm.n(), p, rng);
        if (w.has_word(x) && w.has_word(y) && w.has_word(x * y)) pairs.emplace_back(x, y);
      }
    }
    auto mr = check_multiplicativity(w, pairs, 1e-9 * scale);
    r.max_dev = mr.max_deviation;
    for (const auto& [x, y] : mr.witnesses) r.witnesses.push_back("B1=" + x.str() + " B2=" + y.str());
    // rho(g)^N = I on the torus generators
    const TorusRep& tr = an().rep();
    double gen_dev = 0.0;
    for (std::size_t i = 0; i < ctx.torus().generators().size(); ++i) {
      std::size_t g = *ctx.torus().index_of(ctx.torus().generators()[i]);
      DenseMatrix m = torusq::detail::matrix_power(tr.op(g), ctx.torus().orders()[i]);
      gen_dev = std::max(gen_dev, (m - DenseMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff());
    }
    r.max_dev = std::max(r.max_dev, gen_dev);
    if (gen_dev > 1e-9) r.witnesses.push_back("rho(g)^N != I, deviation " + std::to_string(gen_dev));
    r.status = detail::status_of(mr.failures == 0 && gen_dev <= 1e-9);
    std::ostringstream note;
    note << mr.pairs << " pairs; |rho(g)^N - I| <= " << gen_dev << " on the torus generators";
    r.note = note.str();
  });

  run("decomposition", [&](CheckResult& r) {
    const auto& dec = an().decomposition();
    const bool anisotropic_or_rank_one =
        pm.n() == 1 || std::all_of(ctx.torus().factors().begin(), ctx.torus().factors().end(),
                                   [](const TorusFactor& f) { return f.anisotropic; });
    std::size_t max_dim = 0;
    for (const auto& s : dec.spaces)
      if (!s.chi.trivial()) max_dim = std::max(max_dim, s.dimension());
    r.max_dev = std::max({dec.max_idempotency_defect, dec.completeness_defect, dec.max_eigen_residual, dec.max_trace_rank_defect});
    r.max_ratio = static_cast<double>(max_dim);
    bool ok = dec.total_dimension == pm.dim() && r.max_dev < 1e-8;
    if (dec.total_dimension != pm.dim())
      r.witnesses.push_back("sum of dimensions " + std::to_string(dec.total_dimension) + " != " + std::to_string(pm.dim()));
    std::string dims;
    for (auto d : dec.dimensions()) dims += std::to_string(d);
    if (max_dim > 1) {
      std::string where = "characters with dim > 1:";
      for (auto i : dec.exceptional()) where += " " + std::to_string(i);
      r.witnesses.push_back(where);
      ok = ok && !anisotropic_or_rank_one;
    }
    r.status = detail::status_of(ok);
    r.note = "dims " + (dims.size() > 64 ? dims.substr(0, 64) + "..." : dims) +
             (anisotropic_or_rank_one ? "" : "; torus has a split factor, dim <= 1 rule not applicable");
  });

  run("bound", [&](CheckResult& r) {
    auto b = verify_que_bound(an());
    rep.max_abs_over_sqrt = b.max_ratio;
    r.max_ratio = b.max_abs / b.bound;
    r.max_dev = std::max({b.xi0_defect, b.parseval_defect, b.eigen_identity_defect});
    for (const auto& v : b.violations) r.witnesses.push_back("p=" + std::to_string(p) + " " + v.str());
    r.status = detail::status_of(b.pass());
    std::ostringstream note;
    note << b.checked << " (xi, chi); " << b.violation_count << " over 2^n p^{n/2} (" << b.trivial_chi_violations
         << " at chi = 1); eigenvector max " << b.eigen_max << " vs 2^n p^{n/2}/|T| = " << b.eigen_bound
         << " and 2^n p^{-n/2} = " << b.eigen_bound_unabsorbed << "; averaged max ratio " << b.averaged_max_ratio;
    r.note = note.str();
  });

  run("refined", [&](CheckResult& r) {
    auto rb = refined_bound(an());
    if (!rb.applicable) {
      r.status = "skipped";
      r.note = rb.reason;
      return;
    }
    for (std::size_t m = 0; m < rb.max_by_m.size(); ++m)
      if (rb.generic_by_m[m] > 0) r.max_ratio = std::max(r.max_ratio, rb.max_by_m[m] / rb.bound_by_m[m]);
    for (const auto& v : rb.violations) r.witnesses.push_back("p=" + std::to_string(p) + " " + v.str());
    r.status = detail::status_of(rb.pass());
    std::ostringstream note;
    note << "generic max |a| by m:";
    for (std::size_t m = 0; m < rb.max_by_m.size(); ++m) note << " m=" << m << ":" << rb.max_by_m[m] << "/" << rb.bound_by_m[m];
    note << "; non-generic max ratio " << rb.nongeneric_max_ratio << " (recorded)";
    r.note = note.str();
  });

  run("trace-formula", [&](CheckResult& r) {
    if (pm.n() != 1 || !ctx.torus().split().split()) {
      r.status = "skipped";
      r.note = "needs n = 1 and a split prime";
      return;
    }
    auto tf = check_trace_formula(ctx.weil(), measure_trace_orientation(p));
    r.max_dev = tf.max_deviation;
    r.witnesses = tf.witnesses;
    r.status = detail::status_of(tf.max_deviation <= 1e-10);
    r.note = std::to_string(tf.checked) + " (lambda, mu, a), orientation " + std::to_string(tf.eps_prime);
  });

  run("factorization", [&](CheckResult& r) {
    auto f = factorization_check(an(), measure_trace_orientation(p));
    if (!f.applicable) {
      r.status = "skipped";
      r.note = f.reason;
      return;
    }
    r.max_dev = f.max_rel_deviation;
    r.max_ratio = f.generic_fraction();
    r.status = detail::status_of(f.pass());
    std::ostringstream note;
    note << "generic raw " << f.generic_raw_matches << "/" << f.generic_pairs << ", reconciled " << f.reconciled_matches << "/"
         << f.all_pairs;
    r.note = note.str();
  });

  run("demo", [&](CheckResult& r) {
    std::vector<Residue> xi(static_cast<std::size_t>(2 * pm.n()), 0);
    xi[0] = 1;
    auto d = cyclic_vs_hecke_demo(an(), xi);
    for (const auto& row : d.rows) {
      r.max_ratio = std::max(r.max_ratio, std::abs(row.hecke_average) / d.bound);
      r.max_dev = std::max(r.max_dev, std::abs(row.cyclic_average - row.hecke_average));
    }
    r.status = detail::status_of(d.bound_violations == 0);
    r.note = "|<A>| = " + std::to_string(d.cyclic_order) + ", |C_A| = " + std::to_string(d.torus_order) + ", " +
             std::to_string(d.rows.size()) + " vectors; max_dev is the largest gap between the two averages";
  });

  run("twist", [&](CheckResult& r) {
    HeckeAnalysis other(ctx, {RootChoice::kPositiveTrace, {1, 0}});
    r.max_dev = twist_invariance_deviation(an(), other);
    r.status = detail::status_of(r.max_dev <= 1e-8);
    r.note = "reference-sign vs shifted positive-trace linearization";
  });

  return rep;
}

/// Sweeps the odd primes in [pmin, pmax]; degenerate primes are skipped and
/// listed. Primes run in parallel; the report order is the prime order.
inline SweepResult run_sweep(const SweepConfig& cfg) {
  validate_config(cfg);
  ErgodicElement a = resolve_matrix(cfg.matrix, cfg.n);
  SweepResult out;
  out.config = cfg;
  out.matrix = a.matrix().matrix().csv();
  out.relation_sign = measure_relation_sign(PrimeModulus(3, 1));
  out.trace_orientation = measure_trace_orientation(5);
  std::vector<Residue> primes;
  for (Residue p : odd_primes_in(cfg.pmin, cfg.pmax)) {
    if (!nondegenerate_mod_p(a.matrix().matrix(), a.charpoly(), p)) {
      out.skipped.push_back({p, "degenerate: A mod p is not regular or P_A mod p has a repeated factor"});
      continue;
    }
    primes.push_back(p);
  }
  out.reports.resize(primes.size());
  unsigned workers = cfg.threads ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, primes.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < primes.size(); i = next++) out.reports[i] = run_prime(a, primes[i], cfg);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

// ---------------------------------------------------------------------------
// output
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json check_to_json(const CheckResult& c, bool deterministic) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["status"] = c.status;
  j["max_dev"] = c.max_dev;
  j["max_ratio"] = c.max_ratio;
  j["witnesses"] = c.witnesses;
  j["millis"] = deterministic ? 0.0 : c.millis;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline nlohmann::ordered_json report_to_json(const PrimeReport& r, bool deterministic) {
  nlohmann::ordered_json j;
  j["p"] = r.p;
  j["n"] = r.n;
  j["split_type"] = r.split_type;
  j["torus_order"] = r.torus_order;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) j["checks"].push_back(check_to_json(c, deterministic));
  return j;
}

inline nlohmann::ordered_json sweep_to_json(const SweepResult& s) {
  nlohmann::ordered_json j;
  j["matrix"] = s.matrix;
  j["n"] = s.config.n;
  j["pmin"] = s.config.pmin;
  j["pmax"] = s.config.pmax;
  j["seed"] = s.config.seed;
  j["checks"] = std::vector<std::string>(s.config.checks.begin(), s.config.checks.end());
  j["relation_sign"] = s.relation_sign;
  j["trace_orientation"] = s.trace_orientation;
  j["status"] = s.ok() ? "pass" : "fail";
  j["reports"] = nlohmann::ordered_json::array();
  for (const auto& r : s.reports) j["reports"].push_back(report_to_json(r, s.config.deterministic));
  j["skipped"] = nlohmann::ordered_json::array();
  for (const auto& k : s.skipped) j["skipped"].push_back({{"p", k.p}, {"reason", k.reason}});
  return j;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// One row per (p, check).
inline void write_summary_csv(std::ostream& os, const SweepResult& s) {
  os << "p,n,split_type,torus_order,check,status,max_dev,max_ratio,millis\n";
  os << std::setprecision(10);
  for (const auto& r : s.reports)
    for (const auto& c : r.checks)
      os << r.p << ',' << r.n << ',' << csv_escape(r.split_type) << ',' << r.torus_order << ',' << c.name << ',' << c.status
         << ',' << c.max_dev << ',' << c.max_ratio << ',' << (s.config.deterministic ? 0.0 : c.millis) << '\n';
}

struct PlotRow {
  Residue p;
  double max_over_sqrt;  ///< max |a_chi| / p^{n/2}
  double constant;       ///< 2^n
};

/// Rows from the bound check of each report that ran it.
inline std::vector<PlotRow> plot_rows(const std::vector<PrimeReport>& reports) {
  std::vector<PlotRow> out;
  for (const auto& r : reports)
    for (const auto& c : r.checks)
      if (c.name == "bound" && c.status != "aborted")
        out.push_back({r.p, c.max_ratio * std::pow(2.0, r.n), std::pow(2.0, r.n)});
  return out;
}

/// The same rows from a JSON report written by sweep.
inline std::vector<PlotRow> plot_rows(const nlohmann::json& j) {
  std::vector<PlotRow> out;
  for (const auto& r : j.at("reports")) {
    int n = r.at("n").get<int>();
    for (const auto& c : r.at("checks"))
      if (c.at("name") == "bound" && c.at("status") != "aborted")
        out.push_back({r.at("p").get<Residue>(), c.at("max_ratio").get<double>() * std::pow(2.0, n), std::pow(2.0, n)});
  }
  return out;
}

inline void write_plotdata(std::ostream& os, const std::vector<PlotRow>& rows) {
  os << "p,max_abs_a_over_p_half_n,bound_constant\n";
  os << std::setprecision(12);
  for (const auto& r : rows) os << r.p << ',' << r.max_over_sqrt << ',' << r.constant << '\n';
}

}  // namespace torusq
