// torusq_cli: command-line front end for the sweep engine.
//
//   torusq_cli validate --n 2 --matrix auto-sp4 --pmin 3 --pmax 13
//   torusq_cli quantize --pmin 7 --symbol "1,0:0.5;-1,0:0.5"
//   torusq_cli sweep    --pmin 3 --pmax 97 --checks bound,refined --out-json r.json --out-csv r.csv
//   torusq_cli demo     --pmin 7 --pmax 13
//   torusq_cli plotdata --in-json r.json --out-csv plot.csv
//
// Exit status: 0 when every assertion passes, 1 on an assertion failure,
// 2 on a configuration error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "torusq/sweep.hpp"

using namespace torusq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitConfig = 2;

struct Options {
  SweepConfig cfg;
  std::string checks = "all";
  std::string symbol;
  std::string in_json;
  bool matrix_given = false;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  return os;
}

void finalize(Options& o, const CLI::App& app) {
  o.cfg.checks = parse_checks(o.checks);
  o.matrix_given = app.count("--matrix") > 0;
  if (!o.matrix_given) o.cfg.matrix = o.cfg.n == 1 ? "cat" : "auto-sp4";
  if (app.count("--pmax") == 0 && app.count("--pmin") > 0) o.cfg.pmax = std::max(o.cfg.pmax, o.cfg.pmin);
}

/// "k_1,...,k_2n:re[:im];..." into a trigonometric polynomial.
FourierPolynomial parse_symbol(const std::string& text, int n) {
  FourierPolynomial f;
  std::stringstream terms(text);
  std::string term;
  while (std::getline(terms, term, ';')) {
    if (term.find_first_not_of(' ') == std::string::npos) continue;
    std::stringstream parts(term);
    std::string freq, re, im = "0";
    if (!std::getline(parts, freq, ':') || !std::getline(parts, re, ':')) throw ConfigError("symbol term '" + term + "' needs k:re");
    std::getline(parts, im, ':');
    LatticeVector k;
    std::stringstream ks(freq);
    std::string c;
    try {
      while (std::getline(ks, c, ',')) k.push_back(std::stoll(c));
      if (k.size() != static_cast<std::size_t>(2 * n)) throw ConfigError("symbol frequency '" + freq + "' must have 2n entries");
      f[k] += Complex(std::stod(re), std::stod(im));
    } catch (const std::invalid_argument&) {
      throw ConfigError("symbol term '" + term + "' is not numeric");
    }
  }
  if (f.empty()) throw ConfigError("empty symbol");
  return f;
}

int cmd_validate(const Options& o) {
  ErgodicElement a = resolve_matrix(o.cfg.matrix, o.cfg.n);
  std::cout << "matrix      " << a.matrix().matrix().str() << "\n";
  std::cout << "charpoly    " << a.charpoly() << "\n";
  std::cout << "status      accepted (symplectic, irreducible over Q, no root-of-unity eigenvalue)\n";
  for (Residue p : odd_primes_in(o.cfg.pmin, o.cfg.pmax)) {
    SplitType s = split_type(a.charpoly(), p);
    bool ok = nondegenerate_mod_p(a.matrix().matrix(), a.charpoly(), p);
    std::cout << "p=" << p << "  " << (ok ? s.label() : "degenerate " + s.label()) << "\n";
  }
  return kExitOk;
}

int cmd_quantize(const Options& o) {
  const Residue p = o.cfg.pmin;
  if (!is_prime(p) || p < 3) throw ConfigError("quantize uses --pmin as the prime; it must be an odd prime");
  PrimeModulus pm(p, o.cfg.n);
  FourierPolynomial f = o.symbol.empty() ? que_fixtures(o.cfg.n).front().f : parse_symbol(o.symbol, o.cfg.n);
  QOperator q = quantize(f, pm);
  Complex mean = q.trace() / static_cast<double>(pm.dim());
  auto sa = check_self_adjoint(f, pm);
  std::cout << "p=" << p << " n=" << o.cfg.n << " dim=" << pm.dim() << "\n";
  std::cout << "Tr/p^n      " << mean.real() << (mean.imag() >= 0 ? "+" : "") << mean.imag() << "i\n";
  std::cout << "integral    " << integral(f).real() << (integral(f).imag() >= 0 ? "+" : "") << integral(f).imag() << "i\n";
  std::cout << "hermitian   " << sa.hermitian_defect << "\n";
  if (!o.cfg.out_csv.empty()) {
    auto os = open_out(o.cfg.out_csv);
    os << "row,col,re,im\n" << std::setprecision(17);
    DenseMatrix m = q.to_dense();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        if (std::abs(m(r, c)) > 0) os << r << ',' << c << ',' << m(r, c).real() << ',' << m(r, c).imag() << '\n';
  }
  return std::abs(mean - integral(f)) < 1e-10 ? kExitOk : kExitAssertion;
}

int cmd_sweep(const Options& o) {
  SweepResult s = run_sweep(o.cfg);
  for (const auto& k : s.skipped) std::cout << "p=" << k.p << " skipped: " << k.reason << "\n";
  for (const auto& r : s.reports) {
    std::cout << "p=" << r.p << " " << r.split_type << " |T|=" << r.torus_order << "\n";
    for (const auto& c : r.checks) {
      std::cout << "  " << std::left << std::setw(17) << c.name << std::setw(8) << c.status << " max_dev=" << c.max_dev
                << " max_ratio=" << c.max_ratio;
      if (!o.cfg.deterministic) std::cout << " " << static_cast<long long>(c.millis) << "ms";
      std::cout << "\n";
      if (!c.note.empty()) std::cout << "      " << c.note << "\n";
      if (!c.ok())
        for (const auto& w : c.witnesses) std::cout << "      witness: " << w << "\n";
    }
  }
  std::cout << (s.ok() ? "all checks passed" : "assertion failures") << "\n";
  if (!o.cfg.out_json.empty()) open_out(o.cfg.out_json) << sweep_to_json(s).dump(2) << "\n";
  if (!o.cfg.out_csv.empty()) {
    auto os = open_out(o.cfg.out_csv);
    write_summary_csv(os, s);
  }
  return s.exit_code();
}

int cmd_demo(const Options& o) {
  validate_config(o.cfg);
  ErgodicElement a = resolve_matrix(o.cfg.matrix, o.cfg.n);
  std::ofstream csv;
  if (!o.cfg.out_csv.empty()) {
    csv = open_out(o.cfg.out_csv);
    csv << "p,kind,label,cyclic_re,cyclic_im,hecke_re,hecke_im,integral,bound\n" << std::setprecision(12);
  }
  bool ok = true;
  for (Residue p : odd_primes_in(o.cfg.pmin, o.cfg.pmax)) {
    if (!nondegenerate_mod_p(a.matrix().matrix(), a.charpoly(), p)) continue;
    HeckeContext ctx(a, p, o.cfg.seed);
    HeckeAnalysis an(ctx);
    std::vector<Residue> xi(static_cast<std::size_t>(2 * o.cfg.n), 0);
    xi[0] = 1;
    auto d = cyclic_vs_hecke_demo(an, xi);
    ok = ok && d.bound_violations == 0;
    std::cout << "p=" << p << " xi=" << detail::xi_string(xi) << " |<A>|=" << d.cyclic_order << " |C_A|=" << d.torus_order
              << " bound=" << d.bound << "\n";
    for (const auto& row : d.rows) {
      std::cout << "  " << std::left << std::setw(7) << row.kind << std::setw(44) << row.label << " <A>-avg |.|="
                << std::abs(row.cyclic_average) << "  C_A-avg |.|=" << std::abs(row.hecke_average) << "\n";
      if (csv)
        csv << p << ',' << row.kind << ',' << csv_escape(row.label) << ',' << row.cyclic_average.real() << ','
            << row.cyclic_average.imag() << ',' << row.hecke_average.real() << ',' << row.hecke_average.imag() << ','
            << row.integral << ',' << d.bound << '\n';
    }
  }
  return ok ? kExitOk : kExitAssertion;
}

int cmd_plotdata(const Options& o) {
  std::vector<PlotRow> rows;
  if (!o.in_json.empty()) {
    std::ifstream is(o.in_json);
    if (!is) throw ConfigError("cannot read '" + o.in_json + "'");
    nlohmann::json j;
    try {
      is >> j;
      rows = plot_rows(j);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad report JSON: ") + e.what());
    }
  } else {
    SweepConfig cfg = o.cfg;
    cfg.checks = {"bound"};
    rows = plot_rows(run_sweep(cfg).reports);
  }
  if (o.cfg.out_csv.empty()) {
    write_plotdata(std::cout, rows);
  } else {
    auto os = open_out(o.cfg.out_csv);
    write_plotdata(os, rows);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite quantization of the torus: Weil representation, Hecke tori and character-sum bounds"};
  app.require_subcommand(1);
  Options o;
  // shared options live on the top-level app; subcommands fall through to them
  app.add_option("--n", o.cfg.n, "half dimension of the torus (1 or 2)")->capture_default_str();
  app.add_option("--matrix", o.cfg.matrix, "cat, auto-sp4, auto-sp4-split or row-major entries");
  app.add_option("--pmin", o.cfg.pmin, "smallest prime")->capture_default_str();
  app.add_option("--pmax", o.cfg.pmax, "largest prime")->capture_default_str();
  app.add_option("--checks", o.checks, "comma-separated checks or 'all'")->capture_default_str();
  app.add_option("--seed", o.cfg.seed, "seed for random elements and intertwiners")->capture_default_str();
  app.add_flag("--deterministic", o.cfg.deterministic, "zero timings in reports for byte-identical output");
  app.add_option("--out-json", o.cfg.out_json, "JSON report path");
  app.add_option("--out-csv", o.cfg.out_csv, "CSV output path");
  app.add_option("--budget-seconds", o.cfg.budget_seconds, "per-prime wall-clock budget")->capture_default_str();
  app.add_option("--threads", o.cfg.threads, "worker threads across primes (0 = hardware)")->capture_default_str();
  app.set_config("--config", "", "key=value configuration file; command-line flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  auto* validate = app.add_subcommand("validate", "check that a matrix is an ergodic symplectic element; list split types");
  auto* quant = app.add_subcommand("quantize", "quantize a trigonometric polynomial at p = pmin");
  auto* sweep = app.add_subcommand("sweep", "run the enabled checks over a prime range");
  auto* demo = app.add_subcommand("demo", "cyclic versus Hecke averaging of matrix elements");
  auto* plot = app.add_subcommand("plotdata", "CSV of (p, max |a_chi| / p^{n/2}, 2^n)");
  for (auto* s : {validate, quant, sweep, demo, plot}) s->fallthrough();
  quant->add_option("--symbol", o.symbol, "terms 'k_1,...,k_2n:re[:im]' separated by ';'");
  plot->add_option("--in-json", o.in_json, "read a sweep JSON report instead of running the bound check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    CLI::App* used = app.get_subcommands().front();
    finalize(o, app);
    if (used == validate) return cmd_validate(o);
    if (used == quant) return cmd_quantize(o);
    if (used == sweep) return cmd_sweep(o);
    if (used == demo) return cmd_demo(o);
    return cmd_plotdata(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DegeneratePrimeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssertion;
  }
}
