// Averages of <pi(xi) v, v> over the cyclic group <A> and over the full
// centralizer torus C_A, for Hecke eigenvectors and for mixtures of them.
//
// On a Hecke eigenvector both averages agree with the matrix element itself.
// When <A> is a proper subgroup of C_A, a mixture of eigenvectors that share
// the eigenvalue of A is still an eigenvector of rho(A), but its cyclic
// average keeps the cross terms between characters that the torus average
// removes.
//
//   cyclic_vs_hecke [p ...]      (default: 7 29)

#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "torusq/quevaluator.hpp"

using namespace torusq;

int main(int argc, char** argv) {
  std::vector<Residue> primes;
  for (int i = 1; i < argc; ++i) primes.push_back(std::atoll(argv[i]));
  if (primes.empty()) primes = {7, 29};
  const ErgodicElement a = cat_map();
  for (Residue p : primes) {
    if (!is_prime(p) || p < 3 || !nondegenerate_mod_p(a.matrix().matrix(), a.charpoly(), p)) {
      std::cout << "p=" << p << ": not an odd non-degenerate prime for the cat map, skipped\n";
      continue;
    }
    HeckeContext ctx(a, p);
    HeckeAnalysis an(ctx);
    auto d = cyclic_vs_hecke_demo(an, {1, 0});
    std::cout << "p=" << p << "  " << ctx.torus().split().label() << "  |<A>|=" << d.cyclic_order
              << "  |C_A|=" << d.torus_order << "  eigenvector bound " << std::setprecision(4) << d.bound << "\n";
    for (const auto& row : d.rows)
      std::cout << "  " << std::left << std::setw(7) << row.kind << std::setw(40) << row.label << std::right
                << "  <A>: " << std::setw(9) << std::abs(row.cyclic_average) << "  C_A: " << std::setw(9)
                << std::abs(row.hecke_average) << "\n";
    std::cout << "  vectors over the bound: " << d.bound_violations << "\n\n";
  }
  return 0;
}
