#pragma once

// Pointwise principal symbols of the linearized operators: the energy
// gradient, its gauge correction, the gauged combination, the Laplacian
// flow right-hand side, and the orbit map.  Each symbol is assembled as a
// dense matrix in the lex coefficient basis by running the defining
// algebraic formula over basis forms; definiteness statements are
// quadratic-form statements in the metric induced by the structure.

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "g2flow/g2.hpp"
#include "g2flow/rng.hpp"

namespace g2flow {

enum class FlowKind { dirichlet, deturck, laplacian };

std::string to_string(FlowKind kind);

enum class SymbolSign {
  negative,        // quadratic form < 0 away from zero
  negative_semi,   // <= 0 with nontrivial kernel
  indefinite,
  positive_semi,
  positive,
  rectangular,     // non-square map; definiteness does not apply
};

std::string to_string(SymbolSign sign);

struct SymbolClassification {
  SymbolSign sign = SymbolSign::indefinite;
  // Null-space dimension: #{singular values < 1e-9 * largest}.
  int kernel_dim = 0;
  // Square maps: extreme eigenvalues of the symmetric part, taken as a
  // quadratic form in the structure's inner product.  Rectangular maps:
  // extreme singular values instead.
  double sym_min = 0.0;
  double sym_max = 0.0;
};

struct SymbolMatrix {
  Eigen::MatrixXd mat;  // 35x35 endomorphism of 3-forms, or 35x7 orbit map
  double xi_norm = 0.0;  // |xi| in the structure's metric
  SymbolClassification cls;
};

// Recomputes the classification of a symbol matrix against the metric of
// s.  The domain degree is deduced from the column count (35 -> 3-forms,
// 7 -> covectors).
SymbolClassification classify_symbol(const Eigen::MatrixXd& mat,
                                     const G2Structure& s);

// Symbol of the linearized energy gradient:
//   w |-> -xi .| (xi ^ w) - p(xi ^ (xi .| p(w))).
// Negative semidefinite with a 7-dimensional kernel for xi != 0.
SymbolMatrix symbol_gradient(const G2Structure& s, const AlternatingForm& xi);

// Symbol of the gauge correction alone:
//   w |-> -xi ^ (((xi .| w) .| omega) .| omega)  ==  -3 xi ^ [xi .| w]_7.
SymbolMatrix symbol_gauge(const G2Structure& s, const AlternatingForm& xi);

// Symbol of the gauged gradient (sum of the two above).  For |xi| = 1 the
// quadratic form of -sigma is bounded below by the identity.
SymbolMatrix symbol_deturck(const G2Structure& s, const AlternatingForm& xi);

// Symbol of the linearized Hodge-Laplacian flow right-hand side:
//   w |-> |xi|^2 w + xi ^ (xi .| ([w]_1 / 3 - 2 [w]_27)).
// Indefinite: mixed forward/backward heat behavior.
SymbolMatrix symbol_laplacian_flow(const G2Structure& s,
                                   const AlternatingForm& xi);

// Symbol of the orbit map, 35x7 on covector components:
//   v |-> xi ^ (v .| omega).
// Injective for xi != 0; image contained in ker symbol_gradient.
SymbolMatrix symbol_orbit_map(const G2Structure& s, const AlternatingForm& xi);

// Largest |eigenvalue| of the symmetric part of the kind's symbol over all
// unit covectors.  The structure group acts transitively on unit covectors
// and the symbols are equivariant, so this is a single universal constant
// per kind; it feeds the parabolic step-size bound of the flow driver.
double symbol_spectral_bound(FlowKind kind);

// One-line JSON record of a classification for batch reports.
std::string symbol_record_json(const SymbolMatrix& sm, std::uint64_t seed);

// Randomized sweep over frames (GL-perturbed structures) and unit
// covectors; aggregates the pinned properties of all four operators.
struct SymbolBatterySummary {
  int samples = 0;
  int gradient_sign_failures = 0;    // gradient symbol not negative semi
  int gradient_kernel_failures = 0;  // gradient kernel dimension != 7
  int laplacian_sign_failures = 0;   // flow symbol not indefinite
  int laplacian_kernel_failures = 0; // flow symbol kernel dimension != 7
  int orbit_rank_failures = 0;       // orbit symbol not injective
  double deturck_min_margin = 0.0;   // min over samples of -sym_max, |xi|=1
  double max_qf_residual = 0.0;      // gradient quadratic-form identity
  double max_composition_residual = 0.0;  // gradient o orbit, relative
  bool pass() const;
};

SymbolBatterySummary symbol_battery(int samples, std::uint64_t seed);

}  // namespace g2flow
