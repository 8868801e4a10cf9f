#pragma once

// SU(3) refinement of the type decomposition relative to a unit covector.

#include "g2flow/g2.hpp"

namespace g2flow {

struct Su3Frame {
  AlternatingForm xi;         // the unit covector
  AlternatingForm omega2;     // xi .| form
  AlternatingForm psi_plus;   // form - omega2 ^ xi
  AlternatingForm psi_minus;  // fixed by theta = psi_minus ^ xi + omega2^2/2
};

// Requires |xi| = 1 in the induced metric (within 1e-8); throws otherwise.
Su3Frame su3_frame(const G2Structure& s, const AlternatingForm& xi);

// Components of a 3-form in the refined decomposition
//   tdot = a (omega ^ xi + psi+)                                 [1_1]
//        + b psi-  + (X .| psi-) ^ xi + (X .| omega) ^ omega     [7-block]
//        + c (-4 omega ^ xi + 3 psi+)                            [1_27]
//        + (Y .| psi-) ^ xi - (Y .| omega) ^ omega               [6_27]
//        + beta8 ^ xi + gamma12.                                 [8 + 12]
struct Su3Components {
  double a = 0.0, b = 0.0, c = 0.0;
  AlternatingForm X{1}, Y{1};        // covectors orthogonal to xi
  AlternatingForm beta8{2};          // primitive (1,1) part
  AlternatingForm gamma12{3};        // residual 12-dimensional part
};

Su3Components su3_decompose(const G2Structure& s, const Su3Frame& frame,
                            const AlternatingForm& tdot);

AlternatingForm su3_reassemble(const G2Structure& s, const Su3Frame& frame,
                               const Su3Components& comp);

}  // namespace g2flow
