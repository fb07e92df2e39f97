// Umbrella header for the hdivsym library: H(div,S)-conforming symmetric
// stress elements of degree k with discontinuous P_{k-1} displacements on
// simplicial meshes in R^n.

#ifndef HDIVSYM_HDIVSYM_HPP
#define HDIVSYM_HDIVSYM_HPP

#include "hdivsym/analysis.hpp"
#include "hdivsym/assembly.hpp"
#include "hdivsym/combinat.hpp"
#include "hdivsym/elements.hpp"
#include "hdivsym/geometry.hpp"
#include "hdivsym/polynomial.hpp"
#include "hdivsym/symtensor.hpp"
#include "hdivsym/verification.hpp"

#endif  // HDIVSYM_HDIVSYM_HPP
