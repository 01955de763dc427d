//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <vector>

#include "molrange/chem/molecule.hpp"

namespace molrange::chem {

/// Stable equivalence classes from iterated neighborhood refinement, starting
/// from (element, isotope, charge, degree, aromatic, hydrogens). Class ids
/// are dense and ordered by invariant, so they do not depend on atom order.
std::vector<int> refine_classes(const MolecularGraph &mol);

/// A total order of atoms (ranks 0..n-1) that is invariant under atom
/// permutation. Ties left by refinement are broken by splitting the
/// lowest tied class and refining again.
std::vector<int> canonical_ranks(const MolecularGraph &mol);

}  // namespace molrange::chem
