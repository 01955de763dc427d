//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <random>
#include <string>
#include <vector>

#include "molrange/chem/molecule.hpp"

namespace molrange::testing {

/// Random connected acyclic-or-cyclic heavy-atom graph over C, N, O, S, F
/// and Cl with single and double bonds and hydrogens filling the lowest
/// valence. Atom count is uniform in [1, max_atoms].
chem::MolecularGraph random_molecule(std::mt19937_64 &rng, int max_atoms);

std::vector<int> random_permutation(int n, std::mt19937_64 &rng);

/// Backtracking search for a label- and bond-order-preserving bijection.
bool isomorphic(const chem::MolecularGraph &a, const chem::MolecularGraph &b);

/// SMILES lines of the bundled corpus.
std::vector<std::string> corpus_smiles();

std::string data_path(const std::string &name);

}  // namespace molrange::testing
