//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <vector>

#include "molrange/chem/molecule.hpp"

namespace molrange::chem {

struct Ring {
  std::vector<int> atoms;  // in cycle order
  std::vector<int> bonds;

  int size() const { return static_cast<int>(atoms.size()); }
};

struct RingInfo {
  std::vector<Ring> rings;  // a minimum cycle basis, shortest first
  std::vector<bool> atom_in_ring;
  std::vector<bool> bond_in_ring;
};

/// Minimum cycle basis (Horton candidate set + GF(2) elimination). The basis
/// size is always bonds - atoms + components.
RingInfo ring_perception(const MolecularGraph &mol);

}  // namespace molrange::chem
