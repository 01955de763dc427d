//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "molrange/chem/molecule.hpp"

namespace molrange {

inline constexpr int kDefaultFingerprintBits = 2048;
inline constexpr int kDefaultFingerprintRadius = 2;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Order-dependent fold used for every environment identifier.
constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ (mix64(value) + 0x9e3779b97f4a7c15ULL + (seed << 6)
                       + (seed >> 2)));
}

/// Radius-0 identifier from (atomic number, formal charge, heavy degree,
/// aromatic, total H).
std::uint64_t atom_invariant_hash(const chem::MolecularGraph &mol, int atom);

/// Radius r identifier from the radius r-1 identifier of the center and the
/// sorted (bond order, neighbor identifier) pairs.
std::uint64_t grow_identifier(int radius, std::uint64_t center,
                              std::vector<std::pair<int, std::uint64_t>> nbrs);

class Fingerprint {
public:
  Fingerprint() = default;
  Fingerprint(int n_bits, int radius);

  int n_bits() const { return n_bits_; }
  int radius() const { return radius_; }

  void set(int bit);
  bool test(int bit) const;
  int popcount() const;
  std::vector<int> on_bits() const;

  /// Hex, most significant bit (index n_bits-1) first.
  std::string to_hex() const;
  static Fingerprint from_hex(std::string_view hex, int radius);

  const std::vector<std::uint64_t> &words() const { return words_; }

  friend bool operator==(const Fingerprint &, const Fingerprint &) = default;

private:
  int n_bits_ = 0;
  int radius_ = 0;
  std::vector<std::uint64_t> words_;
};

struct AtomEnvironment {
  int center;
  int radius;
  std::uint64_t identifier;
  std::vector<int> atoms;  // sorted atom indices within `radius` bonds
};

/// All environments for radii 0..radius. A radius r >= 1 environment is kept
/// only if its atom set was not covered by an earlier radius; among equal
/// atom sets at the same radius the smallest identifier is kept.
std::vector<AtomEnvironment>
enumerate_environments(const chem::MolecularGraph &mol, int radius);

/// Throws kEmptyMolecule for graphs without atoms and kInvalidArgument when
/// n_bits is not a power of two >= 64 or radius < 0.
Fingerprint morgan_fingerprint(const chem::MolecularGraph &mol,
                               int radius = kDefaultFingerprintRadius,
                               int n_bits = kDefaultFingerprintBits);

/// |a & b| / |a | b|, 1.0 when both are empty. Throws kWidthMismatch.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

}  // namespace molrange
