//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>

#include "molrange/error.hpp"

namespace molrange {

using chem::MolecularGraph;

std::uint64_t atom_invariant_hash(const MolecularGraph &mol, int atom) {
  const chem::Atom &a = mol.atom(atom);
  int heavy_degree = 0;
  int hydrogens = a.total_h();
  for (const chem::Neighbor &n: mol.neighbors(atom)) {
    if (mol.atom(n.atom).atomic_number == 1)
      ++hydrogens;
    else
      ++heavy_degree;
  }
  std::uint64_t h = hash_combine(0, static_cast<std::uint64_t>(a.atomic_number));
  h = hash_combine(h, static_cast<std::uint64_t>(a.formal_charge + 128));
  h = hash_combine(h, static_cast<std::uint64_t>(heavy_degree));
  h = hash_combine(h, a.aromatic ? 1U : 0U);
  h = hash_combine(h, static_cast<std::uint64_t>(hydrogens));
  return h;
}

std::uint64_t grow_identifier(int radius, std::uint64_t center,
                              std::vector<std::pair<int, std::uint64_t>> nbrs) {
  std::sort(nbrs.begin(), nbrs.end());
  std::uint64_t h = hash_combine(static_cast<std::uint64_t>(radius), center);
  for (auto [order, id]: nbrs) {
    h = hash_combine(h, static_cast<std::uint64_t>(order));
    h = hash_combine(h, id);
  }
  return h;
}

Fingerprint::Fingerprint(int n_bits, int radius)
    : n_bits_(n_bits), radius_(radius), words_((n_bits + 63) / 64, 0) { }

void Fingerprint::set(int bit) {
  words_[bit / 64] |= std::uint64_t { 1 } << (bit % 64);
}

bool Fingerprint::test(int bit) const {
  return (words_[bit / 64] >> (bit % 64)) & 1U;
}

int Fingerprint::popcount() const {
  int n = 0;
  for (std::uint64_t w: words_)
    n += std::popcount(w);
  return n;
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> bits;
  for (int i = 0; i < n_bits_; ++i) {
    if (test(i))
      bits.push_back(i);
  }
  return bits;
}

std::string Fingerprint::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(n_bits_ / 4);
  for (int nibble = n_bits_ / 4 - 1; nibble >= 0; --nibble) {
    int v = 0;
    for (int b = 3; b >= 0; --b)
      v = (v << 1) | (test(nibble * 4 + b) ? 1 : 0);
    hex += kDigits[v];
  }
  return hex;
}

Fingerprint Fingerprint::from_hex(std::string_view hex, int radius) {
  Fingerprint fp(static_cast<int>(hex.size()) * 4, radius);
  const int nibbles = static_cast<int>(hex.size());
  for (int i = 0; i < nibbles; ++i) {
    char c = hex[i];
    int v;
    if (c >= '0' && c <= '9')
      v = c - '0';
    else if (c >= 'a' && c <= 'f')
      v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F')
      v = c - 'A' + 10;
    else
      throw Error(ErrorKind::kFormat, "invalid hex digit in fingerprint");
    const int nibble = nibbles - 1 - i;
    for (int b = 0; b < 4; ++b) {
      if ((v >> b) & 1)
        fp.set(nibble * 4 + b);
    }
  }
  return fp;
}

std::vector<AtomEnvironment> enumerate_environments(const MolecularGraph &mol,
                                                    int radius) {
  const int n = mol.num_atoms();
  std::vector<AtomEnvironment> out;
  std::vector<std::uint64_t> ids(n);
  std::vector<std::vector<int>> balls(n);
  std::set<std::vector<int>> covered;

  for (int i = 0; i < n; ++i) {
    ids[i] = atom_invariant_hash(mol, i);
    balls[i] = { i };
    covered.insert(balls[i]);
    out.push_back({ i, 0, ids[i], balls[i] });
  }

  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next_ids(n);
    std::vector<std::vector<int>> next_balls(n);
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, std::uint64_t>> nbrs;
      std::vector<int> ball = balls[i];
      for (const chem::Neighbor &nb: mol.neighbors(i)) {
        nbrs.emplace_back(static_cast<int>(mol.bond(nb.bond).order),
                          ids[nb.atom]);
        ball.insert(ball.end(), balls[nb.atom].begin(), balls[nb.atom].end());
      }
      std::sort(ball.begin(), ball.end());
      ball.erase(std::unique(ball.begin(), ball.end()), ball.end());
      next_ids[i] = grow_identifier(r, ids[i], std::move(nbrs));
      next_balls[i] = std::move(ball);
    }

    // Same-radius duplicates keep the smallest identifier (lowest center
    // index on identifier ties).
    std::map<std::vector<int>, int> best;
    for (int i = 0; i < n; ++i) {
      if (covered.count(next_balls[i]))
        continue;
      auto [it, inserted] = best.emplace(next_balls[i], i);
      if (!inserted) {
        int j = it->second;
        if (next_ids[i] < next_ids[j]
            || (next_ids[i] == next_ids[j] && i < j))
          it->second = i;
      }
    }
    std::vector<int> winners;
    for (const auto &[ball, i]: best)
      winners.push_back(i);
    std::sort(winners.begin(), winners.end());
    for (int i: winners) {
      covered.insert(next_balls[i]);
      out.push_back({ i, r, next_ids[i], next_balls[i] });
    }

    ids = std::move(next_ids);
    balls = std::move(next_balls);
  }
  return out;
}

Fingerprint morgan_fingerprint(const MolecularGraph &mol, int radius,
                               int n_bits) {
  if (mol.empty())
    throw Error(ErrorKind::kEmptyMolecule, "fingerprint of empty molecule");
  if (radius < 0)
    throw Error(ErrorKind::kInvalidArgument, "negative fingerprint radius");
  if (n_bits < 64 || !std::has_single_bit(static_cast<unsigned>(n_bits)))
    throw Error(ErrorKind::kInvalidArgument,
                "fingerprint width must be a power of two >= 64");

  Fingerprint fp(n_bits, radius);
  for (const AtomEnvironment &env: enumerate_environments(mol, radius))
    fp.set(static_cast<int>(env.identifier % static_cast<std::uint64_t>(n_bits)));
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.n_bits() != b.n_bits())
    throw Error(ErrorKind::kWidthMismatch,
                std::to_string(a.n_bits()) + " vs " + std::to_string(b.n_bits()));
  int both = 0, either = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w) {
    both += std::popcount(a.words()[w] & b.words()[w]);
    either += std::popcount(a.words()[w] | b.words()[w]);
  }
  if (either == 0)
    return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace molrange
