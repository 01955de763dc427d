//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "molrange/chem/molecule.hpp"

namespace molrange::chem {

enum class ParseErrorKind {
  kEmptyInput,
  kUnclosedRing,
  kUnbalancedParenthesis,
  kUnknownElement,
  kValenceViolation,
  kUnexpectedCharacter,
  kInvalidBond,
  kInvalidBracketAtom,
};

std::string_view parse_error_name(ParseErrorKind kind);

struct ParseDiagnostic {
  ParseErrorKind kind;
  std::size_t position;  // offset into the input; 0 for empty input
  std::string message;
};

/// Either a parsed graph or the first diagnostic encountered.
class ParseResult {
public:
  ParseResult(MolecularGraph mol): value_(std::move(mol)) { }
  ParseResult(ParseDiagnostic diag): value_(std::move(diag)) { }

  bool ok() const { return value_.index() == 0; }
  explicit operator bool() const { return ok(); }

  const MolecularGraph &value() const & {
    return std::get<MolecularGraph>(value_);
  }
  MolecularGraph &&value() && {
    return std::get<MolecularGraph>(std::move(value_));
  }
  const ParseDiagnostic &error() const {
    return std::get<ParseDiagnostic>(value_);
  }

private:
  std::variant<MolecularGraph, ParseDiagnostic> value_;
};

/// Parses the supported SMILES subset: organic-subset and bracket atoms,
/// bonds - = # : (/ and \ read as single), ring closures 1-9 and %nn,
/// branches and dot-separated fragments. Chirality marks are read and
/// dropped.
ParseResult parse_smiles(std::string_view input);

/// SMILES following atom index order. Aromatic atoms are written in
/// lowercase; re-parsing yields an isomorphic graph.
std::string write_smiles(const MolecularGraph &mol);

/// Atom-order independent SMILES.
std::string canonical_smiles(const MolecularGraph &mol);

/// Emits SMILES visiting atoms by ascending `priority` (a permutation of
/// 0..n-1). Both writers above are thin wrappers around this.
std::string emit_smiles(const MolecularGraph &mol,
                        const std::vector<int> &priority);

/// Convenience: parse and validate valence; nullopt when either fails.
std::optional<std::string> canonicalize(std::string_view smiles);

struct SmilesRecord {
  std::size_t line;  // 1-based
  std::string smiles;
};

/// Newline-delimited SMILES: blank lines and '#' comments are skipped; the
/// first whitespace-separated field of each line is the SMILES.
std::vector<SmilesRecord> read_smiles(std::istream &is);
std::vector<SmilesRecord> read_smiles_file(const std::filesystem::path &path);

}  // namespace molrange::chem
