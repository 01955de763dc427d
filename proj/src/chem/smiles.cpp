//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/chem/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>

#include "molrange/chem/canon.hpp"
#include "molrange/chem/element.hpp"
#include "molrange/error.hpp"

namespace molrange::chem {

std::string_view parse_error_name(ParseErrorKind kind) {
  switch (kind) {
  case ParseErrorKind::kEmptyInput:
    return "EmptyInput";
  case ParseErrorKind::kUnclosedRing:
    return "UnclosedRing";
  case ParseErrorKind::kUnbalancedParenthesis:
    return "UnbalancedParenthesis";
  case ParseErrorKind::kUnknownElement:
    return "UnknownElement";
  case ParseErrorKind::kValenceViolation:
    return "ValenceViolation";
  case ParseErrorKind::kUnexpectedCharacter:
    return "UnexpectedCharacter";
  case ParseErrorKind::kInvalidBond:
    return "InvalidBond";
  case ParseErrorKind::kInvalidBracketAtom:
    return "InvalidBracketAtom";
  }
  return "Unknown";
}

namespace {

struct PendingBond {
  char symbol;
  std::size_t position;
};

struct OpenRing {
  int atom;
  std::optional<PendingBond> bond;
  std::size_t position;
};

class Parser {
public:
  explicit Parser(std::string_view s): s_(s) { }

  ParseResult run();

private:
  ParseDiagnostic fail(ParseErrorKind kind, std::size_t pos,
                       std::string message) const {
    if (pos >= s_.size() && !s_.empty())
      pos = s_.size() - 1;
    return { kind, pos, std::move(message) };
  }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }

  std::optional<ParseDiagnostic> organic_atom();
  std::optional<ParseDiagnostic> bracket_atom();
  std::optional<ParseDiagnostic> ring_closure();
  std::optional<ParseDiagnostic> attach(int atom, std::size_t atom_pos);
  std::optional<ParseDiagnostic> connect(int a, int b,
                                         std::optional<PendingBond> bond,
                                         std::size_t pos);
  std::optional<int> read_number(int max_digits);

  std::string_view s_;
  std::size_t pos_ = 0;
  MolecularGraph mol_;
  std::vector<bool> bracket_;
  std::vector<std::size_t> atom_pos_;
  int prev_ = -1;
  std::optional<PendingBond> pending_;
  std::vector<std::pair<int, std::size_t>> branches_;
  std::map<int, OpenRing> rings_;
};

std::optional<int> Parser::read_number(int max_digits) {
  int value = 0, n = 0;
  while (n < max_digits && std::isdigit(static_cast<unsigned char>(peek()))) {
    value = value * 10 + (peek() - '0');
    ++pos_;
    ++n;
  }
  if (n == 0)
    return std::nullopt;
  return value;
}

std::optional<ParseDiagnostic> Parser::connect(int a, int b,
                                               std::optional<PendingBond> bond,
                                               std::size_t pos) {
  const bool both_aromatic = mol_.atom(a).aromatic && mol_.atom(b).aromatic;
  BondOrder order = both_aromatic ? BondOrder::kAromatic : BondOrder::kSingle;
  if (bond) {
    switch (bond->symbol) {
    case '-':
    case '/':
    case '\\':
      order = BondOrder::kSingle;
      break;
    case '=':
      order = BondOrder::kDouble;
      break;
    case '#':
      order = BondOrder::kTriple;
      break;
    case ':':
      if (!both_aromatic)
        return fail(ParseErrorKind::kInvalidBond, bond->position,
                    "aromatic bond between non-aromatic atoms");
      order = BondOrder::kAromatic;
      break;
    default:
      return fail(ParseErrorKind::kInvalidBond, bond->position,
                  "unsupported bond symbol");
    }
    pos = bond->position;
  }
  if (a == b)
    return fail(ParseErrorKind::kInvalidBond, pos, "ring closure to self");
  if (mol_.find_bond(a, b))
    return fail(ParseErrorKind::kInvalidBond, pos, "duplicate bond");
  mol_.add_bond(a, b, order);
  return std::nullopt;
}

std::optional<ParseDiagnostic> Parser::attach(int atom, std::size_t atom_pos) {
  if (prev_ >= 0) {
    if (auto err = connect(prev_, atom, pending_, atom_pos))
      return err;
  } else if (pending_) {
    return fail(ParseErrorKind::kInvalidBond, pending_->position,
                "bond without a preceding atom");
  }
  pending_.reset();
  prev_ = atom;
  return std::nullopt;
}

std::optional<ParseDiagnostic> Parser::organic_atom() {
  const std::size_t start = pos_;
  const char c = peek();
  Atom atom;
  int z = 0;
  if (c == 'C' && peek(1) == 'l') {
    z = 17;
    pos_ += 2;
  } else if (c == 'B' && peek(1) == 'r') {
    z = 35;
    pos_ += 2;
  } else {
    switch (c) {
    case 'B':
      z = 5;
      break;
    case 'C':
      z = 6;
      break;
    case 'N':
      z = 7;
      break;
    case 'O':
      z = 8;
      break;
    case 'P':
      z = 15;
      break;
    case 'S':
      z = 16;
      break;
    case 'F':
      z = 9;
      break;
    case 'I':
      z = 53;
      break;
    case 'b':
      z = 5;
      atom.aromatic = true;
      break;
    case 'c':
      z = 6;
      atom.aromatic = true;
      break;
    case 'n':
      z = 7;
      atom.aromatic = true;
      break;
    case 'o':
      z = 8;
      atom.aromatic = true;
      break;
    case 'p':
      z = 15;
      atom.aromatic = true;
      break;
    case 's':
      z = 16;
      atom.aromatic = true;
      break;
    default:
      return fail(ParseErrorKind::kUnknownElement, start,
                  std::string("unknown element '") + c + "'");
    }
    ++pos_;
  }
  atom.atomic_number = z;
  int idx = mol_.add_atom(atom);
  bracket_.push_back(false);
  atom_pos_.push_back(start);
  return attach(idx, start);
}

std::optional<ParseDiagnostic> Parser::bracket_atom() {
  const std::size_t open = pos_;
  ++pos_;  // '['
  Atom atom;
  atom.explicit_h = 0;
  atom.isotope = read_number(3);

  const std::size_t sym_pos = pos_;
  const char c0 = peek();
  const char c1 = peek(1);
  if (std::islower(static_cast<unsigned char>(c0))) {
    std::string two { static_cast<char>(std::toupper(c0)), c1 };
    std::string one { static_cast<char>(std::toupper(c0)) };
    const Element *e = nullptr;
    if (std::islower(static_cast<unsigned char>(c1))
        && (e = find_element(two)) != nullptr && can_be_aromatic(e->atomic_number)) {
      pos_ += 2;
    } else if ((e = find_element(one)) != nullptr
               && can_be_aromatic(e->atomic_number)) {
      pos_ += 1;
    } else {
      return fail(ParseErrorKind::kUnknownElement, sym_pos,
                  "unknown aromatic element");
    }
    atom.atomic_number = e->atomic_number;
    atom.aromatic = true;
  } else if (std::isupper(static_cast<unsigned char>(c0))) {
    const Element *e = nullptr;
    if (std::islower(static_cast<unsigned char>(c1))
        && (e = find_element(std::string { c0, c1 })) != nullptr) {
      pos_ += 2;
    } else if ((e = find_element(std::string { c0 })) != nullptr) {
      pos_ += 1;
    } else {
      return fail(ParseErrorKind::kUnknownElement, sym_pos,
                  std::string("unknown element '") + c0 + "'");
    }
    atom.atomic_number = e->atomic_number;
  } else {
    return fail(ParseErrorKind::kInvalidBracketAtom, sym_pos,
                "expected element symbol");
  }

  // Chirality: @, @@, @TH1, @AL2, @SP3, @TB12, @OH25. Dropped.
  if (peek() == '@') {
    ++pos_;
    if (peek() == '@') {
      ++pos_;
    } else if (std::isupper(static_cast<unsigned char>(peek()))
               && std::isupper(static_cast<unsigned char>(peek(1)))) {
      std::string cls { peek(), peek(1) };
      if (cls == "TH" || cls == "AL" || cls == "SP" || cls == "TB"
          || cls == "OH") {
        pos_ += 2;
        if (!read_number(2))
          return fail(ParseErrorKind::kInvalidBracketAtom, pos_,
                      "chirality class without number");
      }
    }
  }

  if (peek() == 'H') {
    ++pos_;
    atom.explicit_h = read_number(1).value_or(1);
  }

  if (peek() == '+' || peek() == '-') {
    const char sign = peek();
    const int unit = sign == '+' ? 1 : -1;
    ++pos_;
    if (auto n = read_number(2)) {
      atom.formal_charge = unit * *n;
    } else {
      int count = 1;
      while (peek() == sign) {
        ++pos_;
        ++count;
      }
      atom.formal_charge = unit * count;
    }
  }

  if (peek() == ':') {
    ++pos_;
    if (!read_number(4))
      return fail(ParseErrorKind::kInvalidBracketAtom, pos_,
                  "atom class without number");
  }

  if (peek() != ']')
    return fail(at_end() ? ParseErrorKind::kInvalidBracketAtom
                         : ParseErrorKind::kUnexpectedCharacter,
                at_end() ? open : pos_, "unterminated bracket atom");
  ++pos_;

  int idx = mol_.add_atom(atom);
  bracket_.push_back(true);
  atom_pos_.push_back(open);
  return attach(idx, open);
}

std::optional<ParseDiagnostic> Parser::ring_closure() {
  const std::size_t start = pos_;
  int number;
  if (peek() == '%') {
    ++pos_;
    if (!std::isdigit(static_cast<unsigned char>(peek()))
        || !std::isdigit(static_cast<unsigned char>(peek(1))))
      return fail(ParseErrorKind::kUnexpectedCharacter, start,
                  "'%' must be followed by two digits");
    number = (peek() - '0') * 10 + (peek(1) - '0');
    pos_ += 2;
  } else {
    number = peek() - '0';
    ++pos_;
  }
  if (prev_ < 0)
    return fail(ParseErrorKind::kUnexpectedCharacter, start,
                "ring closure without a preceding atom");

  auto it = rings_.find(number);
  if (it == rings_.end()) {
    rings_.emplace(number, OpenRing { prev_, pending_, start });
    pending_.reset();
    return std::nullopt;
  }

  OpenRing open = it->second;
  rings_.erase(it);
  std::optional<PendingBond> bond = open.bond;
  if (pending_) {
    if (bond && bond->symbol != pending_->symbol)
      return fail(ParseErrorKind::kInvalidBond, pending_->position,
                  "conflicting ring-closure bond symbols");
    bond = pending_;
  }
  pending_.reset();
  return connect(open.atom, prev_, bond, start);
}

ParseResult Parser::run() {
  if (s_.empty())
    return ParseDiagnostic { ParseErrorKind::kEmptyInput, 0, "empty input" };

  while (!at_end()) {
    const char c = peek();
    std::optional<ParseDiagnostic> err;
    switch (c) {
    case '(':
      if (prev_ < 0)
        return fail(ParseErrorKind::kUnexpectedCharacter, pos_,
                    "branch without a preceding atom");
      if (pending_)
        return fail(ParseErrorKind::kInvalidBond, pending_->position,
                    "bond before branch");
      branches_.emplace_back(prev_, pos_);
      ++pos_;
      break;
    case ')':
      if (branches_.empty())
        return fail(ParseErrorKind::kUnbalancedParenthesis, pos_,
                    "unmatched ')'");
      if (pending_)
        return fail(ParseErrorKind::kInvalidBond, pending_->position,
                    "dangling bond");
      if (pos_ > 0 && s_[pos_ - 1] == '(')
        return fail(ParseErrorKind::kUnexpectedCharacter, pos_, "empty branch");
      prev_ = branches_.back().first;
      branches_.pop_back();
      ++pos_;
      break;
    case '-':
    case '=':
    case '#':
    case ':':
    case '/':
    case '\\':
      if (pending_)
        return fail(ParseErrorKind::kInvalidBond, pos_,
                    "two consecutive bond symbols");
      pending_ = PendingBond { c, pos_ };
      ++pos_;
      break;
    case '.':
      if (pending_)
        return fail(ParseErrorKind::kInvalidBond, pending_->position,
                    "dangling bond");
      if (prev_ < 0)
        return fail(ParseErrorKind::kUnexpectedCharacter, pos_,
                    "empty fragment");
      prev_ = -1;
      ++pos_;
      break;
    case '[':
      err = bracket_atom();
      break;
    case '%':
      err = ring_closure();
      break;
    default:
      if (std::isdigit(static_cast<unsigned char>(c))) {
        err = ring_closure();
      } else if (std::isalpha(static_cast<unsigned char>(c))) {
        err = organic_atom();
      } else {
        return fail(ParseErrorKind::kUnexpectedCharacter, pos_,
                    std::string("unexpected character '") + c + "'");
      }
    }
    if (err)
      return *err;
  }

  if (pending_)
    return fail(ParseErrorKind::kInvalidBond, pending_->position,
                "dangling bond");
  if (!branches_.empty())
    return fail(ParseErrorKind::kUnbalancedParenthesis,
                branches_.back().second, "unclosed '('");
  if (!rings_.empty()) {
    auto first = std::min_element(rings_.begin(), rings_.end(),
                                  [](const auto &a, const auto &b) {
                                    return a.second.position
                                           < b.second.position;
                                  });
    return fail(ParseErrorKind::kUnclosedRing, first->second.position,
                "ring " + std::to_string(first->first) + " never closed");
  }
  if (mol_.empty())
    return fail(ParseErrorKind::kEmptyInput, 0, "no atoms");

  for (int i = 0; i < mol_.num_atoms(); ++i) {
    if (bracket_[i])
      continue;
    std::optional<int> h = bare_implicit_h(mol_, i);
    if (!h)
      return fail(ParseErrorKind::kValenceViolation, atom_pos_[i],
                  "bond orders exceed the allowed valence of "
                      + std::string(mol_.atom(i).symbol()));
    mol_.set_implicit_h(i, *h);
  }
  return std::move(mol_);
}

// --- writing -------------------------------------------------------------

struct Closure {
  int bond;
  int partner;
};

class Writer {
public:
  Writer(const MolecularGraph &mol, const std::vector<int> &priority)
      : mol_(mol), priority_(priority) { }

  std::string run();

private:
  void plan(int u, int from_bond);
  void emit(int u);
  void atom_text(int u);
  void bond_text(int bond);

  const MolecularGraph &mol_;
  const std::vector<int> &priority_;
  std::vector<bool> visited_, on_stack_, bond_done_;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<Closure>> opens_, closes_;
  std::map<int, int> digit_of_bond_;
  std::vector<bool> digit_used_;
  std::string out_;
};

std::vector<Neighbor> sorted_neighbors(const MolecularGraph &mol, int u,
                                       const std::vector<int> &priority) {
  std::vector<Neighbor> nbrs(mol.neighbors(u).begin(), mol.neighbors(u).end());
  std::sort(nbrs.begin(), nbrs.end(), [&](Neighbor a, Neighbor b) {
    return priority[a.atom] < priority[b.atom];
  });
  return nbrs;
}

void Writer::plan(int u, int from_bond) {
  visited_[u] = true;
  on_stack_[u] = true;
  for (const Neighbor &nb: sorted_neighbors(mol_, u, priority_)) {
    if (nb.bond == from_bond || bond_done_[nb.bond])
      continue;
    if (on_stack_[nb.atom]) {
      bond_done_[nb.bond] = true;
      opens_[nb.atom].push_back({ nb.bond, u });
      closes_[u].push_back({ nb.bond, nb.atom });
    } else if (!visited_[nb.atom]) {
      bond_done_[nb.bond] = true;
      children_[u].push_back(nb);
      plan(nb.atom, nb.bond);
    }
  }
  on_stack_[u] = false;
}

void Writer::atom_text(int u) {
  const Atom &a = mol_.atom(u);
  std::string sym(a.symbol());
  if (a.aromatic)
    std::transform(sym.begin(), sym.end(), sym.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });

  const bool bare_ok = is_organic_subset(a.atomic_number) && a.formal_charge == 0
                       && !a.isotope && bare_implicit_h(mol_, u) == a.total_h();
  if (bare_ok) {
    out_ += sym;
    return;
  }

  out_ += '[';
  if (a.isotope)
    out_ += std::to_string(*a.isotope);
  out_ += sym;
  if (a.total_h() > 0) {
    out_ += 'H';
    if (a.total_h() > 1)
      out_ += std::to_string(a.total_h());
  }
  if (a.formal_charge != 0) {
    out_ += a.formal_charge > 0 ? '+' : '-';
    if (std::abs(a.formal_charge) > 1)
      out_ += std::to_string(std::abs(a.formal_charge));
  }
  out_ += ']';
}

void Writer::bond_text(int bond) {
  const Bond &b = mol_.bond(bond);
  switch (b.order) {
  case BondOrder::kSingle:
    if (mol_.atom(b.begin).aromatic && mol_.atom(b.end).aromatic)
      out_ += '-';
    break;
  case BondOrder::kDouble:
    out_ += '=';
    break;
  case BondOrder::kTriple:
    out_ += '#';
    break;
  case BondOrder::kAromatic:
    break;
  }
}

void Writer::emit(int u) {
  atom_text(u);

  std::vector<int> freed;
  for (const Closure &c: closes_[u]) {
    int d = digit_of_bond_.at(c.bond);
    out_ += d < 10 ? std::to_string(d) : "%" + std::to_string(d);
    freed.push_back(d);
  }
  for (const Closure &c: opens_[u]) {
    int d = 1;
    while (digit_used_[d])
      ++d;
    digit_used_[d] = true;
    digit_of_bond_[c.bond] = d;
    bond_text(c.bond);
    out_ += d < 10 ? std::to_string(d) : "%" + std::to_string(d);
  }
  for (int d: freed)
    digit_used_[d] = false;

  const auto &kids = children_[u];
  for (std::size_t i = 0; i < kids.size(); ++i) {
    const bool branch = i + 1 < kids.size();
    if (branch)
      out_ += '(';
    bond_text(kids[i].bond);
    emit(kids[i].atom);
    if (branch)
      out_ += ')';
  }
}

std::string Writer::run() {
  const int n = mol_.num_atoms();
  visited_.assign(n, false);
  on_stack_.assign(n, false);
  bond_done_.assign(mol_.num_bonds(), false);
  children_.assign(n, {});
  opens_.assign(n, {});
  closes_.assign(n, {});
  digit_used_.assign(101, false);
  digit_used_[0] = true;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return priority_[a] < priority_[b]; });

  bool first = true;
  for (int start: order) {
    if (visited_[start])
      continue;
    plan(start, -1);
    if (!first)
      out_ += '.';
    first = false;
    emit(start);
  }
  return out_;
}

}  // namespace

ParseResult parse_smiles(std::string_view input) {
  return Parser(input).run();
}

std::string emit_smiles(const MolecularGraph &mol,
                        const std::vector<int> &priority) {
  if (static_cast<int>(priority.size()) != mol.num_atoms())
    throw Error(ErrorKind::kInvalidArgument, "priority size mismatch");
  return Writer(mol, priority).run();
}

std::string write_smiles(const MolecularGraph &mol) {
  std::vector<int> identity(mol.num_atoms());
  std::iota(identity.begin(), identity.end(), 0);
  return emit_smiles(mol, identity);
}

std::string canonical_smiles(const MolecularGraph &mol) {
  return emit_smiles(mol, canonical_ranks(mol));
}

std::optional<std::string> canonicalize(std::string_view smiles) {
  ParseResult r = parse_smiles(smiles);
  if (!r || !validate_valence(r.value()))
    return std::nullopt;
  return canonical_smiles(r.value());
}

std::vector<SmilesRecord> read_smiles(std::istream &is) {
  std::vector<SmilesRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string smiles;
    if (!(fields >> smiles) || smiles.front() == '#')
      continue;
    records.push_back({ lineno, std::move(smiles) });
  }
  return records;
}

std::vector<SmilesRecord> read_smiles_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::kFileNotFound, path.string());
  return read_smiles(in);
}

}  // namespace molrange::chem
