//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "molrange/descriptors.hpp"
#include "molrange/fingerprint.hpp"

namespace molrange {

inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kUnkId = 3;
inline constexpr int kSpecialTokens = 4;

inline constexpr int kDefaultSourceLength = 150;
inline constexpr int kDefaultTargetLength = 74;
inline constexpr int kAttributeBins = 30;

class Vocabulary {
public:
  static constexpr int kFormatVersion = 1;

  /// Starts with the four special tokens.
  Vocabulary();

  /// Returns the id of `token`, adding it if absent.
  int add(std::string_view token);
  std::optional<int> find(std::string_view token) const;
  const std::string &token(int id) const { return tokens_.at(id); }
  int size() const { return static_cast<int>(tokens_.size()); }

  /// Plain text: a "molrange-vocab <version>" header line, then one token
  /// per line; the n-th token line (0-based) has id n.
  void save(std::ostream &os) const;
  static Vocabulary load(std::istream &is);
  void save(const std::filesystem::path &path) const;
  static Vocabulary load(const std::filesystem::path &path);

  friend bool operator==(const Vocabulary &a, const Vocabulary &b) {
    return a.tokens_ == b.tokens_;
  }

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

/// Token-id layout of the source (descriptor) side: specials, one token per
/// fingerprint bit, then kAttributeBins tokens per descriptor column.
struct SourceLayout {
  int n_bits = kDefaultFingerprintBits;

  int bit_token(int bit) const { return kSpecialTokens + bit; }
  int attribute_token(int column, int bin) const {
    return kSpecialTokens + n_bits + column * kAttributeBins + bin;
  }
  int vocab_size() const {
    return kSpecialTokens + n_bits + kDescriptorCount * kAttributeBins;
  }
};

struct SourceSequence {
  std::vector<int> tokens;
  bool truncated = false;

  int content_length() const;  // tokens before the first PAD
};

struct TargetSequence {
  std::vector<int> tokens;
};

/// Equal-width bin over [min, max] after clamping; 0 when min == max.
int attribute_bin(double value, double min, double max,
                  int bins = kAttributeBins);

/// Sparse on-bit tokens (ascending) followed by one quantized token per
/// descriptor, padded to `length`. When the bits do not fit, the lowest
/// indices are kept and `truncated` is set. Throws kStatsMismatch.
SourceSequence encode_source(const Fingerprint &fp, const DescriptorSet &desc,
                             const DescriptorStats &stats,
                             int length = kDefaultSourceLength);

/// Longest-match SMILES lexer: bracket atoms, %nn, Cl and Br are single
/// tokens; everything else is one character.
std::vector<std::string> split_smiles_tokens(std::string_view smiles);

/// Specials plus every token of the corpus, in first-seen order.
Vocabulary build_target_vocabulary(std::span<const std::string> corpus);

/// [BOS, tokens..., EOS, PAD...]. Throws kTooLong and kUnknownToken.
TargetSequence tokenize_smiles(std::string_view smiles, const Vocabulary &vocab,
                               int length = kDefaultTargetLength);

struct Detokenized {
  std::string smiles;
  bool missing_eos = false;
};

/// Concatenates the tokens after BOS up to the first EOS. Special tokens
/// other than EOS contribute nothing.
Detokenized detokenize(std::span<const int> tokens, const Vocabulary &vocab);

/// Binary token cache: "MRDS", u32 version, u32 source length, u32 target
/// length, u64 rows, u64 truncated rows, then the int32 source rows, one u8
/// truncation flag per row and the int32 target rows, all little-endian.
struct TokenDataset {
  static constexpr std::uint32_t kFormatVersion = 1;

  int source_length = kDefaultSourceLength;
  int target_length = kDefaultTargetLength;
  std::vector<SourceSequence> sources;
  std::vector<TargetSequence> targets;

  std::size_t size() const { return sources.size(); }
  std::size_t truncated() const;

  void save(const std::filesystem::path &path) const;
  static TokenDataset load(const std::filesystem::path &path);
};

}  // namespace molrange
