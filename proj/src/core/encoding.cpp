//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "molrange/binary_io.hpp"
#include "molrange/error.hpp"

namespace molrange {

Vocabulary::Vocabulary() {
  for (std::string_view s: { "<pad>", "<bos>", "<eos>", "<unk>" })
    add(s);
}

int Vocabulary::add(std::string_view token) {
  if (auto id = find(token))
    return *id;
  const int id = size();
  tokens_.emplace_back(token);
  ids_.emplace(std::string(token), id);
  return id;
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end())
    return std::nullopt;
  return it->second;
}

void Vocabulary::save(std::ostream &os) const {
  os << "molrange-vocab " << kFormatVersion << '\n';
  for (const std::string &t: tokens_)
    os << t << '\n';
}

Vocabulary Vocabulary::load(std::istream &is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("molrange-vocab ", 0) != 0)
    throw Error(ErrorKind::kFormat, "missing vocabulary header");
  if (std::stoi(header.substr(15)) != kFormatVersion)
    throw Error(ErrorKind::kFormat, "unsupported vocabulary version");

  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(is, line))
    tokens.push_back(line);
  const Vocabulary specials;
  if (tokens.size() < static_cast<std::size_t>(kSpecialTokens))
    throw Error(ErrorKind::kFormat, "vocabulary lacks special tokens");
  for (int i = 0; i < kSpecialTokens; ++i) {
    if (tokens[i] != specials.token(i))
      throw Error(ErrorKind::kFormat, "special token mismatch at id "
                                          + std::to_string(i));
  }
  Vocabulary vocab;
  for (std::size_t i = kSpecialTokens; i < tokens.size(); ++i) {
    if (vocab.find(tokens[i]))
      throw Error(ErrorKind::kFormat, "duplicate token " + tokens[i]);
    vocab.add(tokens[i]);
  }
  return vocab;
}

void Vocabulary::save(const std::filesystem::path &path) const {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorKind::kFileNotFound, path.string());
  save(out);
}

Vocabulary Vocabulary::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::kFileNotFound, path.string());
  return load(in);
}

int SourceSequence::content_length() const {
  auto it = std::find(tokens.begin(), tokens.end(), kPadId);
  return static_cast<int>(it - tokens.begin());
}

int attribute_bin(double value, double min, double max, int bins) {
  if (!(max > min))
    return 0;
  const double clamped = std::clamp(value, min, max);
  const int bin = static_cast<int>(std::floor((clamped - min) / (max - min) * bins));
  return std::clamp(bin, 0, bins - 1);
}

SourceSequence encode_source(const Fingerprint &fp, const DescriptorSet &desc,
                             const DescriptorStats &stats, int length) {
  if (stats.schema_version != desc.schema_version)
    throw Error(ErrorKind::kStatsMismatch,
                "descriptor schema " + std::to_string(desc.schema_version)
                    + " vs statistics schema "
                    + std::to_string(stats.schema_version));
  if (length < kDescriptorCount)
    throw Error(ErrorKind::kInvalidArgument, "source length below 30");

  const SourceLayout layout { fp.n_bits() };
  SourceSequence seq;
  seq.tokens.reserve(length);

  std::vector<int> bits = fp.on_bits();
  const std::size_t room = static_cast<std::size_t>(length - kDescriptorCount);
  if (bits.size() > room) {
    bits.resize(room);
    seq.truncated = true;
  }
  for (int bit: bits)
    seq.tokens.push_back(layout.bit_token(bit));
  for (int c = 0; c < kDescriptorCount; ++c)
    seq.tokens.push_back(layout.attribute_token(
        c, attribute_bin(desc.values[c], stats.min[c], stats.max[c])));
  seq.tokens.resize(length, kPadId);
  return seq;
}

std::vector<std::string> split_smiles_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    std::size_t len = 1;
    if (c == '[') {
      std::size_t close = s.find(']', i);
      len = close == std::string_view::npos ? s.size() - i : close - i + 1;
    } else if (c == '%' && i + 2 < s.size()) {
      len = 3;
    } else if ((c == 'C' && i + 1 < s.size() && s[i + 1] == 'l')
               || (c == 'B' && i + 1 < s.size() && s[i + 1] == 'r')) {
      len = 2;
    }
    tokens.emplace_back(s.substr(i, len));
    i += len;
  }
  return tokens;
}

Vocabulary build_target_vocabulary(std::span<const std::string> corpus) {
  Vocabulary vocab;
  for (const std::string &s: corpus) {
    for (const std::string &t: split_smiles_tokens(s))
      vocab.add(t);
  }
  return vocab;
}

TargetSequence tokenize_smiles(std::string_view smiles, const Vocabulary &vocab,
                               int length) {
  std::vector<std::string> pieces = split_smiles_tokens(smiles);
  if (static_cast<int>(pieces.size()) + 2 > length)
    throw Error(ErrorKind::kTooLong,
                std::to_string(pieces.size()) + " tokens exceed target length "
                    + std::to_string(length));
  TargetSequence seq;
  seq.tokens.reserve(length);
  seq.tokens.push_back(kBosId);
  for (const std::string &p: pieces) {
    std::optional<int> id = vocab.find(p);
    if (!id || *id < kSpecialTokens)
      throw Error(ErrorKind::kUnknownToken, "'" + p + "' in " + std::string(smiles));
    seq.tokens.push_back(*id);
  }
  seq.tokens.push_back(kEosId);
  seq.tokens.resize(length, kPadId);
  return seq;
}

Detokenized detokenize(std::span<const int> tokens, const Vocabulary &vocab) {
  Detokenized out;
  out.missing_eos = true;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int id = tokens[i];
    if (id == kEosId) {
      out.missing_eos = false;
      break;
    }
    if (id < kSpecialTokens || id >= vocab.size())
      continue;
    out.smiles += vocab.token(id);
  }
  return out;
}

std::size_t TokenDataset::truncated() const {
  return static_cast<std::size_t>(
      std::count_if(sources.begin(), sources.end(),
                    [](const SourceSequence &s) { return s.truncated; }));
}

namespace {
constexpr char kDatasetMagic[4] = { 'M', 'R', 'D', 'S' };
}

void TokenDataset::save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::kFileNotFound, path.string());
  out.write(kDatasetMagic, 4);
  io::write_u32(out, kFormatVersion);
  io::write_u32(out, static_cast<std::uint32_t>(source_length));
  io::write_u32(out, static_cast<std::uint32_t>(target_length));
  io::write_u64(out, sources.size());
  io::write_u64(out, truncated());
  for (const SourceSequence &s: sources) {
    for (int t: s.tokens)
      io::write_i32(out, t);
  }
  for (const SourceSequence &s: sources)
    io::write_u8(out, s.truncated ? 1 : 0);
  for (const TargetSequence &t: targets) {
    for (int id: t.tokens)
      io::write_i32(out, id);
  }
}

TokenDataset TokenDataset::load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::kFileNotFound, path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || !std::equal(magic, magic + 4, kDatasetMagic))
    throw Error(ErrorKind::kFormat, "not a token dataset: " + path.string());
  if (io::read_u32(in) != kFormatVersion)
    throw Error(ErrorKind::kFormat, "unsupported dataset version");

  TokenDataset ds;
  ds.source_length = static_cast<int>(io::read_u32(in));
  ds.target_length = static_cast<int>(io::read_u32(in));
  const std::uint64_t rows = io::read_u64(in);
  const std::uint64_t truncated_rows = io::read_u64(in);
  ds.sources.resize(rows);
  ds.targets.resize(rows);
  for (SourceSequence &s: ds.sources) {
    s.tokens.resize(ds.source_length);
    for (int &t: s.tokens)
      t = io::read_i32(in);
  }
  for (SourceSequence &s: ds.sources)
    s.truncated = io::read_u8(in) != 0;
  for (TargetSequence &t: ds.targets) {
    t.tokens.resize(ds.target_length);
    for (int &id: t.tokens)
      id = io::read_i32(in);
  }
  if (ds.truncated() != truncated_rows)
    throw Error(ErrorKind::kFormat, "dataset header/body mismatch");
  return ds;
}

}  // namespace molrange
