//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/nn/checkpoint.hpp"

#include <fstream>

#include "molrange/binary_io.hpp"

namespace molrange::nn {

namespace {

constexpr char kMagic[4] = { 'M', 'R', 'N', 'G' };

}  // namespace

const StoredTensor &Checkpoint::at(const std::string &name) const {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw Error(ErrorKind::kFormat, "checkpoint has no entry '" + name + "'");
  return it->second;
}

void Checkpoint::save(std::ostream &os) const {
  os.write(kMagic, 4);
  io::write_u32(os, kFormatVersion);
  io::write_string(os, kind_);
  io::write_u64(os, entries_.size());
  for (const auto &[name, t]: entries_) {
    io::write_string(os, name);
    io::write_u8(os, static_cast<std::uint8_t>(t.dtype));
    io::write_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d: t.shape)
      io::write_u64(os, d);
    for (double v: t.values) {
      if (t.dtype == Dtype::kF32)
        io::write_f32(os, static_cast<float>(v));
      else
        io::write_f64(os, v);
    }
  }
  if (!os)
    throw Error(ErrorKind::kFormat, "failed writing checkpoint");
}

Checkpoint Checkpoint::load(std::istream &is) {
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || !std::equal(magic, magic + 4, kMagic))
    throw Error(ErrorKind::kFormat, "not a checkpoint (bad magic)");
  const std::uint32_t version = io::read_u32(is);
  if (version != kFormatVersion)
    throw Error(ErrorKind::kFormat,
                "unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck(io::read_string(is));
  const std::uint64_t n = io::read_u64(is);
  for (std::uint64_t e = 0; e < n; ++e) {
    std::string name = io::read_string(is);
    StoredTensor t;
    const std::uint8_t dt = io::read_u8(is);
    if (dt > 1)
      throw Error(ErrorKind::kFormat, "bad dtype in entry '" + name + "'");
    t.dtype = static_cast<Dtype>(dt);
    const std::uint32_t rank = io::read_u32(is);
    for (std::uint32_t r = 0; r < rank; ++r)
      t.shape.push_back(io::read_u64(is));
    t.values.resize(numel(t.shape));
    for (double &v: t.values)
      v = t.dtype == Dtype::kF32 ? static_cast<double>(io::read_f32(is))
                                 : io::read_f64(is);
    if (!is)
      throw Error(ErrorKind::kFormat, "truncated checkpoint at '" + name + "'");
    ck.entries_[std::move(name)] = std::move(t);
  }
  return ck;
}

void Checkpoint::save(const std::filesystem::path &path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw Error(ErrorKind::kFormat, "cannot write " + path.string());
  save(os);
}

Checkpoint Checkpoint::load(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw Error(ErrorKind::kMissingCheckpoint, path.string());
  return load(is);
}

}  // namespace molrange::nn
