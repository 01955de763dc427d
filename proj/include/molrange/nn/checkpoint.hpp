//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <type_traits>
#include <vector>

#include "molrange/nn/optim.hpp"

namespace molrange::nn {

enum class Dtype : std::uint8_t { kF32 = 0, kF64 = 1 };

struct StoredTensor {
  Dtype dtype = Dtype::kF32;
  Shape shape;
  std::vector<double> values;  // widened; narrowing back is exact
};

/// Binary container: "MRNG", u32 version, model kind string, u64 entry
/// count, then per entry: name string, u8 dtype, u32 rank, u64 dims, raw
/// little-endian values. Strings are u32 length + bytes. Optimizer state
/// lives under names starting with kOptimizerPrefix.
class Checkpoint {
public:
  static constexpr std::uint32_t kFormatVersion = 1;
  static constexpr const char *kOptimizerPrefix = "__optim__/";

  Checkpoint() = default;
  explicit Checkpoint(std::string kind): kind_(std::move(kind)) { }

  const std::string &kind() const { return kind_; }
  const std::map<std::string, StoredTensor> &entries() const { return entries_; }
  bool contains(const std::string &name) const { return entries_.count(name) > 0; }

  template <class T>
  void put(const std::string &name, const Tensor<T> &t) {
    put_raw<T>(name, t.shape(), t.data());
  }

  template <class T>
  void put_raw(const std::string &name, Shape shape, std::span<const T> data) {
    StoredTensor s;
    s.dtype = std::is_same_v<T, float> ? Dtype::kF32 : Dtype::kF64;
    s.shape = std::move(shape);
    s.values.assign(data.begin(), data.end());
    entries_[name] = std::move(s);
  }

  /// Copies a stored entry into `t`. Throws kFormat when absent and
  /// kShapeMismatch when shapes differ.
  template <class T>
  void get(const std::string &name, Tensor<T> &t) const {
    get_raw<T>(name, t.shape(), t.data());
  }

  template <class T>
  void get_raw(const std::string &name, const Shape &shape, std::span<T> out) const {
    const StoredTensor &s = at(name);
    if (s.shape != shape)
      shape_error("checkpoint entry " + name, s.shape, shape);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = static_cast<T>(s.values[i]);
  }

  const StoredTensor &at(const std::string &name) const;

  void put_scalar(const std::string &name, double v) {
    put_raw<double>(name, {}, std::span<const double>(&v, 1));
  }
  double get_scalar(const std::string &name) const { return at(name).values.at(0); }

  template <class T>
  void put_params(const ParamList<T> &params) {
    for (const NamedParam<T> &p: params)
      put(p.name, p.tensor);
  }

  template <class T>
  void get_params(const ParamList<T> &params) const {
    for (const NamedParam<T> &p: params) {
      Tensor<T> t = p.tensor;
      get(p.name, t);
    }
  }

  template <class T>
  void put_optimizer(const std::string &tag, Optimizer<T> &opt) {
    const std::string base = std::string(kOptimizerPrefix) + tag + "/";
    put_scalar(base + "step", static_cast<double>(opt.steps()));
    for (std::size_t i = 0; i < opt.first_moments().size(); ++i) {
      const auto &m = opt.first_moments()[i];
      const auto &v = opt.second_moments()[i];
      put_raw<T>(base + "m" + std::to_string(i), { m.size() }, m);
      put_raw<T>(base + "v" + std::to_string(i), { v.size() }, v);
    }
  }

  template <class T>
  void get_optimizer(const std::string &tag, Optimizer<T> &opt) const {
    const std::string base = std::string(kOptimizerPrefix) + tag + "/";
    opt.set_steps(static_cast<std::uint64_t>(get_scalar(base + "step")));
    for (std::size_t i = 0; i < opt.first_moments().size(); ++i) {
      auto &m = opt.first_moments()[i];
      auto &v = opt.second_moments()[i];
      get_raw<T>(base + "m" + std::to_string(i), { m.size() }, std::span<T>(m));
      get_raw<T>(base + "v" + std::to_string(i), { v.size() }, std::span<T>(v));
    }
  }

  void save(std::ostream &os) const;
  static Checkpoint load(std::istream &is);
  void save(const std::filesystem::path &path) const;
  static Checkpoint load(const std::filesystem::path &path);

private:
  std::string kind_;
  std::map<std::string, StoredTensor> entries_;
};

}  // namespace molrange::nn
