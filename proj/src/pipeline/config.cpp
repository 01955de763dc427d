//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace molrange::pipeline {

namespace {

[[noreturn]] void bad(const std::string &key, const std::string &why) {
  throw Error(ErrorKind::kConfigInvalid, key + ": " + why);
}

std::string strip(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t to_size(const std::string &key, const std::string &v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    bad(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string &key, const std::string &v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    bad(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

double to_double(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size())
      bad(key, "expected a number, got '" + v + "'");
    return d;
  } catch (const std::logic_error &) {
    bad(key, "expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes")
    return true;
  if (v == "false" || v == "0" || v == "no")
    return false;
  bad(key, "expected true or false, got '" + v + "'");
}

std::vector<std::size_t> to_list(const std::string &key, const std::string &v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(to_size(key, strip(item)));
  if (out.empty())
    bad(key, "expected a comma-separated list");
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10 - 2);
  os << v;
  return os.str();
}

std::string fmt_list(const std::vector<std::size_t> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

nn::OptimizerKind to_optimizer(const std::string &key, const std::string &v) {
  if (v == "adam")
    return nn::OptimizerKind::kAdam;
  if (v == "sgd")
    return nn::OptimizerKind::kSgd;
  bad(key, "expected adam or sgd, got '" + v + "'");
}

const char *optimizer_name(nn::OptimizerKind k) {
  return k == nn::OptimizerKind::kAdam ? "adam" : "sgd";
}

struct Field {
  const char *key;
  std::function<void(PipelineConfig &, const std::string &, const std::string &)> set;
  std::function<std::string(const PipelineConfig &)> get;
};

#define MR_SIZE(KEY, MEMBER)                                                           \
  Field {                                                                              \
    KEY, [](PipelineConfig &c, const std::string &k, const std::string &v) {           \
      c.MEMBER = to_size(k, v);                                                        \
    },                                                                                 \
        [](const PipelineConfig &c) { return std::to_string(c.MEMBER); }               \
  }
#define MR_INT(KEY, MEMBER)                                                            \
  Field {                                                                              \
    KEY, [](PipelineConfig &c, const std::string &k, const std::string &v) {           \
      c.MEMBER = static_cast<int>(to_size(k, v));                                      \
    },                                                                                 \
        [](const PipelineConfig &c) { return std::to_string(c.MEMBER); }               \
  }
#define MR_REAL(KEY, MEMBER)                                                           \
  Field {                                                                              \
    KEY, [](PipelineConfig &c, const std::string &k, const std::string &v) {           \
      c.MEMBER = to_double(k, v);                                                      \
    },                                                                                 \
        [](const PipelineConfig &c) { return fmt(c.MEMBER); }                          \
  }
#define MR_BOOL(KEY, MEMBER)                                                           \
  Field {                                                                              \
    KEY, [](PipelineConfig &c, const std::string &k, const std::string &v) {           \
      c.MEMBER = to_bool(k, v);                                                        \
    },                                                                                 \
        [](const PipelineConfig &c) { return std::string(c.MEMBER ? "true" : "false"); } \
  }
#define MR_LIST(KEY, MEMBER)                                                           \
  Field {                                                                              \
    KEY, [](PipelineConfig &c, const std::string &k, const std::string &v) {           \
      c.MEMBER = to_list(k, v);                                                        \
    },                                                                                 \
        [](const PipelineConfig &c) { return fmt_list(c.MEMBER); }                     \
  }
#define MR_PATH(KEY, MEMBER)                                                           \
  Field {                                                                              \
    KEY, [](PipelineConfig &c, const std::string &, const std::string &v) {            \
      c.MEMBER = v;                                                                    \
    },                                                                                 \
        [](const PipelineConfig &c) { return c.MEMBER.string(); }                      \
  }
#define MR_OPTIM(KEY, MEMBER)                                                          \
  Field {                                                                              \
    KEY, [](PipelineConfig &c, const std::string &k, const std::string &v) {           \
      c.MEMBER = to_optimizer(k, v);                                                   \
    },                                                                                 \
        [](const PipelineConfig &c) { return std::string(optimizer_name(c.MEMBER)); } \
  }

const std::vector<Field> &fields() {
  static const std::vector<Field> table {
    Field { "preset",
            [](PipelineConfig &c, const std::string &k, const std::string &v) {
              if (v != "desk" && v != "paper")
                bad(k, "expected desk or paper, got '" + v + "'");
              c.preset = v;
            },
            [](const PipelineConfig &c) { return c.preset; } },
    Field { "seed",
            [](PipelineConfig &c, const std::string &k, const std::string &v) {
              c.seed = to_u64(k, v);
            },
            [](const PipelineConfig &c) { return std::to_string(c.seed); } },
    MR_PATH("paths.corpus", corpus),
    MR_PATH("paths.labeled", labeled),
    MR_PATH("paths.work_dir", work_dir),
    MR_INT("features.radius", features.radius),
    MR_INT("features.n_bits", features.n_bits),
    MR_INT("features.src_len", features.src_len),
    MR_INT("features.tgt_len", features.tgt_len),
    MR_REAL("split.ratio", split_ratio),
    MR_SIZE("embedder.layers", embedder.layers),
    MR_SIZE("embedder.heads", embedder.heads),
    MR_SIZE("embedder.model_dim", embedder.model_dim),
    MR_SIZE("embedder.ff_dim", embedder.ff_dim),
    MR_REAL("embedder.dropout", embedder.dropout),
    Field { "embedder.norm",
            [](PipelineConfig &c, const std::string &k, const std::string &v) {
              if (v == "layer")
                c.embedder.norm = models::NormKind::kLayer;
              else if (v == "batch")
                c.embedder.norm = models::NormKind::kBatch;
              else
                bad(k, "expected layer or batch, got '" + v + "'");
            },
            [](const PipelineConfig &c) {
              return std::string(c.embedder.norm == models::NormKind::kLayer ? "layer"
                                                                             : "batch");
            } },
    MR_OPTIM("embedder.optimizer", embedder.optim.kind),
    MR_REAL("embedder.lr", embedder.optim.lr),
    MR_REAL("embedder.beta1", embedder.optim.beta1),
    MR_REAL("embedder.beta2", embedder.optim.beta2),
    MR_SIZE("embedder.epochs", embedder_epochs),
    MR_SIZE("embedder.batch_size", embedder_batch),
    MR_REAL("embedder.stop_at_exact_match", embedder_stop_at),
    MR_LIST("classifier.channels", classifier.channels),
    MR_SIZE("classifier.kernel", classifier.kernel),
    MR_SIZE("classifier.stride", classifier.stride),
    MR_SIZE("classifier.padding", classifier.padding),
    MR_REAL("classifier.dropout", classifier.dropout),
    MR_OPTIM("classifier.optimizer", classifier.optim.kind),
    MR_REAL("classifier.lr", classifier.optim.lr),
    MR_REAL("classifier.beta1", classifier.optim.beta1),
    MR_REAL("classifier.beta2", classifier.optim.beta2),
    MR_SIZE("classifier.epochs", classifier_epochs),
    MR_SIZE("classifier.batch_size", classifier_batch),
    MR_BOOL("classifier.weight_classes", classifier_weighting),
    MR_LIST("gan.gen_channels", gan.gen_channels),
    MR_LIST("gan.disc_channels", gan.disc_channels),
    MR_SIZE("gan.disc_stride", gan.disc_stride),
    MR_REAL("gan.clip", gan.clip),
    MR_SIZE("gan.critic_steps", gan.critic_steps),
    MR_SIZE("gan.batch_size", gan.batch_size),
    MR_SIZE("gan.steps", gan.steps),
    MR_OPTIM("gan.gen_optimizer", gan.gen_optim.kind),
    MR_REAL("gan.gen_lr", gan.gen_optim.lr),
    MR_OPTIM("gan.disc_optimizer", gan.disc_optim.kind),
    MR_REAL("gan.disc_lr", gan.disc_optim.lr),
    MR_SIZE("gan.validity_probe_every", validity_probe_every),
    MR_REAL("range.y_lb", range.y_lb),
    MR_REAL("range.y_ub", range.y_ub),
    MR_REAL("range.phi", range.phi),
    MR_REAL("range.lambda1", range.lambda1),
    MR_BOOL("range.strict", strict_range),
    MR_SIZE("generate.count", generate_count),
  };
  return table;
}

}  // namespace

PipelineConfig PipelineConfig::preset_defaults(const std::string &name) {
  PipelineConfig c;
  if (name == "desk")
    return c;
  if (name != "paper")
    bad("preset", "expected desk or paper, got '" + name + "'");
  c.preset = "paper";
  c.work_dir = "runs/paper";
  c.embedder = models::EmbedderConfig::paper();
  c.embedder_epochs = 15;
  c.embedder_batch = 32;
  c.embedder_stop_at = 2.0;
  c.classifier = models::ClassifierConfig::paper();
  c.gan = models::GanConfig::paper();
  return c;
}

void PipelineConfig::set(const std::string &key, const std::string &value) {
  for (const Field &f: fields()) {
    if (key == f.key) {
      f.set(*this, key, value);
      return;
    }
  }
  bad(key, "unknown configuration key");
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field &f: fields())
    out.emplace_back(f.key, f.get(*this));
  return out;
}

void PipelineConfig::finalize() {
  if (features.n_bits < 64 || (features.n_bits & (features.n_bits - 1)) != 0)
    bad("features.n_bits", "must be a power of two >= 64");
  if (features.radius < 0)
    bad("features.radius", "must be non-negative");
  if (!(split_ratio > 0.0 && split_ratio <= 1.0))
    bad("split.ratio", "must lie in (0, 1]");
  if (embedder_batch == 0)
    bad("embedder.batch_size", "must be positive");
  if (classifier_batch == 0)
    bad("classifier.batch_size", "must be positive");
  embedder.src_len = static_cast<std::size_t>(features.src_len);
  embedder.tgt_len = static_cast<std::size_t>(features.tgt_len);
  embedder.src_vocab = static_cast<std::size_t>(SourceLayout { features.n_bits }.vocab_size());
  embedder.validate();
  classifier.rows = gan.rows = embedder.src_len;
  classifier.cols = gan.cols = embedder.model_dim;
  classifier.validate();
  gan.validate();
  range.validate();
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::istream &is) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = strip(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      bad("line " + std::to_string(lineno), "expected key = value");
    out.emplace_back(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
  return out;
}

PipelineConfig load_config(const std::filesystem::path *path,
                           const std::string &preset_override,
                           const std::vector<std::pair<std::string, std::string>> &overrides) {
  std::vector<std::pair<std::string, std::string>> file_values;
  if (path != nullptr) {
    std::ifstream is(*path);
    if (!is)
      throw Error(ErrorKind::kFileNotFound, "config " + path->string());
    file_values = parse_config_text(is);
  }
  std::string preset = preset_override;
  if (preset.empty()) {
    preset = "desk";
    for (const auto &[k, v]: file_values)
      if (k == "preset")
        preset = v;
  }
  PipelineConfig cfg = PipelineConfig::preset_defaults(preset);
  for (const auto &[k, v]: file_values)
    if (k != "preset")
      cfg.set(k, v);
  for (const auto &[k, v]: overrides)
    cfg.set(k, v);
  cfg.preset = preset;
  cfg.finalize();
  return cfg;
}

}  // namespace molrange::pipeline
