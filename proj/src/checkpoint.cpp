/* Copyright 2026 The kpn-translate Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "kpn/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <optional>

#include "kpn/binary_io.hpp"

namespace kpn {
namespace {

constexpr char kMagic[4] = {'K', 'P', 'N', 'C'};
constexpr std::uint32_t kMaxRank = 8;

void write_string(ByteWriter& w, const std::string& s) {
  w.u32(static_cast<std::uint32_t>(s.size()));
  w.bytes(s.data(), s.size());
}

std::string read_string(ByteReader& r, const char* field) {
  const std::uint32_t n = r.u32(field);
  if (n > r.remaining()) throw FormatError(std::string("truncated file while reading ") + field);
  std::string s(n, '\0');
  r.bytes(s.data(), n, field);
  return s;
}

// Seeds are stored as four 16-bit pieces so float32 payloads hold them
// exactly.
Tensor seed_tensor(std::uint64_t seed) {
  Tensor t({4});
  for (int i = 0; i < 4; ++i) t[i] = static_cast<Real>((seed >> (16 * i)) & 0xFFFF);
  return t;
}

std::uint64_t seed_from(const Tensor& t) {
  std::uint64_t s = 0;
  for (int i = 0; i < 4; ++i)
    s |= static_cast<std::uint64_t>(std::llround(t[i])) << (16 * i);
  return s;
}

Tensor vec(std::initializer_list<double> v) {
  Tensor t({v.size()});
  std::size_t i = 0;
  for (double x : v) t[i++] = static_cast<Real>(x);
  return t;
}

const CheckpointSection* find_section(const std::vector<CheckpointSection>& s,
                                      const std::string& name) {
  for (const auto& sec : s)
    if (sec.name == name) return &sec;
  return nullptr;
}

const CheckpointSection& require_section(
    const std::vector<CheckpointSection>& s, const std::string& name) {
  const CheckpointSection* sec = find_section(s, name);
  if (!sec) throw FormatError("checkpoint: missing section " + name);
  return *sec;
}

const Tensor& meta_value(const CheckpointSection& meta, const std::string& name,
                         std::size_t numel) {
  for (const auto& e : meta.tensors) {
    if (e.name == name) {
      if (e.value.numel() != numel) {
        throw FormatError("checkpoint: meta entry " + name + " has " +
                          std::to_string(e.value.numel()) + " values");
      }
      return e.value;
    }
  }
  throw FormatError("checkpoint: missing meta entry " + name);
}

std::size_t as_size(Real v) { return static_cast<std::size_t>(std::llround(v)); }

// Copies tensors by name into an existing parameter list, checking shapes.
void fill_params(ParamList& dst, const CheckpointSection& src) {
  if (src.tensors.size() != dst.size()) {
    throw FormatError("checkpoint: section " + src.name + " has " +
                      std::to_string(src.tensors.size()) + " tensors, expected " +
                      std::to_string(dst.size()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (src.tensors[i].name != dst[i].name ||
        !src.tensors[i].value.same_shape(dst[i].value)) {
      throw FormatError("checkpoint: section " + src.name + " entry " +
                        src.tensors[i].name + " " +
                        shape_string(src.tensors[i].value.shape()) +
                        " does not match " + dst[i].name + " " +
                        shape_string(dst[i].value.shape()));
    }
    dst[i].value = src.tensors[i].value;
  }
}

}  // namespace

std::uint32_t default_checkpoint_version() {
  return sizeof(Real) == sizeof(double) ? kCheckpointFloat64 : kCheckpointFloat32;
}

void write_checkpoint_file(const std::filesystem::path& path,
                           const std::vector<CheckpointSection>& sections,
                           std::uint32_t version) {
  if (version != kCheckpointFloat32 && version != kCheckpointFloat64) {
    throw ConfigError("unsupported checkpoint version " + std::to_string(version));
  }
  ByteWriter w;
  w.bytes(kMagic, 4);
  w.u32(version);
  w.u32(static_cast<std::uint32_t>(sections.size()));
  for (const CheckpointSection& sec : sections) {
    write_string(w, sec.name);
    w.u32(static_cast<std::uint32_t>(sec.tensors.size()));
    for (const NamedTensor& t : sec.tensors) {
      write_string(w, t.name);
      w.u32(static_cast<std::uint32_t>(t.value.rank()));
      for (std::size_t d : t.value.shape()) w.u32(static_cast<std::uint32_t>(d));
      for (std::size_t i = 0; i < t.value.numel(); ++i) {
        if (version == kCheckpointFloat32) {
          w.f32(static_cast<float>(t.value[i]));
        } else {
          w.f64(static_cast<double>(t.value[i]));
        }
      }
    }
  }
  write_file(path, w.buffer());
}

std::vector<CheckpointSection> read_checkpoint_file(
    const std::filesystem::path& path, std::uint32_t* version_out) {
  ByteReader r(read_file(path));
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("checkpoint " + path.string() + ": bad magic");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointFloat32 && version != kCheckpointFloat64) {
    throw FormatError("checkpoint " + path.string() + ": unsupported version " +
                      std::to_string(version));
  }
  if (version_out) *version_out = version;
  const std::size_t elem = version == kCheckpointFloat32 ? 4 : 8;
  const std::uint32_t count = r.u32("section count");
  std::vector<CheckpointSection> sections;
  for (std::uint32_t s = 0; s < count; ++s) {
    CheckpointSection sec;
    sec.name = read_string(r, "section name");
    const std::uint32_t n = r.u32("tensor count");
    for (std::uint32_t i = 0; i < n; ++i) {
      NamedTensor t;
      t.name = read_string(r, "tensor name");
      const std::uint32_t rank = r.u32("rank");
      if (rank == 0 || rank > kMaxRank) {
        throw FormatError("checkpoint: tensor " + t.name + " has rank " +
                          std::to_string(rank));
      }
      Shape shape(rank);
      std::size_t numel = 1;
      for (auto& d : shape) {
        d = r.u32("dims");
        numel *= d;
      }
      if (numel * elem > r.remaining()) {
        throw FormatError("truncated file while reading data of " + t.name);
      }
      t.value = Tensor(shape);
      for (std::size_t k = 0; k < numel; ++k) {
        t.value[k] = version == kCheckpointFloat32
                         ? static_cast<Real>(r.f32("data"))
                         : static_cast<Real>(r.f64("data"));
      }
      sec.tensors.push_back(std::move(t));
    }
    sections.push_back(std::move(sec));
  }
  return sections;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const Adam* adam, std::uint32_t version) {
  const Geometry& g = model.geometry;
  CheckpointSection meta{
      "meta",
      {{"geometry", vec({double(g.hi_h), double(g.hi_w), double(g.lo_h),
                         double(g.lo_w), double(g.grid)})},
       {"sigma_bounds", vec({model.sigma_bounds.min, model.sigma_bounds.max})},
       {"noise_seed", seed_tensor(model.noise_seed)},
       {"iteration", seed_tensor(model.iteration)},
       {"n_classes", vec({double(model.encoder.n_classes())})},
       {"encoder_mode", vec({double(model.encoder.mode())})},
       {"feature_mode", vec({double(model.encoder.feature_mode())})},
       {"components", vec({double(model.enable_affine), double(model.enable_blur),
                           double(model.enable_noise)})},
       {"two_discriminators", vec({double(model.disc_low.has_value())})}}};
  std::vector<CheckpointSection> sections{
      std::move(meta),
      {"encoder", model.encoder.params()},
      {"kpn", model.kpn.params()},
      {"discriminator", model.disc.params()}};
  if (model.disc_low) sections.push_back({"discriminator_low", model.disc_low->params()});
  if (adam) sections.push_back({"adam-state", adam->export_state()});
  write_checkpoint_file(path, sections, version);
}

Model load_checkpoint(const std::filesystem::path& path, Adam* adam) {
  const auto sections = read_checkpoint_file(path);
  const CheckpointSection& meta = require_section(sections, "meta");
  Model m;
  const Tensor& g = meta_value(meta, "geometry", 5);
  m.geometry = Geometry{as_size(g[0]), as_size(g[1]), as_size(g[2]),
                        as_size(g[3]), as_size(g[4])};
  try {
    m.geometry.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  const Tensor& b = meta_value(meta, "sigma_bounds", 2);
  m.sigma_bounds = {static_cast<double>(b[0]), static_cast<double>(b[1])};
  m.noise_seed = seed_from(meta_value(meta, "noise_seed", 4));
  m.iteration = seed_from(meta_value(meta, "iteration", 4));
  const std::size_t n_classes = as_size(meta_value(meta, "n_classes", 1)[0]);
  const auto mode = static_cast<EncoderMode>(as_size(meta_value(meta, "encoder_mode", 1)[0]));
  if (mode != EncoderMode::kOracle && mode != EncoderMode::kTinyConv) {
    throw FormatError("checkpoint: unknown encoder mode");
  }
  const auto fmode = as_size(meta_value(meta, "feature_mode", 1)[0]);
  if (fmode > 2) throw FormatError("checkpoint: unknown feature mode");
  const Tensor& comp = meta_value(meta, "components", 3);
  m.enable_affine = comp[0] != 0;
  m.enable_blur = comp[1] != 0;
  m.enable_noise = comp[2] != 0;
  const bool two = meta_value(meta, "two_discriminators", 1)[0] != 0;

  m.encoder = mode == EncoderMode::kOracle ? Encoder::oracle(n_classes)
                                           : Encoder::tiny_conv(n_classes, 0);
  m.encoder.set_feature_mode(static_cast<FeatureMode>(fmode));
  fill_params(m.encoder.params(), require_section(sections, "encoder"));
  m.kpn = Kpn::identity(n_classes, m.sigma_bounds);
  fill_params(m.kpn.params(), require_section(sections, "kpn"));
  m.disc = Discriminator::init(0);
  fill_params(m.disc.params(), require_section(sections, "discriminator"));
  if (two) {
    m.disc_low = Discriminator::init(0);
    fill_params(m.disc_low->params(), require_section(sections, "discriminator_low"));
  }
  if (adam) {
    const CheckpointSection* st = find_section(sections, "adam-state");
    if (!st) throw FormatError("checkpoint: missing section adam-state");
    adam->import_state(st->tensors);
  }
  return m;
}

}  // namespace kpn
