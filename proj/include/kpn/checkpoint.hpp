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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kpn/adam.hpp"
#include "kpn/model.hpp"
#include "kpn/networks.hpp"

namespace kpn {

// "KPNC" container. Version 1 stores float32 payloads, version 2 float64.
inline constexpr std::uint32_t kCheckpointFloat32 = 1;
inline constexpr std::uint32_t kCheckpointFloat64 = 2;
// Version written by default: float64 unless built with KPN_FLOAT32.
std::uint32_t default_checkpoint_version();

struct CheckpointSection {
  std::string name;
  ParamList tensors;
};

// Layout (little-endian): magic, u32 version, u32 section count; per section
// u32 name length, name, u32 tensor count; per tensor u32 name length, name,
// u32 rank, u32 dims[rank], then the values.
void write_checkpoint_file(const std::filesystem::path& path,
                           const std::vector<CheckpointSection>& sections,
                           std::uint32_t version);
std::vector<CheckpointSection> read_checkpoint_file(
    const std::filesystem::path& path, std::uint32_t* version = nullptr);

// Sections: meta, encoder, kpn, discriminator, discriminator_low (optional),
// adam-state (optional).
void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const Adam* adam = nullptr,
                     std::uint32_t version = default_checkpoint_version());
Model load_checkpoint(const std::filesystem::path& path, Adam* adam = nullptr);

}  // namespace kpn
