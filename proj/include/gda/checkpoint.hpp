#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string_view>
#include <string>
#include <vector>

namespace gda {

// A model parameter addressable by name. Every trainable tensor in this
// project is a dense f64 matrix (vectors are n×1), which keeps optimizers,
// EMA tracking and checkpoints uniform.
struct NamedParam {
  std::string name;
  Eigen::MatrixXd* value = nullptr;
};

using ParamList = std::vector<NamedParam>;

// Binary checkpoint: 8-byte magic "GDATNSR1", u32 tensor count, a manifest of
// (u32 name length, name bytes, u32 rows, u32 cols) entries, then the tensor
// payloads in manifest order as row-major little-endian f64.
void save_tensors(const std::string& path, const ParamList& tensors);
std::map<std::string, Eigen::MatrixXd> load_tensors(const std::string& path);

// Restores parameters by name; throws if a name is missing or a shape differs.
void assign_tensors(const ParamList& dst, const std::map<std::string, Eigen::MatrixXd>& src);

// FNV-1a over the file bytes; used in provenance sidecars.
std::uint64_t file_checksum(const std::string& path);

// FNV-1a over an in-memory byte string (config hashing, seed derivation).
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace gda
