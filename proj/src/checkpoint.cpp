#include "gda/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts are unsupported");

namespace gda {
namespace {

constexpr char kMagic[8] = {'G', 'D', 'A', 'T', 'N', 'S', 'R', '1'};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_raw(std::FILE* f, const void* p, std::size_t n, const std::string& path) {
  if (std::fwrite(p, 1, n, f) != n) throw std::runtime_error("short write: " + path);
}

void read_raw(std::FILE* f, void* p, std::size_t n, const std::string& path) {
  if (std::fread(p, 1, n, f) != n) throw std::runtime_error("short read or truncated file: " + path);
}

void write_u32(std::FILE* f, std::uint32_t v, const std::string& path) {
  write_raw(f, &v, sizeof v, path);
}

std::uint32_t read_u32(std::FILE* f, const std::string& path) {
  std::uint32_t v = 0;
  read_raw(f, &v, sizeof v, path);
  return v;
}

}  // namespace

void save_tensors(const std::string& path, const ParamList& tensors) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_raw(f.get(), kMagic, sizeof kMagic, path);
  write_u32(f.get(), static_cast<std::uint32_t>(tensors.size()), path);
  for (const auto& t : tensors) {
    write_u32(f.get(), static_cast<std::uint32_t>(t.name.size()), path);
    write_raw(f.get(), t.name.data(), t.name.size(), path);
    write_u32(f.get(), static_cast<std::uint32_t>(t.value->rows()), path);
    write_u32(f.get(), static_cast<std::uint32_t>(t.value->cols()), path);
  }
  std::vector<double> row;
  for (const auto& t : tensors) {
    const auto& m = *t.value;
    row.resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
      write_raw(f.get(), row.data(), row.size() * sizeof(double), path);
    }
  }
}

std::map<std::string, Eigen::MatrixXd> load_tensors(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  read_raw(f.get(), magic, sizeof magic, path);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("not a checkpoint file (bad magic): " + path);
  const std::uint32_t count = read_u32(f.get(), path);
  std::vector<std::pair<std::string, std::pair<std::uint32_t, std::uint32_t>>> manifest;
  manifest.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = read_u32(f.get(), path);
    std::string name(name_len, '\0');
    read_raw(f.get(), name.data(), name_len, path);
    const std::uint32_t rows = read_u32(f.get(), path);
    const std::uint32_t cols = read_u32(f.get(), path);
    manifest.emplace_back(std::move(name), std::make_pair(rows, cols));
  }
  std::map<std::string, Eigen::MatrixXd> out;
  std::vector<double> row;
  for (const auto& [name, shape] : manifest) {
    Eigen::MatrixXd m(shape.first, shape.second);
    row.resize(shape.second);
    for (std::uint32_t r = 0; r < shape.first; ++r) {
      read_raw(f.get(), row.data(), row.size() * sizeof(double), path);
      for (std::uint32_t c = 0; c < shape.second; ++c) m(r, c) = row[c];
    }
    if (!out.emplace(name, std::move(m)).second)
      throw std::runtime_error("duplicate tensor name '" + name + "' in " + path);
  }
  return out;
}

void assign_tensors(const ParamList& dst, const std::map<std::string, Eigen::MatrixXd>& src) {
  for (const auto& p : dst) {
    const auto it = src.find(p.name);
    if (it == src.end()) throw std::runtime_error("checkpoint is missing tensor '" + p.name + "'");
    if (it->second.rows() != p.value->rows() || it->second.cols() != p.value->cols())
      throw std::runtime_error("shape mismatch for tensor '" + p.name + "'");
    *p.value = it->second;
  }
}

std::uint64_t file_checksum(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("cannot open for checksum: " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  unsigned char buf[1 << 16];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, f.get())) > 0)
    for (std::size_t i = 0; i < n; ++i) h = (h ^ buf[i]) * 0x100000001b3ull;
  return h;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : bytes) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ull;
  return h;
}

}  // namespace gda
