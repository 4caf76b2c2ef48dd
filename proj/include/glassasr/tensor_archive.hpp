#pragma once

// Flat binary tensor archive with a textual index:
//
//   glassasr-tensors 1
//   <name> <rank> <dim0> ... <dim_{rank-1}> <offset>
//   ...
//   end
//   <little-endian float32 payload>
//
// Offsets count float32 elements from the start of the payload.

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace glassasr {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> values;

  std::size_t element_count() const;
  bool operator==(const Tensor&) const = default;
};

using TensorArchive = std::map<std::string, Tensor>;

void save_tensor_archive(const TensorArchive& archive, const std::filesystem::path& path);
// Throws DataError on a malformed index or truncated payload.
TensorArchive load_tensor_archive(const std::filesystem::path& path);

}  // namespace glassasr
