#include "glassasr/tensor_archive.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "glassasr/error.hpp"

namespace glassasr {

std::size_t Tensor::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void save_tensor_archive(const TensorArchive& archive, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write tensor archive: " + path.string());
  out << "glassasr-tensors 1\n";
  std::size_t offset = 0;
  for (const auto& [name, t] : archive) {
    if (t.values.size() != t.element_count()) throw std::invalid_argument("tensor '" + name + "' shape does not match values");
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) throw std::invalid_argument("bad tensor name");
    out << name << ' ' << t.shape.size();
    for (auto d : t.shape) out << ' ' << d;
    out << ' ' << offset << '\n';
    offset += t.values.size();
  }
  out << "end\n";
  for (const auto& [name, t] : archive) {
    for (float v : t.values) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      const char b[4] = {char(bits & 0xff), char((bits >> 8) & 0xff), char((bits >> 16) & 0xff), char(bits >> 24)};
      out.write(b, 4);
    }
  }
  if (!out) throw DataError("write failed: " + path.string());
}

TensorArchive load_tensor_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tensor archive: " + path.string());
  const std::string where = path.string();
  std::string line;
  if (!std::getline(in, line) || line != "glassasr-tensors 1") throw DataError(where + ": not a tensor archive");

  struct Entry {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset;
  };
  std::vector<Entry> index;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    Entry e;
    std::size_t rank = 0;
    if (!(ls >> e.name >> rank)) throw DataError(where + ": bad index line '" + line + "'");
    e.shape.resize(rank);
    for (auto& d : e.shape) {
      if (!(ls >> d)) throw DataError(where + ": bad shape for '" + e.name + "'");
    }
    if (!(ls >> e.offset)) throw DataError(where + ": missing offset for '" + e.name + "'");
    index.push_back(std::move(e));
  }
  if (!ended) throw DataError(where + ": index not terminated by 'end'");

  std::vector<char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t floats = payload.size() / 4;
  TensorArchive out;
  for (auto& e : index) {
    Tensor t{e.shape, {}};
    const std::size_t n = t.element_count();
    if (e.offset + n > floats) throw DataError(where + ": payload truncated for '" + e.name + "'");
    t.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto* p = reinterpret_cast<const unsigned char*>(payload.data() + 4 * (e.offset + i));
      const std::uint32_t bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
                                 std::uint32_t(p[3]) << 24;
      t.values[i] = std::bit_cast<float>(bits);
    }
    if (!out.emplace(e.name, std::move(t)).second) throw DataError(where + ": duplicate tensor '" + e.name + "'");
  }
  return out;
}

}  // namespace glassasr

// ---------------------------------------------------------------------------
// nn building blocks

#include "glassasr/kernels.hpp"
#include "glassasr/nn.hpp"

namespace glassasr::nn {

void Linear::apply(std::span<const float> x, std::span<float> y) const { kernels::gemv(weight, out, in, x, bias, y); }

MatrixF Linear::apply(const MatrixF& x) const {
  if (x.cols() != in) throw std::invalid_argument("Linear: input width mismatch");
  MatrixF y(x.rows(), out);
  for (std::size_t r = 0; r < x.rows(); ++r) apply(x.row(r), y.row(r));
  return y;
}

void LayerNorm::apply_inplace(std::span<float> x) const {
  const std::size_t n = x.size();
  float mean = 0.0f;
  for (float v : x) mean += v;
  mean /= float(n);
  float var = 0.0f;
  for (float v : x) var += (v - mean) * (v - mean);
  var /= float(n);
  const float inv = 1.0f / std::sqrt(var + 1e-5f);
  for (std::size_t i = 0; i < n; ++i) x[i] = (x[i] - mean) * inv * gamma[i] + beta[i];
}

MatrixF LayerNorm::apply(const MatrixF& x) const {
  if (x.cols() != gamma.size()) throw std::invalid_argument("LayerNorm: width mismatch");
  MatrixF y = x;
  for (std::size_t r = 0; r < y.rows(); ++r) apply_inplace(y.row(r));
  return y;
}

void RandomInit::operator()(const std::string& name, const std::vector<std::size_t>& shape, std::vector<float>& values) {
  if (name.ends_with(".gamma")) {
    std::fill(values.begin(), values.end(), 1.0f);
    return;
  }
  float scale = bias_scale;
  if (name.ends_with(".weight") && !shape.empty()) {
    std::size_t fan_in = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
    if (shape.size() == 1) fan_in = shape[0];
    scale = 1.0f / std::sqrt(float(std::max<std::size_t>(fan_in, 1)));
  }
  for (auto& v : values) v = static_cast<float>(normal01(rng)) * scale;
}

void ArchiveWriter::operator()(const std::string& name, const std::vector<std::size_t>& shape, std::vector<float>& values) {
  archive[name] = Tensor{shape, values};
}

void ArchiveReader::operator()(const std::string& name, const std::vector<std::size_t>& shape, std::vector<float>& values) {
  auto it = archive.find(name);
  if (it == archive.end()) throw DataError("missing tensor '" + name + "'");
  if (it->second.shape != shape) throw DataError("shape mismatch for tensor '" + name + "'");
  values = it->second.values;
}

}  // namespace glassasr::nn
