#include "fvl/nn/checkpoint.hpp"

#include <fstream>
#include <limits>

#include "fvl/common/binary_io.hpp"
#include "fvl/common/error.hpp"

namespace fvl::nn {

void write_params(std::ostream& out, const ParamSet& params) {
  out.write("FVLW", 4);
  binary::write_le<std::uint32_t>(out, kCheckpointVersion);
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    if (p.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw ValidationError("parameter name too long: " + p.name);
    }
    binary::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    binary::write_le<std::uint8_t>(out, p.rank);
    if (p.rank == 1) {
      binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.cols()));
    } else {
      binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rows()));
      binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.cols()));
    }
    for (double v : p.value.data) binary::write_f64(out, v);
  }
}

ParamSet read_params(std::istream& in, const std::string& source) {
  binary::Reader reader(in, source);
  reader.expect_magic("FVLW");
  const auto version = reader.read_le<std::uint32_t>("version");
  if (version != kCheckpointVersion) reader.fail("unsupported checkpoint version " + std::to_string(version));
  const auto count = reader.read_le<std::uint32_t>("parameter count");
  ParamSet params;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = reader.read_le<std::uint16_t>("name length");
    std::string name(name_len, '\0');
    reader.read_bytes(name.data(), name_len, "name");
    const auto rank = reader.read_le<std::uint8_t>("rank");
    if (rank != 1 && rank != 2) reader.fail("unsupported rank " + std::to_string(rank) + " for " + name);
    std::size_t rows = 1;
    std::size_t cols = 0;
    if (rank == 1) {
      cols = reader.read_le<std::uint32_t>("dim");
    } else {
      rows = reader.read_le<std::uint32_t>("dim");
      cols = reader.read_le<std::uint32_t>("dim");
    }
    Parameter p{name, diff::Matrix(rows, cols), rank};
    for (double& v : p.value.data) v = reader.read_f64("value");
    try {
      params.add(std::move(p));
    } catch (const ValidationError& e) {
      reader.fail(e.what());
    }
  }
  reader.expect_end();
  return params;
}

void save_params(const std::filesystem::path& path, const ParamSet& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_params(out, params);
  if (!out) throw FormatError("write failed for " + path.string());
}

ParamSet load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_params(in, path.string());
}

}  // namespace fvl::nn
