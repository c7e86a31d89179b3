#pragma once

#include <filesystem>
#include <iosfwd>

#include "fvl/nn/parameters.hpp"

namespace fvl::nn {

// Binary parameter file, all integers little-endian:
//   "FVLW" | u32 version (1) | u32 parameter count
//   per parameter: u16 name length | name bytes | u8 rank | u32 dims[rank]
//                  | f64 values, row-major
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_params(std::ostream& out, const ParamSet& params);
ParamSet read_params(std::istream& in, const std::string& source = "<stream>");

void save_params(const std::filesystem::path& path, const ParamSet& params);
ParamSet load_params(const std::filesystem::path& path);

}  // namespace fvl::nn
