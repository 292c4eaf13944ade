#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>

#include "hih/tensor.hpp"

namespace hih {

// Little-endian container: magic "HIHT", u32 rank, rank x u64 dims, then the
// values as raw 64-bit floats.
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);
void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

// Debug dump: header line with the shape, then one row per leading-axis
// slice (rank >= 2) or a single row (rank <= 1), values printed with 17
// significant digits.
void write_tensor_csv(std::ostream& out, const Tensor& t);

// Little-endian scalar helpers shared by the other binary formats.
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_f32(std::ostream& out, float v);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
float read_f32(std::istream& in);

}  // namespace hih
