#pragma once

#include <cstdint>
#include <iosfwd>

namespace thzbeam::io {

// Little-endian primitives shared by the checkpoint and upload formats.
void write_u32(std::ostream& out, std::uint32_t v);
std::uint32_t read_u32(std::istream& in);
void write_f64(std::ostream& out, double value);
double read_f64(std::istream& in);

}  // namespace thzbeam::io
