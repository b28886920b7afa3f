// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "flowdmd/dmd.hpp"

namespace flowdmd {

/// Binary DMD model file, all integers and doubles little-endian.
///
///   offset 0  8 bytes   magic "FLOWDMD\0"
///   offset 8  u32       format version (kModelFormatVersion)
///
/// followed by tagged fields in this fixed order. Every field starts with
/// its 4-byte ASCII tag; strings are u32 length + UTF-8 bytes; complex
/// arrays are u64 count + count pairs of f64 (real, imaginary).
///
///   "NDIM" u64   n
///   "RANK" u64   r
///   "DT  " f64   dt
///   "T0  " str   t0 label, YYYY-MM-DD
///   "RREQ" u64   requested rank
///   "RSVD" u64   SVD rank actually used
///   "DROP" u64   modes dropped for |lambda| <= 1e-12
///   "MTRN" u64   number of training snapshots
///   "PLCS" u64   place count, then that many str
///   "LAMB" cplx  discrete eigenvalues, r entries
///   "OMEG" cplx  continuous eigenvalues, r entries
///   "AMPL" cplx  amplitudes, r entries
///   "MODE" cplx  modes, n * r entries, column-major
///
/// Doubles are stored bit-for-bit, so write-then-read is exact.
inline constexpr std::array<char, 8> kModelMagic{'F', 'L', 'O', 'W', 'D', 'M', 'D', '\0'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(std::ostream& out, const DmdModel& model);
void save_model(const std::filesystem::path& path, const DmdModel& model);

DmdModel load_model(std::istream& in);
DmdModel load_model(const std::filesystem::path& path);

}  // namespace flowdmd
