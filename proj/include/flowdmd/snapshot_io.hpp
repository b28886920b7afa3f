// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>

#include "flowdmd/ingestion.hpp"

namespace flowdmd {

// Snapshot file layout (tab separated, one record per line):
//
//   flowdmd-snapshots <version>
//   k <k>
//   m <m>
//   place <id>            k lines, in index order
//   week <YYYY-MM-DD>     m lines, chronological
//   col <v_1> ... <v_k2>  m lines, column-major vec(S^t)
//
// Values are written in shortest round-trip form, so reading reproduces
// the in-memory matrix exactly.

inline constexpr int kSnapshotFormatVersion = 1;

void write_snapshot_file(std::ostream& out, const SnapshotMatrix& snapshots);
void write_snapshot_file(const std::filesystem::path& path, const SnapshotMatrix& snapshots);

SnapshotMatrix read_snapshot_file(std::istream& in);
SnapshotMatrix read_snapshot_file(const std::filesystem::path& path);

/// Per-week summary: week label and total (symmetrized) flow.
void write_snapshot_summary(std::ostream& out, const SnapshotMatrix& snapshots);

}  // namespace flowdmd
