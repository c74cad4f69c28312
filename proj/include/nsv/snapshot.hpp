#pragma once

#include <string>
#include <vector>

#include "nsv/control.hpp"
#include "nsv/state.hpp"
#include "nsv/verification.hpp"

namespace nsv {

inline constexpr const char* snapshot_magic_state = "NSVD1";
inline constexpr const char* snapshot_magic_adjoint = "NSVD1-ADJ";

/// Binary field snapshot: 9-byte NUL-padded magic, then little-endian
/// uint64 n, float64 L, float64 time, uint64 component count (3), followed by
/// the physical-space values in x-fastest order, one component block at a time.
void write_snapshot(const std::string& path, const PhysicalField& field, double time,
                    const char* magic = snapshot_magic_state);

struct Snapshot {
    PhysicalField field;
    double time = 0.0;
    std::string magic;
};

Snapshot read_snapshot(const std::string& path);

// CSV emission; doubles printed with %.17g so identical runs are bit-identical
// and every row round-trips through the matching reader.
void write_energy_csv(const std::string& path, const std::vector<EnergyRow>& rows);
void write_iteration_csv(const std::string& path, const std::vector<IterationRow>& rows);
void write_check_report(const std::string& path, const std::vector<CheckResult>& checks);
void write_remainder_csv(const std::string& path, const std::vector<RemainderRow>& rows);

std::vector<EnergyRow> read_energy_csv(const std::string& path);
std::vector<IterationRow> read_iteration_csv(const std::string& path);
std::vector<CheckResult> read_check_report(const std::string& path);
std::vector<RemainderRow> read_remainder_csv(const std::string& path);

/// OptimalityReport as a flat key-value text document.
void write_optimality_report(const std::string& path, const OptimalityReport& report);
/// Key-value lines of a report file, in file order.
std::vector<std::pair<std::string, std::string>> read_key_value_report(const std::string& path);

/// Writes manifest.txt in `dir` listing every artifact with its FNV-1a 64-bit
/// content hash.
void write_manifest(const std::string& dir, const std::vector<std::string>& filenames);
/// Recomputes every hash listed in dir/manifest.txt; true iff all match.
bool verify_manifest(const std::string& dir);

std::uint64_t fnv1a_file_hash(const std::string& path);

}  // namespace nsv
