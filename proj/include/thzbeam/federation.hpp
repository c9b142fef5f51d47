#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "thzbeam/rng.hpp"

namespace thzbeam {

class DdpgAgent;

enum class UploadKind { Full, Partial };
enum class PartialSelection { TopDelta, Random };

// One agent's model contribution for a federation round. Partial packages
// carry a strictly increasing index list alongside the values.
struct UploadPackage {
  int agent_id = 0;
  int round = 0;
  UploadKind kind = UploadKind::Full;
  double ratio = 1.0;
  std::uint32_t total_count = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  void validate() const;
  // Model payload only: 8 bytes per carried parameter value. This is the
  // figure reported as upload overhead.
  std::size_t payload_bytes() const;
  // Full serialized size including header and partial-index framing.
  std::size_t wire_bytes() const;
};

struct GlobalModel {
  std::vector<double> params;
  int round = 0;
  // Importance weight per agent, paired with packages ordered by agent id.
  // Empty means every agent weighs 1.
  std::vector<double> importance;
};

// ceil(ratio * total), clamped to [1, total].
std::size_t partial_count(std::size_t total, double ratio);

UploadPackage make_full_package(int agent_id, int round,
                                const std::vector<double>& params);

// Picks the coordinates with the largest |current - last_synced| (ties go to
// the lower index), or a uniform subset when selection is Random.
UploadPackage select_partial(int agent_id, int round,
                             const std::vector<double>& current,
                             const std::vector<double>& last_synced,
                             double ratio,
                             PartialSelection selection = PartialSelection::TopDelta,
                             Rng* rng = nullptr);

// Coordinate-wise importance-weighted mean over agents; a coordinate missing
// from a partial package contributes previous.params at that position for
// that agent. previous.params may be empty only if every package is full.
GlobalModel aggregate(const std::vector<UploadPackage>& packages,
                      const GlobalModel& previous);

// Overwrites the agent's main actor and critic with the global parameters and
// refreshes its last-synced snapshot. Target networks are left alone.
void apply_global(DdpgAgent& agent, const GlobalModel& global);

// True when a training epoch lands on a federation boundary (epoch mod cycle
// is zero; epochs count from 1).
bool federation_round_due(int epoch, int cycle);

// Wire format, little-endian:
//   4 bytes magic "FPK1"
//   u32 agent_id, u32 round, u8 kind (0 full, 1 partial), f64 ratio,
//   u32 total_count, u32 entry_count
//   full:    entry_count x f64 value
//   partial: entry_count x (u32 index, f64 value)
void write_package(std::ostream& out, const UploadPackage& pkg);
UploadPackage read_package(std::istream& in);
void save_package(const std::string& path, const UploadPackage& pkg);
UploadPackage load_package(const std::string& path);

}  // namespace thzbeam
