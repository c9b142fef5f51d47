#include "thzbeam/federation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "thzbeam/agent.hpp"
#include "thzbeam/binary_io.hpp"
#include "thzbeam/errors.hpp"

namespace thzbeam {

void UploadPackage::validate() const {
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw ProtocolError("package: ratio outside (0, 1]");
  if (total_count == 0) throw ProtocolError("package: empty model");
  if (kind == UploadKind::Full) {
    if (!indices.empty()) throw ProtocolError("package: full upload carries indices");
    if (values.size() != total_count)
      throw ProtocolError("package: full upload length mismatch");
    return;
  }
  const std::size_t expected = partial_count(total_count, ratio);
  if (indices.size() != expected)
    throw ProtocolError("package: partial index count mismatch");
  if (values.size() != indices.size())
    throw ProtocolError("package: partial value count mismatch");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= total_count)
      throw ProtocolError("package: index out of bounds");
    if (i > 0 && indices[i] <= indices[i - 1])
      throw ProtocolError("package: indices not strictly increasing");
  }
}

std::size_t UploadPackage::payload_bytes() const { return 8 * values.size(); }

std::size_t UploadPackage::wire_bytes() const {
  const std::size_t header = 4 + 4 + 4 + 1 + 8 + 4 + 4;
  if (kind == UploadKind::Full) return header + 8 * values.size();
  return header + 12 * values.size();
}

std::size_t partial_count(std::size_t total, double ratio) {
  if (total == 0) throw std::invalid_argument("partial_count: empty model");
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw std::invalid_argument("upload ratio must lie in (0, 1]");
  const double raw = std::ceil(ratio * static_cast<double>(total) - 1e-9);
  auto count = static_cast<std::size_t>(raw);
  if (count < 1) count = 1;
  if (count > total) count = total;
  return count;
}

UploadPackage make_full_package(int agent_id, int round,
                                const std::vector<double>& params) {
  if (params.empty()) throw std::invalid_argument("full package: empty model");
  UploadPackage pkg;
  pkg.agent_id = agent_id;
  pkg.round = round;
  pkg.kind = UploadKind::Full;
  pkg.ratio = 1.0;
  pkg.total_count = static_cast<std::uint32_t>(params.size());
  pkg.values = params;
  return pkg;
}

UploadPackage select_partial(int agent_id, int round,
                             const std::vector<double>& current,
                             const std::vector<double>& last_synced,
                             double ratio, PartialSelection selection,
                             Rng* rng) {
  if (current.empty()) throw std::invalid_argument("select_partial: empty model");
  if (current.size() != last_synced.size())
    throw std::invalid_argument("select_partial: length mismatch");
  const std::size_t n = current.size();
  const std::size_t count = partial_count(n, ratio);
  // Selecting every coordinate is a full upload; emitting it as one keeps
  // ratio-1 rounds valid even before any global model exists.
  if (count == n) return make_full_package(agent_id, round, current);

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  if (selection == PartialSelection::TopDelta) {
    std::partial_sort(order.begin(), order.begin() + count, order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        const double da = std::abs(current[a] - last_synced[a]);
                        const double db = std::abs(current[b] - last_synced[b]);
                        if (da != db) return da > db;
                        return a < b;
                      });
  } else {
    if (rng == nullptr)
      throw std::invalid_argument("select_partial: random selection needs an rng");
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + rng->index(n - i);
      std::swap(order[i], order[j]);
    }
  }
  order.resize(count);
  std::sort(order.begin(), order.end());

  UploadPackage pkg;
  pkg.agent_id = agent_id;
  pkg.round = round;
  pkg.kind = UploadKind::Partial;
  pkg.ratio = ratio;
  pkg.total_count = static_cast<std::uint32_t>(n);
  pkg.indices = std::move(order);
  pkg.values.reserve(count);
  for (std::uint32_t idx : pkg.indices) pkg.values.push_back(current[idx]);
  return pkg;
}

GlobalModel aggregate(const std::vector<UploadPackage>& packages,
                      const GlobalModel& previous) {
  if (packages.empty()) throw ProtocolError("aggregate: no packages");
  for (const auto& pkg : packages) pkg.validate();

  const std::uint32_t total = packages.front().total_count;
  bool any_partial = false;
  for (const auto& pkg : packages) {
    if (pkg.total_count != total)
      throw ProtocolError("aggregate: parameter counts disagree");
    if (pkg.kind == UploadKind::Partial) any_partial = true;
  }
  if (!previous.params.empty() && previous.params.size() != total)
    throw ProtocolError("aggregate: previous global length mismatch");
  if (any_partial && previous.params.empty())
    throw ProtocolError("aggregate: partial upload needs a previous global");

  std::vector<const UploadPackage*> ordered;
  ordered.reserve(packages.size());
  for (const auto& pkg : packages) ordered.push_back(&pkg);
  std::sort(ordered.begin(), ordered.end(),
            [](const UploadPackage* a, const UploadPackage* b) {
              return a->agent_id < b->agent_id;
            });
  for (std::size_t i = 1; i < ordered.size(); ++i)
    if (ordered[i]->agent_id == ordered[i - 1]->agent_id)
      throw ProtocolError("aggregate: duplicate agent id");

  std::vector<double> weights(ordered.size(), 1.0);
  if (!previous.importance.empty()) {
    if (previous.importance.size() != ordered.size())
      throw ProtocolError("aggregate: importance count mismatch");
    weights = previous.importance;
  }

  GlobalModel result;
  result.params.assign(total, 0.0);
  result.round = previous.round + 1;
  result.importance = previous.importance;
  const double scale = 1.0 / static_cast<double>(ordered.size());
  for (std::size_t a = 0; a < ordered.size(); ++a) {
    const UploadPackage& pkg = *ordered[a];
    const double w = weights[a] * scale;
    if (pkg.kind == UploadKind::Full) {
      for (std::uint32_t i = 0; i < total; ++i)
        result.params[i] += w * pkg.values[i];
    } else {
      for (std::uint32_t i = 0; i < total; ++i)
        result.params[i] += w * previous.params[i];
      for (std::size_t e = 0; e < pkg.indices.size(); ++e) {
        const std::uint32_t i = pkg.indices[e];
        result.params[i] += w * (pkg.values[e] - previous.params[i]);
      }
    }
  }
  return result;
}

void apply_global(DdpgAgent& agent, const GlobalModel& global) {
  agent.load_model_params(global.params);
}

bool federation_round_due(int epoch, int cycle) {
  if (cycle < 1) throw std::invalid_argument("federation cycle must be >= 1");
  return epoch % cycle == 0;
}

namespace {
constexpr char kPackageMagic[4] = {'F', 'P', 'K', '1'};
}

void write_package(std::ostream& out, const UploadPackage& pkg) {
  pkg.validate();
  out.write(kPackageMagic, 4);
  io::write_u32(out, static_cast<std::uint32_t>(pkg.agent_id));
  io::write_u32(out, static_cast<std::uint32_t>(pkg.round));
  const unsigned char kind = pkg.kind == UploadKind::Partial ? 1 : 0;
  out.write(reinterpret_cast<const char*>(&kind), 1);
  io::write_f64(out, pkg.ratio);
  io::write_u32(out, pkg.total_count);
  io::write_u32(out, static_cast<std::uint32_t>(pkg.values.size()));
  if (pkg.kind == UploadKind::Full) {
    for (double v : pkg.values) io::write_f64(out, v);
  } else {
    for (std::size_t e = 0; e < pkg.values.size(); ++e) {
      io::write_u32(out, pkg.indices[e]);
      io::write_f64(out, pkg.values[e]);
    }
  }
  if (!out) throw IoError("package write failed");
}

UploadPackage read_package(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kPackageMagic, 4) != 0)
    throw IoError("package read: bad magic");
  UploadPackage pkg;
  pkg.agent_id = static_cast<int>(io::read_u32(in));
  pkg.round = static_cast<int>(io::read_u32(in));
  unsigned char kind = 0;
  in.read(reinterpret_cast<char*>(&kind), 1);
  if (!in) throw IoError("package read: truncated header");
  if (kind > 1) throw ProtocolError("package read: unknown kind");
  pkg.kind = kind == 1 ? UploadKind::Partial : UploadKind::Full;
  pkg.ratio = io::read_f64(in);
  pkg.total_count = io::read_u32(in);
  const std::uint32_t entries = io::read_u32(in);
  pkg.values.reserve(entries);
  if (pkg.kind == UploadKind::Full) {
    for (std::uint32_t e = 0; e < entries; ++e)
      pkg.values.push_back(io::read_f64(in));
  } else {
    pkg.indices.reserve(entries);
    for (std::uint32_t e = 0; e < entries; ++e) {
      pkg.indices.push_back(io::read_u32(in));
      pkg.values.push_back(io::read_f64(in));
    }
  }
  pkg.validate();
  return pkg;
}

void save_package(const std::string& path, const UploadPackage& pkg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_package(out, pkg);
}

UploadPackage load_package(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  return read_package(in);
}

}  // namespace thzbeam
