#pragma once

// Time-frequency mini-slot grid and the resource blocks that can be placed
// on it under a set of flexible numerologies.
//
// The base grid is the finest granularity in both dimensions: one frequency
// unit is a numerology-0 PRB and one time unit is a numerology-mu_max
// mini-slot. A numerology mu block is 2^mu frequency units wide and
// 2^(mu_max - mu) time units long, so every block has area 2^mu_max.
//
// Mini-slot index order: index(f, t) = f * T + t, i.e. time varies fastest
// within each frequency row. Every downstream tie-break follows this order.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrsched/slot_set.hpp"

namespace nrsched {

using BlockId = std::size_t;
using SlotIndex = std::size_t;

struct Numerology {
  int mu = 0;
  double cp_overhead = 0.0;  // cyclic-prefix / guard-band rate loss in [0,1)
};

struct GridConfig {
  int freq_units = 0;
  int time_units = 0;
  int mu_max = 0;
  double base_freq_hz = 180e3;
  double base_time_s = 1e-3;
  std::vector<Numerology> numerologies;
  // Build the full conflict table eagerly instead of on first use.
  bool precompute_conflicts = false;
};

struct MiniSlot {
  int f = 0;
  int t = 0;
  friend bool operator==(const MiniSlot&, const MiniSlot&) = default;
};

struct ResourceBlock {
  BlockId id = 0;
  int numerology_mu = 0;
  int f0 = 0;
  int t0 = 0;
  int freq_width = 0;
  int time_len = 0;
  double cp_overhead = 0.0;
  SlotSet covered;
  double end_time_s = 0.0;

  std::size_t area() const {
    return static_cast<std::size_t>(freq_width) *
           static_cast<std::size_t>(time_len);
  }
};

inline int freq_width_of(int mu) { return 1 << mu; }
inline int time_len_of(int mu, int mu_max) { return 1 << (mu_max - mu); }

class Grid {
 public:
  const GridConfig& config() const { return config_; }
  int freq_units() const { return config_.freq_units; }
  int time_units() const { return config_.time_units; }
  int mu_max() const { return config_.mu_max; }
  std::size_t slot_count() const {
    return static_cast<std::size_t>(config_.freq_units) *
           static_cast<std::size_t>(config_.time_units);
  }
  std::size_t block_area() const { return std::size_t{1} << config_.mu_max; }

  bool contains(MiniSlot s) const {
    return s.f >= 0 && s.f < config_.freq_units && s.t >= 0 &&
           s.t < config_.time_units;
  }

  SlotIndex slot_index(MiniSlot s) const {
    if (!contains(s))
      throw std::out_of_range("mini-slot (" + std::to_string(s.f) + "," +
                              std::to_string(s.t) + ") outside grid");
    return static_cast<SlotIndex>(s.f) *
               static_cast<SlotIndex>(config_.time_units) +
           static_cast<SlotIndex>(s.t);
  }

  MiniSlot slot_at(SlotIndex i) const {
    if (i >= slot_count()) throw std::out_of_range("slot index outside grid");
    const auto t_units = static_cast<SlotIndex>(config_.time_units);
    return {static_cast<int>(i / t_units), static_cast<int>(i % t_units)};
  }

  // Candidate blocks ordered by (mu, f0, t0) with dense ids.
  const std::vector<ResourceBlock>& blocks() const { return blocks_; }
  std::size_t block_count() const { return blocks_.size(); }

  const ResourceBlock& block(BlockId id) const {
    if (id >= blocks_.size())
      throw std::out_of_range("unknown block id " + std::to_string(id));
    return blocks_[id];
  }

  // Numerologies whose footprint does not fit on the grid.
  const std::vector<int>& empty_numerologies() const { return empty_mus_; }

  // Ids of all other blocks sharing at least one mini-slot with `id`,
  // ascending. Computed on first request and cached.
  const std::vector<BlockId>& conflict_set(BlockId id) const {
    if (id >= blocks_.size())
      throw std::out_of_range("unknown block id " + std::to_string(id));
    std::lock_guard lock(cache_->mutex);
    auto& entry = cache_->entries[id];
    if (!entry) entry = compute_conflicts(id);
    return *entry;
  }

  friend Grid build_grid(const GridConfig& config);

 private:
  struct ConflictCache {
    std::mutex mutex;
    std::vector<std::optional<std::vector<BlockId>>> entries;
  };

  std::vector<BlockId> compute_conflicts(BlockId id) const {
    std::vector<BlockId> out;
    const auto& mine = blocks_[id].covered;
    for (const auto& other : blocks_)
      if (other.id != id && mine.intersects(other.covered))
        out.push_back(other.id);
    return out;
  }

  GridConfig config_;
  std::vector<ResourceBlock> blocks_;
  std::vector<int> empty_mus_;
  std::shared_ptr<ConflictCache> cache_;
};

inline void validate(const GridConfig& config) {
  if (config.freq_units <= 0)
    throw std::invalid_argument("grid freq_units must be positive");
  if (config.time_units <= 0)
    throw std::invalid_argument("grid time_units must be positive");
  if (config.mu_max < 0 || config.mu_max > 16)
    throw std::invalid_argument("grid mu_max must be in [0, 16]");
  if (!(config.base_freq_hz > 0.0) || !(config.base_time_s > 0.0))
    throw std::invalid_argument("grid base units must be positive");
  if (config.numerologies.empty())
    throw std::invalid_argument("grid needs at least one numerology");
  std::vector<int> seen;
  for (const auto& n : config.numerologies) {
    if (n.mu < 0 || n.mu > config.mu_max)
      throw std::invalid_argument("numerology mu=" + std::to_string(n.mu) +
                                  " outside [0, mu_max]");
    if (!(n.cp_overhead >= 0.0 && n.cp_overhead < 1.0))
      throw std::invalid_argument("cp_overhead must be in [0,1)");
    if (std::find(seen.begin(), seen.end(), n.mu) != seen.end())
      throw std::invalid_argument("duplicate numerology mu=" +
                                  std::to_string(n.mu));
    seen.push_back(n.mu);
  }
}

inline Grid build_grid(const GridConfig& config) {
  validate(config);
  Grid grid;
  grid.config_ = config;
  std::sort(grid.config_.numerologies.begin(), grid.config_.numerologies.end(),
            [](const Numerology& a, const Numerology& b) { return a.mu < b.mu; });

  const int F = config.freq_units;
  const int T = config.time_units;
  const std::size_t slots = grid.slot_count();
  for (const auto& n : grid.config_.numerologies) {
    const int w = freq_width_of(n.mu);
    const int len = time_len_of(n.mu, config.mu_max);
    if (w > F || len > T) {
      grid.empty_mus_.push_back(n.mu);
      continue;
    }
    for (int f0 = 0; f0 + w <= F; ++f0) {
      for (int t0 = 0; t0 + len <= T; ++t0) {
        ResourceBlock b;
        b.id = grid.blocks_.size();
        b.numerology_mu = n.mu;
        b.f0 = f0;
        b.t0 = t0;
        b.freq_width = w;
        b.time_len = len;
        b.cp_overhead = n.cp_overhead;
        b.covered = SlotSet(slots);
        for (int f = f0; f < f0 + w; ++f)
          for (int t = t0; t < t0 + len; ++t) b.covered.set(grid.slot_index({f, t}));
        b.end_time_s = static_cast<double>(t0 + len) * config.base_time_s;
        grid.blocks_.push_back(std::move(b));
      }
    }
  }

  grid.cache_ = std::make_shared<Grid::ConflictCache>();
  grid.cache_->entries.resize(grid.blocks_.size());
  if (config.precompute_conflicts)
    for (BlockId id = 0; id < grid.blocks_.size(); ++id)
      grid.cache_->entries[id] = grid.compute_conflicts(id);
  return grid;
}

// Number of placements build_grid produces for this configuration.
inline std::size_t expected_block_count(const GridConfig& config) {
  std::size_t total = 0;
  for (const auto& n : config.numerologies) {
    const long fw = config.freq_units - freq_width_of(n.mu) + 1;
    const long tl = config.time_units - time_len_of(n.mu, config.mu_max) + 1;
    total += static_cast<std::size_t>(std::max(0L, fw) * std::max(0L, tl));
  }
  return total;
}

inline const std::vector<ResourceBlock>& enumerate_blocks(const Grid& grid) {
  return grid.blocks();
}

inline const std::vector<BlockId>& conflict_set(const Grid& grid,
                                                const ResourceBlock& block) {
  return grid.conflict_set(block.id);
}

// alpha_{b,i}: whether `block` includes mini-slot `slot`.
inline bool covers(const Grid& grid, const ResourceBlock& block, MiniSlot slot) {
  if (!grid.contains(slot))
    throw std::out_of_range("mini-slot outside grid");
  return slot.f >= block.f0 && slot.f < block.f0 + block.freq_width &&
         slot.t >= block.t0 && slot.t < block.t0 + block.time_len;
}

}  // namespace nrsched
