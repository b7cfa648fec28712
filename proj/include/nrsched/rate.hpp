#pragma once

// Users, the per-(block, user) achievable-rate model and the URLLC latency
// mask.

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrsched/grid.hpp"

namespace nrsched {

using UserId = std::size_t;

// Tolerance for every kbps comparison (demand coverage, caps).
inline constexpr double kRateEpsilon = 1e-9;

enum class ServiceClass { kEmbb, kUrllc };

inline const char* to_string(ServiceClass c) {
  return c == ServiceClass::kEmbb ? "embb" : "urllc";
}

struct User {
  UserId id = 0;
  ServiceClass service_class = ServiceClass::kEmbb;
  double spectral_efficiency = 1.0;     // bits/s/Hz
  double demand_q_kbps = 0.0;           // URLLC only
  std::optional<double> latency_tau_ms;  // nullopt = unbounded
  double slack_u_kbps = 0.0;            // URLLC only

  bool is_urllc() const { return service_class == ServiceClass::kUrllc; }
  bool is_embb() const { return service_class == ServiceClass::kEmbb; }
  // Soft-constraint cap q'_k = q_k + u_k.
  double capped_demand_kbps() const { return demand_q_kbps + slack_u_kbps; }
};

inline void validate(const User& u) {
  const std::string who = "user " + std::to_string(u.id);
  if (!(u.spectral_efficiency > 0.0) || !std::isfinite(u.spectral_efficiency))
    throw std::invalid_argument(who + ": spectral_efficiency must be > 0");
  if (u.is_embb()) {
    if (u.latency_tau_ms)
      throw std::invalid_argument(who + ": eMBB users have no latency bound");
    if (u.slack_u_kbps != 0.0 || u.demand_q_kbps != 0.0)
      throw std::invalid_argument(who + ": eMBB users carry no demand or slack");
    return;
  }
  if (!u.latency_tau_ms || !(*u.latency_tau_ms > 0.0) ||
      !std::isfinite(*u.latency_tau_ms))
    throw std::invalid_argument(who + ": URLLC latency must be finite and > 0");
  if (!(u.demand_q_kbps > 0.0) || !std::isfinite(u.demand_q_kbps))
    throw std::invalid_argument(who + ": URLLC demand must be > 0");
  if (!(u.slack_u_kbps >= 0.0) || !std::isfinite(u.slack_u_kbps))
    throw std::invalid_argument(who + ": URLLC slack must be >= 0");
}

// User ids must be the dense positions 0..n-1; they index rate-matrix columns.
inline void validate_users(const std::vector<User>& users) {
  for (std::size_t k = 0; k < users.size(); ++k) {
    if (users[k].id != k)
      throw std::invalid_argument("user ids must be dense and ordered; position " +
                                  std::to_string(k) + " has id " +
                                  std::to_string(users[k].id));
    validate(users[k]);
  }
}

struct RateModelParams {
  double ctrl_overhead = 0.0;
  std::map<int, double> ctrl_overhead_by_mu;  // overrides ctrl_overhead
  double frame_duration_ms = 2.0;

  double ctrl_for(int mu) const {
    auto it = ctrl_overhead_by_mu.find(mu);
    return it == ctrl_overhead_by_mu.end() ? ctrl_overhead : it->second;
  }
};

inline void validate(const RateModelParams& p, const GridConfig& grid) {
  if (!(p.frame_duration_ms > 0.0) || !std::isfinite(p.frame_duration_ms))
    throw std::invalid_argument("frame_duration_ms must be > 0");
  auto check = [](double c) {
    if (!(c >= 0.0 && c < 1.0))
      throw std::invalid_argument("ctrl_overhead must be in [0,1)");
  };
  check(p.ctrl_overhead);
  for (const auto& [mu, c] : p.ctrl_overhead_by_mu) check(c);
  for (const auto& n : grid.numerologies) {
    const double total = p.ctrl_for(n.mu) + n.cp_overhead;
    if (!(total >= 0.0 && total < 1.0))
      throw std::invalid_argument("ctrl + cp overhead must be < 1 for mu=" +
                                  std::to_string(n.mu));
  }
}

// Rate in kbps of `user` on `block`, before latency masking: bits carried by
// the block, discounted by both overheads, spread over one frame.
inline double achievable_rate(const ResourceBlock& block, const User& user,
                              const RateModelParams& params, const Grid& grid) {
  const auto& cfg = grid.config();
  const double bandwidth_hz = block.freq_width * cfg.base_freq_hz;
  const double duration_s = block.time_len * cfg.base_time_s;
  const double bits = bandwidth_hz * duration_s * user.spectral_efficiency *
                      (1.0 - block.cp_overhead) *
                      (1.0 - params.ctrl_for(block.numerology_mu));
  return bits / (params.frame_duration_ms * 1e-3) / 1e3;
}

// A URLLC user may not use a block that ends after its deadline. The
// boundary is admitted; the relative slack absorbs ms/s conversion rounding.
inline bool exceeds_deadline(const ResourceBlock& block, const User& user) {
  if (!user.is_urllc() || !user.latency_tau_ms) return false;
  const double deadline_s = *user.latency_tau_ms * 1e-3;
  return block.end_time_s > deadline_s * (1.0 + 1e-9);
}

inline double latency_mask(double rate_kbps, const ResourceBlock& block,
                           const User& user) {
  return exceeds_deadline(block, user) ? 0.0 : rate_kbps;
}

// Dense |B| x |K| matrix of kbps values r_{b,k}.
class RateMatrix {
 public:
  RateMatrix() = default;
  RateMatrix(std::size_t blocks, std::size_t users)
      : blocks_(blocks), users_(users), entries_(blocks * users, 0.0) {}

  // Row-major by block. Entries must be finite and non-negative.
  static RateMatrix from_entries(std::size_t blocks, std::size_t users,
                                 std::vector<double> entries) {
    if (entries.size() != blocks * users)
      throw std::invalid_argument("rate matrix entry count mismatch");
    for (double v : entries)
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("rate matrix entries must be finite and >= 0");
    RateMatrix m;
    m.blocks_ = blocks;
    m.users_ = users;
    m.entries_ = std::move(entries);
    return m;
  }

  std::size_t block_count() const { return blocks_; }
  std::size_t user_count() const { return users_; }

  double at(BlockId b, UserId k) const {
    if (b >= blocks_ || k >= users_)
      throw std::out_of_range("rate matrix index out of range");
    return entries_[b * users_ + k];
  }
  double operator()(BlockId b, UserId k) const { return entries_[b * users_ + k]; }

  void set(BlockId b, UserId k, double v) {
    if (b >= blocks_ || k >= users_)
      throw std::out_of_range("rate matrix index out of range");
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("rate must be finite and >= 0");
    entries_[b * users_ + k] = v;
  }

  friend bool operator==(const RateMatrix&, const RateMatrix&) = default;

 private:
  std::size_t blocks_ = 0;
  std::size_t users_ = 0;
  std::vector<double> entries_;
};

inline RateMatrix build_rate_matrix(const Grid& grid, const std::vector<User>& users,
                                    const RateModelParams& params) {
  if (users.empty()) throw std::invalid_argument("rate matrix needs users");
  validate_users(users);
  validate(params, grid.config());
  RateMatrix m(grid.block_count(), users.size());
  for (const auto& b : grid.blocks())
    for (const auto& u : users)
      m.set(b.id, u.id, latency_mask(achievable_rate(b, u, params, grid), b, u));
  return m;
}

}  // namespace nrsched
