#pragma once

#include <cstdint>
#include <vector>

#include "etsim/noise.hpp"
#include "etsim/trigger.hpp"

namespace etsim {

/// One synchronous broadcast round. Deliveries are independent Bernoulli
/// trials per (sender, receiver) pair; a sender always sees its own payload
/// (its local predictor copy resets regardless of what the bus does).
struct BusRound {
  int round = 0;
  double p_drop = 0.0;
  std::vector<int> senders;
  std::vector<std::vector<std::uint8_t>> delivered;  // [sender position][receiver agent]

  bool delivered_to(int sender_agent, int receiver) const;
};

BusRound broadcast(int round, const std::vector<int>& senders, int n_agents, double p_drop,
                   NoiseSource& noise);

/// One consumed communication slot and when it became known.
struct AllocationRecord {
  int round = 0;
  int agent = 0;
  int decided_at = 0;
  int lead_time = 0;  // round - decided_at; 0 marks an instantaneous decision
};

/// Reconstructs the slot schedule from the agents' trigger books: one record
/// per fired slot through `through_step`, with the time the decision was
/// made. Event-trigger rows come out with zero lead time.
std::vector<AllocationRecord> allocation_log(const std::vector<const TriggerBook*>& books,
                                             int through_step);

}  // namespace etsim
