#include "etsim/network_sim.hpp"

#include <algorithm>

namespace etsim {

bool BusRound::delivered_to(int sender_agent, int receiver) const {
  for (std::size_t s = 0; s < senders.size(); ++s) {
    if (senders[s] == sender_agent) return delivered[s][receiver] != 0;
  }
  return false;
}

BusRound broadcast(int round, const std::vector<int>& senders, int n_agents, double p_drop,
                   NoiseSource& noise) {
  if (p_drop < 0.0 || p_drop > 1.0) throw ConfigError("broadcast: p_drop must lie in [0, 1]");
  BusRound out;
  out.round = round;
  out.p_drop = p_drop;
  out.senders = senders;
  std::sort(out.senders.begin(), out.senders.end());
  out.delivered.resize(out.senders.size());
  for (std::size_t s = 0; s < out.senders.size(); ++s) {
    out.delivered[s].assign(n_agents, 0);
    for (int r = 0; r < n_agents; ++r) {
      if (r == out.senders[s]) {
        out.delivered[s][r] = 1;  // local reset, not a bus delivery
      } else {
        out.delivered[s][r] = noise.bernoulli(p_drop) ? 0 : 1;
      }
    }
  }
  return out;
}

std::vector<AllocationRecord> allocation_log(const std::vector<const TriggerBook*>& books,
                                             int through_step) {
  std::vector<AllocationRecord> out;
  for (std::size_t agent = 0; agent < books.size(); ++agent) {
    const TriggerBook* book = books[agent];
    if (!book) throw ConfigError("allocation_log: null trigger book");
    for (int k = 1; k <= through_step && book->decided(k); ++k) {
      if (!book->decision(k)) continue;
      AllocationRecord rec;
      rec.round = k;
      rec.agent = static_cast<int>(agent);
      rec.decided_at = book->decided_at(k);
      rec.lead_time = k - rec.decided_at;
      out.push_back(rec);
    }
  }
  std::sort(out.begin(), out.end(), [](const AllocationRecord& a, const AllocationRecord& b) {
    return a.round != b.round ? a.round < b.round : a.agent < b.agent;
  });
  return out;
}

}  // namespace etsim
