#include "lsim/voter.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <numeric>

namespace lsim {

VotingPolicy VotingPolicy::parse(std::string_view text) {
  const auto pos = text.find("oo");
  if (pos == std::string_view::npos) {
    throw ConfigError("voting policy '" + std::string(text) + "' is not of the form MooN");
  }
  VotingPolicy p{0, 0};
  const auto lhs = text.substr(0, pos);
  const auto rhs = text.substr(pos + 2);
  auto r1 = std::from_chars(lhs.data(), lhs.data() + lhs.size(), p.m);
  auto r2 = std::from_chars(rhs.data(), rhs.data() + rhs.size(), p.n);
  if (r1.ec != std::errc{} || r1.ptr != lhs.data() + lhs.size() || r2.ec != std::errc{} ||
      r2.ptr != rhs.data() + rhs.size()) {
    throw ConfigError("voting policy '" + std::string(text) + "' is not of the form MooN");
  }
  p.validate();
  return p;
}

void VotingPolicy::validate() const {
  if (m < 1 || m > n || n > 8) {
    throw ConfigError("voting policy " + name() + " violates 1 <= M <= N <= 8");
  }
}

std::string VotingPolicy::name() const { return std::to_string(m) + "oo" + std::to_string(n); }

bool outputs_agree(const ReplicaOutput& a, const ReplicaOutput& b, const Comparator& cmp) {
  if (std::holds_alternative<ExactComparator>(cmp)) return a.digest == b.digest;
  const double eps = std::get<ToleranceComparator>(cmp).eps;
  const auto da = a.output.data();
  const auto db = b.output.data();
  int max_diff = 0;
  for (std::size_t i = 0; i < da.size(); ++i) max_diff = std::max(max_diff, std::abs(da[i] - db[i]));
  return static_cast<double>(max_diff) / kOne <= eps;
}

const char* verdict_name(const Verdict& v) noexcept {
  switch (v.index()) {
    case 0: return "pass";
    case 1: return "mismatch";
    case 2: return "timeout";
    default: return "degraded";
  }
}

namespace {

std::vector<std::size_t> by_replica_id(std::span<const ReplicaOutput> outputs) {
  std::vector<std::size_t> order(outputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outputs[a].replica_id < outputs[b].replica_id;
  });
  return order;
}

// Groups as indices into `outputs`.
std::vector<std::vector<std::size_t>> group_indices(std::span<const ReplicaOutput> outputs,
                                                    const Comparator& cmp) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t idx : by_replica_id(outputs)) {
    if (outputs[idx].output.shape() != outputs.front().output.shape()) {
      throw ProtocolError("replica " + std::to_string(outputs[idx].replica_id) +
                          " output shape differs from replica " +
                          std::to_string(outputs.front().replica_id));
    }
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      return outputs_agree(outputs[g.front()], outputs[idx], cmp);
    });
    if (it == groups.end()) {
      groups.push_back({idx});
    } else {
      it->push_back(idx);
    }
  }
  return groups;
}

std::vector<std::vector<std::uint32_t>> to_ids(std::span<const ReplicaOutput> outputs,
                                               const std::vector<std::vector<std::size_t>>& g) {
  std::vector<std::vector<std::uint32_t>> ids;
  for (const auto& group : g) {
    auto& out = ids.emplace_back();
    for (auto i : group) out.push_back(outputs[i].replica_id);
  }
  return ids;
}

}  // namespace

std::vector<std::vector<std::uint32_t>> group_agreements(std::span<const ReplicaOutput> outputs,
                                                         const Comparator& cmp) {
  return to_ids(outputs, group_indices(outputs, cmp));
}

Verdict vote(std::span<const ReplicaOutput> outputs, const VotingPolicy& policy,
             const Comparator& cmp, const RendezvousOutcome& rendezvous) {
  policy.validate();
  if (const auto* t = std::get_if<RendezvousTimeout>(&rendezvous)) {
    return VerdictTimeout{t->missing_ids};
  }
  if (outputs.empty()) {
    std::vector<std::uint32_t> all(policy.n);
    std::iota(all.begin(), all.end(), 0u);
    return VerdictTimeout{std::move(all)};
  }
  if (outputs.size() < policy.required_agreement()) {
    return VerdictDegraded{"only " + std::to_string(outputs.size()) + " output(s) for " +
                           policy.name()};
  }
  const auto groups = group_indices(outputs, cmp);
  // Groups are ordered by pivot id, and a pivot is its group's lowest id, so
  // the first largest group is the tie-break winner.
  const auto best = std::max_element(groups.begin(), groups.end(),
                                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
  if (best->size() >= policy.required_agreement()) {
    VerdictPass pass;
    const auto& pivot = outputs[best->front()];
    pass.agreed_output = pivot.output;
    pass.agreed_digest = pivot.digest;
    for (auto i : *best) pass.agreeing_ids.push_back(outputs[i].replica_id);
    return pass;
  }
  return VerdictMismatch{to_ids(outputs, groups)};
}

const char* to_string(SafetyState s) noexcept {
  return s == SafetyState::Operational ? "operational" : "safe_off";
}

const char* to_string(SafetyAction a) noexcept {
  switch (a) {
    case SafetyAction::DeliverOutput: return "deliver_output";
    case SafetyAction::SuppressOutput: return "suppress_output";
    case SafetyAction::EnterSafeOff: return "enter_safe_off";
  }
  return "?";
}

SafetyStep step_safety(const SafetySwitchState& state, const Verdict& verdict) {
  SafetyStep step{state, SafetyAction::SuppressOutput};
  if (state.state == SafetyState::SafeOff) return step;
  if (std::holds_alternative<VerdictPass>(verdict)) {
    step.state.consecutive_fault_count = 0;
    step.action = SafetyAction::DeliverOutput;
    return step;
  }
  ++step.state.consecutive_fault_count;
  if (step.state.consecutive_fault_count >= state.debounce_threshold) {
    step.state.state = SafetyState::SafeOff;
    step.action = SafetyAction::EnterSafeOff;
  }
  return step;
}

SafetyStep force_safe_off(const SafetySwitchState& state) {
  SafetyStep step{state, SafetyAction::SuppressOutput};
  if (state.state == SafetyState::SafeOff) return step;
  step.state.state = SafetyState::SafeOff;
  step.action = SafetyAction::EnterSafeOff;
  return step;
}

}  // namespace lsim
