#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lsim/coupling.hpp"
#include "lsim/replica.hpp"

namespace lsim {

/// M-out-of-N voting policy, 1 <= m <= n <= 8.
///
/// Duplex policies (n == 2) are comparators whatever m says: the two
/// channels must agree, so 1oo2 and 2oo2 differ in architecture, not in
/// what the voter accepts.
struct VotingPolicy {
  std::uint32_t m = 1;
  std::uint32_t n = 2;

  static VotingPolicy parse(std::string_view text);  // "2oo3"
  static VotingPolicy one_of_two() { return {1, 2}; }
  static VotingPolicy two_of_two() { return {2, 2}; }
  static VotingPolicy two_of_three() { return {2, 3}; }

  void validate() const;
  std::uint32_t required_agreement() const noexcept { return n == 2 ? 2 : m; }
  std::string name() const;

  friend bool operator==(const VotingPolicy&, const VotingPolicy&) = default;
};

struct ExactComparator {};
/// Agreement iff the max absolute difference of dequantized elements <= eps.
/// Reflexive and symmetric, not transitive.
struct ToleranceComparator {
  double eps = 0.0;
};
using Comparator = std::variant<ExactComparator, ToleranceComparator>;

bool outputs_agree(const ReplicaOutput& a, const ReplicaOutput& b, const Comparator& cmp);

struct VerdictPass {
  FixedPointTensor agreed_output;
  std::uint64_t agreed_digest = 0;
  std::vector<std::uint32_t> agreeing_ids;
};
struct VerdictMismatch {
  std::vector<std::vector<std::uint32_t>> groups;
};
struct VerdictTimeout {
  std::vector<std::uint32_t> missing_ids;
};
struct VerdictDegraded {
  std::string reason;
};
using Verdict = std::variant<VerdictPass, VerdictMismatch, VerdictTimeout, VerdictDegraded>;

const char* verdict_name(const Verdict& v) noexcept;

/// Agreement groups as replica ids. Outputs are scanned in replica-id order;
/// each joins the first group whose pivot (first member) it agrees with, or
/// founds a new group. Groups come out ordered by pivot id. Throws
/// ProtocolError on outputs of different shapes.
std::vector<std::vector<std::uint32_t>> group_agreements(std::span<const ReplicaOutput> outputs,
                                                         const Comparator& cmp);

/// Timeout outcome -> Timeout. Otherwise the largest group (ties to the
/// lowest replica id) passes if it reaches the policy's required agreement,
/// else Mismatch with every group. Fewer outputs than the required
/// agreement -> Degraded.
Verdict vote(std::span<const ReplicaOutput> outputs, const VotingPolicy& policy,
             const Comparator& cmp, const RendezvousOutcome& rendezvous);

// ---------------------------------------------------------------------------
// Safety switch-off

enum class SafetyState { Operational, SafeOff };
enum class SafetyAction { DeliverOutput, SuppressOutput, EnterSafeOff };

const char* to_string(SafetyState s) noexcept;
const char* to_string(SafetyAction a) noexcept;

struct SafetySwitchState {
  SafetyState state = SafetyState::Operational;
  std::uint32_t consecutive_fault_count = 0;
  std::uint32_t debounce_threshold = 1;

  friend bool operator==(const SafetySwitchState&, const SafetySwitchState&) = default;
};

struct SafetyStep {
  SafetySwitchState state;
  SafetyAction action = SafetyAction::SuppressOutput;
};

/// SafeOff is absorbing. Pass delivers and resets the counter; any other
/// verdict counts as a fault and trips once the counter reaches the
/// debounce threshold.
SafetyStep step_safety(const SafetySwitchState& state, const Verdict& verdict);

/// Unconditional trip, for escalations that bypass voting.
SafetyStep force_safe_off(const SafetySwitchState& state);

}  // namespace lsim
