#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "lsim/voter.hpp"

namespace lsim {

/// One agreement pattern of n outputs (e.g. "AAB": replicas 0 and 1 agree,
/// replica 2 differs) and the verdict the voter gives it.
struct VoteTableRow {
  std::string pattern;
  Verdict verdict;
};

/// Every set partition of n outputs, as restricted-growth strings in
/// lexicographic order.
std::vector<std::string> agreement_patterns(std::uint32_t n);

/// Builds one single-element output per replica from a pattern.
std::vector<ReplicaOutput> outputs_for_pattern(const std::string& pattern);

std::vector<VoteTableRow> vote_table(const VotingPolicy& policy);

/// Entry point of the `lockstep-sim` tool. Exit codes: 0 success, 1 usage or
/// validation error, 2 safety trip under --fail-on-safeoff.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lsim
