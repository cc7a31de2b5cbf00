#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "mimic/automata.hpp"

namespace mimic {

enum class VoterKind { strict_majority, plurality_with_tiebreak };

std::string_view to_string(VoterKind k);

/// Output arbiter over redundant executor output words.
struct VoterPolicy {
  VoterKind kind = VoterKind::strict_majority;
  /// Minimum number of agreeing slots; 0 means floor(width / 2) + 1.
  std::size_t quorum = 0;
  /// Plurality only: earlier words win ties.
  std::vector<Word> preference;

  std::size_t effective_quorum(std::size_t width) const { return quorum == 0 ? width / 2 + 1 : quorum; }

  friend bool operator==(const VoterPolicy&, const VoterPolicy&) = default;
};

struct VoteOutcome {
  std::optional<Word> voted;  // nullopt = abstain
  std::vector<std::size_t> dissenters;

  bool abstained() const { return !voted.has_value(); }
  friend bool operator==(const VoteOutcome&, const VoteOutcome&) = default;
};

/// Strict majority: the word produced by at least `quorum` slots (the most
/// frequent one if a low quorum admits several; a tie abstains).
/// Plurality: the most frequent word if it reaches the quorum, ties resolved
/// by `preference`, unresolved ties abstain. Dissenters are empty on abstention.
VoteOutcome vote(const VoterPolicy& policy, const std::vector<Word>& outputs);

}  // namespace mimic
