#include <algorithm>
#include <map>

#include "mimic/voting.hpp"

namespace mimic {

std::string_view to_string(VoterKind k) {
  return k == VoterKind::strict_majority ? "strict_majority" : "plurality";
}

VoteOutcome vote(const VoterPolicy& policy, const std::vector<Word>& outputs) {
  std::map<Word, std::size_t> tally;
  for (const auto& w : outputs) ++tally[w];
  std::size_t best = 0;
  for (const auto& [w, n] : tally) best = std::max(best, n);

  VoteOutcome outcome;
  if (outputs.empty() || best < policy.effective_quorum(outputs.size())) return outcome;

  std::vector<Word> leaders;
  for (const auto& [w, n] : tally) {
    if (n == best) leaders.push_back(w);
  }
  if (leaders.size() > 1 && policy.kind == VoterKind::plurality_with_tiebreak) {
    for (const auto& preferred : policy.preference) {
      if (std::find(leaders.begin(), leaders.end(), preferred) != leaders.end()) {
        leaders = {preferred};
        break;
      }
    }
  }
  if (leaders.size() != 1) return outcome;

  outcome.voted = leaders.front();
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i] != *outcome.voted) outcome.dissenters.push_back(i);
  }
  return outcome;
}

}  // namespace mimic
