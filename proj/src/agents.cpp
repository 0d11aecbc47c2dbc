#include "d2d/agents.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace d2d {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string agent_id_for(Stance side, Stage stage) {
  return std::string(side == Stance::AFFIRMATIVE_REAL ? "aff-" : "neg-") + lower(to_string(stage));
}

std::string agent_id_for(Dimension dim) { return "judge-" + lower(to_string(dim)); }

std::string side_label(Stance side, bool neutral_labels) {
  if (side == Stance::AFFIRMATIVE_REAL) return neutral_labels ? "Supporter" : "Affirmative";
  return neutral_labels ? "Skeptic" : "Negative";
}

std::string stance_text(Stance side, bool neutral_labels) {
  return side_label(side, neutral_labels) +
         (side == Stance::AFFIRMATIVE_REAL ? ": the claim is real" : ": the claim is fake");
}

std::string serialize_history(const std::vector<Turn>& turns, bool neutral_labels) {
  std::string out;
  for (const auto& t : turns) {
    if (!out.empty()) out += '\n';
    out += '[';
    out += display_name(t.stage);
    out += "] [";
    out += side_label(t.side, neutral_labels);
    out += "]: ";
    out += t.content;
  }
  return out;
}

void Roster::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::PRECONDITION, "roster: " + m); };
  if (debaters.size() != 8) fail("expected 8 debaters, got " + std::to_string(debaters.size()));
  if (judges.size() != 6) fail("expected 6 judges, got " + std::to_string(judges.size()));

  std::set<std::pair<Stance, Stage>> slots;
  for (const auto& d : debaters) {
    if (d.role != AgentRole::DEBATER || !d.side || !d.stage || d.dimension) {
      fail("debater " + d.agent_id + " needs a side and stage and no dimension");
    }
    if (*d.stage == Stage::JUDGEMENT) fail("debater " + d.agent_id + " assigned to JUDGEMENT");
    if (!slots.emplace(*d.side, *d.stage).second) fail("duplicate debater slot " + d.agent_id);
  }

  std::set<Dimension> dims;
  int synopsis = 0;
  for (const auto& j : judges) {
    if (j.role != AgentRole::JUDGE || j.side || j.stage) fail("judge " + j.agent_id + " has a side or stage");
    if (!j.dimension) {
      ++synopsis;
    } else if (!dims.insert(*j.dimension).second) {
      fail("duplicate scoring judge for " + std::string(to_string(*j.dimension)));
    }
  }
  if (synopsis != 1) fail("expected exactly one synopsis judge");
}

const AgentProfile& Roster::debater(Stance side, Stage stage) const {
  for (const auto& d : debaters) {
    if (d.side == side && d.stage == stage) return d;
  }
  throw Error(ErrorCode::PRECONDITION, "no debater for " + agent_id_for(side, stage));
}

const AgentProfile& Roster::synopsis_judge() const {
  for (const auto& j : judges) {
    if (j.is_synopsis_judge()) return j;
  }
  throw Error(ErrorCode::PRECONDITION, "roster has no synopsis judge");
}

const AgentProfile& Roster::scoring_judge(Dimension dim) const {
  for (const auto& j : judges) {
    if (j.dimension == dim) return j;
  }
  throw Error(ErrorCode::PRECONDITION, "no scoring judge for " + std::string(to_string(dim)));
}

}  // namespace d2d
