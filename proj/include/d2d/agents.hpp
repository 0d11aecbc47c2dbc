#pragma once

#include <optional>
#include <string>
#include <vector>

#include "d2d/core.hpp"

namespace d2d {

enum class AgentRole { DEBATER, JUDGE };

struct AgentProfile {
  std::string agent_id;
  AgentRole role = AgentRole::DEBATER;
  std::optional<Stance> side;          // debaters only
  std::optional<Stage> stage;          // debaters only
  std::optional<Dimension> dimension;  // scoring judges only
  std::string profile_text;

  bool is_synopsis_judge() const { return role == AgentRole::JUDGE && !dimension; }

  bool operator==(const AgentProfile&) const = default;
};

/// Eight debaters (side x speaking stage) and six judges (synopsis + one per dimension).
struct Roster {
  std::vector<AgentProfile> debaters;
  std::vector<AgentProfile> judges;

  /// Throws PRECONDITION when the 8 + 6 shape or a uniqueness rule is broken.
  void validate() const;

  const AgentProfile& debater(Stance side, Stage stage) const;
  const AgentProfile& synopsis_judge() const;
  const AgentProfile& scoring_judge(Dimension dim) const;

  bool operator==(const Roster&) const = default;
};

std::string agent_id_for(Stance side, Stage stage);  // "aff-opening"
std::string agent_id_for(Dimension dim);             // "judge-factuality"
inline constexpr std::string_view kSynopsisJudgeId = "judge-synopsis";

/// Profile text for agents without a domain profile (ablation and SMAD).
inline constexpr std::string_view kGenericProfile =
    "You are a participant in a structured debate about whether a news claim is real or fake.";

/// "Affirmative"/"Negative", or "Supporter"/"Skeptic" under neutral labels.
std::string side_label(Stance side, bool neutral_labels);

/// Value bound to {fixed_stance}, e.g. "Affirmative: the claim is real".
std::string stance_text(Stance side, bool neutral_labels);

/// One "[Stage] [Side]: content" line per turn, in turn order.
std::string serialize_history(const std::vector<Turn>& turns, bool neutral_labels);

}  // namespace d2d
