#pragma once

#include <string>
#include <vector>

#include "d2d/agents.hpp"
#include "d2d/backend.hpp"
#include "d2d/judgment.hpp"
#include "d2d/prompts.hpp"

namespace d2d {

struct SharedMemory {
  std::vector<Turn> full_history;
  std::string digest;
};

struct DebateResult {
  std::string claim_id;
  std::string domain;
  Roster roster;
  std::vector<Turn> transcript;
  std::vector<std::string> digests;  // one per turn, then the digest handed to the judges
  Verdict verdict;
  JudgmentTrace trace;
  RunConfig config_echo;

  bool operator==(const DebateResult&) const = default;
};

/// Raised when a backend or judgment failure aborts a debate midway.
struct ItemFailed : public Error {
  std::string claim_id;
  ErrorCode cause;
  std::vector<Turn> partial_transcript;

  ItemFailed(std::string id, ErrorCode cause_, const std::string& message, std::vector<Turn> partial)
      : Error(ErrorCode::ITEM_FAILED, id + ": " + message),
        claim_id(std::move(id)),
        cause(cause_),
        partial_transcript(std::move(partial)) {}
};

/// Runs debates for one configuration. Holds no per-debate state, so one
/// engine may serve many concurrent debates.
class DebateEngine {
 public:
  DebateEngine(Backend& backend, const PromptRegistry& prompts, RunConfig config);

  const RunConfig& config() const { return config_; }

  /// Domain label: the model reply cut to its first two whitespace tokens.
  std::string infer_domain(const Claim& claim) const;

  /// One profile per agent, generated at debate temperature. NO_DOMAIN_PROFILE
  /// makes no calls; NO_STAGE_DESIGN generates one profile per side and shares
  /// it across that side's four slots.
  Roster build_roster(const std::string& domain) const;

  /// Empty history compresses to "" without a call.
  std::string compress_memory(const SharedMemory& memory) const;

  DebateResult run_debate(const Claim& claim) const;

  /// Debate with an existing domain and roster, e.g. to rerun a claim under a
  /// perturbation without regenerating profiles.
  DebateResult run_debate(const Claim& claim, const std::string& domain, const Roster& roster) const;

 private:
  std::string speak(const Claim& claim, const AgentProfile& agent, Stage stage, Stance side,
                    const std::string& digest) const;

  Backend& backend_;
  const PromptRegistry& prompts_;
  RunConfig config_;
};

}  // namespace d2d
