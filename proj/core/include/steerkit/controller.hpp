#pragma once

#include <string>
#include <vector>

#include "steerkit/answers.hpp"
#include "steerkit/generation.hpp"

namespace steerkit {

// Maps a consistency score in [0,1] to a reflection strength: alpha_min when
// the score clears the threshold, ramping linearly to alpha_max at score 0.
struct ControllerPolicy {
    double alpha_min = 0.0;
    double alpha_max = 1.0;
    int k_probes = 4;
    double threshold = 0.5; // tau in (0, 1)
    int probe_max_tokens = 12;
    AnswerKind probe_kind = AnswerKind::Integer;
};

void validate(const ControllerPolicy& policy);

double alpha_policy(double score, const ControllerPolicy& policy);

struct StepEntry {
    std::string sentence_text;
    double consistency_score = 0.0;
    double alpha_applied = 0.0;
};

using StepTrace = std::vector<StepEntry>;

struct StepwiseResult {
    GenerationRecord record;
    StepTrace trace;
};

// Agreement fraction over probe outcomes: probes with an extractable answer
// group by canonical answer, the rest by exact continuation text; the score
// is the largest group size over k.
double probe_agreement(const std::vector<std::optional<std::string>>& answers,
                       const std::vector<std::string>& texts);

// Samples k_probes short continuations from the prefix with seeds derived
// from params.seed and returns their agreement fraction in [1/k, 1].
double consistency_score(const Model& model, const Vocab& vocab, const TokenSeq& prefix,
                         const DecodeParams& params, int k_probes,
                         const Intervention& probe_iv = Intervention::none(),
                         AnswerKind kind = AnswerKind::Integer, int probe_max_tokens = 12);

// Reflection decoding with per-sentence strength control: before each
// sentence the consistency of the current prefix is probed (at alpha_min
// strength) and the policy sets the alpha pinned for that sentence's tokens.
// Sentences end at '.', '?' or '!' tokens; a trailing unterminated segment
// counts as a sentence. record.alpha reports the mean applied strength.
StepwiseResult stepwise_generate(const Model& model, const Vocab& vocab,
                                 const std::string& reflection_prompt,
                                 const std::string& query,
                                 const std::string& init_generation,
                                 const ControllerPolicy& policy, const DecodeParams& params);

} // namespace steerkit
