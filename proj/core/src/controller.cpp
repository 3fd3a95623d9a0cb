#include "steerkit/controller.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace steerkit {

namespace {

// separate derivation streams for probe seeds vs. the sweep's (ai, si) grid
constexpr uint64_t kProbeStream = 0xC0517E4CE5ull;

bool is_sentence_end(const Vocab& vocab, int32_t id) {
    const std::string& tok = vocab.token(id);
    return tok == "." || tok == "?" || tok == "!";
}

} // namespace

void validate(const ControllerPolicy& policy) {
    if (policy.alpha_min > policy.alpha_max)
        throw Error(ErrorCode::InvalidConfig, "alpha_min must be <= alpha_max");
    if (policy.alpha_min < 0.0)
        throw Error(ErrorCode::InvalidConfig, "reflection alphas must be >= 0");
    if (policy.k_probes < 2) throw Error(ErrorCode::InvalidConfig, "k_probes must be >= 2");
    if (!(policy.threshold > 0.0 && policy.threshold < 1.0))
        throw Error(ErrorCode::InvalidConfig, "threshold must be in (0, 1)");
    if (policy.probe_max_tokens < 1)
        throw Error(ErrorCode::InvalidConfig, "probe_max_tokens must be >= 1");
}

double alpha_policy(double score, const ControllerPolicy& policy) {
    double alpha;
    if (score >= policy.threshold) {
        alpha = policy.alpha_min;
    } else {
        alpha = policy.alpha_min + (policy.alpha_max - policy.alpha_min) *
                                       (policy.threshold - score) / policy.threshold;
    }
    return std::clamp(alpha, policy.alpha_min, policy.alpha_max);
}

double probe_agreement(const std::vector<std::optional<std::string>>& answers,
                       const std::vector<std::string>& texts) {
    if (answers.size() != texts.size() || answers.empty())
        throw Error(ErrorCode::ShapeMismatch, "probe answer/text count mismatch");
    std::map<std::string, int> groups;
    for (size_t i = 0; i < answers.size(); ++i) {
        std::string key = answers[i] ? "a:" + *answers[i] : "t:" + texts[i];
        ++groups[key];
    }
    int best = 0;
    for (const auto& [key, count] : groups) best = std::max(best, count);
    return static_cast<double>(best) / static_cast<double>(answers.size());
}

double consistency_score(const Model& model, const Vocab& vocab, const TokenSeq& prefix,
                         const DecodeParams& params, int k_probes,
                         const Intervention& probe_iv, AnswerKind kind,
                         int probe_max_tokens) {
    if (k_probes < 2) throw Error(ErrorCode::InvalidConfig, "k_probes must be >= 2");

    std::vector<std::optional<std::string>> answers;
    std::vector<std::string> texts;
    answers.reserve(static_cast<size_t>(k_probes));
    texts.reserve(static_cast<size_t>(k_probes));

    DecodeParams probe_params = params;
    probe_params.max_new_tokens = probe_max_tokens;
    for (int i = 0; i < k_probes; ++i) {
        probe_params.seed = derive_seed(params.seed, kProbeStream, static_cast<uint64_t>(i));
        GenerationRecord rec = generate(model, vocab, prefix, probe_params, probe_iv);
        auto ans = normalize_answer(rec.text, kind);
        answers.push_back(ans ? std::optional<std::string>(ans->canonical) : std::nullopt);
        texts.push_back(rec.text);
    }
    return probe_agreement(answers, texts);
}

StepwiseResult stepwise_generate(const Model& model, const Vocab& vocab,
                                 const std::string& reflection_prompt,
                                 const std::string& query,
                                 const std::string& init_generation,
                                 const ControllerPolicy& policy, const DecodeParams& params) {
    validate(policy);
    validate(params);

    ReflectionContext ctx =
        prepare_reflection_context(model, vocab, reflection_prompt, query, init_generation);
    Intervention probe_iv = make_reflection_intervention(ctx, policy.alpha_min);

    StepwiseResult result;
    result.record.seed_used = params.seed;

    TokenSeq context = ctx.wp_tokens;
    TokenSeq sentence;
    Rng main_rng(params.seed);

    int sentence_idx = 0;
    double current_score = 1.0;
    double current_alpha = policy.alpha_min;
    Intervention current_iv = probe_iv;
    bool at_sentence_start = true;
    double alpha_sum = 0.0;

    auto close_sentence = [&] {
        StepEntry entry;
        entry.sentence_text = vocab.detokenize(sentence);
        entry.consistency_score = current_score;
        entry.alpha_applied = current_alpha;
        result.trace.push_back(std::move(entry));
        alpha_sum += current_alpha;
        sentence.ids.clear();
        at_sentence_start = true;
        ++sentence_idx;
    };

    for (int step = 0; step < params.max_new_tokens; ++step) {
        if (context.length() >= model.config().max_seq_len) break;
        if (at_sentence_start) {
            DecodeParams probe_params = params;
            probe_params.seed = derive_seed(params.seed, 0x5E27ull, // sentence stream
                                            static_cast<uint64_t>(sentence_idx));
            current_score =
                consistency_score(model, vocab, context, probe_params, policy.k_probes,
                                  probe_iv, policy.probe_kind, policy.probe_max_tokens);
            current_alpha = alpha_policy(current_score, policy);
            current_iv = current_alpha == policy.alpha_min
                             ? probe_iv
                             : make_reflection_intervention(ctx, current_alpha);
            at_sentence_start = false;
        }

        ForwardResult fr = model.forward_capture(context, current_iv);
        int32_t next = sample_next_token(fr.logits.row(context.length() - 1),
                                         model.config().vocab_size, params, main_rng);
        if (next == Vocab::kEosId) break;
        context.ids.push_back(next);
        sentence.ids.push_back(next);
        result.record.tokens.ids.push_back(next);
        if (is_sentence_end(vocab, next)) close_sentence();
    }
    if (!sentence.ids.empty()) close_sentence();

    result.record.length = result.record.tokens.length();
    result.record.text = vocab.detokenize(result.record.tokens);
    result.record.alpha =
        result.trace.empty() ? 0.0 : alpha_sum / static_cast<double>(result.trace.size());
    return result;
}

} // namespace steerkit
