#include "steerkit/generation.hpp"

#include <algorithm>
#include <cmath>

#include "steerkit/rng.hpp"

namespace steerkit {

void validate(const DecodeParams& params) {
    if (params.temperature < 0.0 || !std::isfinite(params.temperature))
        throw Error(ErrorCode::InvalidConfig, "temperature must be >= 0");
    if (params.max_new_tokens < 1)
        throw Error(ErrorCode::InvalidConfig, "max_new_tokens must be >= 1");
    if (params.top_k < 0) throw Error(ErrorCode::InvalidConfig, "top_k must be >= 0");
    if (params.top_p < 0.0 || params.top_p > 1.0)
        throw Error(ErrorCode::InvalidConfig, "top_p must be in (0, 1] or 0");
}

std::vector<double> sample_alphas(const AlphaSchedule& schedule) {
    if (schedule.low > schedule.high)
        throw Error(ErrorCode::InvalidRange, "alpha range requires low <= high");
    if (schedule.n_alphas < 1 || schedule.samples_per_alpha < 1)
        throw Error(ErrorCode::InvalidRange, "n_alphas and samples_per_alpha must be >= 1");

    Rng rng(schedule.seed);
    std::vector<double> alphas(static_cast<size_t>(schedule.n_alphas));
    for (double& a : alphas) a = rng.uniform(schedule.low, schedule.high);
    std::sort(alphas.begin(), alphas.end());
    return alphas;
}

int32_t sample_next_token(const double* logits, int vocab_size, const DecodeParams& params,
                          Rng& rng) {
    if (params.temperature == 0.0) {
        int32_t best = 0;
        for (int i = 1; i < vocab_size; ++i)
            if (logits[i] > logits[best]) best = i; // strict >: lowest id wins ties
        return best;
    }

    struct Cand {
        int32_t id;
        double logit;
    };
    std::vector<Cand> cands(static_cast<size_t>(vocab_size));
    for (int i = 0; i < vocab_size; ++i)
        cands[static_cast<size_t>(i)] = {static_cast<int32_t>(i),
                                         logits[i] / params.temperature};

    auto by_logit_desc = [](const Cand& a, const Cand& b) {
        if (a.logit != b.logit) return a.logit > b.logit;
        return a.id < b.id;
    };

    if (params.top_k > 0 && params.top_k < vocab_size) {
        std::sort(cands.begin(), cands.end(), by_logit_desc);
        cands.resize(static_cast<size_t>(params.top_k));
    }

    // softmax over remaining candidates
    double m = cands[0].logit;
    for (const Cand& c : cands) m = std::max(m, c.logit);
    double sum = 0.0;
    std::vector<double> probs(cands.size());
    for (size_t i = 0; i < cands.size(); ++i) {
        probs[i] = std::exp(cands[i].logit - m);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;

    if (params.top_p > 0.0 && params.top_p < 1.0) {
        std::vector<size_t> order(cands.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (probs[a] != probs[b]) return probs[a] > probs[b];
            return cands[a].id < cands[b].id;
        });
        double cum = 0.0;
        std::vector<char> keep(cands.size(), 0);
        for (size_t idx : order) {
            keep[idx] = 1;
            cum += probs[idx];
            if (cum >= params.top_p) break;
        }
        double kept_sum = 0.0;
        for (size_t i = 0; i < cands.size(); ++i)
            if (keep[i]) kept_sum += probs[i];
        for (size_t i = 0; i < cands.size(); ++i)
            probs[i] = keep[i] ? probs[i] / kept_sum : 0.0;
    }

    // CDF walk in ascending token id order
    std::vector<size_t> id_order(cands.size());
    for (size_t i = 0; i < id_order.size(); ++i) id_order[i] = i;
    std::sort(id_order.begin(), id_order.end(),
              [&](size_t a, size_t b) { return cands[a].id < cands[b].id; });
    double u = rng.open01();
    double cum = 0.0;
    int32_t chosen = cands[id_order.back()].id;
    for (size_t idx : id_order) {
        cum += probs[idx];
        if (u <= cum) {
            chosen = cands[idx].id;
            break;
        }
    }
    return chosen;
}

GenerationRecord generate(const Model& model, const Vocab& vocab, const TokenSeq& prefix,
                          const DecodeParams& params, const Intervention& iv) {
    validate(params);
    if (prefix.length() < 1) throw Error(ErrorCode::EmptyInput, "prefix is empty");
    if (prefix.length() > model.config().max_seq_len)
        throw Error(ErrorCode::SeqTooLong, "prefix exceeds max_seq_len");

    Rng rng(params.seed);
    DecodeSession session(model, iv);
    session.append(prefix);

    GenerationRecord rec;
    rec.seed_used = params.seed;

    for (int step = 0; step < params.max_new_tokens; ++step) {
        if (session.length() >= model.config().max_seq_len) break;
        Vec logits = session.logits();
        int32_t next = sample_next_token(logits.data(), model.config().vocab_size, params, rng);
        if (next == Vocab::kEosId) break;
        session.append(next);
        rec.tokens.ids.push_back(next);
    }

    rec.length = rec.tokens.length();
    rec.text = vocab.detokenize(rec.tokens);
    return rec;
}

std::vector<GenerationRecord> sweep(const Model& model, const Vocab& vocab,
                                    const TokenSeq& prefix, const SteeringVector* steer,
                                    const AlphaSchedule& schedule, const DecodeParams& params,
                                    const std::string& query_id) {
    std::vector<double> alphas = sample_alphas(schedule);
    std::vector<GenerationRecord> records;
    records.reserve(alphas.size() * static_cast<size_t>(schedule.samples_per_alpha));

    for (int ai = 0; ai < schedule.n_alphas; ++ai) {
        Intervention iv = steer ? Intervention::cot({*steer, alphas[static_cast<size_t>(ai)]})
                                : Intervention::none();
        for (int si = 0; si < schedule.samples_per_alpha; ++si) {
            DecodeParams p = params;
            p.seed = derive_seed(params.seed, static_cast<uint64_t>(ai),
                                 static_cast<uint64_t>(si));
            GenerationRecord rec = generate(model, vocab, prefix, p, iv);
            rec.query_id = query_id;
            rec.alpha = steer ? alphas[static_cast<size_t>(ai)] : 0.0;
            rec.alpha_index = ai;
            rec.sample_idx = si;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

ReflectionContext prepare_reflection_context(const Model& model, const Vocab& vocab,
                                             const std::string& reflection_prompt,
                                             const std::string& query,
                                             const std::string& init_generation) {
    TokenSeq prompt_ids = vocab.tokenize(reflection_prompt);
    TokenSeq base = concat(vocab.tokenize(query), vocab.tokenize(init_generation));

    ReflectionContext ctx;
    ctx.pad_len = prompt_ids.length();
    ctx.wp_tokens = concat(prompt_ids, base);
    ctx.states_wp =
        model.forward_capture(ctx.wp_tokens, Intervention::none()).states.states;
    ctx.states_wo = model.forward_capture(base, Intervention::none()).states.states;
    return ctx;
}

Intervention make_reflection_intervention(const ReflectionContext& ctx, double alpha) {
    ReflectionSteerSpec spec;
    spec.prompt_states = ctx.states_wp;
    spec.alpha = alpha;
    spec.pad_len = ctx.pad_len;
    ReflectionPin pin;
    pin.pinned = steer_reflection(ctx.states_wo, spec);
    pin.alpha = alpha;
    return Intervention::reflection(std::move(pin));
}

std::vector<GenerationRecord> reflect_sweep(const Model& model, const Vocab& vocab,
                                            const ReflectionContext& ctx,
                                            const AlphaSchedule& schedule,
                                            const DecodeParams& params,
                                            const std::string& query_id) {
    std::vector<double> alphas = sample_alphas(schedule);
    std::vector<GenerationRecord> records;
    records.reserve(alphas.size() * static_cast<size_t>(schedule.samples_per_alpha));

    for (int ai = 0; ai < schedule.n_alphas; ++ai) {
        Intervention iv = make_reflection_intervention(ctx, alphas[static_cast<size_t>(ai)]);
        for (int si = 0; si < schedule.samples_per_alpha; ++si) {
            DecodeParams p = params;
            p.seed = derive_seed(params.seed, static_cast<uint64_t>(ai),
                                 static_cast<uint64_t>(si));
            GenerationRecord rec = generate(model, vocab, ctx.wp_tokens, p, iv);
            rec.query_id = query_id;
            rec.alpha = alphas[static_cast<size_t>(ai)];
            rec.alpha_index = ai;
            rec.sample_idx = si;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

} // namespace steerkit
