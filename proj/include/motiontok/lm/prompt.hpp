#pragma once

#include <memory>
#include <string>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/lm/serialize.hpp"
#include "motiontok/lm/templates.hpp"
#include "motiontok/lm/vocab.hpp"
#include "motiontok/numerics/feature_map.hpp"
#include "motiontok/skeleton/task.hpp"
#include "motiontok/vgmt/codebook.hpp"

namespace motiontok::lm {

// Frozen visual inputs for a pose-estimation sample: per-frame stem feature
// maps and 2D joint reference points on the map grid. Produced once from the
// frozen tokenizer; the trainable MAFT path consumes them every step.
struct PeConditioning {
    num::FeatureMapSequence maps;  // F x S x S x C stem outputs
    std::vector<float> refs;       // F x N x 2 grid coordinates
};

struct PromptedSample {
    skeleton::Task task = skeleton::Task::MP;
    std::vector<int> full_ids;    // prompt followed by response
    std::vector<int> input_ids;   // full_ids[0 .. L-1)
    std::vector<int> target_ids;  // full_ids[1 .. L)
    std::vector<bool> loss_mask;  // over target positions; true on the response
    int response_begin = 0;       // index into full_ids of the first response token
    std::shared_ptr<PeConditioning> visual;  // PE only

    std::vector<int> prompt_ids() const {
        return std::vector<int>(full_ids.begin(), full_ids.begin() + response_begin);
    }
    int response_length() const { return static_cast<int>(full_ids.size()) - response_begin; }
};

namespace detail {

// Lexes `tpl` with `placeholder` replaced by the given token ids.
inline std::vector<int> instantiate_template(const MotionVocabulary& vocab, const std::string& tpl,
                                             const std::string& placeholder, const std::vector<int>& insert) {
    const std::size_t pos = tpl.find(placeholder);
    if (pos == std::string::npos) throw ConfigError("template is missing placeholder " + placeholder);
    std::vector<int> out = vocab.lex(tpl.substr(0, pos));
    out.insert(out.end(), insert.begin(), insert.end());
    const std::vector<int> tail = vocab.lex(tpl.substr(pos + placeholder.size()));
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
}

inline void finalize(PromptedSample& s) {
    const std::size_t l = s.full_ids.size();
    if (static_cast<std::size_t>(s.response_begin) >= l) throw DataError("prompt: empty response");
    s.input_ids.assign(s.full_ids.begin(), s.full_ids.end() - 1);
    s.target_ids.assign(s.full_ids.begin() + 1, s.full_ids.end());
    s.loss_mask.assign(l - 1, false);
    for (std::size_t t = 0; t + 1 < l; ++t)
        if (static_cast<int>(t) + 1 >= s.response_begin) s.loss_mask[t] = true;
}

}  // namespace detail

// PE: instruction with the vision placeholder tokens, visual conditioning
// attached out-of-band, response = plain serialization of the target grid.
inline PromptedSample build_pe_prompt(const MotionVocabulary& vocab, const vgmt::TokenGrid& target,
                                      std::shared_ptr<PeConditioning> visual) {
    if (!visual) throw DataError("pe prompt: missing visual conditioning");
    PromptedSample s;
    s.task = skeleton::Task::PE;
    s.visual = std::move(visual);
    s.full_ids.push_back(vocab.user());
    const std::vector<int> vision = {vocab.vision_start(), vocab.video_pad(), vocab.vision_end()};
    const std::vector<int> body = detail::instantiate_template(vocab, kPeTemplate, "<video>", vision);
    s.full_ids.insert(s.full_ids.end(), body.begin(), body.end());
    s.full_ids.push_back(vocab.assistant());
    s.response_begin = static_cast<int>(s.full_ids.size());
    const std::vector<int> response = serialize(vocab, target, SerializeMode::plain);
    s.full_ids.insert(s.full_ids.end(), response.begin(), response.end());
    s.full_ids.push_back(vocab.eos());
    detail::finalize(s);
    return s;
}

// MP: serialized history in the prompt, response = future windows labeled
// "Future Frame", as many as the history has.
inline PromptedSample build_mp_prompt(const MotionVocabulary& vocab, const vgmt::TokenGrid& history,
                                      const vgmt::TokenGrid& future) {
    if (history.windows < 1 || future.windows < 1) throw DataError("mp prompt: empty history or future");
    if (history.windows != future.windows)
        throw DataError("mp prompt: future must span the same number of windows as the history");
    PromptedSample s;
    s.task = skeleton::Task::MP;
    s.full_ids.push_back(vocab.user());
    const std::vector<int> body =
        detail::instantiate_template(vocab, kMpTemplate, "<skeleton>", serialize(vocab, history, SerializeMode::plain));
    s.full_ids.insert(s.full_ids.end(), body.begin(), body.end());
    s.full_ids.push_back(vocab.assistant());
    s.response_begin = static_cast<int>(s.full_ids.size());
    const std::vector<int> response = serialize(vocab, future, SerializeMode::future_prefix);
    s.full_ids.insert(s.full_ids.end(), response.begin(), response.end());
    s.full_ids.push_back(vocab.eos());
    detail::finalize(s);
    return s;
}

// MIB: only the first and last windows appear in the prompt, wrapped in
// [START]/[MIDDLE]/[END]; the response is the full sequence.
inline PromptedSample build_mib_prompt(const MotionVocabulary& vocab, const vgmt::TokenGrid& full) {
    if (full.windows < 2) throw DataError("mib prompt: need at least start and end windows");
    PromptedSample s;
    s.task = skeleton::Task::MIB;
    s.full_ids.push_back(vocab.user());
    std::vector<int> keyframes;
    keyframes.push_back(vocab.start_marker());
    serialize_window(vocab, full, 0, SerializeMode::plain, keyframes);
    keyframes.push_back(vocab.middle_marker());
    serialize_window(vocab, full, full.windows - 1, SerializeMode::plain, keyframes);
    keyframes.push_back(vocab.end_marker());
    const std::vector<int> body = detail::instantiate_template(vocab, kMibTemplate, "<skeleton>", keyframes);
    s.full_ids.insert(s.full_ids.end(), body.begin(), body.end());
    s.full_ids.push_back(vocab.assistant());
    s.response_begin = static_cast<int>(s.full_ids.size());
    const std::vector<int> response = serialize(vocab, full, SerializeMode::plain);
    s.full_ids.insert(s.full_ids.end(), response.begin(), response.end());
    s.full_ids.push_back(vocab.eos());
    detail::finalize(s);
    return s;
}

struct PromptInputs {
    const vgmt::TokenGrid* history = nullptr;  // MP
    const vgmt::TokenGrid* future = nullptr;   // MP
    const vgmt::TokenGrid* target = nullptr;   // PE
    const vgmt::TokenGrid* full = nullptr;     // MIB
    std::shared_ptr<PeConditioning> visual;    // PE
};

inline PromptedSample build_prompt(const MotionVocabulary& vocab, skeleton::Task task, const PromptInputs& in) {
    switch (task) {
        case skeleton::Task::PE:
            if (!in.target) throw DataError("pe prompt: missing target grid");
            return build_pe_prompt(vocab, *in.target, in.visual);
        case skeleton::Task::MP:
            if (!in.history || !in.future) throw DataError("mp prompt: missing history or future grid");
            return build_mp_prompt(vocab, *in.history, *in.future);
        default:
            if (!in.full) throw DataError("mib prompt: missing full grid");
            return build_mib_prompt(vocab, *in.full);
    }
}

}  // namespace motiontok::lm
