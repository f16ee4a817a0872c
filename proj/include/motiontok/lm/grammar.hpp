#pragma once

#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/lm/serialize.hpp"
#include "motiontok/lm/vocab.hpp"
#include "motiontok/skeleton/layout.hpp"

namespace motiontok::lm {

// Deterministic automaton over the serialization structure. At every step the
// legal-token set is either a single structural token or the full skeleton
// token range; constrained decoding masks logits to this set, so generated
// text always parses with zero malformed cells and exactly `windows` windows.
class SerializationGrammar {
public:
    SerializationGrammar(const MotionVocabulary& vocab, const skeleton::JointLayout& layout, int windows,
                         SerializeMode mode)
        : vocab_(&vocab), layout_(layout), windows_(windows), mode_(mode) {
        layout_.validate();
        if (windows < 1) throw DataError("grammar: window count must be >= 1");
        if (windows > vocab.config().max_windows) throw DataError("grammar: window count exceeds vocabulary labels");
        reset();
    }

    void reset() {
        window_ = 0;
        group_ = 0;
        slot_ = 0;
        phase_ = mode_ == SerializeMode::future_prefix ? Phase::future : Phase::frame;
        finished_ = false;
    }

    bool finished() const { return finished_; }

    // The set of ids legal at the current position.
    std::vector<int> legal_tokens() const {
        if (finished_) return {};
        switch (phase_) {
            case Phase::future: return {vocab_->id("Future")};
            case Phase::frame: return {vocab_->id("Frame")};
            case Phase::number: return {vocab_->number_id(window_ + 1)};
            case Phase::window_colon: return {vocab_->colon()};
            case Phase::group_label: return {vocab_->id(skeleton::group_names()[static_cast<std::size_t>(group_)])};
            case Phase::group_colon: return {vocab_->colon()};
            case Phase::skel: {
                std::vector<int> out(static_cast<std::size_t>(vocab_->config().codebook_size));
                for (int k = 0; k < vocab_->config().codebook_size; ++k)
                    out[static_cast<std::size_t>(k)] = vocab_->skel_id(k);
                return out;
            }
            case Phase::period: return {vocab_->period()};
            case Phase::eos: return {vocab_->eos()};
        }
        return {};
    }

    bool is_legal(int token) const {
        if (finished_) return false;
        if (phase_ == Phase::skel) return vocab_->is_skel(token);
        const auto legal = legal_tokens();
        return legal.size() == 1 && legal[0] == token;
    }

    void accept(int token) {
        if (!is_legal(token)) throw DataError("grammar: token '" + vocab_->token(token) + "' is not legal here");
        switch (phase_) {
            case Phase::future:
                phase_ = Phase::frame;
                break;
            case Phase::frame:
                phase_ = Phase::number;
                break;
            case Phase::number:
                phase_ = Phase::window_colon;
                break;
            case Phase::window_colon:
                group_ = 0;
                phase_ = Phase::group_label;
                break;
            case Phase::group_label:
                phase_ = Phase::group_colon;
                break;
            case Phase::group_colon:
                slot_ = 0;
                phase_ = Phase::skel;
                break;
            case Phase::skel:
                if (++slot_ >= group_size(group_)) phase_ = Phase::period;
                break;
            case Phase::period:
                if (++group_ < 5) {
                    phase_ = Phase::group_label;
                } else if (++window_ < windows_) {
                    phase_ = mode_ == SerializeMode::future_prefix ? Phase::future : Phase::frame;
                } else {
                    phase_ = Phase::eos;
                }
                break;
            case Phase::eos:
                finished_ = true;
                break;
        }
    }

private:
    enum class Phase { future, frame, number, window_colon, group_label, group_colon, skel, period, eos };

    int group_size(int g) const { return static_cast<int>(layout_.groups[static_cast<std::size_t>(g)].size()); }

    const MotionVocabulary* vocab_;
    skeleton::JointLayout layout_;
    int windows_;
    SerializeMode mode_;
    int window_ = 0;
    int group_ = 0;
    int slot_ = 0;
    Phase phase_ = Phase::frame;
    bool finished_ = false;
};

}  // namespace motiontok::lm
