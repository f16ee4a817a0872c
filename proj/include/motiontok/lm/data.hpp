#pragma once

#include <memory>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/lm/prompt.hpp"
#include "motiontok/lm/vocab.hpp"
#include "motiontok/skeleton/pose.hpp"
#include "motiontok/vgmt/model.hpp"
#include "motiontok/vgmt/provider.hpp"

namespace motiontok::lm {

struct UnifiedDatasets {
    std::vector<PromptedSample> pe, mp, mib;
};

struct DatasetOptions {
    // Noise applied to the 2D reference points handed to the pose-estimation
    // conditioning path (stand-in for an imperfect upstream 2D estimate).
    double pe_ref_noise_px = 0.0;
    std::uint64_t noise_seed = 0;
    bool build_pe = true;
    bool build_mp = true;
    bool build_mib = true;
};

// Tokenizes full sequences with the frozen tokenizer and converts them into
// prompted samples: MP splits each sequence into equal history/future halves,
// MIB keeps the full sequence, PE pairs the full grid with frozen stem maps.
inline UnifiedDatasets build_unified_datasets(vgmt::Vgmt<float>& tokenizer, const MotionVocabulary& vocab,
                                              const std::vector<skeleton::PoseSequence>& sequences,
                                              const DatasetOptions& opt = {}) {
    UnifiedDatasets out;
    std::uint64_t sample_index = 0;
    for (const auto& seq : sequences) {
        tokenizer.check_input(seq);
        const int ds = tokenizer.config().downsample;
        vgmt::RenderedSequence rendered = render_joints(seq, tokenizer.config().provider);
        vgmt::TokenGrid full = tokenizer.tokenize(seq, rendered);

        if (opt.build_mib && full.windows >= 2) out.mib.push_back(build_mib_prompt(vocab, full));

        if (opt.build_mp && seq.frames % (2 * ds) == 0 && seq.frames >= 2 * ds) {
            const int half = seq.frames / 2;
            skeleton::PoseSequence history(half, seq.joints, seq.space, seq.frame_rate_hz);
            skeleton::PoseSequence future(half, seq.joints, seq.space, seq.frame_rate_hz);
            std::copy(seq.data.begin(), seq.data.begin() + static_cast<std::ptrdiff_t>(history.data.size()),
                      history.data.begin());
            std::copy(seq.data.begin() + static_cast<std::ptrdiff_t>(history.data.size()), seq.data.end(),
                      future.data.begin());
            out.mp.push_back(build_mp_prompt(vocab, tokenizer.tokenize(history), tokenizer.tokenize(future)));
        }

        if (opt.build_pe) {
            auto cond = std::make_shared<PeConditioning>();
            cond->maps = tokenizer.stem_maps(rendered);
            if (opt.pe_ref_noise_px > 0.0) {
                vgmt::RenderedSequence noisy =
                    render_joints(seq, tokenizer.config().provider, opt.pe_ref_noise_px, opt.noise_seed + sample_index);
                cond->refs = noisy.ref_points;
            } else {
                cond->refs = rendered.ref_points;
            }
            out.pe.push_back(build_pe_prompt(vocab, full, std::move(cond)));
        }
        ++sample_index;
    }
    return out;
}

}  // namespace motiontok::lm
