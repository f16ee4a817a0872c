#pragma once

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/numerics/params.hpp"
#include "motiontok/skeleton/metrics.hpp"
#include "motiontok/vgmt/loss.hpp"
#include "motiontok/vgmt/model.hpp"

namespace motiontok::vgmt {

struct TokenizerTrainConfig {
    int steps = 600;
    int batch_size = 4;
    double lr = 2e-4;
    int log_every = 100;
    std::uint64_t seed = 0;
    int eval_sequences = 12;

    void validate() const {
        if (steps < 1 || batch_size < 1 || log_every < 1) throw ConfigError("tokenizer train: bad step/batch/log values");
        if (!(lr > 0.0)) throw ConfigError("tokenizer train: learning rate must be positive");
    }
};

struct UsageSummary {
    int frequent = 0;
    int active = 0;
    int underused = 0;
    int unused = 0;
};

struct TokenizerLogEntry {
    int step = 0;
    double window_loss = 0.0;
    double recon_mpjpe = 0.0;
    UsageSummary usage;
};

struct TokenizerTrainResult {
    std::vector<TokenizerLogEntry> log;
    double final_loss = 0.0;
    double final_recon_mpjpe = 0.0;
};

namespace detail {

inline UsageSummary summarize_usage(const std::vector<std::int64_t>& counts, std::int64_t total) {
    UsageSummary s;
    for (std::int64_t c : counts) {
        const double rate = total > 0 ? static_cast<double>(c) / static_cast<double>(total) : 0.0;
        switch (usage_bucket(rate)) {
            case UsageBucket::frequent: ++s.frequent; break;
            case UsageBucket::active: ++s.active; break;
            case UsageBucket::underused: ++s.underused; break;
            case UsageBucket::unused: ++s.unused; break;
        }
    }
    return s;
}

}  // namespace detail

// Reconstruction MPJPE of tokenize-then-decode over a subset, plus usage.
inline std::pair<double, UsageSummary> eval_reconstruction(Vgmt<float>& model,
                                                           const std::vector<skeleton::PoseSequence>& dataset,
                                                           const std::vector<RenderedSequence>& rendered,
                                                           int limit) {
    const int n_eval = std::min<int>(limit, static_cast<int>(dataset.size()));
    if (n_eval == 0) throw DataError("tokenizer eval: empty dataset");
    double total = 0.0;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(model.config().codebook_size), 0);
    std::int64_t cells = 0;
    for (int i = 0; i < n_eval; ++i) {
        TokenGrid grid = model.tokenize(dataset[static_cast<std::size_t>(i)], rendered[static_cast<std::size_t>(i)]);
        for (int k : grid.indices) ++counts[static_cast<std::size_t>(k)];
        cells += static_cast<std::int64_t>(grid.indices.size());
        skeleton::PoseSequence recon = model.decode(grid);
        total += skeleton::mpjpe(recon, dataset[static_cast<std::size_t>(i)]);
    }
    return {total / n_eval, detail::summarize_usage(counts, cells)};
}

// Trains the tokenizer end to end on preprocessed (pixel_rootrel) sequences.
// Deterministic given the seed: fixed batch order, single-threaded numerics.
inline TokenizerTrainResult train_tokenizer(Vgmt<float>& model,
                                            const std::vector<skeleton::PoseSequence>& dataset,
                                            const TokenizerTrainConfig& cfg, std::ostream* log = nullptr) {
    cfg.validate();
    if (dataset.empty()) throw DataError("tokenizer train: empty dataset");
    for (const auto& seq : dataset) model.check_input(seq);

    if (model.config().beta_commit == 0.0 && model.config().mode == StreamMode::fused && log)
        *log << "warning: commitment weight is 0; the visual encoder receives no gradient "
                "and stays at initialization\n";

    // Rendering is deterministic; cache it once.
    std::vector<RenderedSequence> rendered(dataset.size());
    if (model.config().mode != StreamMode::skeleton_only) {
        for (std::size_t i = 0; i < dataset.size(); ++i)
            rendered[i] = render_joints(dataset[i], model.config().provider);
    }

    Rng rng(cfg.seed);
    num::AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;
    num::AdamW<float> opt(adam_cfg);

    TokenizerTrainResult result;
    double window_loss = 0.0;
    int window_count = 0;
    for (int step = 1; step <= cfg.steps; ++step) {
        num::Graph<float> g;
        model.params().zero_grad();
        num::TensorId batch_loss = -1;
        for (int b = 0; b < cfg.batch_size; ++b) {
            const std::size_t pick = rng.below(dataset.size());
            SampleLoss<float> s = build_sample_loss(model, g, dataset[pick], rendered[pick]);
            batch_loss = batch_loss < 0 ? s.loss : g.add(batch_loss, s.loss);
        }
        batch_loss = g.scale(batch_loss, 1.0 / cfg.batch_size);
        const double loss_value = static_cast<double>(g.scalar(batch_loss));
        if (!std::isfinite(loss_value)) throw NumericError("tokenizer train: loss became non-finite");
        g.backward(batch_loss);
        opt.step(model.params());

        window_loss += loss_value;
        ++window_count;
        if (step % cfg.log_every == 0 || step == cfg.steps) {
            auto [recon, usage] = eval_reconstruction(model, dataset, rendered, cfg.eval_sequences);
            TokenizerLogEntry entry;
            entry.step = step;
            entry.window_loss = window_loss / window_count;
            entry.recon_mpjpe = recon;
            entry.usage = usage;
            result.log.push_back(entry);
            if (log)
                *log << "step " << step << " loss " << entry.window_loss << " recon_mpjpe " << recon
                     << " usage f/a/u/z " << usage.frequent << "/" << usage.active << "/" << usage.underused
                     << "/" << usage.unused << "\n";
            window_loss = 0.0;
            window_count = 0;
        }
    }
    result.final_loss = result.log.empty() ? 0.0 : result.log.back().window_loss;
    result.final_recon_mpjpe = result.log.empty() ? 0.0 : result.log.back().recon_mpjpe;
    return result;
}

}  // namespace motiontok::vgmt
