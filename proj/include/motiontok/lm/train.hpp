#pragma once

#include <array>
#include <cmath>
#include <iostream>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/lm/data.hpp"
#include "motiontok/lm/maft.hpp"
#include "motiontok/lm/transformer.hpp"
#include "motiontok/numerics/params.hpp"

namespace motiontok::lm {

struct LmTrainConfig {
    int steps = 60;
    int batch_size = 2;
    double lr = 1e-4;
    std::uint64_t seed = 0;
    // PE, MP, MIB mixing weights; a zero ratio disables the task.
    std::array<double, 3> task_ratios = {1.0, 1.0, 1.0};
    int log_every = 20;

    void validate() const {
        if (steps < 1 || batch_size < 1 || log_every < 1) throw ConfigError("lm train: bad step/batch/log values");
        if (!(lr > 0.0)) throw ConfigError("lm train: learning rate must be positive");
        double total = 0.0;
        for (double r : task_ratios) {
            if (r < 0.0) throw ConfigError("lm train: task ratios must be non-negative");
            total += r;
        }
        if (total <= 0.0) throw ConfigError("lm train: at least one task ratio must be positive");
    }
};

struct LmTrainLogEntry {
    int step = 0;
    double avg_loss = 0.0;
    std::array<double, 3> task_loss = {0.0, 0.0, 0.0};
    std::array<int, 3> task_samples = {0, 0, 0};
};

struct LmTrainResult {
    std::vector<LmTrainLogEntry> log;
    double final_avg_loss = 0.0;
};

// Joint multi-task fine-tuning: batches mix PE/MP/MIB samples at the given
// ratios under one cross-entropy objective. A single-task ratio vector gives
// the specialized-training mode. Deterministic per seed.
inline LmTrainResult train_unified(TransformerLm<float>& model, Maft<float>* maft, const UnifiedDatasets& data,
                                   const LmTrainConfig& cfg, std::ostream* log = nullptr) {
    cfg.validate();
    const std::array<const std::vector<PromptedSample>*, 3> pools = {&data.pe, &data.mp, &data.mib};
    for (int t = 0; t < 3; ++t) {
        if (cfg.task_ratios[static_cast<std::size_t>(t)] > 0.0 && pools[static_cast<std::size_t>(t)]->empty())
            throw DataError("lm train: task has a positive ratio but an empty dataset");
    }
    if (cfg.task_ratios[0] > 0.0) {
        if (maft == nullptr) throw ConfigError("lm train: pose estimation requires the fusion module");
        if (model.config().visual_dim != maft->config().fuse_dim)
            throw ConfigError("lm train: model visual dim must match fusion width");
    }

    double cum[3] = {};
    double total_ratio = cfg.task_ratios[0] + cfg.task_ratios[1] + cfg.task_ratios[2];
    cum[0] = cfg.task_ratios[0] / total_ratio;
    cum[1] = cum[0] + cfg.task_ratios[1] / total_ratio;
    cum[2] = 1.0;

    Rng rng(cfg.seed);
    num::AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;
    num::AdamW<float> opt_lm(adam_cfg);
    num::AdamW<float> opt_maft(adam_cfg);

    LmTrainResult result;
    LmTrainLogEntry window;
    int window_batches = 0;
    double window_loss = 0.0;

    for (int step = 1; step <= cfg.steps; ++step) {
        num::Graph<float> g;
        model.params().zero_grad();
        if (maft) maft->params().zero_grad();

        num::TensorId batch_loss = -1;
        for (int b = 0; b < cfg.batch_size; ++b) {
            const double u = rng.uniform();
            const int task = u < cum[0] ? 0 : (u < cum[1] ? 1 : 2);
            const auto& pool = *pools[static_cast<std::size_t>(task)];
            const PromptedSample& sample = pool[rng.below(pool.size())];

            num::TensorId vis = -1;
            if (sample.task == skeleton::Task::PE) vis = maft->conditioning_graph(g, *sample.visual);
            num::TensorId loss = model.ar_loss_graph(g, sample, vis);
            window.task_loss[static_cast<std::size_t>(task)] += static_cast<double>(g.scalar(loss));
            window.task_samples[static_cast<std::size_t>(task)] += 1;
            batch_loss = batch_loss < 0 ? loss : g.add(batch_loss, loss);
        }
        batch_loss = g.scale(batch_loss, 1.0 / cfg.batch_size);
        const double loss_value = static_cast<double>(g.scalar(batch_loss));
        if (!std::isfinite(loss_value)) throw NumericError("lm train: loss became non-finite");
        g.backward(batch_loss);
        opt_lm.step(model.params());
        if (maft) opt_maft.step(maft->params());

        window_loss += loss_value;
        ++window_batches;
        if (step % cfg.log_every == 0 || step == cfg.steps) {
            LmTrainLogEntry entry = window;
            entry.step = step;
            entry.avg_loss = window_loss / window_batches;
            for (int t = 0; t < 3; ++t)
                if (entry.task_samples[static_cast<std::size_t>(t)] > 0)
                    entry.task_loss[static_cast<std::size_t>(t)] /= entry.task_samples[static_cast<std::size_t>(t)];
            result.log.push_back(entry);
            if (log) {
                *log << "step " << step << " loss " << entry.avg_loss << " pe " << entry.task_loss[0] << "("
                     << entry.task_samples[0] << ") mp " << entry.task_loss[1] << "(" << entry.task_samples[1]
                     << ") mib " << entry.task_loss[2] << "(" << entry.task_samples[2] << ")\n";
            }
            window = LmTrainLogEntry{};
            window_loss = 0.0;
            window_batches = 0;
        }
    }
    result.final_avg_loss = result.log.empty() ? 0.0 : result.log.back().avg_loss;
    return result;
}

}  // namespace motiontok::lm
