#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/lm/grammar.hpp"
#include "motiontok/lm/transformer.hpp"
#include "motiontok/lm/vocab.hpp"

namespace motiontok::lm {

struct DecodeConfig {
    bool constrained = true;
    double temperature = 0.0;  // 0 = greedy
    int top_k = 0;             // 0 = no truncation (sampling mode only)
    std::uint64_t seed = 0;
    int max_tokens = 0;        // 0 = up to the context limit
};

// Autoregressive decoding. Greedy by default; constrained mode masks logits
// to the grammar's legal set so output always parses. Returns the generated
// suffix (without the prompt), ending at <eos> or the context limit.
template <typename T>
std::vector<int> generate(TransformerLm<T>& model, const MotionVocabulary& vocab,
                          const std::vector<int>& prompt, const std::vector<T>* visual_rows, int visual_count,
                          SerializationGrammar* grammar, const DecodeConfig& cfg) {
    model.require_finite_params();
    const int ctx = model.config().context_length;
    const int prefix = visual_rows ? visual_count : 0;
    if (static_cast<int>(prompt.size()) + prefix + 1 > ctx) throw DataError("generate: prompt exceeds the context");

    Rng rng(cfg.seed);
    std::vector<int> seq = prompt;
    std::vector<int> out;
    while (true) {
        if (prefix + static_cast<int>(seq.size()) + 1 > ctx) break;  // context limit reached
        if (cfg.max_tokens > 0 && static_cast<int>(out.size()) >= cfg.max_tokens) break;

        num::Graph<T> g;
        num::TensorId vis = -1;
        if (visual_rows)
            vis = g.input({visual_count, model.config().visual_dim}, *visual_rows);
        num::TensorId logits = model.logits_graph(g, seq, vis);
        const int v = g.shape(logits)[1];
        const std::size_t last = (static_cast<std::size_t>(g.shape(logits)[0]) - 1) * static_cast<std::size_t>(v);
        std::vector<double> row(static_cast<std::size_t>(v));
        for (int j = 0; j < v; ++j) row[static_cast<std::size_t>(j)] = static_cast<double>(g.val(logits)[last + static_cast<std::size_t>(j)]);

        std::vector<int> legal;
        if (grammar && cfg.constrained) {
            legal = grammar->legal_tokens();
            if (legal.empty()) break;  // grammar finished
        } else {
            legal.resize(static_cast<std::size_t>(v));
            for (int j = 0; j < v; ++j) legal[static_cast<std::size_t>(j)] = j;
        }

        int chosen;
        if (cfg.temperature > 0.0) {
            double mx = -1e300;
            for (int id : legal) mx = std::max(mx, row[static_cast<std::size_t>(id)]);
            std::vector<std::pair<int, double>> probs;
            probs.reserve(legal.size());
            for (int id : legal) probs.push_back({id, std::exp((row[static_cast<std::size_t>(id)] - mx) / cfg.temperature)});
            if (cfg.top_k > 0 && static_cast<int>(probs.size()) > cfg.top_k) {
                std::partial_sort(probs.begin(), probs.begin() + cfg.top_k, probs.end(),
                                  [](const auto& a, const auto& b) { return a.second > b.second; });
                probs.resize(static_cast<std::size_t>(cfg.top_k));
            }
            double total = 0.0;
            for (const auto& [id, p] : probs) total += p;
            double u = rng.uniform() * total;
            chosen = probs.back().first;
            for (const auto& [id, p] : probs) {
                if (u < p) {
                    chosen = id;
                    break;
                }
                u -= p;
            }
        } else {
            // Greedy: highest logit among legal ids, lowest id on ties.
            chosen = legal[0];
            double best = row[static_cast<std::size_t>(legal[0])];
            for (int id : legal)
                if (row[static_cast<std::size_t>(id)] > best) {
                    best = row[static_cast<std::size_t>(id)];
                    chosen = id;
                }
        }

        seq.push_back(chosen);
        out.push_back(chosen);
        if (grammar && cfg.constrained) {
            grammar->accept(chosen);
            if (grammar->finished()) break;
        }
        if (chosen == vocab.eos()) break;
    }
    return out;
}

}  // namespace motiontok::lm
