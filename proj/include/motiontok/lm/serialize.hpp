#pragma once

#include <string>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/lm/vocab.hpp"
#include "motiontok/skeleton/layout.hpp"
#include "motiontok/vgmt/codebook.hpp"

namespace motiontok::lm {

enum class SerializeMode { plain, future_prefix };

// Emits one window: "[Future] Frame <w+1> :" then the five body-part blocks
// "<group> : <skel tokens> ." in canonical order, joints in layout order.
inline void serialize_window(const MotionVocabulary& vocab, const vgmt::TokenGrid& grid, int window,
                             SerializeMode mode, std::vector<int>& out) {
    if (mode == SerializeMode::future_prefix) out.push_back(vocab.id("Future"));
    out.push_back(vocab.id("Frame"));
    out.push_back(vocab.number_id(window + 1));
    out.push_back(vocab.colon());
    for (std::size_t gidx = 0; gidx < skeleton::group_names().size(); ++gidx) {
        out.push_back(vocab.id(skeleton::group_names()[gidx]));
        out.push_back(vocab.colon());
        for (int joint : grid.layout.groups[gidx]) out.push_back(vocab.skel_id(grid.at(window, joint)));
        out.push_back(vocab.period());
    }
}

inline std::vector<int> serialize(const MotionVocabulary& vocab, const vgmt::TokenGrid& grid,
                                  SerializeMode mode = SerializeMode::plain) {
    grid.layout.validate();
    if (grid.layout.groups.size() != 5) throw DataError("serialize: layout must have the 5 canonical groups");
    if (grid.windows > vocab.config().max_windows)
        throw DataError("serialize: grid has more windows than the vocabulary can label");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(grid.windows) * (static_cast<std::size_t>(grid.joints) + 19));
    for (int w = 0; w < grid.windows; ++w) serialize_window(vocab, grid, w, mode, out);
    return out;
}

// Structural token count per serialized window (everything except the N
// skeleton tokens themselves).
inline int structural_tokens_per_window(SerializeMode mode) {
    return mode == SerializeMode::future_prefix ? 19 : 18;
}

struct ParseResult {
    vgmt::TokenGrid grid;
    int malformed_cells = 0;
    int dropped_windows = 0;
};

// Inverse of serialize. Strict mode demands the exact serializer structure.
// Robust mode recovers every well-formed (window, group) block, fills missing
// cells with code 0 and counts them; a window cut off by the end of the
// stream is dropped rather than padded.
inline ParseResult parse(const MotionVocabulary& vocab, const std::vector<int>& tokens, bool strict,
                         const skeleton::JointLayout& layout = skeleton::h36m17()) {
    layout.validate();
    const auto& groups = skeleton::group_names();
    ParseResult result;
    std::vector<std::vector<int>> windows;

    std::size_t pos = 0;
    const std::size_t end = tokens.size();
    auto at = [&](std::size_t i) { return i < end ? tokens[i] : -1; };
    const int frame_id = vocab.id("Frame");
    const int future_id = vocab.id("Future");

    auto is_window_start = [&](std::size_t i) {
        return at(i) == frame_id || (at(i) == future_id && at(i + 1) == frame_id);
    };

    while (pos < end) {
        if (!is_window_start(pos)) {
            if (strict) throw DataError("parse: expected a window label");
            ++pos;
            continue;
        }
        // Window header.
        if (at(pos) == future_id) ++pos;
        ++pos;  // Frame
        if (vocab.is_number(at(pos))) {
            if (strict && vocab.number_value(tokens[pos]) != static_cast<int>(windows.size()) + 1)
                throw DataError("parse: window numbered out of order");
            ++pos;
        } else if (strict) {
            throw DataError("parse: missing window number");
        }
        if (at(pos) == vocab.colon()) {
            ++pos;
        } else if (strict) {
            throw DataError("parse: missing colon after window label");
        }

        std::vector<int> cells(static_cast<std::size_t>(layout.joint_count()), 0);
        int malformed = 0;
        bool truncated = false;
        for (std::size_t gidx = 0; gidx < groups.size(); ++gidx) {
            const int gsize = static_cast<int>(layout.groups[gidx].size());
            if (pos >= end) {
                truncated = true;
                malformed += gsize;
                continue;
            }
            if (at(pos) != vocab.id(groups[gidx])) {
                if (strict) throw DataError("parse: expected group '" + groups[gidx] + "'");
                malformed += gsize;  // block missing entirely; cells stay 0
                continue;
            }
            ++pos;
            if (at(pos) == vocab.colon()) {
                ++pos;
            } else if (strict) {
                throw DataError("parse: missing colon after group label");
            }
            int got = 0;
            while (got < gsize && vocab.is_skel(at(pos))) {
                cells[static_cast<std::size_t>(layout.groups[gidx][static_cast<std::size_t>(got)])] =
                    vocab.skel_code(tokens[pos]);
                ++pos;
                ++got;
            }
            if (got < gsize) {
                if (strict) throw DataError("parse: group '" + groups[gidx] + "' has too few skeleton tokens");
                malformed += gsize - got;
                if (pos >= end) truncated = true;
            }
            if (at(pos) == vocab.period()) {
                ++pos;
            } else if (strict) {
                throw DataError("parse: missing period after group");
            } else if (pos >= end) {
                truncated = true;
            }
        }
        if (truncated) {
            ++result.dropped_windows;
            result.malformed_cells += layout.joint_count();
        } else {
            windows.push_back(std::move(cells));
            result.malformed_cells += malformed;
        }
        if (static_cast<int>(windows.size()) > vocab.config().max_windows)
            throw DataError("parse: too many windows");
    }
    if (strict && pos != end) throw DataError("parse: trailing tokens");
    if (windows.empty()) {
        if (strict) throw DataError("parse: no windows found");
        result.grid = vgmt::TokenGrid(0, layout.joint_count(), layout);
        result.grid.windows = 0;
        result.grid.indices.clear();
        return result;
    }

    result.grid = vgmt::TokenGrid(static_cast<int>(windows.size()), layout.joint_count(), layout);
    for (std::size_t w = 0; w < windows.size(); ++w)
        for (int n = 0; n < layout.joint_count(); ++n)
            result.grid.at(static_cast<int>(w), n) = windows[w][static_cast<std::size_t>(n)];
    return result;
}

// Text rendering of a serialized grid; the exact-string fixtures pin this.
inline std::string grid_to_text(const MotionVocabulary& vocab, const vgmt::TokenGrid& grid,
                                SerializeMode mode = SerializeMode::plain) {
    return vocab.render(serialize(vocab, grid, mode));
}

}  // namespace motiontok::lm
