#pragma once

#include <map>
#include <string>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/lm/templates.hpp"

namespace motiontok::lm {

struct VocabConfig {
    int codebook_size = 256;
    int max_windows = 64;
    std::string vision_start = "<|vision_start|>";
    std::string video_pad = "<|video_pad|>";
    std::string vision_end = "<|vision_end|>";

    void validate() const {
        if (codebook_size < 1) throw ConfigError("vocab: codebook size must be >= 1");
        if (max_windows < 1) throw ConfigError("vocab: max windows must be >= 1");
    }
};

// Token <-> id bijection covering: control tokens, the punctuation and words
// of the instruction templates, frame-number tokens, and one skeleton token
// per codebook index. Word-level by construction; no external tokenizer.
class MotionVocabulary {
public:
    explicit MotionVocabulary(VocabConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        add("<pad>");
        add("<eos>");
        add("<|user|>");
        add("<|assistant|>");
        add(cfg_.vision_start);
        add(cfg_.video_pad);
        add(cfg_.vision_end);
        add("[START]");
        add("[MIDDLE]");
        add("[END]");
        add(":");
        add(".");
        add(",");
        add("\"");
        add("...");
        first_number_ = static_cast<int>(id_to_tok_.size());
        for (int n = 1; n <= cfg_.max_windows; ++n) add(std::to_string(n));
        // Template words, in first-appearance order.
        for (const char* tpl : {kPeTemplate, kMpTemplate, kMibTemplate}) {
            for (const std::string& w : split_words(tpl)) {
                if (w == "<video>" || w == "<skeleton>") continue;
                maybe_add_word(w);
            }
        }
        first_skel_ = static_cast<int>(id_to_tok_.size());
        for (int k = 0; k < cfg_.codebook_size; ++k) add("<skel_" + std::to_string(k) + ">");
    }

    const VocabConfig& config() const { return cfg_; }
    int size() const { return static_cast<int>(id_to_tok_.size()); }

    int id(const std::string& tok) const {
        auto it = tok_to_id_.find(tok);
        if (it == tok_to_id_.end()) throw DataError("vocab: unknown token '" + tok + "'");
        return it->second;
    }
    const std::string& token(int id) const {
        if (id < 0 || id >= size()) throw DataError("vocab: id out of range");
        return id_to_tok_[static_cast<std::size_t>(id)];
    }

    // control tokens
    int pad() const { return 0; }
    int eos() const { return 1; }
    int user() const { return 2; }
    int assistant() const { return 3; }
    int vision_start() const { return 4; }
    int video_pad() const { return 5; }
    int vision_end() const { return 6; }
    int start_marker() const { return 7; }
    int middle_marker() const { return 8; }
    int end_marker() const { return 9; }
    int colon() const { return 10; }
    int period() const { return 11; }
    int comma() const { return 12; }
    int quote() const { return 13; }
    int ellipsis() const { return 14; }

    // number tokens
    int number_id(int n) const {
        if (n < 1 || n > cfg_.max_windows) throw DataError("vocab: frame number out of range");
        return first_number_ + n - 1;
    }
    bool is_number(int id) const { return id >= first_number_ && id < first_number_ + cfg_.max_windows; }
    int number_value(int id) const {
        if (!is_number(id)) throw DataError("vocab: not a number token");
        return id - first_number_ + 1;
    }

    // skeleton tokens
    int skel_id(int code) const {
        if (code < 0 || code >= cfg_.codebook_size) throw DataError("vocab: codebook index out of range");
        return first_skel_ + code;
    }
    bool is_skel(int id) const { return id >= first_skel_ && id < first_skel_ + cfg_.codebook_size; }
    int skel_code(int id) const {
        if (!is_skel(id)) throw DataError("vocab: not a skeleton token");
        return id - first_skel_;
    }
    int first_skel() const { return first_skel_; }

    // Word-level lexer for template text and rendered token strings.
    std::vector<int> lex(const std::string& text) const {
        std::vector<int> out;
        for (const std::string& chunk : split_words(text)) lex_chunk(chunk, out);
        return out;
    }

    // Display rendering: tokens joined by spaces, punctuation attached to the
    // previous token, consecutive skeleton tokens run together, and a line
    // break between serialized windows.
    std::string render(const std::vector<int>& ids) const {
        std::string out;
        int prev = -1;
        for (int id : ids) {
            const std::string& tok = token(id);
            if (prev >= 0) {
                const bool attach = id == colon() || id == period() || id == comma() ||
                                    (is_skel(id) && is_skel(prev));
                const bool window_break = prev == period() && (tok == "Frame" || tok == "Future");
                if (window_break)
                    out.push_back('\n');
                else if (!attach)
                    out.push_back(' ');
            }
            out += tok;
            prev = id;
        }
        return out;
    }

private:
    void add(const std::string& tok) {
        if (tok_to_id_.count(tok)) throw ConfigError("vocab: duplicate token " + tok);
        tok_to_id_[tok] = static_cast<int>(id_to_tok_.size());
        id_to_tok_.push_back(tok);
    }

    void maybe_add_word(const std::string& raw) {
        std::vector<int> probe;
        // Anything the lexer can already resolve needs no new word entry.
        try {
            lex_chunk(raw, probe);
            return;
        } catch (const DataError&) {
        }
        std::string w = raw;
        // Strip punctuation the lexer will re-split.
        while (!w.empty() && (w.back() == ':' || w.back() == '.' || w.back() == ',' || w.back() == '"')) w.pop_back();
        while (!w.empty() && w.front() == '"') w.erase(w.begin());
        if (w.empty() || tok_to_id_.count(w)) return;
        add(w);
    }

    static std::vector<std::string> split_words(const std::string& text) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : text) {
            if (c == ' ' || c == '\n' || c == '\t') {
                if (!cur.empty()) out.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) out.push_back(cur);
        return out;
    }

    void lex_chunk(const std::string& chunk, std::vector<int>& out) const {
        if (chunk.empty()) return;
        auto it = tok_to_id_.find(chunk);
        if (it != tok_to_id_.end()) {
            out.push_back(it->second);
            return;
        }
        if (chunk.front() == '"') {
            out.push_back(quote());
            lex_chunk(chunk.substr(1), out);
            return;
        }
        const char last = chunk.back();
        if (last == ':' || last == '.' || last == ',' || last == '"') {
            lex_chunk(chunk.substr(0, chunk.size() - 1), out);
            out.push_back(id(std::string(1, last)));
            return;
        }
        throw DataError("vocab: cannot lex '" + chunk + "'");
    }

    VocabConfig cfg_;
    std::vector<std::string> id_to_tok_;
    std::map<std::string, int> tok_to_id_;
    int first_number_ = 0;
    int first_skel_ = 0;
};

}  // namespace motiontok::lm
