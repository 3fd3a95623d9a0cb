#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "steerkit/error.hpp"

namespace steerkit {

// Token id sequence fed to the model.
struct TokenSeq {
    std::vector<int32_t> ids;

    int length() const { return static_cast<int>(ids.size()); }
    bool operator==(const TokenSeq& o) const { return ids == o.ids; }
};

inline TokenSeq concat(const TokenSeq& a, const TokenSeq& b) {
    TokenSeq out = a;
    out.ids.insert(out.ids.end(), b.ids.begin(), b.ids.end());
    return out;
}

// Whitespace vocabulary with punctuation split off as separate tokens.
// Ids 0 and 1 are reserved: 0 = <unk>, 1 = <eos>. Unknown words map to
// <unk>; in-vocab text round-trips through tokenize/detokenize.
class Vocab {
public:
    static constexpr int32_t kUnkId = 0;
    static constexpr int32_t kEosId = 1;

    explicit Vocab(std::vector<std::string> tokens);

    // Small built-in vocabulary covering the bundled task files.
    static Vocab builtin();

    // Newline-delimited token file; must start with <unk> and <eos>.
    static Vocab load(const std::string& path);
    void save(const std::string& path) const;

    TokenSeq tokenize(const std::string& text) const;
    std::string detokenize(const TokenSeq& tokens) const;

    int size() const { return static_cast<int>(tokens_.size()); }
    const std::string& token(int32_t id) const { return tokens_[static_cast<size_t>(id)]; }
    int32_t id_of(const std::string& token) const; // kUnkId when absent

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int32_t> index_;
};

// Splits text into word/punctuation pieces (no vocab lookup).
std::vector<std::string> split_pieces(const std::string& text);

} // namespace steerkit
