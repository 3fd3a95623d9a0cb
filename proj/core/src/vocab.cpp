#include "steerkit/vocab.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace steerkit {

namespace {

bool is_punct_token(char c) {
    switch (c) {
        case '.': case ',': case ':': case ';': case '?': case '!':
        case '(': case ')': case '[': case ']': case '{': case '}':
        case '"': case '\'':
            return true;
        default:
            return false;
    }
}

} // namespace

std::vector<std::string> split_pieces(const std::string& text) {
    std::vector<std::string> pieces;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) {
            pieces.push_back(word);
            word.clear();
        }
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else if (is_punct_token(c)) {
            flush();
            pieces.push_back(std::string(1, c));
        } else {
            word.push_back(c);
        }
    }
    flush();
    return pieces;
}

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() < 2 || tokens_[0] != "<unk>" || tokens_[1] != "<eos>")
        throw Error(ErrorCode::InvalidConfig, "vocab must start with <unk>, <eos>");
    for (size_t i = 0; i < tokens_.size(); ++i) {
        auto [it, inserted] = index_.emplace(tokens_[i], static_cast<int32_t>(i));
        if (!inserted)
            throw Error(ErrorCode::InvalidConfig, "duplicate vocab token: " + tokens_[i]);
    }
}

Vocab Vocab::builtin() {
    // Word list covers the bundled task/prompt text plus digits, choice
    // letters and operators so generated text can carry parseable answers.
    static const char* kWords[] = {
        "<unk>", "<eos>",
        ".", ",", ":", ";", "?", "!", "(", ")", "\"", "'",
        "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
        "10", "11", "12", "13", "14", "15", "16", "17", "18", "19", "20",
        "21", "24", "25", "30", "36", "40", "48", "50", "60", "72", "100",
        "A", "B", "C", "D",
        "+", "-", "*", "/", "=",
        "Answer", "Solve", "the", "mathematics", "problem", "with",
        "step-by-step", "detailed", "reasoning", "direct", "answering",
        "Review", "solution", "carefully", "check", "each", "step", "and",
        "correct", "any", "errors", "then", "give", "final", "answer",
        "a", "an", "of", "to", "in", "is", "are", "was", "has", "have",
        "had", "he", "she", "it", "they", "them", "his", "her", "its",
        "this", "that", "there", "now", "so", "if", "for", "per", "at",
        "on", "by", "from", "more", "less", "than", "total", "left",
        "remaining", "How", "many", "much", "What", "Which", "does", "do",
        "did", "will", "would", "after", "before", "first", "second",
        "third", "half", "twice", "times", "plus", "minus", "sum",
        "difference", "product", "apples", "oranges", "pencils", "books",
        "marbles", "cookies", "stickers", "coins", "dollars", "cents",
        "minutes", "hours", "days", "weeks", "buys", "sells", "gives",
        "gets", "takes", "loses", "finds", "eats", "reads", "Tom", "Ann",
        "Sam", "Mia", "Leo", "Eva", "friend", "friends", "teacher",
        "class", "box", "boxes", "bag", "bags", "shelf", "store", "price",
        "cost", "costs", "pays", "change", "number", "value", "equals",
        "seems", "be", "The", "So", "Then", "because", "but", "not",
        "all", "some", "one", "two", "three", "four", "five", "six",
        "seven", "eight", "nine", "ten", "which", "color", "shape",
        "largest", "smallest", "even", "odd", "prime", "speed", "distance",
        "time", "water", "tank", "fills", "empties", "rate", "begins",
        "ends", "starts", "let", "we", "you", "I", "x", "y", "again",
    };
    std::vector<std::string> tokens(std::begin(kWords), std::end(kWords));
    return Vocab(std::move(tokens));
}

Vocab Vocab::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open vocab file: " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) tokens.push_back(line);
    }
    return Vocab(std::move(tokens));
}

void Vocab::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write vocab file: " + path);
    for (const auto& t : tokens_) out << t << "\n";
}

int32_t Vocab::id_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnkId : it->second;
}

TokenSeq Vocab::tokenize(const std::string& text) const {
    auto pieces = split_pieces(text);
    if (pieces.empty()) throw Error(ErrorCode::EmptyInput, "text trims to nothing");
    TokenSeq seq;
    seq.ids.reserve(pieces.size());
    for (const auto& p : pieces) seq.ids.push_back(id_of(p));
    return seq;
}

std::string Vocab::detokenize(const TokenSeq& tokens) const {
    std::ostringstream out;
    bool first = true;
    for (int32_t id : tokens.ids) {
        if (id < 0 || id >= size())
            throw Error(ErrorCode::ShapeMismatch, "token id out of range");
        if (!first) out << ' ';
        out << tokens_[static_cast<size_t>(id)];
        first = false;
    }
    return out.str();
}

} // namespace steerkit
