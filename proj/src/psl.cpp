#include "dronecine/psl.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <utility>

namespace dronecine::psl {
namespace {

enum class TokenKind { Word, Number, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    double number = 0.0;
    std::size_t offset = 0;
    std::size_t index = 0;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> tokens;
        while (true) {
            while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
            if (pos_ >= text_.size()) break;
            Token tok;
            tok.offset = pos_;
            tok.index = tokens.size();
            if (starts_number()) {
                // "5s" and "0.5m/s" split into number + unit; anything else
                // that merely starts with digits ("34left") is a word.
                const std::size_t start = pos_;
                lex_number(tok);
                std::size_t end = pos_;
                while (end < text_.size() && !is_space(text_[end])) ++end;
                const std::string rest = lower(text_.substr(pos_, end - pos_));
                if (rest.empty() || rest == "s" || rest == "m/s") {
                    tokens.push_back(tok);
                    if (!rest.empty()) {
                        Token unit;
                        unit.offset = pos_;
                        unit.index = tokens.size();
                        lex_word(unit);
                        tokens.push_back(unit);
                    }
                    continue;
                }
                pos_ = start;
            }
            lex_word(tok);
            tokens.push_back(tok);
        }
        Token end;
        end.kind = TokenKind::End;
        end.offset = text_.size();
        end.index = tokens.size();
        tokens.push_back(end);
        return tokens;
    }

private:
    bool starts_number() const {
        char c = text_[pos_];
        if (is_digit(c)) return true;
        auto next_is_digit = [&](std::size_t k) { return k < text_.size() && is_digit(text_[k]); };
        if (c == '.') return next_is_digit(pos_ + 1);
        if (c == '-' || c == '+') {
            return next_is_digit(pos_ + 1) || (pos_ + 2 < text_.size() && text_[pos_ + 1] == '.' && is_digit(text_[pos_ + 2]));
        }
        return false;
    }

    void lex_number(Token& tok) {
        std::size_t start = pos_;
        if (text_[pos_] == '-' || text_[pos_] == '+') ++pos_;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        }
        if (pos_ + 1 < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t k = pos_ + 1;
            if (k < text_.size() && (text_[k] == '+' || text_[k] == '-')) ++k;
            if (k < text_.size() && is_digit(text_[k])) {
                pos_ = k;
                while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
            }
        }
        tok.kind = TokenKind::Number;
        tok.text = std::string(text_.substr(start, pos_ - start));
        const char* first = tok.text.data();
        if (*first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, tok.text.data() + tok.text.size(), tok.number);
        if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
            tok.number = std::nan("");
        }
    }

    void lex_word(Token& tok) {
        std::size_t start = pos_;
        while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
        tok.kind = TokenKind::Word;
        tok.text = std::string(text_.substr(start, pos_ - start));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

constexpr std::array<std::pair<std::string_view, ShotSize>, 6> kSizes{{
    {"cu", ShotSize::CU}, {"mcu", ShotSize::MCU}, {"ms", ShotSize::MS},
    {"mls", ShotSize::MLS}, {"fs", ShotSize::FS}, {"ls", ShotSize::LS},
}};

constexpr std::array<std::pair<std::string_view, Profile>, 8> kProfiles{{
    {"front", Profile::Front},
    {"34left", Profile::ThreeQuarterLeft},
    {"left", Profile::Left},
    {"34backleft", Profile::ThreeQuarterBackLeft},
    {"back", Profile::Back},
    {"34backright", Profile::ThreeQuarterBackRight},
    {"right", Profile::Right},
    {"34right", Profile::ThreeQuarterRight},
}};

constexpr std::array<std::pair<std::string_view, Vertical>, 3> kVerticals{{
    {"high", Vertical::High}, {"eye", Vertical::Eye}, {"low", Vertical::Low},
}};

constexpr std::array<std::pair<std::string_view, Screen>, 3> kScreens{{
    {"screenleft", Screen::Left}, {"screencenter", Screen::Center}, {"screenright", Screen::Right},
}};

// Camera movement verbs of full PSL; recognised only to reject them clearly.
constexpr std::array<std::string_view, 12> kMovementVerbs{
    "pan", "tilt", "dolly", "crane", "track", "tracking", "zoom", "follow", "truck", "pedestal", "boom", "arc",
};

constexpr std::array<std::string_view, 5> kConnectives{"on", "and", "in", "at", "s"};

template <typename Table>
auto lookup(const Table& table, std::string_view key) -> std::optional<decltype(table[0].second)> {
    for (const auto& [name, value] : table) {
        if (name == key) return value;
    }
    return std::nullopt;
}

template <typename Table, typename V>
std::string_view reverse_lookup(const Table& table, V value) {
    for (const auto& [name, v] : table) {
        if (v == value) return name;
    }
    return "?";
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!is_alpha(s[0]) && s[0] != '_') return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return is_alpha(c) || is_digit(c) || c == '_' || c == '-'; });
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    ShotSentence run() {
        ShotSentence out;
        const Token& size_tok = next();
        if (size_tok.kind == TokenKind::End) fail(size_tok, "empty sentence: expected a shot size");
        auto size = size_tok.kind == TokenKind::Word ? lookup(kSizes, lower(size_tok.text)) : std::nullopt;
        if (!size) fail(size_tok, "unknown shot size '" + size_tok.text + "'");
        out.size = *size;

        expect_word("on");
        out.subjects.push_back(subject());
        if (peek_word("and")) {
            next();
            out.subjects.push_back(subject());
            if (out.subjects[0].actor_id == out.subjects[1].actor_id) {
                fail(tokens_[pos_ - 1], "the same actor cannot be named twice");
            }
            if (peek_word("and")) fail(peek(), "at most two subjects per shot");
        }
        if (peek_word("in")) {
            next();
            const Token& num = number("duration");
            expect_word("s");
            out.duration = num.number;
        } else if (peek_word("at")) {
            next();
            const Token& num = number("speed");
            expect_word("m/s");
            out.speed = num.number;
        }
        if (peek_word("in") || peek_word("at")) {
            fail(peek(), "duration and speed cannot both be given");
        }
        if (peek().kind != TokenKind::End) fail(peek(), "unexpected trailing '" + peek().text + "'");
        return out;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() {
        const Token& t = tokens_[pos_];
        if (t.kind != TokenKind::End) ++pos_;
        return t;
    }
    bool peek_word(std::string_view w) const {
        return peek().kind == TokenKind::Word && lower(peek().text) == w;
    }

    [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw ParseError(msg, t.offset, t.index); }

    void expect_word(std::string_view w) {
        const Token& t = next();
        if (t.kind != TokenKind::Word || lower(t.text) != w) {
            fail(t, "expected '" + std::string(w) + "'" + (t.kind == TokenKind::End ? " before end of sentence" : " but found '" + t.text + "'"));
        }
    }

    const Token& number(const char* what) {
        const Token& t = next();
        if (t.kind != TokenKind::Number) fail(t, std::string("expected a number for the ") + what);
        if (!std::isfinite(t.number) || t.number <= 0.0) fail(t, std::string(what) + " must be a positive number");
        return t;
    }

    SubjectClause subject() {
        SubjectClause clause;
        const Token& id = next();
        if (id.kind == TokenKind::End) fail(id, "expected an actor id before end of sentence");
        if (id.kind != TokenKind::Word || !is_identifier(id.text) || is_reserved_word(lower(id.text))) {
            fail(id, "expected an actor id but found '" + id.text + "'");
        }
        clause.actor_id = id.text;

        while (peek().kind == TokenKind::Word && !peek_word("and") && !peek_word("in") && !peek_word("at")) {
            const Token& t = next();
            const std::string key = lower(t.text);
            if (auto p = lookup(kProfiles, key)) {
                if (clause.profile) fail(t, "duplicate profile angle for " + clause.actor_id);
                clause.profile = *p;
            } else if (auto v = lookup(kVerticals, key)) {
                if (clause.vertical) fail(t, "duplicate vertical angle for " + clause.actor_id);
                clause.vertical = *v;
            } else if (auto s = lookup(kScreens, key)) {
                if (clause.screen) fail(t, "duplicate screen position for " + clause.actor_id);
                clause.screen = *s;
            } else if (std::find(kMovementVerbs.begin(), kMovementVerbs.end(), key) != kMovementVerbs.end()) {
                fail(t, "unsupported PSL feature: camera movement '" + t.text + "'");
            } else {
                fail(t, "unknown keyword '" + t.text + "'");
            }
        }
        if (peek().kind == TokenKind::Number) fail(peek(), "unexpected number '" + peek().text + "'");
        return clause;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t offset, std::size_t token_index)
    : std::runtime_error("position " + std::to_string(offset) + " (token " + std::to_string(token_index) + "): " + message),
      detail_(message),
      offset_(offset),
      token_index_(token_index) {}

ShotSentence parse(std::string_view text) {
    Parser parser(Lexer(text).run());
    return parser.run();
}

std::string format(const ShotSentence& sentence) {
    std::string out(to_string(sentence.size));
    out += " on";
    for (std::size_t i = 0; i < sentence.subjects.size(); ++i) {
        const auto& s = sentence.subjects[i];
        if (i > 0) out += " and";
        out += ' ';
        out += s.actor_id;
        if (s.profile) (out += ' ') += to_string(*s.profile);
        if (s.vertical) (out += ' ') += to_string(*s.vertical);
        if (s.screen) (out += ' ') += to_string(*s.screen);
    }
    if (sentence.duration) out += " in " + format_number(*sentence.duration) + "s";
    if (sentence.speed) out += " at " + format_number(*sentence.speed) + "m/s";
    return out;
}

std::string_view to_string(ShotSize s) {
    switch (s) {
        case ShotSize::CU: return "CU";
        case ShotSize::MCU: return "MCU";
        case ShotSize::MS: return "MS";
        case ShotSize::MLS: return "MLS";
        case ShotSize::FS: return "FS";
        case ShotSize::LS: return "LS";
    }
    return "?";
}

std::string_view to_string(Profile p) { return reverse_lookup(kProfiles, p); }
std::string_view to_string(Vertical v) { return reverse_lookup(kVerticals, v); }
std::string_view to_string(Screen s) { return reverse_lookup(kScreens, s); }

bool is_reserved_word(std::string_view word) {
    const std::string w = lower(word);
    return lookup(kSizes, w) || lookup(kProfiles, w) || lookup(kVerticals, w) || lookup(kScreens, w) ||
           std::find(kConnectives.begin(), kConnectives.end(), w) != kConnectives.end() ||
           std::find(kMovementVerbs.begin(), kMovementVerbs.end(), w) != kMovementVerbs.end();
}

}  // namespace dronecine::psl
