// Prose Storyboard Language subset: one sentence describes one shot.
//
//   sentence := SIZE "on" subject ("and" subject)? tail?
//   subject  := ID modifier*
//   modifier := PROFILE | VERTICAL | SCREEN
//   tail     := "in" NUMBER "s" | "at" NUMBER "m/s"
//
// Keywords are case-insensitive, actor ids are case-sensitive.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dronecine::psl {

enum class ShotSize { CU, MCU, MS, MLS, FS, LS };

enum class Profile { Front, ThreeQuarterLeft, Left, ThreeQuarterBackLeft, Back, ThreeQuarterBackRight, Right, ThreeQuarterRight };

enum class Vertical { High, Eye, Low };

enum class Screen { Left, Center, Right };

struct SubjectClause {
    std::string actor_id;
    std::optional<Profile> profile;
    std::optional<Vertical> vertical;
    std::optional<Screen> screen;

    bool operator==(const SubjectClause&) const = default;
};

struct ShotSentence {
    ShotSize size = ShotSize::MS;
    std::vector<SubjectClause> subjects;  // 1 or 2
    std::optional<double> duration;       // s
    std::optional<double> speed;          // m/s

    bool operator==(const ShotSentence&) const = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t offset, std::size_t token_index);

    /// Byte offset of the offending token in the source text.
    std::size_t offset() const { return offset_; }
    std::size_t token_index() const { return token_index_; }
    /// Message without the position prefix.
    const std::string& detail() const { return detail_; }

private:
    std::string detail_;
    std::size_t offset_;
    std::size_t token_index_;
};

/// Parses one sentence. Throws ParseError with the token position on failure.
ShotSentence parse(std::string_view text);

/// Canonical form: upper-case size, lower-case keywords, modifiers in
/// profile/vertical/screen order. parse(format(s)) == s.
std::string format(const ShotSentence& sentence);

std::string_view to_string(ShotSize s);
std::string_view to_string(Profile p);
std::string_view to_string(Vertical v);
std::string_view to_string(Screen s);

/// True for words the grammar reserves (sizes, modifiers, connectives).
bool is_reserved_word(std::string_view word);

}  // namespace dronecine::psl
