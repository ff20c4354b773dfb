#pragma once
// Word-per-line lexicons with optional tab-separated signed strengths.

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace engram {

class Lexicon {
public:
    Lexicon() = default;

    /// Parses "word[\tstrength]" lines; '#' starts a comment line.
    static Lexicon parse(std::string_view text, double default_strength);
    static Lexicon load(const std::string& path, double default_strength);

    /// Signed strength of a token, if listed.
    [[nodiscard]] std::optional<double> lookup(const std::string& token) const;
    /// Largest |strength| among the tokens, with the sign of that entry; 0 on no hit.
    [[nodiscard]] double strongest(const std::vector<std::string>& tokens) const;
    [[nodiscard]] bool any(const std::vector<std::string>& tokens) const;
    [[nodiscard]] std::size_t size() const { return entries_.size(); }

private:
    std::unordered_map<std::string, double> entries_;
};

const char* bundled_affect_lexicon();
const char* bundled_urgency_lexicon();
const char* bundled_override_lexicon();

}  // namespace engram
