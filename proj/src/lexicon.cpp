#include "engram/lexicon.hpp"

#include "engram/core.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace engram {

Lexicon Lexicon::parse(std::string_view text, double default_strength) {
    Lexicon lex;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::string word = line;
        double strength = default_strength;
        if (const auto tab = line.find('\t'); tab != std::string::npos) {
            word = line.substr(0, tab);
            try {
                strength = std::stod(line.substr(tab + 1));
            } catch (const std::exception&) {
                throw ParseError("lexicon line " + std::to_string(lineno) + ": bad strength");
            }
        }
        if (std::abs(strength) > 1.0) throw ParseError("lexicon line " + std::to_string(lineno) + ": strength outside [-1,1]");
        const auto tokens = tokenize(word);
        if (tokens.size() != 1) throw ParseError("lexicon line " + std::to_string(lineno) + ": expected one word");
        lex.entries_[tokens.front()] = strength;
    }
    return lex;
}

Lexicon Lexicon::load(const std::string& path, double default_strength) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open lexicon " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), default_strength);
}

std::optional<double> Lexicon::lookup(const std::string& token) const {
    if (auto it = entries_.find(token); it != entries_.end()) return it->second;
    return std::nullopt;
}

double Lexicon::strongest(const std::vector<std::string>& tokens) const {
    double best = 0.0;
    for (const auto& t : tokens) {
        if (auto s = lookup(t); s && std::abs(*s) > std::abs(best)) best = *s;
    }
    return best;
}

bool Lexicon::any(const std::vector<std::string>& tokens) const {
    for (const auto& t : tokens) {
        if (entries_.contains(t)) return true;
    }
    return false;
}

}  // namespace engram
