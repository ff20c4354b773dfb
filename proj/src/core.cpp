#include "engram/core.hpp"

#include <cctype>
#include <cstdio>

namespace engram {

double SalienceTag::channel(std::size_t i) const {
    switch (i) {
        case 0: return thematic;
        case 1: return emotional;
        case 2: return urgency;
        case 3: return novelty;
        case 4: return trust;
        case 5: return goal;
        default: throw std::out_of_range("salience channel index");
    }
}

double& SalienceTag::channel(std::size_t i) {
    switch (i) {
        case 0: return thematic;
        case 1: return emotional;
        case 2: return urgency;
        case 3: return novelty;
        case 4: return trust;
        case 5: return goal;
        default: throw std::out_of_range("salience channel index");
    }
}

std::string fact_label(const std::string& attribute, const std::string& value) {
    return std::string(kFactLabelPrefix) + attribute + "=" + value;
}

std::optional<std::pair<std::string, std::string>> parse_fact_label(const std::string& label) {
    const std::string prefix = kFactLabelPrefix;
    if (label.rfind(prefix, 0) != 0) return std::nullopt;
    const auto eq = label.find('=', prefix.size());
    if (eq == std::string::npos) return std::nullopt;
    return std::make_pair(label.substr(prefix.size(), eq - prefix.size()), label.substr(eq + 1));
}

std::optional<std::string> ValenceVector::believed(const std::string& attribute) const {
    for (const auto& label : contextual) {
        if (auto parsed = parse_fact_label(label); parsed && parsed->first == attribute) {
            return parsed->second;
        }
    }
    return std::nullopt;
}

void normalize_associations(std::vector<Association>& assoc, std::size_t k_assoc) {
    std::sort(assoc.begin(), assoc.end(), [](const Association& a, const Association& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.target < b.target;
    });
    if (assoc.size() > k_assoc) assoc.resize(k_assoc);
}

void validate(const ValenceVector& gist, std::size_t k_assoc) {
    if (gist.emotional.valence < -1.0 || gist.emotional.valence > 1.0)
        throw ValidationError("gist emotional valence outside [-1,1]");
    if (!in_unit(gist.emotional.arousal)) throw ValidationError("gist arousal outside [0,1]");
    if (!in_unit(gist.density)) throw ValidationError("gist density outside [0,1]");
    if (!in_unit(gist.precision)) throw ValidationError("gist precision outside [0,1]");
    if (gist.associative.size() > k_assoc) throw ValidationError("associative component exceeds K_assoc");
    for (std::size_t i = 0; i < gist.associative.size(); ++i) {
        const double w = gist.associative[i].weight;
        if (!(w > 0.0 && w <= 1.0)) throw ValidationError("associative weight outside (0,1]");
        if (i > 0 && gist.associative[i - 1].weight < w)
            throw ValidationError("associative component not sorted by weight");
    }
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '_' || c == '\'') {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string content_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace engram
