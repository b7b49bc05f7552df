#include "swe2/phonetics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "swe2/errors.hpp"

namespace swe2 {

namespace {

std::string strip_stress(const std::string& symbol) {
    std::string s = symbol;
    while (!s.empty() && std::isdigit(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

}  // namespace

PronDict load_pron_dict(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pronouncing dictionary: " + path);
    PronDict dict;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind(";;;", 0) == 0) continue;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word.empty()) continue;
        PhonemeSeq phonemes;
        std::string sym;
        while (ls >> sym) phonemes.push_back(strip_stress(sym));
        if (phonemes.empty()) throw ParseError("entry without phonemes: " + word, lineno);
        // Variant entries look like WORD(1); first pronunciation wins.
        auto paren = word.find('(');
        if (paren != std::string::npos) continue;
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        dict.entries.emplace(std::move(word), std::move(phonemes));
    }
    return dict;
}

std::string leet_normalize(const std::string& word) {
    std::string out;
    out.reserve(word.size());
    for (char c : word) {
        switch (c) {
            case '1': out.push_back('i'); break;
            case '0': out.push_back('o'); break;
            case '3': out.push_back('e'); break;
            case '@': out.push_back('a'); break;
            case '$': out.push_back('s'); break;
            default: {
                // Remaining digits pass through; the chunk table reads them out.
                unsigned char u = static_cast<unsigned char>(c);
                if (u < 0x80 && std::isalnum(u)) out.push_back(static_cast<char>(std::tolower(u)));
                break;
            }
        }
    }
    return out;
}

ChunkTable ChunkTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open chunk table: " + path);
    ChunkTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) throw ParseError("expected chunk<TAB>phonemes", lineno);
        std::string chunk = line.substr(0, tab);
        PhonemeSeq phonemes;
        std::string rest = line.substr(tab + 1);
        std::istringstream ps(rest);
        std::string sym;
        while (std::getline(ps, sym, ',')) {
            if (!sym.empty()) phonemes.push_back(sym);
        }
        if (phonemes.empty()) throw ParseError("chunk without phonemes: " + chunk, lineno);
        table.add(chunk, phonemes);
    }
    return table;
}

void ChunkTable::add(const std::string& chunk, const PhonemeSeq& phonemes) {
    chunks_[chunk] = phonemes;
    max_chunk_ = std::max(max_chunk_, chunk.size());
}

PhonemeSeq ChunkTable::transcribe(const std::string& word) const {
    PhonemeSeq out;
    std::size_t i = 0;
    while (i < word.size()) {
        std::size_t len = std::min(max_chunk_, word.size() - i);
        bool matched = false;
        for (; len >= 1; --len) {
            auto it = chunks_.find(word.substr(i, len));
            if (it != chunks_.end()) {
                out.insert(out.end(), it->second.begin(), it->second.end());
                i += len;
                matched = true;
                break;
            }
        }
        if (!matched) ++i;  // unmapped character, skip
    }
    return out;
}

PhonemeSeq g2p_fallback(const std::string& word, const ChunkTable& table) {
    if (word.empty()) throw UnmappableInput(word);
    std::string clean = leet_normalize(word);
    PhonemeSeq out = table.transcribe(clean);
    if (out.empty()) throw UnmappableInput(word);
    return out;
}

PhonemeSeq to_phonemes(const std::string& word, const PronDict& dict, const ChunkTable& table) {
    if (word.empty()) throw UnmappableInput(word);
    auto it = dict.entries.find(word);
    if (it != dict.entries.end()) return it->second;
    // Leet-normalized form may be a dictionary word ("tr@sh" -> "trash").
    std::string clean = leet_normalize(word);
    if (clean != word) {
        auto it2 = dict.entries.find(clean);
        if (it2 != dict.entries.end()) return it2->second;
    }
    return g2p_fallback(word, table);
}

}  // namespace swe2
