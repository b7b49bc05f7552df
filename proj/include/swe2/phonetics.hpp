#pragma once

#include <map>
#include <string>
#include <vector>

namespace swe2 {

// ARPAbet symbols with stress digits stripped (39-symbol inventory).
using PhonemeSeq = std::vector<std::string>;

struct PronDict {
    std::map<std::string, PhonemeSeq> entries;
};

// Greedy longest-match grapheme-chunk -> phoneme table for words missing
// from the dictionary. Chunks are tried longest-first at each position.
class ChunkTable {
public:
    static ChunkTable load(const std::string& path);

    void add(const std::string& chunk, const PhonemeSeq& phonemes);

    // Deterministic and total over words containing at least one mappable
    // character (after leet normalization). Throws UnmappableInput otherwise.
    PhonemeSeq transcribe(const std::string& word) const;

private:
    std::map<std::string, PhonemeSeq> chunks_;
    std::size_t max_chunk_ = 0;
};

// CMU-format dictionary: `WORD  PH0 PH1 ...`, variants `WORD(1)` discarded,
// comment lines starting ";;;" skipped, stress digits removed.
PronDict load_pron_dict(const std::string& path);

// Maps leet characters to their letter reading (1->i, 0->o, 3->e, @->a, $->s)
// and lower-cases; characters with no mapping and no letter value drop out.
std::string leet_normalize(const std::string& word);

PhonemeSeq g2p_fallback(const std::string& word, const ChunkTable& table);

PhonemeSeq to_phonemes(const std::string& word, const PronDict& dict, const ChunkTable& table);

}  // namespace swe2
