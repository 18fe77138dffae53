#include "bridge/text.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "bridge/corpus.hpp"
#include "bridge/error.hpp"
#include "bridge/rng.hpp"

namespace bridge {

std::string TokenizedText::joined() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::uint64_t TokenizerConfig::config_hash() const {
    std::uint64_t h = fnv1a64("tokenizer-v1");
    for (const auto& w : stopwords) {
        h = hash_combine(h, fnv1a64(w));
    }
    return h;
}

TokenizerConfig load_stopword_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open stopword file: " + path);
    }
    TokenizerConfig config;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (!line.empty()) config.stopwords.insert(line);
    }
    return config;
}

namespace {

// Word character test over decoded codepoints. ASCII uses isalnum; above
// ASCII, common space/punctuation blocks separate and the rest joins.
bool is_word_codepoint(char32_t cp) {
    if (cp < 0x80) {
        return std::isalnum(static_cast<int>(cp)) != 0;
    }
    if (cp == 0xA0 || cp == 0x1680) return false;               // non-breaking / ogham space
    if (cp >= 0xA1 && cp <= 0xBF && cp != 0xAA && cp != 0xBA) return false;  // latin-1 punct
    if (cp >= 0x2000 && cp <= 0x206F) return false;             // general punctuation
    if (cp >= 0x2E00 && cp <= 0x2E7F) return false;             // supplemental punctuation
    if (cp >= 0x3000 && cp <= 0x303F) return false;             // CJK symbols and punctuation
    if (cp >= 0xFE10 && cp <= 0xFE6F) return false;             // vertical/small form punct
    if (cp >= 0xFF01 && cp <= 0xFF0F) return false;             // fullwidth punct runs
    if (cp >= 0xFF1A && cp <= 0xFF20) return false;
    if (cp >= 0xFF3B && cp <= 0xFF40) return false;
    if (cp >= 0xFF5B && cp <= 0xFF65) return false;
    return true;
}

// Decodes one UTF-8 codepoint at byte offset i; advances i past it.
// Malformed bytes decode as a single-byte separator.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return U'';  // malformed: treat as control (separator)
    }
    if (i + len > s.size()) {
        ++i;
        return U'';
    }
    for (std::size_t k = 1; k < len; ++k) {
        unsigned char bk = byte(i + k);
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return U'';
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    i += len;
    return cp;
}

}  // namespace

TokenizedText tokenize(std::string_view text) {
    static const TokenizerConfig kDefault{};
    return tokenize(text, kDefault);
}

TokenizedText tokenize(std::string_view text, const TokenizerConfig& config) {
    TokenizedText out;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t start = i;
        char32_t cp = decode_utf8(text, i);
        if (!is_word_codepoint(cp)) continue;

        std::string token;
        auto append_folded = [&](std::size_t from, std::size_t to) {
            for (std::size_t k = from; k < to; ++k) {
                char c = text[k];
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
                token += c;
            }
        };
        append_folded(start, i);
        std::size_t end = i;
        while (i < text.size()) {
            std::size_t next = i;
            char32_t cp2 = decode_utf8(text, next);
            if (!is_word_codepoint(cp2)) break;
            append_folded(i, next);
            i = next;
            end = next;
        }
        if (config.stopwords.empty() || !config.stopwords.count(token)) {
            out.tokens.push_back(std::move(token));
            out.source_spans.emplace_back(start, end);
        }
    }
    return out;
}

double idf_from_df(std::uint64_t doc_frequency, std::uint64_t total_docs) {
    const double n = static_cast<double>(total_docs);
    const double df = static_cast<double>(doc_frequency);
    return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

const Vocabulary::Entry* Vocabulary::find(std::string_view term) const {
    auto it = terms_.find(term);
    return it == terms_.end() ? nullptr : &it->second;
}

double Vocabulary::idf(std::string_view term) const {
    const Entry* e = find(term);
    return idf_from_df(e ? e->doc_frequency : 0, total_docs_);
}

Vocabulary Vocabulary::from_parts(
    const std::vector<std::tuple<std::string, std::uint32_t, std::uint32_t>>& terms,
    std::uint64_t total_docs, TokenizerConfig config) {
    Vocabulary vocab;
    vocab.total_docs_ = total_docs;
    vocab.tokenizer_config_ = std::move(config);
    for (const auto& [term, term_id, df] : terms) {
        vocab.terms_[term] = Entry{term_id, df};
    }
    return vocab;
}

Vocabulary build_vocabulary(const Corpus& corpus, const TokenizerConfig& config) {
    Vocabulary vocab;
    vocab.tokenizer_config_ = config;
    vocab.total_docs_ = corpus.size();
    std::uint32_t next_id = 0;
    std::unordered_set<std::string> seen_in_doc;
    for (const Document& doc : corpus.docs()) {
        seen_in_doc.clear();
        TokenizedText toks = tokenize(doc.text, config);
        for (std::string& t : toks.tokens) {
            if (!seen_in_doc.insert(t).second) continue;  // df counts distinct docs
            auto [it, inserted] = vocab.terms_.try_emplace(std::move(t));
            if (inserted) it->second.term_id = next_id++;
            it->second.doc_frequency += 1;
        }
    }
    return vocab;
}

}  // namespace bridge
