#include "bridge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bridge/error.hpp"

namespace bridge {

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open file: " + path);
    }
    return in;
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write file: " + path);
    }
    return out;
}

nlohmann::json parse_record(const std::string& line, const std::string& path, std::size_t lineno) {
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
        throw Error(ErrorKind::data,
                    path + ": malformed JSON record at line " + std::to_string(lineno));
    }
    return record;
}

std::string require_string(const nlohmann::json& record, const char* key, const std::string& path,
                           std::size_t lineno) {
    auto it = record.find(key);
    if (it == record.end() || !it->is_string()) {
        throw Error(ErrorKind::data, path + ": line " + std::to_string(lineno) +
                                         ": missing or non-string field \"" + key + "\"");
    }
    return it->get<std::string>();
}

nlohmann::json collect_extra(const nlohmann::json& record,
                             std::initializer_list<const char*> known) {
    nlohmann::json extra = nlohmann::json::object();
    for (auto it = record.begin(); it != record.end(); ++it) {
        bool is_known = false;
        for (const char* k : known) {
            if (it.key() == k) {
                is_known = true;
                break;
            }
        }
        if (!is_known) extra[it.key()] = it.value();
    }
    return extra;
}

}  // namespace

void Corpus::add(Document doc) {
    if (doc.doc_id.empty()) {
        throw Error(ErrorKind::data, "document with empty doc_id");
    }
    if (is_blank(doc.text)) {
        throw Error(ErrorKind::data, "document \"" + doc.doc_id + "\" has empty text");
    }
    if (by_id_.count(doc.doc_id)) {
        throw Error(ErrorKind::data, "duplicate doc_id \"" + doc.doc_id + "\"");
    }
    by_id_.emplace(doc.doc_id, docs_.size());
    docs_.push_back(std::move(doc));
}

const Document* Corpus::find(std::string_view doc_id) const {
    auto it = by_id_.find(doc_id);
    return it == by_id_.end() ? nullptr : &docs_[it->second];
}

std::ptrdiff_t Corpus::index_of(std::string_view doc_id) const {
    auto it = by_id_.find(doc_id);
    return it == by_id_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in = open_for_read(path);
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json record = parse_record(line, path, lineno);
        Document doc;
        doc.doc_id = require_string(record, "doc_id", path, lineno);
        doc.domain = record.value("domain", std::string{});
        doc.text = require_string(record, "text", path, lineno);
        doc.extra = collect_extra(record, {"doc_id", "domain", "text"});
        try {
            corpus.add(std::move(doc));
        } catch (const Error& e) {
            throw Error(e.kind(),
                        path + ": line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out = open_for_write(path);
    for (const Document& doc : corpus.docs()) {
        nlohmann::json record = doc.extra;
        record["doc_id"] = doc.doc_id;
        record["domain"] = doc.domain;
        record["text"] = doc.text;
        out << record.dump() << "\n";
    }
}

std::vector<MultimodalQuery> load_queries(const std::string& path) {
    std::ifstream in = open_for_read(path);
    std::vector<MultimodalQuery> queries;
    std::map<std::string, std::size_t> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json record = parse_record(line, path, lineno);
        MultimodalQuery q;
        q.query_id = require_string(record, "query_id", path, lineno);
        if (!seen.emplace(q.query_id, lineno).second) {
            throw Error(ErrorKind::data, path + ": duplicate query_id \"" + q.query_id +
                                             "\", line " + std::to_string(lineno));
        }
        q.domain = record.value("domain", std::string{});
        auto question = record.find("question");
        if (question == record.end() || !question->is_string() ||
            is_blank(question->get<std::string>())) {
            throw Error(ErrorKind::data, path + ": query \"" + q.query_id +
                                             "\" is missing question text (line " +
                                             std::to_string(lineno) + ")");
        }
        q.question_text = question->get<std::string>();
        if (auto images = record.find("images"); images != record.end()) {
            if (!images->is_array()) {
                throw Error(ErrorKind::data, path + ": query \"" + q.query_id +
                                                 "\": \"images\" must be an array");
            }
            for (const auto& ref : *images) q.image_refs.push_back(ref.get<std::string>());
        }
        if (auto caption = record.find("caption");
            caption != record.end() && caption->is_string() &&
            !caption->get<std::string>().empty()) {
            if (q.image_refs.empty()) {
                throw Error(ErrorKind::data, path + ": query \"" + q.query_id +
                                                 "\" has a caption but no images");
            }
            q.cached_caption = caption->get<std::string>();
        }
        q.extra = collect_extra(record, {"query_id", "domain", "question", "images", "caption"});
        queries.push_back(std::move(q));
    }
    return queries;
}

void save_queries(const std::vector<MultimodalQuery>& queries, const std::string& path) {
    std::ofstream out = open_for_write(path);
    for (const MultimodalQuery& q : queries) {
        nlohmann::json record = q.extra;
        record["query_id"] = q.query_id;
        record["domain"] = q.domain;
        record["question"] = q.question_text;
        record["images"] = q.image_refs;
        if (q.cached_caption) record["caption"] = *q.cached_caption;
        out << record.dump() << "\n";
    }
}

void RelevanceJudgments::set(const std::string& query_id, std::vector<Judgment> judgments) {
    std::sort(judgments.begin(), judgments.end(),
              [](const Judgment& a, const Judgment& b) { return a.doc_id < b.doc_id; });
    entries_[query_id] = std::move(judgments);
}

bool RelevanceJudgments::has_query(std::string_view query_id) const {
    return entries_.find(query_id) != entries_.end();
}

const std::vector<Judgment>& RelevanceJudgments::judgments(std::string_view query_id) const {
    static const std::vector<Judgment> kEmpty;
    auto it = entries_.find(query_id);
    return it == entries_.end() ? kEmpty : it->second;
}

std::vector<std::string> RelevanceJudgments::positives(std::string_view query_id) const {
    std::vector<std::string> out;
    for (const Judgment& j : judgments(query_id)) {
        if (j.gain > 0) out.push_back(j.doc_id);
    }
    return out;
}

int RelevanceJudgments::gain(std::string_view query_id, std::string_view doc_id) const {
    for (const Judgment& j : judgments(query_id)) {
        if (j.doc_id == doc_id) return j.gain;
    }
    return 0;
}

std::optional<std::string> RelevanceJudgments::primary_positive(std::string_view query_id) const {
    const Judgment* best = nullptr;
    for (const Judgment& j : judgments(query_id)) {
        if (j.gain <= 0) continue;
        if (!best || j.gain > best->gain) best = &j;  // doc_id-sorted, so ties keep the lowest id
    }
    if (!best) return std::nullopt;
    return best->doc_id;
}

RelevanceJudgments load_qrels(const std::string& path, const Corpus* corpus) {
    std::ifstream in = open_for_read(path);
    RelevanceJudgments qrels;
    std::map<std::string, std::vector<Judgment>> staged;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            std::size_t tab = line.find('\t', pos);
            fields.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        if (fields.size() != 3) {
            throw Error(ErrorKind::data, path + ": line " + std::to_string(lineno) +
                                             ": expected query_id<TAB>doc_id<TAB>gain");
        }
        int gain = 0;
        try {
            std::size_t consumed = 0;
            gain = std::stoi(fields[2], &consumed);
            if (consumed != fields[2].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw Error(ErrorKind::data, path + ": line " + std::to_string(lineno) +
                                             ": gain is not an integer: \"" + fields[2] + "\"");
        }
        if (gain < 0) {
            throw Error(ErrorKind::data,
                        path + ": line " + std::to_string(lineno) + ": negative gain");
        }
        if (corpus && !corpus->contains(fields[1])) {
            throw Error(ErrorKind::data, path + ": line " + std::to_string(lineno) +
                                             ": unknown doc_id \"" + fields[1] + "\"");
        }
        staged[fields[0]].push_back(Judgment{fields[1], gain});
    }
    for (auto& [query_id, judgments] : staged) {
        bool has_positive =
            std::any_of(judgments.begin(), judgments.end(), [](const Judgment& j) { return j.gain > 0; });
        if (!has_positive) {
            std::cerr << "warning: query \"" << query_id
                      << "\" has no positive judgment; excluded from metrics\n";
            qrels.excluded_.push_back(query_id);
            continue;
        }
        qrels.set(query_id, std::move(judgments));
    }
    return qrels;
}

void save_qrels(const RelevanceJudgments& qrels, const std::string& path) {
    std::ofstream out = open_for_write(path);
    for (const auto& [query_id, judgments] : qrels.entries()) {
        for (const Judgment& j : judgments) {
            out << query_id << "\t" << j.doc_id << "\t" << j.gain << "\n";
        }
    }
}

}  // namespace bridge
