#pragma once

#include <map>
#include <string>
#include <vector>

#include "bridge/corpus.hpp"
#include "json.hpp"

namespace bridge {

// Per-query metric values with per-domain and overall aggregates. The
// overall mean is query-weighted (micro); macro_domain_mean averages the
// per-domain means, which is how per-domain result tables usually report
// their bottom row. Both are kept because the two can differ.
struct MetricReport {
    std::string metric_name;
    int k = 0;
    std::map<std::string, double> per_query;
    std::map<std::string, double> per_domain;
    double overall_mean = 0.0;
    double macro_domain_mean = 0.0;

    nlohmann::json to_json() const;
};

// Linear-gain DCG: sum of gain(doc at rank i) / log2(i + 1) over the top k,
// ranks 1-based. Identical to the exponential form for binary gains.
double dcg_at_k(const RankedList& ranked, const RelevanceJudgments& qrels, int k);

// dcg / ideal dcg, where the ideal ranking sorts judged docs by gain
// descending. Requires at least one positive judgment for the query.
double ndcg_at_k(const RankedList& ranked, const RelevanceJudgments& qrels, int k);

// Fraction of judged-positive documents present in the top k.
double recall_at_k(const RankedList& ranked, const RelevanceJudgments& qrels, int k);

// Builds aggregates from per-query values. Domains come from the query
// records; queries missing from `values` are ignored.
MetricReport aggregate(const std::string& metric_name, int k,
                       const std::map<std::string, double>& per_query_values,
                       const std::vector<MultimodalQuery>& queries);

// Aligned-column table: one row per label, one column per system, plus the
// macro/micro average rows at the bottom when provided.
std::string render_metric_table(const std::string& row_header,
                                const std::vector<std::string>& row_labels,
                                const std::vector<std::string>& column_labels,
                                const std::vector<std::vector<double>>& columns);

std::string render_metric_table(const std::vector<std::string>& system_names,
                                const std::vector<MetricReport>& reports);

}  // namespace bridge
