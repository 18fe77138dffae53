#include "bridge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "bridge/error.hpp"

namespace bridge {

namespace {

const std::vector<Judgment>& judged_or_throw(const RankedList& ranked,
                                             const RelevanceJudgments& qrels) {
    if (!qrels.has_query(ranked.query_id)) {
        throw Error(ErrorKind::data,
                    "metrics: query \"" + ranked.query_id + "\" absent from qrels");
    }
    return qrels.judgments(ranked.query_id);
}

double discount(std::size_t rank_1based) {
    return 1.0 / std::log2(static_cast<double>(rank_1based) + 1.0);
}

}  // namespace

double dcg_at_k(const RankedList& ranked, const RelevanceJudgments& qrels, int k) {
    if (k < 1) throw Error(ErrorKind::usage, "metrics: k must be >= 1");
    judged_or_throw(ranked, qrels);
    double dcg = 0.0;
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.items.size());
    for (std::size_t i = 0; i < top; ++i) {
        const int gain = qrels.gain(ranked.query_id, ranked.items[i].doc_id);
        if (gain > 0) dcg += static_cast<double>(gain) * discount(i + 1);
    }
    return dcg;
}

double ndcg_at_k(const RankedList& ranked, const RelevanceJudgments& qrels, int k) {
    if (k < 1) throw Error(ErrorKind::usage, "metrics: k must be >= 1");
    const auto& judged = judged_or_throw(ranked, qrels);

    std::vector<int> gains;
    for (const Judgment& j : judged) {
        if (j.gain > 0) gains.push_back(j.gain);
    }
    if (gains.empty()) {
        throw Error(ErrorKind::data, "metrics: query \"" + ranked.query_id +
                                         "\" has no positive judgment");
    }
    std::sort(gains.begin(), gains.end(), std::greater<int>());
    double ideal = 0.0;
    const std::size_t ideal_top = std::min<std::size_t>(static_cast<std::size_t>(k), gains.size());
    for (std::size_t i = 0; i < ideal_top; ++i) {
        ideal += static_cast<double>(gains[i]) * discount(i + 1);
    }
    return dcg_at_k(ranked, qrels, k) / ideal;
}

double recall_at_k(const RankedList& ranked, const RelevanceJudgments& qrels, int k) {
    if (k < 1) throw Error(ErrorKind::usage, "metrics: k must be >= 1");
    judged_or_throw(ranked, qrels);
    std::vector<std::string> positives = qrels.positives(ranked.query_id);
    if (positives.empty()) {
        throw Error(ErrorKind::data, "metrics: query \"" + ranked.query_id +
                                         "\" has no positive judgment");
    }
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.items.size());
    std::size_t found = 0;
    for (std::size_t i = 0; i < top; ++i) {
        if (std::binary_search(positives.begin(), positives.end(), ranked.items[i].doc_id)) {
            ++found;
        }
    }
    return static_cast<double>(found) / static_cast<double>(positives.size());
}

MetricReport aggregate(const std::string& metric_name, int k,
                       const std::map<std::string, double>& per_query_values,
                       const std::vector<MultimodalQuery>& queries) {
    if (per_query_values.empty()) {
        throw Error(ErrorKind::data, "metrics: cannot aggregate an empty value set");
    }
    MetricReport report;
    report.metric_name = metric_name;
    report.k = k;
    report.per_query = per_query_values;

    std::map<std::string, std::string> domain_of;
    for (const MultimodalQuery& q : queries) domain_of[q.query_id] = q.domain;

    std::map<std::string, std::pair<double, std::size_t>> domain_sums;
    double total = 0.0;
    for (const auto& [query_id, value] : per_query_values) {
        total += value;
        auto it = domain_of.find(query_id);
        const std::string domain = it == domain_of.end() ? std::string("unknown") : it->second;
        auto& [sum, count] = domain_sums[domain];
        sum += value;
        count += 1;
    }
    report.overall_mean = total / static_cast<double>(per_query_values.size());

    double domain_total = 0.0;
    for (const auto& [domain, sum_count] : domain_sums) {
        const double mean = sum_count.first / static_cast<double>(sum_count.second);
        report.per_domain[domain] = mean;
        domain_total += mean;
    }
    report.macro_domain_mean = domain_total / static_cast<double>(domain_sums.size());
    return report;
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j;
    j["metric"] = metric_name;
    j["k"] = k;
    j["per_query"] = per_query;
    j["per_domain"] = per_domain;
    j["overall_mean"] = overall_mean;
    j["macro_domain_mean"] = macro_domain_mean;
    return j;
}

std::string render_metric_table(const std::string& row_header,
                                const std::vector<std::string>& row_labels,
                                const std::vector<std::string>& column_labels,
                                const std::vector<std::vector<double>>& columns) {
    std::size_t label_width = row_header.size();
    for (const auto& label : row_labels) label_width = std::max(label_width, label.size());

    std::vector<std::size_t> widths;
    for (const auto& name : column_labels) widths.push_back(std::max<std::size_t>(name.size(), 8));

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(label_width + 2)) << row_header;
    for (std::size_t c = 0; c < column_labels.size(); ++c) {
        out << std::right << std::setw(static_cast<int>(widths[c] + 2)) << column_labels[c];
    }
    out << "\n";
    out << std::string(label_width + 2, '-');
    for (std::size_t c = 0; c < column_labels.size(); ++c) {
        out << "  " << std::string(widths[c], '-');
    }
    out << "\n";
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
        out << std::left << std::setw(static_cast<int>(label_width + 2)) << row_labels[r];
        for (std::size_t c = 0; c < columns.size(); ++c) {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(4) << columns[c].at(r);
            out << std::right << std::setw(static_cast<int>(widths[c] + 2)) << cell.str();
        }
        out << "\n";
    }
    return out.str();
}

std::string render_metric_table(const std::vector<std::string>& system_names,
                                const std::vector<MetricReport>& reports) {
    // Row set = union of domains, sorted; bottom rows carry both averages.
    std::vector<std::string> domains;
    for (const auto& report : reports) {
        for (const auto& [domain, value] : report.per_domain) {
            if (std::find(domains.begin(), domains.end(), domain) == domains.end()) {
                domains.push_back(domain);
            }
        }
    }
    std::sort(domains.begin(), domains.end());

    std::vector<std::string> rows = domains;
    rows.push_back("Average (macro)");
    rows.push_back("Average (micro)");

    std::vector<std::vector<double>> columns;
    for (const auto& report : reports) {
        std::vector<double> col;
        for (const auto& domain : domains) {
            auto it = report.per_domain.find(domain);
            col.push_back(it == report.per_domain.end() ? 0.0 : it->second);
        }
        col.push_back(report.macro_domain_mean);
        col.push_back(report.overall_mean);
        columns.push_back(std::move(col));
    }
    return render_metric_table("domain", rows, system_names, columns);
}

}  // namespace bridge
