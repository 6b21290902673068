#include "dss/registry.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <stdexcept>
#include <tuple>

#include <fmt/core.h>

#include "dss/errors.hpp"

namespace dss::registry {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    return std::string(s.substr(b, e - b));
}

// Splits one CSV line. Quoted fields keep commas and turn doubled quotes
// into literal quotes; unquoted fields are trimmed. Multiline fields are
// not supported.
std::vector<std::string> split_csv(const std::string& line, int line_no) {
    std::vector<std::string> fields;
    std::size_t i = 0;
    const std::size_t n = line.size();
    while (true) {
        if (i < n && line[i] == '"') {
            std::string field;
            ++i;
            bool closed = false;
            while (i < n) {
                if (line[i] == '"') {
                    if (i + 1 < n && line[i + 1] == '"') {
                        field += '"';
                        i += 2;
                    } else {
                        ++i;
                        closed = true;
                        break;
                    }
                } else {
                    field += line[i++];
                }
            }
            if (!closed)
                throw ParseError(line_no, "unterminated quoted field");
            while (i < n && (line[i] == ' ' || line[i] == '\t')) ++i;
            if (i < n && line[i] != ',')
                throw ParseError(line_no, "content after a closing quote");
            fields.push_back(std::move(field));
        } else {
            const std::size_t comma = line.find(',', i);
            const std::size_t end = comma == std::string::npos ? n : comma;
            fields.push_back(trim(std::string_view(line).substr(i, end - i)));
            i = end;
        }
        if (i >= n) return fields;
        ++i;  // skip the comma
    }
}

struct ColumnMap {
    std::size_t species = 0;
    std::size_t depositor = 0;
    std::size_t accessions = 0;
    std::size_t country = 0;
    std::size_t width = 0;
};

ColumnMap read_header(const std::vector<std::string>& fields, int line_no) {
    ColumnMap map;
    map.width = fields.size();
    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (!seen.emplace(fields[i], i).second)
            throw ParseError(line_no, fmt::format("duplicate column '{}'", fields[i]));
    }
    const auto lookup = [&](const char* name) {
        const auto it = seen.find(name);
        if (it == seen.end())
            throw ParseError(line_no, fmt::format("missing column '{}'", name));
        const std::size_t index = it->second;
        seen.erase(it);
        return index;
    };
    map.species = lookup("species");
    map.depositor = lookup("depositor");
    map.accessions = lookup("accessions");
    map.country = lookup("country");
    if (!seen.empty())
        throw ParseError(line_no,
                         fmt::format("unexpected column '{}'", seen.begin()->first));
    return map;
}

}  // namespace

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

IngestResult ingest(std::istream& in) {
    IngestResult result;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    ColumnMap columns;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (!have_header) {
            columns = read_header(split_csv(line, line_no), line_no);
            have_header = true;
            continue;
        }
        std::vector<std::string> fields;
        try {
            fields = split_csv(line, line_no);
        } catch (const ParseError& e) {
            result.issues.push_back({line_no, e.what()});
            continue;
        }
        if (fields.size() != columns.width) {
            result.issues.push_back(
                {line_no, fmt::format("expected {} fields, got {}", columns.width,
                                      fields.size())});
            continue;
        }
        AccessionRecord rec;
        rec.species = fields[columns.species];
        rec.depositor = fields[columns.depositor];
        rec.country = fields[columns.country];
        if (rec.species.empty() || rec.depositor.empty() || rec.country.empty()) {
            result.issues.push_back({line_no, "empty species, depositor, or country"});
            continue;
        }
        const std::string& acc = fields[columns.accessions];
        std::uint64_t value = 0;
        bool ok = !acc.empty();
        for (char c : acc) {
            if (c < '0' || c > '9') {
                ok = false;
                break;
            }
            const std::uint64_t digit = static_cast<std::uint64_t>(c - '0');
            if (value > (std::numeric_limits<std::uint64_t>::max() - digit) / 10) {
                ok = false;
                break;
            }
            value = value * 10 + digit;
        }
        if (!ok || value == 0) {
            result.issues.push_back(
                {line_no, fmt::format("accessions must be a positive integer, got '{}'", acc)});
            continue;
        }
        rec.accessions = value;
        result.records.push_back(std::move(rec));
    }
    if (!have_header)
        throw ParseError(line_no, "missing header row");
    return result;
}

RedundancyHistogram depositor_histogram(const std::vector<AccessionRecord>& records) {
    std::map<std::string, std::set<std::string>> depositors;
    for (const auto& r : records) depositors[r.species].insert(r.depositor);
    RedundancyHistogram hist;
    for (const auto& [species, holders] : depositors) ++hist.buckets[holders.size()];
    return hist;
}

std::vector<SpeciesSummary> summarize_species(const std::vector<AccessionRecord>& records) {
    struct Tally {
        std::set<std::string> depositors;
        std::set<std::string> countries;
        std::uint64_t accessions = 0;
    };
    std::map<std::string, Tally> tallies;
    for (const auto& r : records) {
        Tally& t = tallies[r.species];
        t.depositors.insert(r.depositor);
        t.countries.insert(r.country);
        t.accessions += r.accessions;
    }
    std::vector<SpeciesSummary> out;
    out.reserve(tallies.size());
    for (const auto& [species, t] : tallies)
        out.push_back({species, t.depositors.size(), t.accessions, t.countries.size()});
    return out;
}

std::vector<SpeciesSummary> at_risk(const std::vector<AccessionRecord>& records,
                                    std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be positive");
    std::vector<SpeciesSummary> out;
    for (auto& s : summarize_species(records))
        if (s.depositors < k) out.push_back(std::move(s));
    return out;
}

void NodeRegistry::add_node(int node_id, std::size_t capacity_slots,
                            double activity_window_h) {
    if (activity_window_h < 0.0)
        throw std::invalid_argument("activity_window_h must be non-negative");
    NodeRecord rec;
    rec.node_id = node_id;
    rec.capacity_slots = capacity_slots;
    rec.activity_window_h = activity_window_h;
    if (!nodes_.emplace(node_id, std::move(rec)).second)
        throw std::invalid_argument(fmt::format("node {} is already registered", node_id));
}

const NodeRecord& NodeRegistry::find(int node_id) const {
    const auto it = nodes_.find(node_id);
    if (it == nodes_.end())
        throw std::invalid_argument(fmt::format("unknown node {}", node_id));
    return it->second;
}

void NodeRegistry::record_report(int node_id, bool valid, double t_h) {
    const auto it = nodes_.find(node_id);
    if (it == nodes_.end())
        throw std::invalid_argument(fmt::format("unknown node {}", node_id));
    if (valid) it->second.last_valid_report_h = t_h;
}

bool NodeRegistry::is_active(int node_id, double now_h) const {
    const NodeRecord& rec = find(node_id);
    return rec.last_valid_report_h &&
           now_h - *rec.last_valid_report_h <= rec.activity_window_h;
}

std::vector<NodeRecord> NodeRegistry::snapshot(double now_h) const {
    std::vector<NodeRecord> out;
    out.reserve(nodes_.size());
    for (const auto& [id, rec] : nodes_) {
        out.push_back(rec);
        out.back().active = is_active(id, now_h);
    }
    return out;
}

PlacementPlan place(const std::vector<SampleRequest>& requests,
                    std::vector<NodeRecord>& nodes) {
    struct Pending {
        const SampleRequest* request = nullptr;
        int sample_id = 0;
    };
    std::map<std::string, int> next_sample_id;
    std::vector<Pending> pending;
    pending.reserve(requests.size());
    for (const auto& r : requests) {
        if (r.copies <= 0)
            throw std::invalid_argument(
                fmt::format("request for '{}' must ask for at least one copy", r.species));
        pending.push_back({&r, next_sample_id[r.species]++});
    }
    // Widest replication first keeps narrow samples from stranding wide ones
    // on nearly full nodes.
    std::stable_sort(pending.begin(), pending.end(),
                     [](const Pending& a, const Pending& b) {
                         return a.request->copies > b.request->copies;
                     });

    PlacementPlan plan;
    std::vector<NodeRecord*> candidates;
    for (const auto& p : pending) {
        const auto sample = std::pair<std::string, int>(p.request->species, p.sample_id);
        candidates.clear();
        for (auto& n : nodes)
            if (n.active && n.free_slots() > 0 && !n.stored.contains(sample))
                candidates.push_back(&n);
        std::sort(candidates.begin(), candidates.end(),
                  [](const NodeRecord* a, const NodeRecord* b) {
                      if (a->free_slots() != b->free_slots())
                          return a->free_slots() > b->free_slots();
                      return a->node_id < b->node_id;
                  });
        const std::size_t want = static_cast<std::size_t>(p.request->copies);
        const std::size_t got = std::min(want, candidates.size());
        for (std::size_t i = 0; i < got; ++i) {
            candidates[i]->stored.insert(sample);
            plan.assignments.push_back({sample.first, sample.second, candidates[i]->node_id});
        }
        if (got < want)
            plan.unplaced.push_back(
                {sample.first, sample.second, static_cast<int>(want - got)});
    }
    std::sort(plan.assignments.begin(), plan.assignments.end(),
              [](const Assignment& a, const Assignment& b) {
                  return std::tie(a.species, a.sample_id, a.node_id) <
                         std::tie(b.species, b.sample_id, b.node_id);
              });
    std::sort(plan.unplaced.begin(), plan.unplaced.end(),
              [](const Unplaced& a, const Unplaced& b) {
                  return std::tie(a.species, a.sample_id) < std::tie(b.species, b.sample_id);
              });
    return plan;
}

std::string render_placement(const PlacementPlan& plan) {
    std::string out = "# dss-placement v1\n";
    for (const auto& a : plan.assignments)
        out += fmt::format("{},{},{}\n", csv_quote(a.species), a.sample_id, a.node_id);
    for (const auto& u : plan.unplaced)
        out += fmt::format("# unplaced,{},{},{}\n", csv_quote(u.species), u.sample_id,
                           u.deficit);
    out += "# end\n";
    return out;
}

}  // namespace dss::registry
