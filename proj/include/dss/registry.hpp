#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dss::registry {

// One genebank holding row: a depositor's accession count for a species
// in one country.
struct AccessionRecord {
    std::string species;
    std::string depositor;
    std::string country;
    std::uint64_t accessions = 0;

    bool operator==(const AccessionRecord&) const = default;
};

struct IngestIssue {
    int line_no = 0;
    std::string message;
};

struct IngestResult {
    std::vector<AccessionRecord> records;
    std::vector<IngestIssue> issues;  // skipped rows, in input order
};

// Quotes a CSV field when it holds commas or quotes, doubling inner quotes.
std::string csv_quote(const std::string& field);

// Reads holdings CSV with a mandatory header naming exactly the columns
// species, depositor, accessions, country (any order). Quoted fields may
// contain commas and doubled quotes; unquoted fields are trimmed. A
// malformed header throws dss::ParseError; malformed data rows are
// skipped and reported as issues.
IngestResult ingest(std::istream& in);

// Species count per distinct-depositor count. buckets[d] answers: how
// many species are held by exactly d depositors?
struct RedundancyHistogram {
    std::map<std::size_t, std::size_t> buckets;

    bool operator==(const RedundancyHistogram&) const = default;
};

RedundancyHistogram depositor_histogram(const std::vector<AccessionRecord>& records);

struct SpeciesSummary {
    std::string species;
    std::size_t depositors = 0;
    std::uint64_t accessions = 0;
    std::size_t countries = 0;

    bool operator==(const SpeciesSummary&) const = default;
};

// Distinct depositors, total accessions, and distinct countries per
// species, sorted by species name.
std::vector<SpeciesSummary> summarize_species(const std::vector<AccessionRecord>& records);

// Species held by fewer than k distinct depositors, sorted by name.
// Throws std::invalid_argument when k is zero.
std::vector<SpeciesSummary> at_risk(const std::vector<AccessionRecord>& records,
                                    std::size_t k);

// One storage node: capacity in sample slots, what it stores, and when it
// last reported a policy-valid reading.
struct NodeRecord {
    int node_id = 0;
    std::size_t capacity_slots = 0;
    double activity_window_h = 0.0;
    std::set<std::pair<std::string, int>> stored;  // (species, sample_id)
    std::optional<double> last_valid_report_h;
    bool active = false;

    std::size_t free_slots() const {
        return stored.size() >= capacity_slots ? 0 : capacity_slots - stored.size();
    }
};

// Tracks nodes by id. A node counts as active while its latest valid
// report is no older than its activity window.
class NodeRegistry {
public:
    void add_node(int node_id, std::size_t capacity_slots, double activity_window_h);
    void record_report(int node_id, bool valid, double t_h);
    bool is_active(int node_id, double now_h) const;
    std::vector<NodeRecord> snapshot(double now_h) const;  // sorted by id, active computed

private:
    const NodeRecord& find(int node_id) const;

    std::map<int, NodeRecord> nodes_;
};

struct SampleRequest {
    std::string species;
    int copies = 0;
};

struct Assignment {
    std::string species;
    int sample_id = 0;
    int node_id = 0;

    bool operator==(const Assignment&) const = default;
};

struct Unplaced {
    std::string species;
    int sample_id = 0;
    int deficit = 0;

    bool operator==(const Unplaced&) const = default;
};

struct PlacementPlan {
    std::vector<Assignment> assignments;  // sorted by species, sample_id, node_id
    std::vector<Unplaced> unplaced;       // sorted by species, sample_id
};

// Replicates each requested sample onto `copies` distinct active nodes.
// Samples are numbered per species in request order, placed widest
// replication first; each copy goes to the node with the most free slots
// (ties to the lowest id). Chosen slots are committed to `nodes`. Requests
// that cannot be met in full are placed partially and reported in
// `unplaced`. Throws std::invalid_argument for non-positive copies.
PlacementPlan place(const std::vector<SampleRequest>& requests,
                    std::vector<NodeRecord>& nodes);

std::string render_placement(const PlacementPlan& plan);

}  // namespace dss::registry
