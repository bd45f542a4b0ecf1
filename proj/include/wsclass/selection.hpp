#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wsclass/corpus.hpp"
#include "wsclass/types.hpp"

namespace wsclass {

// One confident (document -> class) assignment with its provenance.
struct PoolEntry {
    ClassId class_id;
    double confidence = 0.0;
    std::string source;  // classifier that produced the entry, e.g. "head:3"
};

// The pseudo-label pool at one iteration. Entries are keyed and serialized
// in doc-id order so identical pools are byte-identical on disk.
struct PseudoLabelPool {
    int iteration = 0;
    double confidence_floor = 0.0;  // the floor that admitted these entries
    std::map<DocId, PoolEntry, DocIdLess> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
    bool contains(const DocId& id) const { return entries.count(id) != 0; }
};

enum class ScheduleMode {
    Linear,    // t_i = i * s, capped at 1
    Constant,  // t_i = s for every iteration
};

std::string to_string(ScheduleMode mode);
ScheduleMode schedule_mode_from_string(const std::string& s);

// Threshold schedule for the iterative selection.
struct Schedule {
    double s = 0.20;        // per-iteration increment fraction
    double p_floor = 0.95;  // minimum confidence for admission
    int iterations = 5;     // T, full iterations
    ScheduleMode mode = ScheduleMode::Linear;

    void validate() const;
};

// t_i for iteration i >= 1.
double threshold_at(const Schedule& schedule, int iteration);

// Sort by (confidence desc, doc_id asc), keep the first floor(t_i * N), then
// drop entries whose confidence is not strictly above p_floor. The result may
// be smaller than the budget; empty results are allowed.
PseudoLabelPool select_top(const std::vector<Prediction>& predictions, double t_i, double p_floor,
                           int iteration, const std::string& source_tag);

struct SubsetOptions {
    std::size_t min_per_class = 1;  // coverage floor per class present in the pool
};

// r independent subsets of the pool, each of size
// max(ceil(q*|pool|), classes_present * min_per_class), drawn without
// replacement and guaranteed to touch every class present in the pool.
std::vector<std::vector<LabeledDoc>> sample_subsets(const PseudoLabelPool& pool,
                                                    const Corpus& corpus, int r, double q,
                                                    std::uint64_t seed,
                                                    const SubsetOptions& options = {});

// A document survives only if every input pool holds it with the same class;
// the merged confidence is the minimum across pools. A single input pool is
// returned unchanged.
PseudoLabelPool intersect_pools(const std::vector<PseudoLabelPool>& pools);

// Pool file IO: JSONL, one line per entry
//   {"doc_id":..., "class_id":..., "confidence":..., "iteration":..., "source":...}
void write_pool(const PseudoLabelPool& pool, const std::string& path);
PseudoLabelPool read_pool(const std::string& path);
std::string pool_file_name(int iteration);

}  // namespace wsclass
