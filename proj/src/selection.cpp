#include "wsclass/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "wsclass/error.hpp"
#include "wsclass/util/rng.hpp"

namespace wsclass {

std::string to_string(ScheduleMode mode) {
    return mode == ScheduleMode::Linear ? "linear" : "constant";
}

ScheduleMode schedule_mode_from_string(const std::string& s) {
    if (s == "linear") return ScheduleMode::Linear;
    if (s == "constant") return ScheduleMode::Constant;
    throw_config("unknown schedule mode '" + s + "' (expected 'linear' or 'constant')");
}

void Schedule::validate() const {
    if (!(s > 0.0 && s <= 1.0)) throw_config("schedule: s must be in (0, 1]");
    if (!(p_floor >= 0.0 && p_floor < 1.0)) throw_config("schedule: p_floor must be in [0, 1)");
    if (iterations < 1) throw_config("schedule: iterations must be >= 1");
}

double threshold_at(const Schedule& schedule, int iteration) {
    if (iteration < 1) throw_stage("threshold_at: iteration must be >= 1");
    if (schedule.mode == ScheduleMode::Constant) return schedule.s;
    return std::min(1.0, static_cast<double>(iteration) * schedule.s);
}

PseudoLabelPool select_top(const std::vector<Prediction>& predictions, double t_i, double p_floor,
                           int iteration, const std::string& source_tag) {
    std::set<DocId> seen;
    for (const auto& p : predictions)
        if (!seen.insert(p.doc_id).second)
            throw_stage("select_top: duplicate prediction for doc '" + p.doc_id + "'");

    std::vector<const Prediction*> order;
    order.reserve(predictions.size());
    for (const auto& p : predictions) order.push_back(&p);
    std::sort(order.begin(), order.end(), [](const Prediction* a, const Prediction* b) {
        if (a->confidence != b->confidence) return a->confidence > b->confidence;
        return doc_id_less(a->doc_id, b->doc_id);
    });

    const std::size_t budget =
        static_cast<std::size_t>(std::floor(t_i * static_cast<double>(predictions.size())));

    PseudoLabelPool pool;
    pool.iteration = iteration;
    pool.confidence_floor = p_floor;
    for (std::size_t i = 0; i < order.size() && i < budget; ++i) {
        // Admission is strictly above the floor.
        if (!(order[i]->confidence > p_floor)) continue;
        pool.entries[order[i]->doc_id] =
            PoolEntry{order[i]->class_id, order[i]->confidence, source_tag};
    }
    return pool;
}

std::vector<std::vector<LabeledDoc>> sample_subsets(const PseudoLabelPool& pool,
                                                    const Corpus& corpus, int r, double q,
                                                    std::uint64_t seed,
                                                    const SubsetOptions& options) {
    if (r < 1) throw_stage("sample_subsets: r must be >= 1");
    if (!(q > 0.0 && q <= 1.0)) throw_stage("sample_subsets: q must be in (0, 1]");

    // Canonical entry order before any seeded draw.
    std::vector<std::pair<DocId, const PoolEntry*>> entries;
    entries.reserve(pool.size());
    std::set<ClassId> classes_present;
    for (const auto& [id, entry] : pool.entries) {
        entries.emplace_back(id, &entry);
        classes_present.insert(entry.class_id);
    }

    const std::size_t by_fraction =
        static_cast<std::size_t>(std::ceil(q * static_cast<double>(pool.size())));
    const std::size_t coverage_floor = classes_present.size() * options.min_per_class;
    const std::size_t target = std::max(by_fraction, coverage_floor);
    if (target > pool.size())
        throw_stage("sample_subsets: pool of " + std::to_string(pool.size()) +
                    " entries cannot cover every class at subset size " + std::to_string(target) +
                    "; use a larger q");

    std::vector<std::vector<LabeledDoc>> subsets;
    subsets.reserve(static_cast<std::size_t>(r));
    for (int k = 0; k < r; ++k) {
        rng::Rng gen(rng::mix_all({seed, rng::fnv1a("subset"), static_cast<std::uint64_t>(k)}));
        std::vector<std::size_t> perm(entries.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        gen.shuffle(perm);

        // First pass honors the per-class coverage floor, second pass fills
        // the remaining slots in shuffled order.
        std::map<ClassId, std::size_t> taken_per_class;
        std::vector<bool> taken(entries.size(), false);
        std::vector<std::size_t> chosen;
        for (std::size_t idx : perm) {
            const auto& cls = entries[idx].second->class_id;
            if (taken_per_class[cls] < options.min_per_class) {
                taken_per_class[cls] += 1;
                taken[idx] = true;
                chosen.push_back(idx);
            }
        }
        for (std::size_t idx : perm) {
            if (chosen.size() >= target) break;
            if (!taken[idx]) {
                taken[idx] = true;
                chosen.push_back(idx);
            }
        }
        // Deterministic output order regardless of draw order.
        std::sort(chosen.begin(), chosen.end());

        std::vector<LabeledDoc> subset;
        subset.reserve(chosen.size());
        for (std::size_t idx : chosen) {
            const auto& [id, entry] = entries[idx];
            const Document* doc = corpus.find(id);
            if (doc == nullptr) throw_stage("sample_subsets: pool doc '" + id + "' not in corpus");
            subset.push_back(LabeledDoc{id, doc->text, entry->class_id});
        }
        subsets.push_back(std::move(subset));
    }
    return subsets;
}

PseudoLabelPool intersect_pools(const std::vector<PseudoLabelPool>& pools) {
    if (pools.empty()) throw_stage("intersect_pools: empty pool list");
    for (const auto& p : pools)
        if (p.iteration != pools.front().iteration)
            throw_stage("intersect_pools: mismatched iteration tags (" +
                        std::to_string(pools.front().iteration) + " vs " +
                        std::to_string(p.iteration) + ")");
    if (pools.size() == 1) return pools.front();

    PseudoLabelPool out;
    out.iteration = pools.front().iteration;
    out.confidence_floor = pools.front().confidence_floor;
    for (const auto& [id, first_entry] : pools.front().entries) {
        double min_conf = first_entry.confidence;
        std::string sources = first_entry.source;
        bool agreed = true;
        for (std::size_t k = 1; k < pools.size(); ++k) {
            auto it = pools[k].entries.find(id);
            if (it == pools[k].entries.end() || it->second.class_id != first_entry.class_id) {
                agreed = false;
                break;
            }
            min_conf = std::min(min_conf, it->second.confidence);
            sources += "+" + it->second.source;
        }
        if (agreed) out.entries[id] = PoolEntry{first_entry.class_id, min_conf, sources};
    }
    return out;
}

std::string pool_file_name(int iteration) {
    return "pool_iter" + std::to_string(iteration) + ".jsonl";
}

void write_pool(const PseudoLabelPool& pool, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw_stage("cannot write pool file: " + path);
    for (const auto& [id, entry] : pool.entries) {
        nlohmann::ordered_json line;
        line["doc_id"] = id;
        line["class_id"] = entry.class_id;
        line["confidence"] = entry.confidence;
        line["iteration"] = pool.iteration;
        line["source"] = entry.source;
        out << line.dump() << "\n";
    }
}

PseudoLabelPool read_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_stage("cannot open pool file: " + path);
    PseudoLabelPool pool;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw_stage(path + ":" + std::to_string(line_no) + ": malformed pool record: " +
                        e.what());
        }
        const int iteration = record.at("iteration").get<int>();
        if (first) {
            pool.iteration = iteration;
            first = false;
        } else if (iteration != pool.iteration) {
            throw_stage(path + ":" + std::to_string(line_no) + ": mixed iteration tags in pool");
        }
        PoolEntry entry;
        entry.class_id = record.at("class_id").get<std::string>();
        entry.confidence = record.at("confidence").get<double>();
        entry.source = record.value("source", std::string{});
        pool.entries[record.at("doc_id").get<std::string>()] = std::move(entry);
    }
    return pool;
}

}  // namespace wsclass
