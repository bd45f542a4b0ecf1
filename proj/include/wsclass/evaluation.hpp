#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsclass/corpus.hpp"
#include "wsclass/selection.hpp"
#include "wsclass/types.hpp"

namespace wsclass {

struct ClassScore {
    ClassId class_id;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;  // gold instances of the class
};

struct ScoreReport {
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    std::vector<ClassScore> per_class;  // declared class order
    std::size_t n_evaluated = 0;
};

// Micro-F1 from global TP/FP/FN (equals accuracy for complete single-label
// predictions); macro-F1 as the unweighted mean over declared classes, with
// undefined per-class F1 scored as 0. Every scored document needs a gold
// label and may appear only once.
ScoreReport score(const std::vector<Prediction>& predictions, const GoldLabels& gold,
                  const Corpus& corpus);

struct PoolQuality {
    double coverage = 0.0;            // |pool| / n
    std::optional<double> accuracy;   // null for an empty pool
    std::size_t pool_size = 0;
    std::size_t correct = 0;
};

PoolQuality pool_quality(const PseudoLabelPool& pool, const GoldLabels& gold, std::size_t n);

struct IterationSummary {
    int iteration = 0;
    std::size_t pool_size = 0;
    PoolQuality quality;  // coverage always known; accuracy only with gold
};

// Everything the report files need from one run; free of wall-clock state so
// serialized reports are byte-stable across identical runs.
struct RunReport {
    std::string mode;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::optional<ScoreReport> scores;
    std::vector<IterationSummary> iterations;
};

void write_results_json(const RunReport& report, const std::string& path);
RunReport read_results_json(const std::string& path);

// results.json, a coverage/accuracy chart and a plain-text score table.
void emit_report(const RunReport& report, const std::string& directory);

// Stacked correct/wrong coverage bars with an accuracy line, one group per
// iteration; accuracy segments are omitted where gold was unavailable.
std::string render_pool_history_svg(const std::vector<IterationSummary>& iterations);

// Fixed-width table of final scores, one column per run.
std::string render_comparison_table(const std::vector<RunReport>& reports);

}  // namespace wsclass
