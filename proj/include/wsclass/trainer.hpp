#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wsclass/backend.hpp"
#include "wsclass/classifiers.hpp"
#include "wsclass/corpus.hpp"
#include "wsclass/evaluation.hpp"
#include "wsclass/selection.hpp"

namespace wsclass {

// ensemble   : full method; head view plus r subset-trained prompt views,
//              pools merged by intersection each iteration
// two_stage  : train the final classifier directly on the initial pool
// self_train : head view only, no subsets, no intersection
// co_train   : the two views alternate, each iteration's pool feeding the
//              other view; head view goes first
enum class PipelineMode { Ensemble, TwoStage, SelfTrain, CoTrain };

std::string to_string(PipelineMode mode);
PipelineMode pipeline_mode_from_string(const std::string& s);

struct RunConfig {
    double t0 = 0.10;
    Schedule schedule;  // s, p_floor, iterations, mode
    int r = 3;
    double q = 0.01;
    SubsetOptions subset;
    TrainSpec head_train;
    TrainSpec prompt_train;
    PipelineMode mode = PipelineMode::Ensemble;
    std::uint64_t master_seed = 2024;
    std::string output_dir;

    // Iterations <= this keep their TrainSpec's frozen_layers; later ones
    // (and the final fit) train all layers. 0 disables freezing everywhere.
    int freeze_layers_until_iteration = 0;

    bool stop_on_no_growth = false;
    double no_growth_fraction = 0.005;  // of corpus size

    void validate() const;
};

struct IterationRecord {
    int iteration = 0;
    std::size_t head_pool_size = 0;               // |P^i_0|
    std::vector<std::size_t> subset_pool_sizes;   // |P^i_k|, k = 1..r
    std::size_t merged_pool_size = 0;             // |P^i|
    std::optional<PoolQuality> head_pool_quality;
    std::optional<PoolQuality> merged_pool_quality;
    double duration_seconds = 0.0;
    std::vector<std::string> artifact_paths;
    std::vector<std::uint64_t> classifier_ids;  // fresh-init provenance
};

struct BackendSet {
    std::shared_ptr<const ClassifierBackend> head;
    std::shared_ptr<const ClassifierBackend> prompt;  // unused by two_stage / self_train
};

// Optional observers. pool_quality is how gold labels reach the records
// without the trainer ever touching them; log receives progress lines.
struct TrainerHooks {
    std::function<PoolQuality(const PseudoLabelPool&)> pool_quality;
    std::function<void(const std::string&)> log;
};

// Deterministic fan-out from the master seed. Keyed only by role, iteration
// and member index, never by pipeline mode, so degenerate mode pairs (r = 0
// ensemble vs self-training) share identical streams.
std::uint64_t fit_seed(std::uint64_t master, ViewKind view, int iteration, int member = 0);
std::uint64_t subset_seed(std::uint64_t master, int iteration);
std::uint64_t final_fit_seed(std::uint64_t master);

// One full-method iteration: head fit on P^{i-1}, select P^i_0, r subsets of
// P^i_0, prompt fits, per-member selection, intersection. Empty intermediate
// pools abort with the stage name. artifact_dir may be empty to skip saving.
PseudoLabelPool run_iteration(const PseudoLabelPool& previous, int iteration,
                              const Corpus& corpus, const RunConfig& config,
                              const BackendSet& backends, const TrainerHooks& hooks,
                              const std::string& artifact_dir, IterationRecord& record);

struct PipelineResult {
    std::unique_ptr<Classifier> final_classifier;
    std::string final_artifact_path;
    std::vector<IterationRecord> history;
    PseudoLabelPool final_pool;
};

// Runs the configured mode end to end starting from the initial pool, writes
// pool_iter<i>.jsonl, records.jsonl and model artifacts into the output
// directory, trains the final classifier on the last pool. resume_from > 0
// reloads pools up to that iteration from the output directory instead of
// recomputing them.
PipelineResult run_pipeline(const Corpus& corpus, const PseudoLabelPool& initial_pool,
                            const RunConfig& config, const BackendSet& backends,
                            const TrainerHooks& hooks, int resume_from = 0);

// Highest iteration i with a pool_iter<i>.jsonl in the directory, or -1.
int find_resume_point(const std::string& run_dir);

void write_records(const std::vector<IterationRecord>& history, const std::string& path);
std::vector<IterationRecord> read_records(const std::string& path);

}  // namespace wsclass
