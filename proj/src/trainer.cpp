#include "wsclass/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "wsclass/error.hpp"
#include "wsclass/util/rng.hpp"

namespace wsclass {

namespace {

using ordered_json = nlohmann::ordered_json;

void log_line(const TrainerHooks& hooks, const std::string& line) {
    if (hooks.log) hooks.log(line);
}

// frozen_layers applies only while the freeze window is active.
TrainSpec effective_spec(const TrainSpec& spec, const RunConfig& config, int iteration) {
    TrainSpec out = spec;
    if (config.freeze_layers_until_iteration <= 0 ||
        iteration > config.freeze_layers_until_iteration)
        out.frozen_layers = 0;
    return out;
}

std::string head_source_tag(int iteration) { return "head:" + std::to_string(iteration); }

std::string prompt_source_tag(int iteration, int member) {
    std::string tag = "prompt:" + std::to_string(iteration);
    if (member > 0) tag += "." + std::to_string(member);
    return tag;
}

class StageTimer {
public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

std::string to_string(PipelineMode mode) {
    switch (mode) {
        case PipelineMode::Ensemble: return "ensemble";
        case PipelineMode::TwoStage: return "two_stage";
        case PipelineMode::SelfTrain: return "self_train";
        case PipelineMode::CoTrain: return "co_train";
    }
    throw_config("unknown pipeline mode value");
}

PipelineMode pipeline_mode_from_string(const std::string& s) {
    if (s == "ensemble") return PipelineMode::Ensemble;
    if (s == "two_stage") return PipelineMode::TwoStage;
    if (s == "self_train") return PipelineMode::SelfTrain;
    if (s == "co_train") return PipelineMode::CoTrain;
    throw_config("unknown pipeline mode '" + s +
                 "' (expected ensemble, two_stage, self_train or co_train)");
}

void RunConfig::validate() const {
    if (!(t0 > 0.0 && t0 <= 1.0)) throw_config("t0 must be in (0, 1]");
    schedule.validate();
    if (r < 0) throw_config("r must be >= 0");
    if (!(q > 0.0 && q <= 1.0)) throw_config("q must be in (0, 1]");
    if (subset.min_per_class < 1) throw_config("min_per_class must be >= 1");
    if (freeze_layers_until_iteration < 0)
        throw_config("freeze_layers_until_iteration must be >= 0");
    if (!(no_growth_fraction >= 0.0 && no_growth_fraction < 1.0))
        throw_config("no_growth_fraction must be in [0, 1)");
}

std::uint64_t fit_seed(std::uint64_t master, ViewKind view, int iteration, int member) {
    return rng::mix_all({master, rng::fnv1a(to_string(view) + "-fit"),
                         static_cast<std::uint64_t>(iteration),
                         static_cast<std::uint64_t>(member)});
}

std::uint64_t subset_seed(std::uint64_t master, int iteration) {
    return rng::mix_all({master, rng::fnv1a("subsets"), static_cast<std::uint64_t>(iteration)});
}

std::uint64_t final_fit_seed(std::uint64_t master) {
    return rng::mix_all({master, rng::fnv1a("final-fit")});
}

namespace {

PseudoLabelPool select_stage(const std::vector<Prediction>& predictions, const RunConfig& config,
                             int iteration, const std::string& source_tag,
                             const TrainerHooks& hooks, const std::string& stage_name) {
    const double t_i = threshold_at(config.schedule, iteration);
    PseudoLabelPool pool =
        select_top(predictions, t_i, config.schedule.p_floor, iteration, source_tag);
    if (pool.empty())
        throw_stage("iteration " + std::to_string(iteration) + ": " + stage_name +
                    " produced an empty pool (threshold " + std::to_string(t_i) + ", floor " +
                    std::to_string(config.schedule.p_floor) + ")");
    log_line(hooks, "  " + stage_name + ": " + std::to_string(pool.size()) + " entries");
    return pool;
}

std::string save_artifact(const Classifier& classifier, const std::string& artifact_dir,
                          const std::string& stem, IterationRecord& record) {
    record.classifier_ids.push_back(classifier.instance_id());
    if (artifact_dir.empty()) return {};
    const std::string path = classifier.save(artifact_dir, stem);
    record.artifact_paths.push_back(path);
    return path;
}

}  // namespace

PseudoLabelPool run_iteration(const PseudoLabelPool& previous, int iteration,
                              const Corpus& corpus, const RunConfig& config,
                              const BackendSet& backends, const TrainerHooks& hooks,
                              const std::string& artifact_dir, IterationRecord& record) {
    if (previous.empty())
        throw_stage("iteration " + std::to_string(iteration) + ": previous pool is empty");
    if (!backends.head) throw_stage("no head-view backend configured");
    if (config.r > 0 && !backends.prompt)
        throw_stage("ensemble iterations need a prompt-view backend (r > 0)");

    StageTimer timer;
    record.iteration = iteration;

    const TrainSpec head_spec = effective_spec(config.head_train, config, iteration);
    auto head = head_token_finetune(*backends.head, previous, corpus, head_spec,
                                    fit_seed(config.master_seed, ViewKind::Head, iteration));
    save_artifact(*head, artifact_dir, "head_iter" + std::to_string(iteration), record);

    const auto head_predictions = predict_with_confidence(*head, corpus);
    PseudoLabelPool head_pool = select_stage(head_predictions, config, iteration,
                                             head_source_tag(iteration), hooks, "head selection");
    record.head_pool_size = head_pool.size();
    if (hooks.pool_quality) record.head_pool_quality = hooks.pool_quality(head_pool);

    std::vector<PseudoLabelPool> pools;
    pools.push_back(std::move(head_pool));

    if (config.r > 0) {
        const TrainSpec prompt_spec = effective_spec(config.prompt_train, config, iteration);
        const auto subsets =
            sample_subsets(pools.front(), corpus, config.r, config.q,
                           subset_seed(config.master_seed, iteration), config.subset);
        for (int k = 1; k <= config.r; ++k) {
            auto prompt = prompt_finetune(
                *backends.prompt, subsets[static_cast<std::size_t>(k - 1)], corpus, prompt_spec,
                fit_seed(config.master_seed, ViewKind::Prompt, iteration, k));
            save_artifact(*prompt, artifact_dir,
                          "prompt_iter" + std::to_string(iteration) + "_" + std::to_string(k),
                          record);
            const auto predictions = predict_with_confidence(*prompt, corpus);
            PseudoLabelPool pool = select_stage(
                predictions, config, iteration, prompt_source_tag(iteration, k), hooks,
                "prompt member " + std::to_string(k) + " selection");
            record.subset_pool_sizes.push_back(pool.size());
            pools.push_back(std::move(pool));
        }
    }

    PseudoLabelPool merged = intersect_pools(pools);
    if (merged.empty())
        throw_stage("iteration " + std::to_string(iteration) +
                    ": intersection produced an empty pool");
    record.merged_pool_size = merged.size();
    if (hooks.pool_quality) record.merged_pool_quality = hooks.pool_quality(merged);
    record.duration_seconds = timer.seconds();
    return merged;
}

namespace {

// One co-training iteration: a single view trains on the full previous pool
// and its confident predictions become the next pool. Views alternate, head
// first.
PseudoLabelPool co_train_iteration(const PseudoLabelPool& previous, int iteration,
                                   const Corpus& corpus, const RunConfig& config,
                                   const BackendSet& backends, const TrainerHooks& hooks,
                                   const std::string& artifact_dir, IterationRecord& record) {
    if (previous.empty())
        throw_stage("iteration " + std::to_string(iteration) + ": previous pool is empty");
    StageTimer timer;
    record.iteration = iteration;

    const bool head_turn = iteration % 2 == 1;
    std::unique_ptr<Classifier> model;
    std::string stem, tag;
    if (head_turn) {
        if (!backends.head) throw_stage("co-training needs a head-view backend");
        model = head_token_finetune(*backends.head, previous, corpus,
                                    effective_spec(config.head_train, config, iteration),
                                    fit_seed(config.master_seed, ViewKind::Head, iteration));
        stem = "head_iter" + std::to_string(iteration);
        tag = head_source_tag(iteration);
    } else {
        if (!backends.prompt) throw_stage("co-training needs a prompt-view backend");
        model = prompt_finetune(*backends.prompt, pool_to_examples(previous, corpus), corpus,
                                effective_spec(config.prompt_train, config, iteration),
                                fit_seed(config.master_seed, ViewKind::Prompt, iteration));
        stem = "prompt_iter" + std::to_string(iteration);
        tag = prompt_source_tag(iteration, 0);
    }
    save_artifact(*model, artifact_dir, stem, record);

    const auto predictions = predict_with_confidence(*model, corpus);
    PseudoLabelPool pool =
        select_stage(predictions, config, iteration, tag, hooks,
                     std::string(head_turn ? "head" : "prompt") + " selection");
    record.head_pool_size = pool.size();
    record.merged_pool_size = pool.size();
    if (hooks.pool_quality) {
        record.head_pool_quality = hooks.pool_quality(pool);
        record.merged_pool_quality = record.head_pool_quality;
    }
    record.duration_seconds = timer.seconds();
    return pool;
}

ordered_json record_json(const IterationRecord& r) {
    ordered_json j;
    j["iteration"] = r.iteration;
    j["head_pool_size"] = r.head_pool_size;
    j["subset_pool_sizes"] = r.subset_pool_sizes;
    j["merged_pool_size"] = r.merged_pool_size;
    auto quality = [](const std::optional<PoolQuality>& q) -> ordered_json {
        if (!q) return nullptr;
        ordered_json qj;
        qj["coverage"] = q->coverage;
        qj["accuracy"] = q->accuracy ? ordered_json(*q->accuracy) : ordered_json(nullptr);
        qj["pool_size"] = q->pool_size;
        qj["correct"] = q->correct;
        return qj;
    };
    j["head_pool_quality"] = quality(r.head_pool_quality);
    j["merged_pool_quality"] = quality(r.merged_pool_quality);
    j["duration_seconds"] = r.duration_seconds;
    j["artifacts"] = r.artifact_paths;
    j["classifier_ids"] = r.classifier_ids;
    return j;
}

void append_record(const IterationRecord& record, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw_stage("cannot write records file '" + path + "'");
    out << record_json(record).dump() << '\n';
    if (!out) throw_stage("short write on records file '" + path + "'");
}

}  // namespace

void write_records(const std::vector<IterationRecord>& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_stage("cannot write records file '" + path + "'");
    for (const auto& r : history) out << record_json(r).dump() << '\n';
    if (!out) throw_stage("short write on records file '" + path + "'");
}

std::vector<IterationRecord> read_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("cannot read records file '" + path + "'");
    std::vector<IterationRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw_data("records file '" + path + "' line " + std::to_string(line_no) + ": " +
                       e.what());
        }
        IterationRecord r;
        r.iteration = j.value("iteration", 0);
        r.head_pool_size = j.value("head_pool_size", std::size_t{0});
        if (j.contains("subset_pool_sizes"))
            r.subset_pool_sizes = j["subset_pool_sizes"].get<std::vector<std::size_t>>();
        r.merged_pool_size = j.value("merged_pool_size", std::size_t{0});
        auto quality = [&](const char* key) -> std::optional<PoolQuality> {
            if (!j.contains(key) || j[key].is_null()) return std::nullopt;
            const auto& qj = j[key];
            PoolQuality q;
            q.coverage = qj.value("coverage", 0.0);
            if (qj.contains("accuracy") && !qj["accuracy"].is_null())
                q.accuracy = qj["accuracy"].get<double>();
            q.pool_size = qj.value("pool_size", std::size_t{0});
            q.correct = qj.value("correct", std::size_t{0});
            return q;
        };
        r.head_pool_quality = quality("head_pool_quality");
        r.merged_pool_quality = quality("merged_pool_quality");
        r.duration_seconds = j.value("duration_seconds", 0.0);
        if (j.contains("artifacts"))
            r.artifact_paths = j["artifacts"].get<std::vector<std::string>>();
        if (j.contains("classifier_ids"))
            r.classifier_ids = j["classifier_ids"].get<std::vector<std::uint64_t>>();
        records.push_back(std::move(r));
    }
    return records;
}

int find_resume_point(const std::string& run_dir) {
    int best = -1;
    for (int i = 0; i < 1000; ++i) {
        if (std::filesystem::exists(std::filesystem::path(run_dir) / pool_file_name(i))) best = i;
    }
    return best;
}

PipelineResult run_pipeline(const Corpus& corpus, const PseudoLabelPool& initial_pool,
                            const RunConfig& config, const BackendSet& backends,
                            const TrainerHooks& hooks, int resume_from) {
    config.validate();
    if (initial_pool.empty()) throw_stage("initial pool is empty; nothing to train on");
    if (!backends.head) throw_stage("no head-view backend configured");
    const bool needs_prompt = config.mode == PipelineMode::CoTrain ||
                              (config.mode == PipelineMode::Ensemble && config.r > 0);
    if (needs_prompt && !backends.prompt)
        throw_stage("mode " + to_string(config.mode) + " needs a prompt-view backend");
    if (resume_from < 0) throw_config("resume iteration must be >= 0");

    const std::filesystem::path run_dir(config.output_dir);
    const std::string records_path =
        config.output_dir.empty() ? std::string() : (run_dir / "records.jsonl").string();
    std::string models_dir;
    PipelineResult result;
    if (!config.output_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(run_dir / "models", ec);
        if (ec)
            throw_stage("cannot create run directory '" + config.output_dir +
                        "': " + ec.message());
        models_dir = (run_dir / "models").string();
        if (resume_from == 0) {
            write_pool(initial_pool, (run_dir / pool_file_name(0)).string());
            write_records({}, records_path);
            for (int i = 1;; ++i) {
                const std::filesystem::path stale = run_dir / pool_file_name(i);
                if (!std::filesystem::exists(stale)) break;
                std::filesystem::remove(stale, ec);
            }
        } else if (std::filesystem::exists(records_path)) {
            // Keep the interrupted run's records up to the resume point; the
            // file then grows one line per completed iteration.
            for (IterationRecord& r : read_records(records_path))
                if (r.iteration <= resume_from) result.history.push_back(std::move(r));
            write_records(result.history, records_path);
        } else {
            write_records({}, records_path);
        }
    }

    PseudoLabelPool current = initial_pool;

    const int total_iterations =
        config.mode == PipelineMode::TwoStage ? 0 : config.schedule.iterations;
    for (int i = 1; i <= total_iterations; ++i) {
        if (i <= resume_from) {
            if (config.output_dir.empty())
                throw_config("cannot resume without an output directory");
            current = read_pool((run_dir / pool_file_name(i)).string());
            if (current.iteration != i)
                throw_data("resumed pool file '" + pool_file_name(i) +
                           "' carries iteration tag " + std::to_string(current.iteration));
            log_line(hooks, "iteration " + std::to_string(i) + ": resumed from disk, " +
                                std::to_string(current.size()) + " entries");
            continue;
        }
        log_line(hooks, "iteration " + std::to_string(i) + " (" + to_string(config.mode) + ")");
        const std::size_t previous_size = current.size();
        IterationRecord record;
        RunConfig iter_config = config;
        if (config.mode == PipelineMode::SelfTrain) iter_config.r = 0;
        if (config.mode == PipelineMode::CoTrain)
            current = co_train_iteration(current, i, corpus, config, backends, hooks, models_dir,
                                         record);
        else
            current = run_iteration(current, i, corpus, iter_config, backends, hooks, models_dir,
                                    record);
        result.history.push_back(record);
        if (!config.output_dir.empty()) {
            write_pool(current, (run_dir / pool_file_name(i)).string());
            append_record(record, records_path);
        }

        if (current.size() < previous_size)
            log_line(hooks, "iteration " + std::to_string(i) + ": pool shrank from " +
                                std::to_string(previous_size) + " to " +
                                std::to_string(current.size()));
        if (config.stop_on_no_growth && i < total_iterations) {
            const double change = std::abs(static_cast<double>(current.size()) -
                                           static_cast<double>(previous_size));
            if (change < config.no_growth_fraction * static_cast<double>(corpus.size())) {
                log_line(hooks, "stopping after iteration " + std::to_string(i) +
                                    ": pool growth below threshold");
                break;
            }
        }
    }

    const int after = total_iterations + 1;
    result.final_classifier =
        head_token_finetune(*backends.head, current, corpus,
                            effective_spec(config.head_train, config, after),
                            final_fit_seed(config.master_seed));
    if (!models_dir.empty())
        result.final_artifact_path = result.final_classifier->save(models_dir, "final_classifier");
    result.final_pool = std::move(current);

    if (!config.output_dir.empty()) {
        if (!result.final_artifact_path.empty()) {
            std::ofstream pathfile((run_dir / "final_classifier.path").string(),
                                   std::ios::binary);
            if (!pathfile)
                throw_stage("cannot write final classifier path file in '" + config.output_dir +
                            "'");
            pathfile << result.final_artifact_path << '\n';
        }
    }
    return result;
}

}  // namespace wsclass
