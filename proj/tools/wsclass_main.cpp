#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wsclass/config.hpp"
#include "wsclass/error.hpp"
#include "wsclass/evaluation.hpp"
#include "wsclass/prompting.hpp"
#include "wsclass/selection.hpp"
#include "wsclass/trainer.hpp"

namespace {

using namespace wsclass;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string mode;
};

ConfigFile load_config(const CommonArgs& args) {
    ConfigFile config = parse_config_file(args.config_path);
    if (args.seed) config.run.master_seed = *args.seed;
    if (!args.mode.empty()) config.run.mode = pipeline_mode_from_string(args.mode);
    config.run.validate();
    return config;
}

std::string require_output_dir(const ConfigFile& config) {
    if (config.run.output_dir.empty())
        throw_config("config: run.output_dir is required for this command");
    return config.run.output_dir;
}

TrainerHooks make_hooks(const Dataset& dataset) {
    TrainerHooks hooks;
    hooks.log = [](const std::string& line) { std::cout << line << "\n"; };
    if (!dataset.gold.empty()) {
        const GoldLabels& gold = dataset.gold;
        const std::size_t n = dataset.corpus.size();
        hooks.pool_quality = [&gold, n](const PseudoLabelPool& pool) {
            return pool_quality(pool, gold, n);
        };
    }
    return hooks;
}

std::string describe_pool(const PseudoLabelPool& pool, const Dataset& dataset) {
    char buf[160];
    const double coverage =
        dataset.corpus.size() ? static_cast<double>(pool.size()) / dataset.corpus.size() : 0.0;
    if (!dataset.gold.empty()) {
        const PoolQuality q = pool_quality(pool, dataset.gold, dataset.corpus.size());
        std::snprintf(buf, sizeof(buf), "%zu entries, coverage %.4f, accuracy %s",
                      pool.size(), coverage,
                      q.accuracy ? (std::to_string(*q.accuracy).substr(0, 6)).c_str() : "-");
    } else {
        std::snprintf(buf, sizeof(buf), "%zu entries, coverage %.4f", pool.size(), coverage);
    }
    return buf;
}

void write_snapshot(const ConfigFile& config, const std::string& dir) {
    const auto path = std::filesystem::path(dir) / "config.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_stage("cannot write config snapshot '" + path.string() + "'");
    out << config.source_text;
}

PseudoLabelPool acquire(const ConfigFile& config, const World& world, const std::string& dir) {
    ZeroShotScores audit;
    PseudoLabelPool pool =
        acquire_initial_pool(world.dataset->corpus, *world.scorer, config.run.t0, &audit);
    write_scores_file(audit, (std::filesystem::path(dir) / "zero_shot_scores.jsonl").string());
    write_pool(pool, (std::filesystem::path(dir) / pool_file_name(0)).string());
    if (!audit.degenerate.empty())
        std::cout << audit.degenerate.size()
                  << " documents scored zero for every class and were skipped\n";
    return pool;
}

int cmd_acquire(const CommonArgs& args) {
    const ConfigFile config = load_config(args);
    const std::string dir = require_output_dir(config);
    std::filesystem::create_directories(dir);
    const World world = build_world(config);
    const PseudoLabelPool pool = acquire(config, world, dir);
    std::cout << "initial pool: " << describe_pool(pool, *world.dataset) << "\n";
    std::cout << "wrote " << (std::filesystem::path(dir) / pool_file_name(0)).string() << "\n";
    return 0;
}

RunReport build_report(const ConfigFile& config, const PseudoLabelPool& initial_pool,
                       const PipelineResult& result, const World& world, int resume_from) {
    const Dataset& dataset = *world.dataset;
    RunReport report;
    report.mode = to_string(config.run.mode);
    report.config_digest = config_digest(config);
    report.seed = config.run.master_seed;

    auto summary_for = [&](int iteration, const PseudoLabelPool* pool,
                           const IterationRecord* record) {
        IterationSummary s;
        s.iteration = iteration;
        if (record) {
            s.pool_size = record->merged_pool_size;
            if (record->merged_pool_quality) {
                s.quality = *record->merged_pool_quality;
            } else {
                s.quality.pool_size = record->merged_pool_size;
                s.quality.coverage = dataset.corpus.size()
                                         ? static_cast<double>(record->merged_pool_size) /
                                               dataset.corpus.size()
                                         : 0.0;
            }
        } else if (pool) {
            s.pool_size = pool->size();
            if (!dataset.gold.empty()) {
                s.quality = pool_quality(*pool, dataset.gold, dataset.corpus.size());
            } else {
                s.quality.pool_size = pool->size();
                s.quality.coverage = dataset.corpus.size()
                                         ? static_cast<double>(pool->size()) /
                                               dataset.corpus.size()
                                         : 0.0;
            }
        }
        return s;
    };

    report.iterations.push_back(summary_for(0, &initial_pool, nullptr));
    std::map<int, const IterationRecord*> by_iteration;
    for (const IterationRecord& record : result.history)
        by_iteration[record.iteration] = &record;
    // A resumed run may predate the per-iteration records file; recover the
    // missing summaries from the pool files themselves.
    for (int i = 1; i <= resume_from; ++i) {
        if (by_iteration.count(i)) continue;
        const auto path = std::filesystem::path(config.run.output_dir) / pool_file_name(i);
        if (!std::filesystem::exists(path)) continue;
        const PseudoLabelPool pool = read_pool(path.string());
        report.iterations.push_back(summary_for(i, &pool, nullptr));
    }
    for (const IterationRecord& record : result.history)
        report.iterations.push_back(summary_for(record.iteration, nullptr, &record));
    std::stable_sort(report.iterations.begin(), report.iterations.end(),
                     [](const IterationSummary& a, const IterationSummary& b) {
                         return a.iteration < b.iteration;
                     });

    if (config.evaluation_enabled && !dataset.gold.empty()) {
        const std::vector<Prediction> predictions =
            result.final_classifier->predict(dataset.corpus);
        report.scores = score(predictions, dataset.gold, dataset.corpus);
    }
    return report;
}

int cmd_run(const CommonArgs& args, const std::string& resume_dir) {
    ConfigFile config = load_config(args);
    if (!resume_dir.empty()) config.run.output_dir = resume_dir;
    const std::string dir = require_output_dir(config);
    std::filesystem::create_directories(dir);
    const World world = build_world(config);
    const TrainerHooks hooks = make_hooks(*world.dataset);

    PseudoLabelPool initial_pool;
    int resume_from = 0;
    if (!resume_dir.empty()) {
        resume_from = find_resume_point(resume_dir);
        if (resume_from < 0)
            throw_data("nothing to resume: no pool files in '" + resume_dir + "'");
        const auto pool0 = std::filesystem::path(resume_dir) / pool_file_name(0);
        if (!std::filesystem::exists(pool0))
            throw_data("cannot resume: missing " + pool0.string());
        initial_pool = read_pool(pool0.string());
        std::cout << "resuming from iteration " << resume_from << " in " << resume_dir << "\n";
    } else {
        write_snapshot(config, dir);
        initial_pool = acquire(config, world, dir);
        std::cout << "initial pool: " << describe_pool(initial_pool, *world.dataset) << "\n";
    }

    const PipelineResult result =
        run_pipeline(world.dataset->corpus, initial_pool, config.run, world.backends, hooks,
                     resume_from);
    std::cout << "final pool: " << describe_pool(result.final_pool, *world.dataset) << "\n";

    const RunReport report = build_report(config, initial_pool, result, world, resume_from);
    emit_report(report, dir);
    if (report.scores) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "final scores: micro_f1 %.4f, macro_f1 %.4f",
                      report.scores->micro_f1, report.scores->macro_f1);
        std::cout << buf << "\n";
    } else if (config.evaluation_enabled) {
        std::cout << "no gold labels in the corpus; skipping final scoring\n";
    }
    std::cout << "run directory: " << dir << "\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& run_dir) {
    const ConfigFile config = load_config(args);
    const World world = build_world(config);
    const Dataset& dataset = *world.dataset;

    const auto path_file = std::filesystem::path(run_dir) / "final_classifier.path";
    std::ifstream in(path_file, std::ios::binary);
    if (!in) throw_data("no final classifier in '" + run_dir + "' (missing final_classifier.path)");
    std::string artifact_path;
    std::getline(in, artifact_path);
    if (artifact_path.empty() || !std::filesystem::exists(artifact_path))
        throw_data("final classifier artifact '" + artifact_path + "' not found");

    if (dataset.gold.empty())
        throw_eval("the corpus has no gold labels; nothing to evaluate against");

    const auto classifier = world.backends.head->load(artifact_path);
    const std::vector<Prediction> predictions = classifier->predict(dataset.corpus);
    const ScoreReport report = score(predictions, dataset.gold, dataset.corpus);

    char buf[96];
    std::snprintf(buf, sizeof(buf), "micro_f1 %.4f  macro_f1 %.4f  n %zu", report.micro_f1,
                  report.macro_f1, report.n_evaluated);
    std::string text = std::string(buf) + "\n";
    for (const ClassScore& c : report.per_class) {
        std::snprintf(buf, sizeof(buf), "  %-16s precision %.4f  recall %.4f  f1 %.4f  support %zu",
                      c.class_id.c_str(), c.precision, c.recall, c.f1, c.support);
        text += std::string(buf) + "\n";
    }
    std::cout << text;
    std::ofstream out(std::filesystem::path(run_dir) / "scores.txt", std::ios::binary);
    if (!out) throw_stage("cannot write scores.txt in '" + run_dir + "'");
    out << text;
    return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_path) {
    std::vector<RunReport> reports;
    for (const std::string& dir : run_dirs) {
        const auto path = std::filesystem::path(dir) / "results.json";
        if (!std::filesystem::exists(path))
            throw_data("no results.json in '" + dir + "'");
        reports.push_back(read_results_json(path.string()));
    }
    const std::string table = render_comparison_table(reports);
    std::cout << table;
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw_stage("cannot write '" + out_path + "'");
        out << table;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weakly-supervised text classification from label names"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string resume_dir;
    std::string run_dir;
    std::vector<std::string> report_dirs;
    std::string report_out;

    auto add_common = [&](CLI::App* sub, bool with_mode = true) {
        sub->add_option("--config", common.config_path, "Path to the run configuration")
            ->required();
        sub->add_option("--seed", common.seed, "Master seed override");
        if (with_mode) sub->add_option("--mode", common.mode, "Pipeline mode override");
    };

    CLI::App* acquire_cmd =
        app.add_subcommand("acquire", "Zero-shot score the corpus and write the initial pool");
    add_common(acquire_cmd, false);

    CLI::App* run_cmd = app.add_subcommand("run", "Run the configured pipeline end to end");
    add_common(run_cmd);
    run_cmd->add_option("--resume", resume_dir, "Existing run directory to resume");

    CLI::App* eval_cmd =
        app.add_subcommand("evaluate", "Score a run's final classifier against gold labels");
    add_common(eval_cmd, false);
    eval_cmd->add_option("--run", run_dir, "Run directory to evaluate")->required();

    CLI::App* report_cmd =
        app.add_subcommand("report", "Print a comparison table over finished runs");
    report_cmd->add_option("dirs", report_dirs, "Run directories")->required();
    report_cmd->add_option("--out", report_out, "Also write the table to this file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (acquire_cmd->parsed()) return cmd_acquire(common);
        if (run_cmd->parsed()) return cmd_run(common, resume_dir);
        if (eval_cmd->parsed()) return cmd_evaluate(common, run_dir);
        if (report_cmd->parsed()) return cmd_report(report_dirs, report_out);
    } catch (const wsclass::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
