#include "wsclass/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "wsclass/error.hpp"

namespace wsclass {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

ScoreReport score(const std::vector<Prediction>& predictions, const GoldLabels& gold,
                  const Corpus& corpus) {
    if (predictions.empty()) throw_eval("nothing to score: prediction list is empty");
    if (gold.empty()) throw_eval("cannot score without gold labels");

    struct Counts {
        std::size_t tp = 0, fp = 0, fn = 0;
    };
    std::map<ClassId, Counts> counts;
    for (const auto& cls : corpus.classes()) counts[cls.id];

    std::set<DocId, DocIdLess> seen;
    for (const auto& p : predictions) {
        if (!seen.insert(p.doc_id).second)
            throw_eval("document '" + p.doc_id + "' scored more than once");
        if (!corpus.has_class(p.class_id))
            throw_eval("prediction for '" + p.doc_id + "' names undeclared class '" + p.class_id +
                       "'");
        const auto gold_it = gold.find(p.doc_id);
        if (gold_it == gold.end()) throw_eval("no gold label for document '" + p.doc_id + "'");
        if (p.class_id == gold_it->second) {
            counts[p.class_id].tp += 1;
        } else {
            counts[p.class_id].fp += 1;
            counts[gold_it->second].fn += 1;
        }
    }

    ScoreReport report;
    report.n_evaluated = predictions.size();
    std::size_t tp_total = 0, fp_total = 0, fn_total = 0;
    double f1_sum = 0.0;
    for (const auto& cls : corpus.classes()) {
        const Counts& c = counts[cls.id];
        tp_total += c.tp;
        fp_total += c.fp;
        fn_total += c.fn;
        ClassScore s;
        s.class_id = cls.id;
        s.support = c.tp + c.fn;
        s.precision = safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
        s.recall = safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
        s.f1 = safe_ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
        f1_sum += s.f1;
        report.per_class.push_back(s);
    }
    report.micro_f1 = safe_ratio(static_cast<double>(tp_total),
                                 static_cast<double>(tp_total) +
                                     0.5 * static_cast<double>(fp_total + fn_total));
    report.macro_f1 = f1_sum / static_cast<double>(corpus.num_classes());
    return report;
}

PoolQuality pool_quality(const PseudoLabelPool& pool, const GoldLabels& gold, std::size_t n) {
    PoolQuality q;
    q.pool_size = pool.size();
    if (pool.empty()) return q;
    if (n == 0) throw_eval("pool quality: corpus size is zero but the pool is not empty");
    for (const auto& [id, entry] : pool.entries) {
        const auto gold_it = gold.find(id);
        if (gold_it == gold.end()) throw_eval("no gold label for pool document '" + id + "'");
        if (entry.class_id == gold_it->second) q.correct += 1;
    }
    q.coverage = static_cast<double>(q.pool_size) / static_cast<double>(n);
    q.accuracy = static_cast<double>(q.correct) / static_cast<double>(q.pool_size);
    return q;
}

namespace {

ordered_json quality_json(const PoolQuality& q) {
    ordered_json j;
    j["coverage"] = q.coverage;
    j["accuracy"] = q.accuracy ? ordered_json(*q.accuracy) : ordered_json(nullptr);
    j["pool_size"] = q.pool_size;
    j["correct"] = q.correct;
    return j;
}

ordered_json scores_json(const ScoreReport& s) {
    ordered_json j;
    j["micro_f1"] = s.micro_f1;
    j["macro_f1"] = s.macro_f1;
    j["n_evaluated"] = s.n_evaluated;
    j["per_class"] = ordered_json::array();
    for (const auto& c : s.per_class) {
        ordered_json cj;
        cj["class_id"] = c.class_id;
        cj["precision"] = c.precision;
        cj["recall"] = c.recall;
        cj["f1"] = c.f1;
        cj["support"] = c.support;
        j["per_class"].push_back(cj);
    }
    return j;
}

}  // namespace

void write_results_json(const RunReport& report, const std::string& path) {
    ordered_json j;
    j["mode"] = report.mode;
    j["config_digest"] = report.config_digest;
    j["seed"] = report.seed;
    j["scores"] = report.scores ? scores_json(*report.scores) : ordered_json(nullptr);
    j["iterations"] = ordered_json::array();
    for (const auto& it : report.iterations) {
        ordered_json ij;
        ij["iteration"] = it.iteration;
        const ordered_json quality = quality_json(it.quality);
        for (const auto& [key, value] : quality.items()) ij[key] = value;
        j["iterations"].push_back(ij);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_eval("cannot write results file '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw_eval("short write on results file '" + path + "'");
}

RunReport read_results_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("cannot read results file '" + path + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw_data("results file '" + path + "': " + e.what());
    }
    RunReport report;
    report.mode = j.value("mode", "");
    report.config_digest = j.value("config_digest", "");
    report.seed = j.value("seed", 0ull);
    if (j.contains("scores") && !j["scores"].is_null()) {
        ScoreReport s;
        const auto& sj = j["scores"];
        s.micro_f1 = sj.value("micro_f1", 0.0);
        s.macro_f1 = sj.value("macro_f1", 0.0);
        s.n_evaluated = sj.value("n_evaluated", std::size_t{0});
        if (sj.contains("per_class"))
            for (const auto& cj : sj["per_class"]) {
                ClassScore c;
                c.class_id = cj.value("class_id", "");
                c.precision = cj.value("precision", 0.0);
                c.recall = cj.value("recall", 0.0);
                c.f1 = cj.value("f1", 0.0);
                c.support = cj.value("support", std::size_t{0});
                s.per_class.push_back(c);
            }
        report.scores = std::move(s);
    }
    if (j.contains("iterations"))
        for (const auto& ij : j["iterations"]) {
            IterationSummary it;
            it.iteration = ij.value("iteration", 0);
            it.quality.coverage = ij.value("coverage", 0.0);
            if (ij.contains("accuracy") && !ij["accuracy"].is_null())
                it.quality.accuracy = ij["accuracy"].get<double>();
            it.quality.pool_size = ij.value("pool_size", std::size_t{0});
            it.quality.correct = ij.value("correct", std::size_t{0});
            it.pool_size = it.quality.pool_size;
            report.iterations.push_back(it);
        }
    return report;
}

std::string render_pool_history_svg(const std::vector<IterationSummary>& iterations) {
    const int bar_w = 36, gap = 30, x0 = 64, y0 = 24, plot_h = 220;
    const int n = static_cast<int>(iterations.size());
    const int width = std::max(360, x0 + n * (bar_w + gap) + 40);
    const int height = y0 + plot_h + 56;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(x0) + "\" y=\"16\" font-size=\"13\">"
           "pseudo-label coverage (bars: correct vs wrong) and accuracy (line)</text>\n";

    for (int g = 0; g <= 4; ++g) {
        const double frac = g / 4.0;
        const int y = y0 + plot_h - static_cast<int>(frac * plot_h);
        svg += "<line x1=\"" + std::to_string(x0 - 6) + "\" y1=\"" + std::to_string(y) +
               "\" x2=\"" + std::to_string(width - 20) + "\" y2=\"" + std::to_string(y) +
               "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + std::to_string(x0 - 12) + "\" y=\"" + std::to_string(y + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" + fmt("%.2f", frac) + "</text>\n";
    }

    if (n == 0) {
        svg += "<text x=\"" + std::to_string(x0) + "\" y=\"" + std::to_string(y0 + plot_h / 2) +
               "\" font-size=\"12\" fill=\"#666666\">no iterations recorded</text>\n";
        svg += "</svg>\n";
        return svg;
    }

    std::string line_points;
    for (int i = 0; i < n; ++i) {
        const auto& it = iterations[i];
        const int x = x0 + i * (bar_w + gap) + gap / 2;
        const int cx = x + bar_w / 2;
        const double cov = std::clamp(it.quality.coverage, 0.0, 1.0);
        const int cov_px = static_cast<int>(cov * plot_h + 0.5);
        if (it.quality.accuracy) {
            const double acc = std::clamp(*it.quality.accuracy, 0.0, 1.0);
            const int correct_px = static_cast<int>(cov * acc * plot_h + 0.5);
            const int wrong_px = cov_px - correct_px;
            svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" +
                   std::to_string(y0 + plot_h - correct_px) + "\" width=\"" +
                   std::to_string(bar_w) + "\" height=\"" + std::to_string(correct_px) +
                   "\" fill=\"#4caf50\"/>\n";
            if (wrong_px > 0)
                svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" +
                       std::to_string(y0 + plot_h - cov_px) + "\" width=\"" +
                       std::to_string(bar_w) + "\" height=\"" + std::to_string(wrong_px) +
                       "\" fill=\"#e57373\"/>\n";
            const int ly = y0 + plot_h - static_cast<int>(acc * plot_h + 0.5);
            line_points += std::to_string(cx) + "," + std::to_string(ly) + " ";
            svg += "<circle cx=\"" + std::to_string(cx) + "\" cy=\"" + std::to_string(ly) +
                   "\" r=\"3\" fill=\"#1565c0\"/>\n";
        } else {
            svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" +
                   std::to_string(y0 + plot_h - cov_px) + "\" width=\"" + std::to_string(bar_w) +
                   "\" height=\"" + std::to_string(cov_px) + "\" fill=\"#b0bec5\"/>\n";
        }
        svg += "<text x=\"" + std::to_string(cx) + "\" y=\"" + std::to_string(y0 + plot_h + 16) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + std::to_string(it.iteration) +
               "</text>\n";
    }
    if (!line_points.empty())
        svg += "<polyline points=\"" + line_points +
               "\" fill=\"none\" stroke=\"#1565c0\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + std::to_string(x0) + "\" y=\"" + std::to_string(y0 + plot_h + 40) +
           "\" font-size=\"11\">iteration</text>\n";
    svg += "</svg>\n";
    return svg;
}

std::string render_comparison_table(const std::vector<RunReport>& reports) {
    std::vector<std::vector<std::string>> columns;
    std::vector<std::string> labels = {"run",        "mode",        "seed",
                                       "iterations", "micro_f1",    "macro_f1",
                                       "n_evaluated", "final_coverage", "final_pool_accuracy"};
    columns.push_back(labels);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const RunReport& r = reports[i];
        std::vector<std::string> col;
        col.push_back(std::to_string(i + 1));
        col.push_back(r.mode);
        col.push_back(std::to_string(r.seed));
        col.push_back(std::to_string(r.iterations.size()));
        if (r.scores) {
            col.push_back(fmt("%.4f", r.scores->micro_f1));
            col.push_back(fmt("%.4f", r.scores->macro_f1));
            col.push_back(std::to_string(r.scores->n_evaluated));
        } else {
            col.insert(col.end(), {"-", "-", "-"});
        }
        if (!r.iterations.empty()) {
            const auto& last = r.iterations.back();
            col.push_back(fmt("%.4f", last.quality.coverage));
            col.push_back(last.quality.accuracy ? fmt("%.4f", *last.quality.accuracy)
                                                : std::string("-"));
        } else {
            col.insert(col.end(), {"-", "-"});
        }
        columns.push_back(col);
    }

    std::vector<std::size_t> widths(columns.size(), 0);
    for (std::size_t c = 0; c < columns.size(); ++c)
        for (const auto& cell : columns[c]) widths[c] = std::max(widths[c], cell.size());

    std::string out;
    for (std::size_t row = 0; row < labels.size(); ++row) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            std::string cell = columns[c][row];
            cell.resize(widths[c], ' ');
            out += cell;
            out += c + 1 < columns.size() ? "  " : "";
        }
        out += '\n';
    }
    return out;
}

void emit_report(const RunReport& report, const std::string& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw_eval("cannot create report directory '" + directory + "': " + ec.message());
    const std::filesystem::path dir(directory);
    write_results_json(report, (dir / "results.json").string());

    std::ofstream svg((dir / "pool_history.svg").string(), std::ios::binary);
    if (!svg) throw_eval("cannot write chart in '" + directory + "'");
    svg << render_pool_history_svg(report.iterations);

    std::ofstream table((dir / "scores.txt").string(), std::ios::binary);
    if (!table) throw_eval("cannot write score table in '" + directory + "'");
    table << render_comparison_table({report});
}

}  // namespace wsclass
