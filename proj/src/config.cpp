#include "wsclass/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wsclass/error.hpp"
#include "wsclass/http_backend.hpp"
#include "wsclass/lexicon.hpp"
#include "wsclass/linear_backend.hpp"
#include "wsclass/util/rng.hpp"

namespace wsclass {

namespace {

using ordered_json = nlohmann::ordered_json;

void check_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw_config("config: unknown key '" + key + "' in " + context);
}

const ordered_json& require(const ordered_json& obj, const std::string& key,
                            const std::string& context) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw_config("config: missing key '" + key + "' in " + context);
    return *it;
}

double as_number(const ordered_json& v, const std::string& what) {
    if (!v.is_number()) throw_config("config: " + what + " must be a number");
    return v.get<double>();
}

std::string as_string(const ordered_json& v, const std::string& what) {
    if (!v.is_string()) throw_config("config: " + what + " must be a string");
    return v.get<std::string>();
}

bool as_bool(const ordered_json& v, const std::string& what) {
    if (!v.is_boolean()) throw_config("config: " + what + " must be a boolean");
    return v.get<bool>();
}

int as_int(const ordered_json& v, const std::string& what) {
    if (!v.is_number_integer()) throw_config("config: " + what + " must be an integer");
    return v.get<int>();
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    const std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

TrainSpec parse_train_spec(const ordered_json& obj, TrainSpec defaults,
                           const std::string& context) {
    check_keys(obj,
               {"epochs", "batch_size", "peak_learning_rate", "optimizer", "weight_decay",
                "linear_decay", "frozen_layers"},
               context);
    TrainSpec spec = defaults;
    if (obj.contains("epochs")) spec.epochs = as_int(obj["epochs"], context + ".epochs");
    if (obj.contains("batch_size"))
        spec.batch_size = as_int(obj["batch_size"], context + ".batch_size");
    if (obj.contains("peak_learning_rate"))
        spec.peak_learning_rate =
            as_number(obj["peak_learning_rate"], context + ".peak_learning_rate");
    if (obj.contains("optimizer"))
        spec.optimizer = as_string(obj["optimizer"], context + ".optimizer");
    if (obj.contains("weight_decay"))
        spec.weight_decay = as_number(obj["weight_decay"], context + ".weight_decay");
    if (obj.contains("linear_decay"))
        spec.linear_decay = as_bool(obj["linear_decay"], context + ".linear_decay");
    if (obj.contains("frozen_layers"))
        spec.frozen_layers = as_int(obj["frozen_layers"], context + ".frozen_layers");
    return spec;
}

OracleCalibration parse_calibration(const ordered_json& obj, const std::string& context) {
    check_keys(obj,
               {"difficulty_tilt", "sharpen_max_gain", "sharpen_half_size", "noise_sensitivity",
                "memorize_rate", "replay_confidence", "overconfidence_floor",
                "overconfidence_ceiling", "maturity_half_size", "blunder_rate",
                "blunder_noise_amplification", "confidence_jitter"},
               context);
    OracleCalibration cal;
    auto grab = [&](const char* key, double& field) {
        if (obj.contains(key)) field = as_number(obj[key], context + "." + key);
    };
    grab("difficulty_tilt", cal.difficulty_tilt);
    grab("sharpen_max_gain", cal.sharpen_max_gain);
    grab("sharpen_half_size", cal.sharpen_half_size);
    grab("noise_sensitivity", cal.noise_sensitivity);
    grab("memorize_rate", cal.memorize_rate);
    grab("replay_confidence", cal.replay_confidence);
    grab("overconfidence_floor", cal.overconfidence_floor);
    grab("overconfidence_ceiling", cal.overconfidence_ceiling);
    grab("maturity_half_size", cal.maturity_half_size);
    grab("blunder_rate", cal.blunder_rate);
    grab("blunder_noise_amplification", cal.blunder_noise_amplification);
    grab("confidence_jitter", cal.confidence_jitter);
    return cal;
}

OracleSection parse_oracle(const ordered_json& obj, const std::vector<ClassDeclaration>& classes,
                           const std::string& context) {
    check_keys(obj, {"accuracy", "calibration"}, context);
    OracleSection section;
    if (obj.contains("accuracy")) {
        const auto& acc = obj["accuracy"];
        if (acc.is_number()) {
            section.accuracy = acc.get<double>();
        } else if (acc.is_object()) {
            for (const auto& [cls, value] : acc.items()) {
                bool declared = false;
                for (const auto& c : classes) declared = declared || c.id == cls;
                if (!declared)
                    throw_config("config: " + context + ".accuracy names undeclared class '" +
                                 cls + "'");
                section.accuracy_per_class[cls] =
                    as_number(value, context + ".accuracy." + cls);
            }
        } else {
            throw_config("config: " + context +
                         ".accuracy must be a number or an object of per-class numbers");
        }
    }
    if (obj.contains("calibration"))
        section.calibration = parse_calibration(obj["calibration"], context + ".calibration");
    return section;
}

}  // namespace

ConfigFile parse_config_text(const std::string& text, const std::string& base_dir) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw_config(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw_config("config: top level must be a JSON object");
    check_keys(j, {"corpus", "classes", "template", "backend", "run", "evaluation"},
               "the top level");

    ConfigFile config;
    config.source_text = text;
    config.base_dir = base_dir;

    const auto& corpus = require(j, "corpus", "the top level");
    check_keys(corpus, {"path", "format"}, "corpus");
    config.corpus_path =
        resolve_path(base_dir, as_string(require(corpus, "path", "corpus"), "corpus.path"));
    if (corpus.contains("format"))
        config.format.kind = as_string(corpus["format"], "corpus.format");
    if (config.format.kind != "jsonl")
        throw_config("config: unsupported corpus format '" + config.format.kind + "'");

    const auto& classes = require(j, "classes", "the top level");
    if (!classes.is_array() || classes.size() < 2)
        throw_config("config: classes must be an array of at least two entries");
    for (const auto& entry : classes) {
        check_keys(entry, {"id", "label_name"}, "a classes entry");
        ClassDeclaration decl;
        decl.id = as_string(require(entry, "id", "a classes entry"), "classes.id");
        decl.label_name =
            as_string(require(entry, "label_name", "a classes entry"), "classes.label_name");
        config.classes.push_back(std::move(decl));
    }

    const auto& tmpl = require(j, "template", "the top level");
    check_keys(tmpl, {"pattern", "slot"}, "template");
    config.template_pattern =
        as_string(require(tmpl, "pattern", "template"), "template.pattern");
    config.slot_kind =
        slot_kind_from_string(as_string(require(tmpl, "slot", "template"), "template.slot"));

    const auto& backend = require(j, "backend", "the top level");
    config.backend_kind =
        as_string(require(backend, "kind", "backend"), "backend.kind");
    if (config.backend_kind == "synthetic") {
        check_keys(backend, {"kind", "world_seed", "encoder", "head_oracle", "prompt_oracle"},
                   "backend");
        if (backend.contains("world_seed")) {
            if (!backend["world_seed"].is_number_unsigned() &&
                !backend["world_seed"].is_number_integer())
                throw_config("config: backend.world_seed must be an integer");
            config.world_seed = backend["world_seed"].get<std::uint64_t>();
        }
        if (backend.contains("encoder")) {
            const auto& enc = backend["encoder"];
            check_keys(enc, {"noise_rate", "difficulty_tilt", "score_jitter"}, "backend.encoder");
            if (enc.contains("noise_rate"))
                config.encoder_params.noise_rate =
                    as_number(enc["noise_rate"], "backend.encoder.noise_rate");
            if (enc.contains("difficulty_tilt"))
                config.encoder_params.difficulty_tilt =
                    as_number(enc["difficulty_tilt"], "backend.encoder.difficulty_tilt");
            if (enc.contains("score_jitter"))
                config.encoder_params.score_jitter =
                    as_number(enc["score_jitter"], "backend.encoder.score_jitter");
        }
        if (backend.contains("head_oracle"))
            config.head_oracle =
                parse_oracle(backend["head_oracle"], config.classes, "backend.head_oracle");
        if (backend.contains("prompt_oracle"))
            config.prompt_oracle =
                parse_oracle(backend["prompt_oracle"], config.classes, "backend.prompt_oracle");
    } else if (config.backend_kind == "discriminative" || config.backend_kind == "generative") {
        check_keys(backend, {"kind", "scorer", "trainable", "feature_dim", "init_scale"},
                   "backend");
        config.scorer = as_string(require(backend, "scorer", "backend"), "backend.scorer");
        if (backend.contains("trainable"))
            config.trainable = as_string(backend["trainable"], "backend.trainable");
        if (backend.contains("feature_dim")) {
            const int dim = as_int(backend["feature_dim"], "backend.feature_dim");
            if (dim < 2) throw_config("config: backend.feature_dim must be >= 2");
            config.feature_dim = static_cast<std::size_t>(dim);
        }
        if (backend.contains("init_scale"))
            config.init_scale = as_number(backend["init_scale"], "backend.init_scale");
    } else {
        throw_config("config: backend.kind must be synthetic, discriminative or generative");
    }

    bool imbalanced = false;
    bool s_given = false, iterations_given = false;
    if (j.contains("run")) {
        const auto& run = j["run"];
        check_keys(run,
                   {"mode", "seed", "output_dir", "t0", "s", "p_floor", "iterations", "schedule",
                    "imbalanced", "r", "q", "min_per_class", "freeze_layers_until_iteration",
                    "stop_on_no_growth", "no_growth_fraction", "head_train", "prompt_train"},
                   "run");
        if (run.contains("mode"))
            config.run.mode = pipeline_mode_from_string(as_string(run["mode"], "run.mode"));
        if (run.contains("seed")) {
            if (!run["seed"].is_number_unsigned() && !run["seed"].is_number_integer())
                throw_config("config: run.seed must be an integer");
            config.run.master_seed = run["seed"].get<std::uint64_t>();
        }
        if (run.contains("output_dir"))
            config.run.output_dir = as_string(run["output_dir"], "run.output_dir");
        if (run.contains("t0")) config.run.t0 = as_number(run["t0"], "run.t0");
        if (run.contains("imbalanced"))
            imbalanced = as_bool(run["imbalanced"], "run.imbalanced");
        if (run.contains("s")) {
            config.run.schedule.s = as_number(run["s"], "run.s");
            s_given = true;
        }
        if (run.contains("p_floor"))
            config.run.schedule.p_floor = as_number(run["p_floor"], "run.p_floor");
        if (run.contains("iterations")) {
            config.run.schedule.iterations = as_int(run["iterations"], "run.iterations");
            iterations_given = true;
        }
        if (run.contains("schedule"))
            config.run.schedule.mode =
                schedule_mode_from_string(as_string(run["schedule"], "run.schedule"));
        if (run.contains("r")) config.run.r = as_int(run["r"], "run.r");
        if (run.contains("q")) config.run.q = as_number(run["q"], "run.q");
        if (run.contains("min_per_class")) {
            const int mpc = as_int(run["min_per_class"], "run.min_per_class");
            if (mpc < 1) throw_config("config: run.min_per_class must be >= 1");
            config.run.subset.min_per_class = static_cast<std::size_t>(mpc);
        }
        if (run.contains("freeze_layers_until_iteration"))
            config.run.freeze_layers_until_iteration =
                as_int(run["freeze_layers_until_iteration"], "run.freeze_layers_until_iteration");
        if (run.contains("stop_on_no_growth"))
            config.run.stop_on_no_growth =
                as_bool(run["stop_on_no_growth"], "run.stop_on_no_growth");
        if (run.contains("no_growth_fraction"))
            config.run.no_growth_fraction =
                as_number(run["no_growth_fraction"], "run.no_growth_fraction");

        TrainSpec head_defaults;  // reference recipe: 5 epochs, batch 32, 2e-5
        TrainSpec prompt_defaults = head_defaults;
        if (config.backend_kind == "generative") prompt_defaults.peak_learning_rate = 1e-5;
        config.run.head_train = run.contains("head_train")
                                    ? parse_train_spec(run["head_train"], head_defaults,
                                                       "run.head_train")
                                    : head_defaults;
        config.run.prompt_train = run.contains("prompt_train")
                                      ? parse_train_spec(run["prompt_train"], prompt_defaults,
                                                         "run.prompt_train")
                                      : prompt_defaults;
    }
    if (!s_given && imbalanced) config.run.schedule.s = 0.35;
    if (!iterations_given)
        config.run.schedule.iterations =
            std::max(1, static_cast<int>(std::lround(1.0 / config.run.schedule.s)));

    if (j.contains("evaluation")) {
        const auto& ev = j["evaluation"];
        check_keys(ev, {"enabled"}, "evaluation");
        if (ev.contains("enabled"))
            config.evaluation_enabled = as_bool(ev["enabled"], "evaluation.enabled");
    }

    config.run.validate();
    config.encoder_params.validate();
    config.head_oracle.calibration.validate();
    config.prompt_oracle.calibration.validate();
    return config;
}

ConfigFile parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_config("cannot read config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(),
                             std::filesystem::path(path).parent_path().string());
}

std::string config_digest(const ConfigFile& config) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(rng::fnv1a(config.source_text)));
    return buf;
}

std::string serialize_run_config(const RunConfig& run) {
    ordered_json j;
    j["mode"] = to_string(run.mode);
    j["seed"] = run.master_seed;
    j["output_dir"] = run.output_dir;
    j["t0"] = run.t0;
    j["s"] = run.schedule.s;
    j["p_floor"] = run.schedule.p_floor;
    j["iterations"] = run.schedule.iterations;
    j["schedule"] = to_string(run.schedule.mode);
    j["r"] = run.r;
    j["q"] = run.q;
    j["min_per_class"] = run.subset.min_per_class;
    j["freeze_layers_until_iteration"] = run.freeze_layers_until_iteration;
    j["stop_on_no_growth"] = run.stop_on_no_growth;
    j["no_growth_fraction"] = run.no_growth_fraction;
    auto spec_json = [](const TrainSpec& spec) {
        ordered_json s;
        s["epochs"] = spec.epochs;
        s["batch_size"] = spec.batch_size;
        s["peak_learning_rate"] = spec.peak_learning_rate;
        s["optimizer"] = spec.optimizer;
        s["weight_decay"] = spec.weight_decay;
        s["linear_decay"] = spec.linear_decay;
        s["frozen_layers"] = spec.frozen_layers;
        return s;
    };
    j["head_train"] = spec_json(run.head_train);
    j["prompt_train"] = spec_json(run.prompt_train);
    return j.dump(2);
}

namespace {

struct ScorerParts {
    std::shared_ptr<DiscriminativeEncoder> discriminative;
    std::shared_ptr<GenerativeEncoder> generative;
};

bool is_http_url(const std::string& s) {
    return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0;
}

ScorerParts build_scorer_parts(const ConfigFile& config, const Dataset& dataset) {
    ScorerParts parts;
    if (config.backend_kind == "synthetic") {
        if (dataset.gold.empty())
            throw_config(
                "synthetic backend needs gold labels in the corpus as simulation truth");
        auto encoder = std::make_shared<SyntheticEncoder>(
            dataset.corpus.classes(), dataset.gold, config.encoder_params, config.world_seed);
        parts.discriminative = encoder;
        parts.generative = encoder;
        return parts;
    }
    if (config.scorer.rfind("lexicon:", 0) == 0) {
        if (config.backend_kind != "discriminative")
            throw_config("config: a lexicon scorer needs backend.kind = discriminative");
        const std::string path =
            resolve_path(config.base_dir, config.scorer.substr(std::string("lexicon:").size()));
        Lexicon lexicon = load_lexicon(path);
        for (const auto& cls : dataset.corpus.classes())
            if (!lexicon.has_label(cls.label_name))
                throw_config("lexicon '" + path + "' has no entry for label '" +
                             cls.label_name + "'");
        parts.discriminative = std::make_shared<LexiconEncoder>(std::move(lexicon));
        return parts;
    }
    throw_config("config: backend.scorer must be 'lexicon:PATH' or an http(s) URL");
}

}  // namespace

World build_world(const ConfigFile& config) {
    World world;

    // Tokenizer first; the corpus loader needs it for label-name pieces.
    std::shared_ptr<HttpEncoderSession> http_session;
    if (config.backend_kind != "synthetic" && is_http_url(config.scorer)) {
        http_session = std::make_shared<HttpEncoderSession>(config.scorer);
        world.tokenizer = std::make_shared<HttpTokenizer>(http_session);
    } else {
        world.tokenizer = std::make_shared<BasicTokenizer>();
    }

    const PromptTemplate tmpl(config.template_pattern, config.slot_kind);
    world.dataset = std::make_unique<Dataset>(load_corpus(
        config.corpus_path, config.format, config.classes, tmpl, *world.tokenizer));
    const Corpus& corpus = world.dataset->corpus;

    const LabelNameReport label_report = validate_label_names(corpus, *world.tokenizer);
    if (label_report.any_unsupported())
        throw_config("label names unsupported under this template:\n" + label_report.to_text());

    if (http_session) {
        if (config.backend_kind == "discriminative")
            world.discriminative = std::make_shared<HttpDiscriminativeEncoder>(http_session);
        else
            world.generative = std::make_shared<HttpGenerativeEncoder>(http_session);
    } else {
        ScorerParts parts = build_scorer_parts(config, *world.dataset);
        world.discriminative = parts.discriminative;
        world.generative = parts.generative;
    }

    if (config.slot_kind == SlotKind::Label) {
        if (!world.discriminative)
            throw_config(
                "a label-slot template needs a replaced-token scorer; configure a "
                "discriminative or synthetic backend");
        world.scorer = std::make_shared<DiscriminativeZeroShot>(corpus, *world.discriminative,
                                                                *world.tokenizer);
    } else {
        if (!world.generative)
            throw_config(
                "a mask-slot template needs a masked-token scorer; configure a generative or "
                "synthetic backend");
        world.scorer =
            std::make_shared<GenerativeZeroShot>(corpus, *world.generative, *world.tokenizer);
    }

    if (config.backend_kind == "synthetic") {
        auto accuracy_map = [&](const OracleSection& section) {
            return section.accuracy_per_class.empty()
                       ? SyntheticOracleBackend::uniform_accuracy(corpus.classes(),
                                                                  section.accuracy)
                       : section.accuracy_per_class;
        };
        world.backends.head = std::make_shared<SyntheticOracleBackend>(
            ViewKind::Head, corpus.classes(), world.dataset->gold,
            accuracy_map(config.head_oracle), config.head_oracle.calibration, config.world_seed);
        world.backends.prompt = std::make_shared<SyntheticOracleBackend>(
            ViewKind::Prompt, corpus.classes(), world.dataset->gold,
            accuracy_map(config.prompt_oracle), config.prompt_oracle.calibration,
            config.world_seed);
    } else if (config.trainable == "builtin-linear") {
        LinearOptions options;
        options.feature_dim = config.feature_dim;
        options.init_scale = config.init_scale;
        world.backends.head = std::make_shared<LinearBackend>(
            ViewKind::Head, corpus.classes(), world.tokenizer, std::nullopt, options);
        if (config.slot_kind == SlotKind::Label)
            world.backends.prompt = std::make_shared<LinearBackend>(
                ViewKind::Prompt, corpus.classes(), world.tokenizer, tmpl, options);
    } else if (is_http_url(config.trainable)) {
        auto trainable_session = http_session && http_session->base_url() == config.trainable
                                     ? http_session
                                     : std::make_shared<HttpEncoderSession>(config.trainable);
        world.backends.head =
            std::make_shared<HttpClassifierBackend>(ViewKind::Head, trainable_session);
        world.backends.prompt =
            std::make_shared<HttpClassifierBackend>(ViewKind::Prompt, trainable_session);
    } else {
        throw_config("config: backend.trainable must be 'builtin-linear' or an http(s) URL");
    }

    const bool needs_prompt = config.run.mode == PipelineMode::CoTrain ||
                              (config.run.mode == PipelineMode::Ensemble && config.run.r > 0);
    if (needs_prompt && !world.backends.prompt)
        throw_config("mode " + to_string(config.run.mode) +
                     " needs a prompt view, but a mask-slot template cannot drive the built-in "
                     "trainable prompt view; use two_stage/self_train or an http backend");
    return world;
}

}  // namespace wsclass
