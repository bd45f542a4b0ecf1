#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wsclass/backend.hpp"
#include "wsclass/corpus.hpp"
#include "wsclass/prompting.hpp"
#include "wsclass/synthetic_backend.hpp"
#include "wsclass/tokenizer.hpp"
#include "wsclass/trainer.hpp"

namespace wsclass {

struct OracleSection {
    std::map<ClassId, double> accuracy_per_class;  // empty means uniform scalar
    double accuracy = 0.70;
    OracleCalibration calibration;
};

// Parsed, validated run configuration. Unknown keys anywhere are rejected.
struct ConfigFile {
    std::string corpus_path;  // resolved against the config file's directory
    FormatSpec format;
    std::vector<ClassDeclaration> classes;
    std::string template_pattern;
    SlotKind slot_kind = SlotKind::Label;

    std::string backend_kind;  // synthetic | discriminative | generative
    std::string scorer;        // lexicon:PATH | http(s)://URL (empty for synthetic)
    std::string trainable = "builtin-linear";  // builtin-linear | http:URL
    std::size_t feature_dim = 1u << 14;
    double init_scale = 0.01;

    std::uint64_t world_seed = 0x5EEDF00Dull;
    SyntheticEncoderParams encoder_params;
    OracleSection head_oracle;
    OracleSection prompt_oracle;

    RunConfig run;
    bool evaluation_enabled = true;

    std::string source_text;  // verbatim file bytes, snapshotted into run dirs
    std::string base_dir;
};

ConfigFile parse_config_file(const std::string& path);
ConfigFile parse_config_text(const std::string& text, const std::string& base_dir);

// 16-hex-digit digest of the verbatim config text.
std::string config_digest(const ConfigFile& config);

// Canonical JSON of the effective run settings (defaults applied); two
// configs that resolve to the same run serialize identically.
std::string serialize_run_config(const RunConfig& run);

// Everything parse-time wiring produces. The scorer holds references into
// *dataset, so keep the bundle together and do not move the Dataset out.
struct World {
    std::shared_ptr<const Tokenizer> tokenizer;
    std::unique_ptr<Dataset> dataset;
    std::shared_ptr<DiscriminativeEncoder> discriminative;
    std::shared_ptr<GenerativeEncoder> generative;
    std::shared_ptr<ZeroShotScorer> scorer;
    BackendSet backends;
};

// Loads the corpus and constructs tokenizer, zero-shot scorer and both
// fine-tuning backends per the config.
World build_world(const ConfigFile& config);

}  // namespace wsclass
