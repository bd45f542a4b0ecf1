// Deterministic review-style corpus generator for benchmarks and demos.
// Every document mixes cue words of its class with shared filler; the cue
// density varies per document, so the corpus has easy and hard cases.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wsclass/util/rng.hpp"

namespace {

struct ClassBank {
    std::string label;
    std::vector<std::string> cues;
};

const std::vector<ClassBank> kBanks = {
    {"good",
     {"great", "excellent", "wonderful", "delicious", "friendly", "amazing", "loved",
      "perfect", "enjoyed", "fantastic", "fresh", "recommend"}},
    {"bad",
     {"terrible", "awful", "rude", "disappointing", "horrible", "stale", "bland",
      "worst", "broken", "dirty", "overpriced", "avoid"}},
};

const std::vector<std::string> kFiller = {
    "the",   "food",  "service", "place",   "visit", "staff",  "came", "back",
    "time",  "order", "meal",    "evening", "table", "drinks", "menu", "again",
    "really", "quite", "pretty",  "just",    "very",  "around", "went", "today"};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate a deterministic labeled review corpus (JSONL)"};
    std::string out_path;
    int n = 2000;
    std::uint64_t seed = 7;
    bool unlabeled = false;
    app.add_option("--out", out_path, "Output JSONL path")->required();
    app.add_option("--n", n, "Number of documents");
    app.add_option("--seed", seed, "Generator seed");
    app.add_flag("--unlabeled", unlabeled, "Omit the label field");
    CLI11_PARSE(app, argc, argv);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot write " << out_path << "\n";
        return 1;
    }

    for (int i = 0; i < n; ++i) {
        wsclass::rng::Rng rng(wsclass::rng::mix(seed, static_cast<std::uint64_t>(i)));
        const std::size_t cls = i % kBanks.size();  // balanced classes
        const ClassBank& bank = kBanks[cls];

        const int length = 8 + static_cast<int>(rng.index(13));       // 8..20 words
        const int cue_count = 1 + static_cast<int>(rng.index(4));     // 1..4 cues
        std::vector<std::string> words;
        for (int w = 0; w < length; ++w) words.push_back(kFiller[rng.index(kFiller.size())]);
        for (int c = 0; c < cue_count; ++c)
            words[rng.index(words.size())] = bank.cues[rng.index(bank.cues.size())];

        std::string text;
        for (std::size_t w = 0; w < words.size(); ++w) {
            if (w) text += ' ';
            text += words[w];
        }

        nlohmann::ordered_json record;
        record["id"] = std::to_string(i);
        record["text"] = text;
        if (!unlabeled) record["label"] = bank.label;
        out << record.dump() << "\n";
    }
    std::cout << "wrote " << n << " documents to " << out_path << "\n";
    return 0;
}
