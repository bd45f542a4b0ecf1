#include "wsclass/http_backend.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "wsclass/error.hpp"

namespace wsclass {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json parse_reply(const std::string& path, const std::string& body) {
    try {
        return ordered_json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw_stage("http backend: " + path + " returned invalid JSON: " + e.what());
    }
}

}  // namespace

struct HttpEncoderSession::Impl {
    explicit Impl(const std::string& url) : client(url) {
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(600, 0);
        client.set_write_timeout(60, 0);
    }
    mutable httplib::Client client;
};

HttpEncoderSession::HttpEncoderSession(const std::string& base_url)
    : base_url_(base_url), impl_(std::make_unique<Impl>(base_url)) {
    const ordered_json info = parse_reply("/info", post_json("/info", "{}"));
    encoder_depth_ = info.value("encoder_depth", 1);
    mask_token_ = info.value("mask_token", std::string("[MASK]"));
    max_sequence_tokens_ = info.value("max_sequence_tokens", std::size_t{256});
    if (encoder_depth_ < 1) throw_stage("http backend: server reported encoder_depth < 1");
}

HttpEncoderSession::~HttpEncoderSession() = default;

std::string HttpEncoderSession::post_json(const std::string& path,
                                          const std::string& body) const {
    auto result = impl_->client.Post(path, body, "application/json");
    if (!result)
        throw_stage("http backend: POST " + path + " to " + base_url_ + " failed: " +
                    httplib::to_string(result.error()));
    if (result->status != 200)
        throw_stage("http backend: POST " + path + " returned status " +
                    std::to_string(result->status) + ": " + result->body.substr(0, 200));
    return result->body;
}

struct HttpTokenizer::Cache {
    std::map<std::string, std::vector<std::string>> by_text;
};

HttpTokenizer::HttpTokenizer(std::shared_ptr<HttpEncoderSession> session)
    : session_(std::move(session)), cache_(std::make_shared<Cache>()) {}

std::vector<std::string> HttpTokenizer::tokenize(const std::string& text) const {
    const auto cached = cache_->by_text.find(text);
    if (cached != cache_->by_text.end()) return cached->second;
    ordered_json body;
    body["text"] = text;
    const ordered_json reply =
        parse_reply("/tokenize", session_->post_json("/tokenize", body.dump()));
    auto tokens = reply.value("tokens", std::vector<std::string>{});
    cache_->by_text.emplace(text, tokens);
    return tokens;
}

std::string HttpTokenizer::mask_token() const { return session_->mask_token(); }

std::size_t HttpTokenizer::max_sequence_tokens() const { return session_->max_sequence_tokens(); }

namespace {

ordered_json sequence_json(const TokenSequence& rendered) {
    ordered_json j;
    j["doc_id"] = rendered.doc_id;
    j["tokens"] = rendered.tokens;
    j["slot"] = {{"begin", rendered.slot.begin}, {"end", rendered.slot.end}};
    j["slot_text"] = rendered.slot_text;
    return j;
}

}  // namespace

HttpDiscriminativeEncoder::HttpDiscriminativeEncoder(std::shared_ptr<HttpEncoderSession> session)
    : session_(std::move(session)) {}

std::vector<double> HttpDiscriminativeEncoder::originality_logits(
    const TokenSequence& rendered) const {
    const ordered_json reply = parse_reply(
        "/originality", session_->post_json("/originality", sequence_json(rendered).dump()));
    auto logits = reply.value("logits", std::vector<double>{});
    if (logits.size() != rendered.tokens.size())
        throw_stage("http backend: /originality returned " + std::to_string(logits.size()) +
                    " logits for " + std::to_string(rendered.tokens.size()) + " tokens");
    return logits;
}

HttpGenerativeEncoder::HttpGenerativeEncoder(std::shared_ptr<HttpEncoderSession> session)
    : session_(std::move(session)) {}

std::vector<double> HttpGenerativeEncoder::vocabulary_logits(const TokenSequence& rendered,
                                                             std::size_t mask_index) const {
    ordered_json body = sequence_json(rendered);
    body["mask_index"] = mask_index;
    const ordered_json reply =
        parse_reply("/vocabulary_logits", session_->post_json("/vocabulary_logits", body.dump()));
    auto logits = reply.value("logits", std::vector<double>{});
    if (logits.empty()) throw_stage("http backend: /vocabulary_logits returned no logits");
    return logits;
}

std::optional<std::size_t> HttpGenerativeEncoder::vocabulary_index(
    const std::string& piece) const {
    ordered_json body;
    body["piece"] = piece;
    const ordered_json reply =
        parse_reply("/vocabulary_index", session_->post_json("/vocabulary_index", body.dump()));
    if (!reply.contains("index") || reply["index"].is_null()) return std::nullopt;
    return reply["index"].get<std::size_t>();
}

namespace {

class HttpClassifier : public Classifier {
public:
    HttpClassifier(ViewKind view, std::shared_ptr<HttpEncoderSession> session,
                   std::string model_id)
        : view_(view), session_(std::move(session)), model_id_(std::move(model_id)) {}

    void fit(std::span<const LabeledDoc> examples, const TrainSpec& spec) override {
        ordered_json body;
        body["model_id"] = model_id_;
        body["examples"] = ordered_json::array();
        for (const auto& ex : examples)
            body["examples"].push_back(
                {{"doc_id", ex.doc_id}, {"text", ex.text}, {"label", ex.label}});
        body["spec"] = {{"epochs", spec.epochs},
                        {"batch_size", spec.batch_size},
                        {"peak_learning_rate", spec.peak_learning_rate},
                        {"optimizer", spec.optimizer},
                        {"weight_decay", spec.weight_decay},
                        {"linear_decay", spec.linear_decay},
                        {"frozen_layers", spec.frozen_layers}};
        parse_reply("/fit", session_->post_json("/fit", body.dump()));
    }

    std::vector<Prediction> predict(const Corpus& corpus) const override {
        ordered_json body;
        body["model_id"] = model_id_;
        body["documents"] = ordered_json::array();
        for (const auto& doc : corpus.documents())
            body["documents"].push_back({{"id", doc.id}, {"text", doc.text}});
        const ordered_json reply =
            parse_reply("/predict", session_->post_json("/predict", body.dump()));
        std::vector<Prediction> out;
        for (const auto& pj : reply.value("predictions", ordered_json::array())) {
            Prediction p;
            p.doc_id = pj.value("doc_id", "");
            p.class_id = pj.value("class_id", "");
            p.confidence = pj.value("confidence", 0.0);
            out.push_back(std::move(p));
        }
        return out;
    }

    std::string save(const std::string& directory, const std::string& stem) const override {
        ordered_json body;
        body["model_id"] = model_id_;
        const ordered_json reply =
            parse_reply("/serialize", session_->post_json("/serialize", body.dump()));
        std::filesystem::create_directories(directory);
        const std::string path = (std::filesystem::path(directory) / (stem + ".json")).string();
        ordered_json artifact;
        artifact["format"] = "http-classifier";
        artifact["view"] = to_string(view_);
        artifact["state"] = reply.value("state", ordered_json(nullptr));
        std::ofstream out(path, std::ios::binary);
        if (!out) throw_stage("cannot write classifier artifact '" + path + "'");
        out << artifact.dump() << '\n';
        if (!out) throw_stage("short write on classifier artifact '" + path + "'");
        return path;
    }

private:
    ViewKind view_;
    std::shared_ptr<HttpEncoderSession> session_;
    std::string model_id_;
};

}  // namespace

HttpClassifierBackend::HttpClassifierBackend(ViewKind view,
                                             std::shared_ptr<HttpEncoderSession> session)
    : view_(view), session_(std::move(session)) {}

std::string HttpClassifierBackend::name() const {
    return std::string("http_") + (view_ == ViewKind::Head ? "head" : "prompt") + "@" +
           session_->base_url();
}

int HttpClassifierBackend::encoder_depth() const { return session_->encoder_depth(); }

std::unique_ptr<Classifier> HttpClassifierBackend::fresh_init(std::uint64_t seed) const {
    ordered_json body;
    body["view"] = to_string(view_);
    body["seed"] = seed;
    if (const char* cache = std::getenv("WSCLASS_CACHE_DIR")) body["cache_dir"] = cache;
    const ordered_json reply =
        parse_reply("/fresh_init", session_->post_json("/fresh_init", body.dump()));
    const std::string model_id = reply.value("model_id", "");
    if (model_id.empty()) throw_stage("http backend: /fresh_init returned no model_id");
    return std::make_unique<HttpClassifier>(view_, session_, model_id);
}

std::unique_ptr<Classifier> HttpClassifierBackend::load(const std::string& artifact_path) const {
    std::ifstream in(artifact_path, std::ios::binary);
    if (!in) throw_data("cannot read classifier artifact '" + artifact_path + "'");
    ordered_json artifact;
    try {
        artifact = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw_data("classifier artifact '" + artifact_path + "': " + e.what());
    }
    if (artifact.value("format", "") != "http-classifier")
        throw_data("classifier artifact '" + artifact_path + "' has the wrong format tag");
    if (artifact.value("view", "") != to_string(view_))
        throw_data("classifier artifact '" + artifact_path + "' was trained for view '" +
                   artifact.value("view", "") + "', backend is '" + to_string(view_) + "'");
    ordered_json body;
    body["view"] = to_string(view_);
    body["state"] = artifact.value("state", ordered_json(nullptr));
    const ordered_json reply =
        parse_reply("/restore", session_->post_json("/restore", body.dump()));
    const std::string model_id = reply.value("model_id", "");
    if (model_id.empty()) throw_stage("http backend: /restore returned no model_id");
    return std::make_unique<HttpClassifier>(view_, session_, model_id);
}

}  // namespace wsclass
