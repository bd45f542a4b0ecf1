#pragma once

#include <memory>
#include <string>

#include "wsclass/backend.hpp"
#include "wsclass/prompting.hpp"
#include "wsclass/tokenizer.hpp"

namespace wsclass {

// REST client for an encoder server (see README for the endpoint contract).
// One HttpEncoderSession per base URL; the pipeline-facing adapters below
// share it. All calls are synchronous; any transport or protocol failure
// surfaces as a stage error.
class HttpEncoderSession {
public:
    explicit HttpEncoderSession(const std::string& base_url);
    ~HttpEncoderSession();

    HttpEncoderSession(const HttpEncoderSession&) = delete;
    HttpEncoderSession& operator=(const HttpEncoderSession&) = delete;

    const std::string& base_url() const { return base_url_; }
    int encoder_depth() const { return encoder_depth_; }
    std::string mask_token() const { return mask_token_; }
    std::size_t max_sequence_tokens() const { return max_sequence_tokens_; }

    // POST `path` with a JSON body, expect a JSON reply.
    std::string post_json(const std::string& path, const std::string& body) const;

private:
    std::string base_url_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int encoder_depth_ = 1;
    std::string mask_token_ = "[MASK]";
    std::size_t max_sequence_tokens_ = 256;
};

// Remote tokenization with a per-text cache (the pipeline re-tokenizes the
// same documents every iteration).
class HttpTokenizer : public Tokenizer {
public:
    explicit HttpTokenizer(std::shared_ptr<HttpEncoderSession> session);

    std::vector<std::string> tokenize(const std::string& text) const override;
    std::string mask_token() const override;
    std::size_t max_sequence_tokens() const override;

private:
    std::shared_ptr<HttpEncoderSession> session_;
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

class HttpDiscriminativeEncoder : public DiscriminativeEncoder {
public:
    explicit HttpDiscriminativeEncoder(std::shared_ptr<HttpEncoderSession> session);
    std::vector<double> originality_logits(const TokenSequence& rendered) const override;

private:
    std::shared_ptr<HttpEncoderSession> session_;
};

class HttpGenerativeEncoder : public GenerativeEncoder {
public:
    explicit HttpGenerativeEncoder(std::shared_ptr<HttpEncoderSession> session);
    std::vector<double> vocabulary_logits(const TokenSequence& rendered,
                                          std::size_t mask_index) const override;
    std::optional<std::size_t> vocabulary_index(const std::string& piece) const override;

private:
    std::shared_ptr<HttpEncoderSession> session_;
};

// Fine-tuning views hosted by the server; models are referenced by the
// opaque model_id the server hands out, and artifacts are serialized server
// state written to local files.
class HttpClassifierBackend : public ClassifierBackend {
public:
    HttpClassifierBackend(ViewKind view, std::shared_ptr<HttpEncoderSession> session);

    ViewKind view() const override { return view_; }
    std::string name() const override;
    int encoder_depth() const override;

    std::unique_ptr<Classifier> fresh_init(std::uint64_t seed) const override;
    std::unique_ptr<Classifier> load(const std::string& artifact_path) const override;

private:
    ViewKind view_;
    std::shared_ptr<HttpEncoderSession> session_;
};

}  // namespace wsclass
