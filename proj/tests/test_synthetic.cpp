#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "wsclass/error.hpp"
#include "wsclass/prompting.hpp"
#include "wsclass/synthetic_backend.hpp"

using namespace wsclass;

namespace {

constexpr std::uint64_t kWorld = 1337;

Corpus wide_corpus(std::size_t n) { return testutil::make_corpus(testutil::alternating_docs(n)); }

SyntheticOracleBackend oracle(double accuracy, OracleCalibration cal = {},
                              ViewKind view = ViewKind::Head, std::size_t n = 2000) {
    const auto classes = testutil::two_classes();
    return SyntheticOracleBackend(view, classes, testutil::alternating_gold(n),
                                  SyntheticOracleBackend::uniform_accuracy(classes, accuracy), cal,
                                  kWorld);
}

double empirical_accuracy(const std::vector<Prediction>& predictions, const GoldLabels& gold) {
    std::size_t correct = 0;
    for (const auto& p : predictions)
        if (gold.at(p.doc_id) == p.class_id) ++correct;
    return static_cast<double>(correct) / predictions.size();
}

}  // namespace

TEST_CASE("document difficulty is deterministic and in [0,1)") {
    const double d = document_difficulty(kWorld, "42");
    CHECK(d == document_difficulty(kWorld, "42"));
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
    CHECK(document_difficulty(kWorld, "43") != d);
    CHECK(document_difficulty(kWorld + 1, "42") != d);
}

TEST_CASE("perfect oracle predicts the hidden truth everywhere") {
    const Corpus corpus = wide_corpus(200);
    const GoldLabels gold = testutil::alternating_gold(200);
    const auto backend = oracle(1.0, {}, ViewKind::Head, 200);
    const auto model = backend.fresh_init(1);
    CHECK(empirical_accuracy(model->predict(corpus), gold) == 1.0);
}

TEST_CASE("unfit oracle tracks its configured accuracy within Monte Carlo tolerance") {
    const Corpus corpus = wide_corpus(2000);
    const GoldLabels gold = testutil::alternating_gold(2000);
    const auto backend = oracle(0.5);
    const auto model = backend.fresh_init(7);
    CHECK(empirical_accuracy(model->predict(corpus), gold) == doctest::Approx(0.5).epsilon(0.06));

    const auto backend7 = oracle(0.7);
    const auto model7 = backend7.fresh_init(7);
    CHECK(empirical_accuracy(model7->predict(corpus), gold) ==
          doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("same seed twice gives a byte identical prediction stream") {
    const Corpus corpus = wide_corpus(300);
    const auto backend = oracle(0.7, {}, ViewKind::Head, 300);
    const auto a = backend.fresh_init(99);
    const auto b = backend.fresh_init(99);
    const auto pa = a->predict(corpus);
    const auto pb = b->predict(corpus);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i].doc_id == pb[i].doc_id);
        CHECK(pa[i].class_id == pb[i].class_id);
        CHECK(pa[i].confidence == pb[i].confidence);
    }
}

TEST_CASE("the two views draw distinct error streams from one world") {
    const Corpus corpus = wide_corpus(500);
    const auto head = oracle(0.7, {}, ViewKind::Head, 500).fresh_init(1);
    const auto prompt = oracle(0.7, {}, ViewKind::Prompt, 500).fresh_init(1);
    const auto ph = head->predict(corpus);
    const auto pp = prompt->predict(corpus);
    std::size_t differing = 0;
    for (std::size_t i = 0; i < ph.size(); ++i)
        if (ph[i].class_id != pp[i].class_id) ++differing;
    // Independent 30% error fronts disagree on roughly 2*0.3*0.7 of documents.
    CHECK(differing > 50);
}

TEST_CASE("training volume sharpens accuracy and noise degrades it") {
    OracleCalibration cal;
    cal.sharpen_max_gain = 0.25;
    cal.sharpen_half_size = 50.0;
    cal.noise_sensitivity = 0.9;
    const Corpus corpus = wide_corpus(2000);
    const GoldLabels gold = testutil::alternating_gold(2000);
    const auto backend = oracle(0.7, cal);

    TrainSpec spec;
    std::vector<LabeledDoc> clean;
    for (std::size_t i = 0; i < 400; ++i)
        clean.push_back({std::to_string(i), "text", gold.at(std::to_string(i))});

    auto clean_model = backend.fresh_init(5);
    clean_model->fit(clean, spec);
    const double clean_acc = empirical_accuracy(clean_model->predict(corpus), gold);
    // 0.7 base + 0.25 * 400/450 lift, minus nothing.
    CHECK(clean_acc > 0.85);

    auto noisy = clean;
    for (std::size_t i = 0; i < noisy.size(); i += 3)
        noisy[i].label = noisy[i].label == "good" ? "bad" : "good";
    auto noisy_model = backend.fresh_init(5);
    noisy_model->fit(noisy, spec);
    const double noisy_acc = empirical_accuracy(noisy_model->predict(corpus), gold);
    CHECK(noisy_acc < clean_acc - 0.15);
}

TEST_CASE("memorization replays trained labels at the configured rate") {
    OracleCalibration cal;
    cal.memorize_rate = 1.0;
    cal.replay_confidence = 0.93;
    const std::size_t n = 400;
    const Corpus corpus = wide_corpus(n);
    const GoldLabels gold = testutil::alternating_gold(n);
    const auto backend = oracle(0.7, cal, ViewKind::Head, n);

    // Train with every label flipped: full memorization must replay the
    // flipped labels verbatim on those documents.
    std::vector<LabeledDoc> flipped;
    for (std::size_t i = 0; i < 100; ++i) {
        const auto id = std::to_string(i);
        flipped.push_back({id, "text", gold.at(id) == "good" ? "bad" : "good"});
    }
    auto model = backend.fresh_init(3);
    model->fit(flipped, TrainSpec{});
    std::map<DocId, Prediction> by_id;
    for (auto& p : model->predict(corpus)) by_id[p.doc_id] = p;
    for (const auto& ex : flipped) {
        CHECK(by_id.at(ex.doc_id).class_id == ex.label);
        CHECK(by_id.at(ex.doc_id).confidence >= 0.9);
    }
}

TEST_CASE("blunders require noisy training and grow with maturity") {
    OracleCalibration cal;
    cal.blunder_rate = 0.3;
    cal.blunder_noise_amplification = 20.0;
    cal.maturity_half_size = 50.0;
    const std::size_t n = 1000;
    const Corpus corpus = wide_corpus(n);
    const GoldLabels gold = testutil::alternating_gold(n);
    const auto backend = oracle(1.0, cal, ViewKind::Head, n);

    std::vector<LabeledDoc> clean, noisy;
    for (std::size_t i = 0; i < 400; ++i) {
        const auto id = std::to_string(i);
        clean.push_back({id, "text", gold.at(id)});
        noisy.push_back({id, "text", i % 10 == 0 ? (gold.at(id) == "good" ? "bad" : "good")
                                                 : gold.at(id)});
    }

    auto clean_model = backend.fresh_init(4);
    clean_model->fit(clean, TrainSpec{});
    CHECK(empirical_accuracy(clean_model->predict(corpus), gold) == 1.0);

    auto noisy_model = backend.fresh_init(4);
    noisy_model->fit(noisy, TrainSpec{});
    const double acc = empirical_accuracy(noisy_model->predict(corpus), gold);
    // Base accuracy 1.0: every surviving error is a blunder. The front is
    // blunder_rate * maturity (400/450) * min(1, 20 * 0.1) = 0.267.
    CHECK(acc < 0.85);
    CHECK(acc > 0.60);
}

TEST_CASE("oracle artifacts restore the trained state") {
    testutil::TempDir dir("oracle");
    OracleCalibration cal;
    cal.memorize_rate = 0.6;
    cal.sharpen_max_gain = 0.2;
    const std::size_t n = 300;
    const Corpus corpus = wide_corpus(n);
    const GoldLabels gold = testutil::alternating_gold(n);
    const auto backend = oracle(0.7, cal, ViewKind::Head, n);

    std::vector<LabeledDoc> examples;
    for (std::size_t i = 0; i < 80; ++i)
        examples.push_back({std::to_string(i), "text", gold.at(std::to_string(i))});
    auto model = backend.fresh_init(21);
    model->fit(examples, TrainSpec{});
    const std::string path = model->save(dir.str(), "oracle");

    const auto loaded = backend.load(path);
    const auto pa = model->predict(corpus);
    const auto pb = loaded->predict(corpus);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i].class_id == pb[i].class_id);
        CHECK(pa[i].confidence == pb[i].confidence);
    }

    const auto prompt_backend = oracle(0.7, cal, ViewKind::Prompt, n);
    CHECK_THROWS_AS(prompt_backend.load(path), Error);
}

TEST_CASE("oracle configuration is validated") {
    const auto classes = testutil::two_classes();
    const GoldLabels gold = testutil::alternating_gold(10);
    CHECK_THROWS_AS(SyntheticOracleBackend(ViewKind::Head, classes, gold,
                                           SyntheticOracleBackend::uniform_accuracy(classes, 1.5),
                                           {}, kWorld),
                    Error);
    auto missing = SyntheticOracleBackend::uniform_accuracy(classes, 0.7);
    missing.erase("bad");
    CHECK_THROWS_AS(SyntheticOracleBackend(ViewKind::Head, classes, gold, missing, {}, kWorld),
                    Error);
    auto extra = SyntheticOracleBackend::uniform_accuracy(classes, 0.7);
    extra["ugly"] = 0.7;
    CHECK_THROWS_AS(SyntheticOracleBackend(ViewKind::Head, classes, gold, extra, {}, kWorld),
                    Error);
    OracleCalibration bad_cal;
    bad_cal.memorize_rate = 2.0;
    CHECK_THROWS_AS(SyntheticOracleBackend(ViewKind::Head, classes, gold,
                                           SyntheticOracleBackend::uniform_accuracy(classes, 0.7),
                                           bad_cal, kWorld),
                    Error);
    OracleCalibration bad_blunder;
    bad_blunder.blunder_noise_amplification = -1.0;
    CHECK_THROWS_AS(SyntheticOracleBackend(ViewKind::Head, classes, gold,
                                           SyntheticOracleBackend::uniform_accuracy(classes, 0.7),
                                           bad_blunder, kWorld),
                    Error);

    const auto backend = oracle(0.7, {}, ViewKind::Head, 10);
    auto model = backend.fresh_init(1);
    CHECK_THROWS_AS(model->fit({}, TrainSpec{}), Error);
    std::vector<LabeledDoc> stranger = {{"does-not-exist", "x", "good"}};
    CHECK_THROWS_AS(model->fit(stranger, TrainSpec{}), Error);
}

TEST_CASE("synthetic encoder slot scores favor the decided class") {
    const std::size_t n = 400;
    const GoldLabels gold = testutil::alternating_gold(n);
    SyntheticEncoderParams params;
    params.noise_rate = 0.30;
    const SyntheticEncoder enc(testutil::two_classes(), gold, params, kWorld);
    const Corpus corpus = wide_corpus(n);
    BasicTokenizer tok(64);

    std::size_t agree = 0;
    for (const auto& doc : corpus.documents()) {
        const ClassId decided = enc.slot_decision(doc.id);
        CHECK(decided == enc.slot_decision(doc.id));
        double best_score = -1.0;
        ClassId best_cls;
        for (const auto& cls : corpus.classes()) {
            const auto rendered = render(corpus.prompt_template(), doc, cls.label_name, tok);
            const double s = score_label_original(enc, rendered);
            if (s > best_score) {
                best_score = s;
                best_cls = cls.id;
            }
        }
        CHECK(best_cls == decided);
        if (decided == gold.at(doc.id)) ++agree;
    }
    // Mean wrong-rate is the configured noise rate.
    const double acc = static_cast<double>(agree) / n;
    CHECK(acc == doctest::Approx(0.70).epsilon(0.08));
}

TEST_CASE("synthetic encoder serves both scoring interfaces consistently") {
    const GoldLabels gold = testutil::alternating_gold(50);
    SyntheticEncoderParams params;
    const SyntheticEncoder enc(testutil::two_classes(), gold, params, kWorld);

    CHECK(enc.vocabulary_index("good").has_value());
    CHECK(enc.vocabulary_index("bad").has_value());
    CHECK_FALSE(enc.vocabulary_index("zzz").has_value());

    const Corpus mask_corpus(testutil::alternating_docs(50), testutil::two_classes(),
                             PromptTemplate("{slot} review: {doc}", SlotKind::Mask));
    BasicTokenizer tok(64);
    const GenerativeZeroShot scorer(mask_corpus, enc, tok);
    const auto scored = scorer.score(mask_corpus.documents()[0]);
    REQUIRE(scored.has_value());
    CHECK(scored->predicted == enc.slot_decision("0"));
}
