#include <doctest.h>

#include <cmath>
#include <vector>

#include "wsclass/error.hpp"
#include "wsclass/losses.hpp"
#include "wsclass/util/rng.hpp"

using namespace wsclass;

TEST_CASE("sigmoid basics") {
    CHECK(sigmoid(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sigmoid(40.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sigmoid(-40.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    for (double x : {-3.0, -0.5, 0.1, 2.0})
        CHECK(sigmoid(x) + sigmoid(-x) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax normalizes and is shift invariant") {
    const std::vector<double> logits = {1.0, -2.0, 0.5, 3.0};
    const auto p = softmax(logits);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> shifted = logits;
    for (auto& v : shifted) v += 1000.0;  // would overflow an unshifted exp
    const auto q = softmax(shifted);
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-12));
}

TEST_CASE("softmax of logits (3,0) puts 0.9526 on class 0") {
    const auto p = softmax(std::vector<double>{3.0, 0.0});
    const double expect = std::exp(3.0) / (std::exp(3.0) + 1.0);
    CHECK(p[0] == doctest::Approx(expect).epsilon(1e-9));
    CHECK(p[0] == doctest::Approx(0.9526).epsilon(1e-4));
}

TEST_CASE("head loss is the negative log softmax of the target") {
    const std::vector<double> logits = {3.0, 0.0};
    const double p0 = std::exp(3.0) / (std::exp(3.0) + 1.0);
    CHECK(head_token_loss(logits, 0) == doctest::Approx(-std::log(p0)).epsilon(1e-9));
    CHECK(head_token_loss(logits, 1) == doctest::Approx(-std::log(1.0 - p0)).epsilon(1e-9));
    CHECK(head_token_loss(std::vector<double>{0.0, 0.0}, 0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK_THROWS_AS(head_token_loss(logits, 2), Error);
}

TEST_CASE("prompt loss hand cases") {
    // Two classes, both probabilities one half: -(log 0.5 + log 0.5).
    CHECK(prompt_bce_loss(std::vector<double>{0.5, 0.5}, 0) ==
          doctest::Approx(1.3863).epsilon(1e-4));
    CHECK(std::abs(prompt_bce_loss(std::vector<double>{0.5, 0.5}, 0) - (-2.0 * std::log(0.5))) <
          1e-6);
    // Perfect fit: target at 1, everything else at 0.
    CHECK(prompt_bce_loss(std::vector<double>{1.0, 0.0, 0.0}, 0) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(prompt_bce_loss(std::vector<double>{0.5}, 1), Error);
}

TEST_CASE("prompt loss decomposes into per class binary terms") {
    rng::Rng r(404);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> probs;
        const std::size_t m = 2 + r.index(4);
        for (std::size_t c = 0; c < m; ++c) probs.push_back(0.01 + 0.98 * r.next_unit());
        const std::size_t target = r.index(m);
        double sum = 0.0;
        for (std::size_t c = 0; c < m; ++c) sum += binary_cross_entropy(probs[c], c == target);
        CHECK(prompt_bce_loss(probs, target) == doctest::Approx(sum).epsilon(1e-12));
    }
}

namespace {

// Central finite differences of f at x.
template <typename F>
double central_diff(F f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

bool close_rel(double got, double want, double tol) {
    const double scale = std::max({std::abs(got), std::abs(want), 1e-8});
    return std::abs(got - want) / scale <= tol;
}

}  // namespace

TEST_CASE("head loss gradient matches central finite differences") {
    rng::Rng r(505);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 2 + r.index(4);
        std::vector<double> logits;
        for (std::size_t c = 0; c < m; ++c) logits.push_back(r.uniform(-3.0, 3.0));
        const std::size_t target = r.index(m);
        const auto grad = head_token_loss_grad(logits, target);
        for (std::size_t c = 0; c < m; ++c) {
            const double fd = central_diff(
                [&](double v) {
                    auto pert = logits;
                    pert[c] = v;
                    return head_token_loss(pert, target);
                },
                logits[c]);
            CHECK(close_rel(grad[c], fd, 1e-4));
        }
    }
}

TEST_CASE("prompt loss gradient in logits matches central finite differences") {
    rng::Rng r(606);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 2 + r.index(4);
        std::vector<double> z;
        for (std::size_t c = 0; c < m; ++c) z.push_back(r.uniform(-3.0, 3.0));
        const std::size_t target = r.index(m);

        std::vector<double> probs;
        for (double v : z) probs.push_back(sigmoid(v));
        const auto grad = prompt_bce_grad_logits(probs, target);

        for (std::size_t c = 0; c < m; ++c) {
            const double fd = central_diff(
                [&](double v) {
                    auto pert = z;
                    pert[c] = v;
                    std::vector<double> p;
                    for (double w : pert) p.push_back(sigmoid(w));
                    return prompt_bce_loss(p, target);
                },
                z[c]);
            CHECK(close_rel(grad[c], fd, 1e-4));
        }
    }
}

TEST_CASE("both gradients agree through a two parameter toy scorer") {
    // z_c = w_c * x: dL/dw_c = (dL/dz_c) * x for either loss.
    rng::Rng r(707);
    for (int trial = 0; trial < 100; ++trial) {
        const double x = r.uniform(0.2, 2.0);
        std::vector<double> w = {r.uniform(-2.0, 2.0), r.uniform(-2.0, 2.0)};
        const std::size_t target = r.index(2);

        const std::vector<double> z = {w[0] * x, w[1] * x};
        const auto head_grad = head_token_loss_grad(z, target);
        const std::vector<double> probs = {sigmoid(z[0]), sigmoid(z[1])};
        const auto prompt_grad = prompt_bce_grad_logits(probs, target);

        for (std::size_t c = 0; c < 2; ++c) {
            const double head_fd = central_diff(
                [&](double v) {
                    auto pert = w;
                    pert[c] = v;
                    return head_token_loss(std::vector<double>{pert[0] * x, pert[1] * x}, target);
                },
                w[c]);
            CHECK(close_rel(head_grad[c] * x, head_fd, 1e-4));

            const double prompt_fd = central_diff(
                [&](double v) {
                    auto pert = w;
                    pert[c] = v;
                    const std::vector<double> p = {sigmoid(pert[0] * x), sigmoid(pert[1] * x)};
                    return prompt_bce_loss(p, target);
                },
                w[c]);
            CHECK(close_rel(prompt_grad[c] * x, prompt_fd, 1e-4));
        }
    }
}

TEST_CASE("gradient shapes of the two views are interchangeable") {
    // Both views expose (probability - indicator) in logit space.
    const std::vector<double> z = {1.2, -0.4, 0.3};
    const auto head = head_token_loss_grad(z, 1);
    const auto soft = softmax(z);
    for (std::size_t c = 0; c < 3; ++c)
        CHECK(head[c] == doctest::Approx(soft[c] - (c == 1 ? 1.0 : 0.0)).epsilon(1e-12));

    std::vector<double> probs = {sigmoid(z[0]), sigmoid(z[1]), sigmoid(z[2])};
    const auto prompt = prompt_bce_grad_logits(probs, 1);
    for (std::size_t c = 0; c < 3; ++c)
        CHECK(prompt[c] == doctest::Approx(probs[c] - (c == 1 ? 1.0 : 0.0)).epsilon(1e-12));
}
