#include <catch2/catch_amalgamated.hpp>

#include "evoc/head.hpp"

#include <numeric>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace evoc;

namespace {

ClassifierHead random_head(std::size_t dim, std::size_t n_labels, SplitMix64& rng) {
    std::vector<DescriptorId> labels;
    for (std::size_t m = 1; m <= n_labels; ++m) labels.push_back(testutil::id_code(m));
    ClassifierHead head = make_head(dim, labels, rng);
    for (double& b : head.bias) b = rng.uniform(-1.0, 1.0);
    return head;
}

FeatureVector random_input(std::size_t dim, SplitMix64& rng) {
    FeatureVector x(dim);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    return x;
}

std::vector<std::uint8_t> random_targets(std::size_t n, SplitMix64& rng) {
    std::vector<std::uint8_t> y(n);
    for (auto& v : y) v = rng.unit() < 0.5 ? 1 : 0;
    return y;
}

}  // namespace

TEST_CASE("forward on zero input and bias is one half everywhere", "[head]") {
    SplitMix64 rng(1);
    ClassifierHead head = random_head(4, 3, rng);
    head.bias.assign(3, 0.0);
    const std::vector<double> probs = forward(head, FeatureVector(4, 0.0));
    for (double p : probs) CHECK(p == Catch::Approx(0.5));
}

TEST_CASE("forward evaluates the 2x2 worked example", "[head]") {
    ClassifierHead head;
    head.weights = Matrix(2, 2);
    head.weights(0, 0) = 2.0;
    head.weights(0, 1) = 0.0;
    head.weights(1, 0) = 0.0;
    head.weights(1, 1) = 0.0;
    head.bias = {0.0, -1.0};
    head.labels = {"000001", "000002"};
    const std::vector<double> probs = forward(head, {1.0, 0.0});
    CHECK(probs[0] == Catch::Approx(0.8807970779778823).epsilon(1e-5));
    CHECK(probs[1] == Catch::Approx(0.2689414213699951).epsilon(1e-5));
}

TEST_CASE("forward matches the naive matvec oracle", "[head]") {
    SplitMix64 rng(22);
    for (int round = 0; round < 50; ++round) {
        const std::size_t dim = 1 + rng.below(10);
        const std::size_t n_labels = 1 + rng.below(8);
        const ClassifierHead head = random_head(dim, n_labels, rng);
        const FeatureVector x = random_input(dim, rng);

        std::vector<std::vector<double>> w_cols(n_labels, std::vector<double>(dim));
        for (std::size_t m = 0; m < n_labels; ++m) {
            for (std::size_t e = 0; e < dim; ++e) w_cols[m][e] = head.weights(e, m);
        }
        const std::vector<double> expected = oracle::forward(w_cols, head.bias, x);
        const std::vector<double> got = forward(head, x);
        for (std::size_t m = 0; m < n_labels; ++m) {
            CHECK(got[m] == Catch::Approx(expected[m]).margin(1e-12));
        }
    }
    const ClassifierHead head = random_head(4, 2, rng);
    CHECK_THROWS_AS(forward(head, FeatureVector(5, 0.0)), ValidationError);
}

TEST_CASE("bce loss anchors and oracle", "[head]") {
    CHECK(bce_loss({0.5, 0.5}, {1, 0}) == Catch::Approx(std::log(2.0)).margin(1e-12));
    CHECK(bce_loss({1.0, 0.0}, {1, 0}) <= 1e-11);  // clamped perfect prediction

    SplitMix64 rng(33);
    for (int round = 0; round < 100; ++round) {
        const std::size_t n = 1 + rng.below(12);
        std::vector<double> probs(n);
        for (double& p : probs) p = rng.unit();
        const std::vector<std::uint8_t> y = random_targets(n, rng);
        CHECK(bce_loss(probs, y) == Catch::Approx(oracle::bce(probs, y)).margin(1e-12));
        CHECK(bce_loss(probs, y) >= 0.0);
    }
    CHECK_THROWS_AS(bce_loss({0.5}, {1, 0}), ValidationError);
}

TEST_CASE("gradient analytic anchors", "[head]") {
    SECTION("half probability against a positive target") {
        ClassifierHead head;
        head.weights = Matrix(1, 1);
        head.weights(0, 0) = 0.0;
        head.bias = {0.0};
        head.labels = {"000001"};
        const HeadGradients grads = gradients(head, {0.0}, {1});
        CHECK(grads.bias[0] == Catch::Approx(-0.5));
    }
    SECTION("zero input zeroes the weight gradient") {
        SplitMix64 rng(44);
        const ClassifierHead head = random_head(5, 4, rng);
        const HeadGradients grads = gradients(head, FeatureVector(5, 0.0), {1, 0, 1, 0});
        const std::vector<double> probs = forward(head, FeatureVector(5, 0.0));
        for (double g : grads.weights.data) CHECK(g == 0.0);
        for (std::size_t m = 0; m < 4; ++m) {
            const double y = m % 2 == 0 ? 1.0 : 0.0;
            CHECK(grads.bias[m] == Catch::Approx((probs[m] - y) / 4.0).margin(1e-12));
        }
    }
}

TEST_CASE("analytic gradients agree with central finite differences", "[head]") {
    SplitMix64 rng(314159);
    const double h = 1e-5;
    for (int round = 0; round < 100; ++round) {
        const std::size_t dim = 1 + rng.below(16);
        const std::size_t n_labels = 1 + rng.below(12);
        ClassifierHead head = random_head(dim, n_labels, rng);
        const FeatureVector x = random_input(dim, rng);
        const std::vector<std::uint8_t> y = random_targets(n_labels, rng);
        const HeadGradients grads = gradients(head, x, y);

        auto relative = [](double a, double b) {
            return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
        };
        for (std::size_t e = 0; e < dim; ++e) {
            for (std::size_t m = 0; m < n_labels; ++m) {
                const double keep = head.weights(e, m);
                head.weights(e, m) = keep + h;
                const double up = bce_loss(forward(head, x), y);
                head.weights(e, m) = keep - h;
                const double down = bce_loss(forward(head, x), y);
                head.weights(e, m) = keep;
                CHECK(relative(grads.weights(e, m), (up - down) / (2.0 * h)) < 1e-4);
            }
        }
        for (std::size_t m = 0; m < n_labels; ++m) {
            const double keep = head.bias[m];
            head.bias[m] = keep + h;
            const double up = bce_loss(forward(head, x), y);
            head.bias[m] = keep - h;
            const double down = bce_loss(forward(head, x), y);
            head.bias[m] = keep;
            CHECK(relative(grads.bias[m], (up - down) / (2.0 * h)) < 1e-4);
        }
        FeatureVector probe = x;
        for (std::size_t e = 0; e < dim; ++e) {
            const double keep = probe[e];
            probe[e] = keep + h;
            const double up = bce_loss(forward(head, probe), y);
            probe[e] = keep - h;
            const double down = bce_loss(forward(head, probe), y);
            probe[e] = keep;
            CHECK(relative(grads.input[e], (up - down) / (2.0 * h)) < 1e-4);
        }
    }
}

TEST_CASE("learning rate schedule shape", "[head]") {
    TrainConfig config;
    config.epochs = 10;
    config.peak_lr = 6e-5;
    const std::uint64_t total = 1000;  // warmup = 100

    CHECK(lr_at_step(config, 0, total) == 0.0);
    CHECK(lr_at_step(config, 100, total) == Catch::Approx(6e-5));
    CHECK(lr_at_step(config, total, total) == 0.0);
    CHECK_THROWS_AS(lr_at_step(config, total + 1, total), ValidationError);

    SplitMix64 rng(5);
    for (int round = 0; round < 200; ++round) {
        const std::uint64_t step = rng.below(total + 1);
        CHECK(lr_at_step(config, step, total) ==
              Catch::Approx(oracle::warmup_decay_lr(6e-5, step, 100, total))
                  .margin(1e-18));
    }
    // Piecewise-linear and continuous: adjacent steps differ by a constant
    // increment on each segment.
    const double ramp = lr_at_step(config, 1, total) - lr_at_step(config, 0, total);
    for (std::uint64_t s = 1; s < 100; ++s) {
        CHECK(lr_at_step(config, s + 1, total) - lr_at_step(config, s, total) ==
              Catch::Approx(ramp).margin(1e-18));
    }
    const double decay = lr_at_step(config, 101, total) - lr_at_step(config, 100, total);
    for (std::uint64_t s = 100; s < total; ++s) {
        CHECK(lr_at_step(config, s + 1, total) - lr_at_step(config, s, total) ==
              Catch::Approx(decay).margin(1e-18));
    }
}

TEST_CASE("gradient clipping scales only above the threshold", "[head]") {
    std::vector<double> a = {6.0, 8.0};  // norm 10
    CHECK(clip_global_norm({std::span<double>(a)}, 5.0) == Catch::Approx(10.0));
    CHECK(a[0] == Catch::Approx(3.0));
    CHECK(a[1] == Catch::Approx(4.0));

    std::vector<double> b = {3.0, 0.0};
    clip_global_norm({std::span<double>(b)}, 5.0);
    CHECK(b[0] == 3.0);

    std::vector<double> bad = {1.0, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(clip_global_norm({std::span<double>(bad)}, 5.0), ValidationError);

    SplitMix64 rng(77);
    for (int round = 0; round < 200; ++round) {
        std::vector<double> u(1 + rng.below(20));
        std::vector<double> v(1 + rng.below(20));
        for (double& g : u) g = rng.uniform(-4.0, 4.0);
        for (double& g : v) g = rng.uniform(-4.0, 4.0);
        const std::vector<double> u0 = u;
        const std::vector<double> v0 = v;
        const double before = clip_global_norm(
            {std::span<double>(u), std::span<double>(v)}, 5.0);
        double after_sq = 0.0;
        double dot = 0.0, norm0_sq = 0.0, norm1_sq = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            after_sq += u[i] * u[i];
            dot += u[i] * u0[i];
            norm0_sq += u0[i] * u0[i];
            norm1_sq += u[i] * u[i];
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            after_sq += v[i] * v[i];
            dot += v[i] * v0[i];
            norm0_sq += v0[i] * v0[i];
            norm1_sq += v[i] * v[i];
        }
        CHECK(std::sqrt(after_sq) <= 5.0 + 1e-12);
        if (before > 5.0) {
            const double cosine = dot / (std::sqrt(norm0_sq) * std::sqrt(norm1_sq));
            CHECK(cosine == Catch::Approx(1.0).margin(1e-12));
        } else {
            CHECK(u == u0);
            CHECK(v == v0);
        }
    }
}

TEST_CASE("adamw single-step anchors", "[head]") {
    TrainConfig config;

    SECTION("first step moves by roughly lr times the gradient sign") {
        config.weight_decay = 0.0;
        std::vector<double> p = {1.0};
        std::vector<double> g = {0.37};
        std::vector<double> m = {0.0}, v = {0.0};
        adamw_update(p, g, m, v, 1, 0.01, config);
        // m_hat / sqrt(v_hat) is exactly 1 on the first step (up to eps).
        CHECK(p[0] == Catch::Approx(1.0 - 0.01).epsilon(1e-6));
    }
    SECTION("zero gradient applies the decoupled decay only") {
        config.weight_decay = 0.01;
        std::vector<double> p = {1.0};
        std::vector<double> g = {0.0};
        std::vector<double> m = {0.0}, v = {0.0};
        adamw_update(p, g, m, v, 1, 0.1, config);
        CHECK(p[0] == Catch::Approx(0.999).margin(1e-15));
    }
}

TEST_CASE("adamw trace matches the scalar reference for 1000 steps", "[head]") {
    TrainConfig config;
    config.weight_decay = 0.01;
    SplitMix64 rng(2718);
    const std::size_t n = 16;
    std::vector<double> params(n), m(n, 0.0), v(n, 0.0);
    for (double& p : params) p = rng.uniform(-1.0, 1.0);

    std::vector<oracle::ScalarAdamW> reference(n);
    std::vector<double> expected = params;

    for (std::uint64_t step = 1; step <= 1000; ++step) {
        std::vector<double> grads(n);
        for (double& g : grads) g = rng.uniform(-2.0, 2.0);
        const double lr = 1e-3 * (1.0 + 0.5 * std::sin(static_cast<double>(step)));
        adamw_update(params, grads, m, v, step, lr, config);
        for (std::size_t i = 0; i < n; ++i) {
            expected[i] = reference[i].step(expected[i], grads[i], lr, config.adam_beta1,
                                            config.adam_beta2, config.adam_eps,
                                            config.weight_decay);
        }
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(std::abs(params[i] - expected[i]) < 1e-10);
        }
    }
}

TEST_CASE("dropout keeps the expected pre-activation", "[head]") {
    SplitMix64 rng(1618);
    ClassifierHead head = random_head(8, 5, rng);
    head.bias.assign(5, 0.0);
    FeatureVector x(8);
    for (double& v : x) v = rng.uniform(0.5, 1.5) * (rng.unit() < 0.5 ? -1.0 : 1.0);

    const std::vector<double> expected = logits(head, x);
    std::vector<double> mean(5, 0.0);
    const int n_masks = 20000;
    for (int i = 0; i < n_masks; ++i) {
        const TrainForward fwd = forward_train(head, x, rng);
        const std::vector<double> z = logits(head, fwd.dropped_input);
        for (std::size_t m = 0; m < 5; ++m) mean[m] += z[m];
    }
    for (std::size_t m = 0; m < 5; ++m) {
        mean[m] /= n_masks;
        CHECK(std::abs(mean[m] - expected[m]) <=
              0.01 * std::max(1.0, std::abs(expected[m])));
    }
}

TEST_CASE("training returns the minimum-validation-loss snapshot deterministically",
          "[head]") {
    SplitMix64 rng(4);
    const testutil::SeparableData data = testutil::separable_features(120, 10, 12, rng);
    LabeledFeatures train, val;
    train.labels = val.labels = data.labels;
    for (std::size_t i = 0; i < 100; ++i) {
        train.features.push_back(data.features[i]);
        train.targets.push_back(data.targets[i]);
    }
    for (std::size_t i = 100; i < 120; ++i) {
        val.features.push_back(data.features[i]);
        val.targets.push_back(data.targets[i]);
    }
    TrainConfig config;
    config.epochs = 8;
    config.peak_lr = 1e-3;
    config.seed = 9;

    const TrainResult result = train_head(train, val, config);
    REQUIRE(result.log.size() == 8);
    double min_val = std::numeric_limits<double>::infinity();
    for (const EpochLog& entry : result.log) min_val = std::min(min_val, entry.val_loss);
    CHECK(result.best_val_loss == Catch::Approx(min_val));
    CHECK(dataset_loss(result.head, val) == Catch::Approx(result.best_val_loss));

    const TrainResult again = train_head(train, val, config);
    CHECK(again.head.weights == result.head.weights);
    CHECK(again.head.bias == result.head.bias);
    CHECK(again.best_epoch == result.best_epoch);

    TrainConfig other = config;
    other.seed = 10;
    const TrainResult different = train_head(train, val, other);
    CHECK(different.head.weights.data != result.head.weights.data);
}

TEST_CASE("training fits a separable dataset", "[head][slow]") {
    SplitMix64 rng(12);
    const testutil::SeparableData data = testutil::separable_features(400, 12, 16, rng);
    LabeledFeatures train, val;
    train.labels = val.labels = data.labels;
    for (std::size_t i = 0; i < 320; ++i) {
        train.features.push_back(data.features[i]);
        train.targets.push_back(data.targets[i]);
    }
    for (std::size_t i = 320; i < 360; ++i) {
        val.features.push_back(data.features[i]);
        val.targets.push_back(data.targets[i]);
    }
    TrainConfig config;
    config.epochs = 30;
    config.peak_lr = 1e-3;
    config.seed = 3;
    const TrainResult result = train_head(train, val, config);

    std::vector<std::set<std::string>> predicted, gold;
    for (std::size_t i = 360; i < 400; ++i) {
        const std::vector<double> probs = forward(result.head, data.features[i]);
        std::set<std::string> p, g;
        for (std::size_t m = 0; m < probs.size(); ++m) {
            if (probs[m] >= 0.5) p.insert(data.labels[m]);
            if (data.targets[i][m]) g.insert(data.labels[m]);
        }
        predicted.push_back(std::move(p));
        gold.push_back(std::move(g));
    }
    CHECK(oracle::micro_f1(predicted, gold) >= 0.9);
}

TEST_CASE("topk prediction honors order, ties and bounds", "[head]") {
    SplitMix64 rng(66);
    const ClassifierHead head = random_head(6, 8, rng);
    const FeatureVector x = random_input(6, rng);

    const auto top6 = predict_topk(head, x, 6);
    CHECK(top6.size() == 6);
    for (std::size_t i = 1; i < top6.size(); ++i) {
        CHECK(top6[i - 1].second >= top6[i].second);
    }

    const auto all = predict_topk(head, x, 8);
    const std::vector<double> probs = forward(head, x);
    std::vector<std::pair<std::string, double>> expected;
    for (std::size_t m = 0; m < probs.size(); ++m) {
        expected.emplace_back(head.labels[m], probs[m]);
    }
    std::stable_sort(expected.begin(), expected.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    CHECK(all == expected);

    CHECK_THROWS_AS(predict_topk(head, x, 9), ValidationError);
    CHECK_THROWS_AS(predict_topk(head, x, 0), ValidationError);

    // All-equal probabilities fall back to ascending code order.
    ClassifierHead flat;
    flat.weights = Matrix(2, 3);
    flat.bias = {0.0, 0.0, 0.0};
    flat.labels = {"000001", "000002", "000003"};
    const auto tied = predict_topk(flat, {0.3, -0.2}, 3);
    CHECK(tied[0].first == "000001");
    CHECK(tied[1].first == "000002");
    CHECK(tied[2].first == "000003");
}

TEST_CASE("positive input scaling preserves prediction order when bias is zero",
          "[head]") {
    SplitMix64 rng(88);
    ClassifierHead head = random_head(7, 9, rng);
    head.bias.assign(9, 0.0);
    const FeatureVector x = random_input(7, rng);
    FeatureVector scaled = x;
    for (double& v : scaled) v *= 3.7;

    const auto base = predict_topk(head, x, 9);
    const auto after = predict_topk(head, scaled, 9);
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i].first == after[i].first);
    }
}
