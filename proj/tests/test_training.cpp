#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "genoseq/metrics.hpp"
#include "genoseq/optim.hpp"
#include "genoseq/synthetic.hpp"
#include "genoseq/trainer.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace genoseq;

namespace {

std::vector<std::vector<std::uint64_t>> rows_of(const ConfusionMatrix& cm) {
    std::vector<std::vector<std::uint64_t>> out(cm.num_classes(),
                                                std::vector<std::uint64_t>(cm.num_classes()));
    for (std::size_t t = 0; t < cm.num_classes(); ++t) {
        for (std::size_t p = 0; p < cm.num_classes(); ++p) {
            out[t][p] = cm.at(t, p);
        }
    }
    return out;
}

ConfusionMatrix random_matrix(std::size_t classes, Rng& rng, std::uint64_t max_count = 40) {
    ConfusionMatrix cm(classes);
    for (std::size_t t = 0; t < classes; ++t) {
        for (std::size_t p = 0; p < classes; ++p) {
            cm.add(t, p, rng() % (max_count + 1));
        }
    }
    if (cm.total() == 0) {
        cm.add(0, 0);
    }
    return cm;
}

// Smallest valid parameter set; tests only look at classifier_bias(0).
ModelParams scalar_params(double value) {
    ModelConfig c;
    c.vocab_size = 1;
    c.d_model = 2;
    c.num_layers = 1;
    c.num_heads = 1;
    ModelParams p = ModelParams::zeros(c);
    p.classifier_bias(0) = value;
    return p;
}

ModelConfig tiny_config() {
    ModelConfig c;
    c.vocab_size = 8;
    c.d_model = 16;
    c.num_layers = 2;
    c.num_heads = 2;
    c.max_len = 22;
    c.num_classes = 2;
    c.dropout = 0.0;
    c.scheme = RotaryScheme{};
    return c;
}

}  // namespace

TEST_CASE("learning rate schedule") {
    const double peak = 1e-4;
    CHECK(warmup_steps(100) == 10);
    CHECK(warmup_steps(95) == 10);
    CHECK(warmup_steps(10) == 1);
    CHECK(lr_at(0, 100, peak) == 0.0);
    CHECK(lr_at(5, 100, peak) == doctest::Approx(peak / 2));
    CHECK(lr_at(10, 100, peak) == peak);
    CHECK(std::abs(lr_at(100, 100, peak)) <= 1e-12);
    CHECK(lr_at(55, 100, peak) == doctest::Approx(peak * 0.5 * (1 + std::cos(std::numbers::pi * 0.5))));

    for (const std::size_t total : {10u, 37u, 100u, 1001u}) {
        const std::size_t w = warmup_steps(total);
        CHECK(w == static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(total))));
        double previous = 0.0;
        for (std::size_t s = 0; s <= total; ++s) {
            const double lr = lr_at(s, total, peak);
            CHECK(lr >= 0.0);
            CHECK(lr <= peak * (1 + 1e-12));
            if (s <= w) {
                CHECK(lr >= previous);
            } else {
                CHECK(lr <= previous);
            }
            // No jumps larger than a warmup increment.
            CHECK(std::abs(lr - previous) <= peak / static_cast<double>(w) + 1e-18);
            previous = lr;
        }
    }
}

TEST_CASE("adamw closed forms") {
    SUBCASE("zero gradient and no decay leaves params alone") {
        ModelParams p = scalar_params(0.7);
        ModelParams g = scalar_params(0.0);
        AdamW opt({0.9, 0.999, 1e-8, 0.0});
        for (int i = 0; i < 5; ++i) {
            opt.step(p, g, 1e-3);
        }
        CHECK(p.classifier_bias(0) == 0.7);
        CHECK(opt.step_count() == 5);
    }
    SUBCASE("first step moves by about lr") {
        ModelParams p = scalar_params(0.5);
        ModelParams g = scalar_params(1.0);
        AdamW opt({0.9, 0.999, 1e-8, 0.0});
        opt.step(p, g, 1e-3);
        CHECK(p.classifier_bias(0) == doctest::Approx(0.5 - 1e-3 / (1.0 + 1e-8)).epsilon(1e-14));
    }
    SUBCASE("pure decay is geometric") {
        ModelParams p = scalar_params(2.0);
        ModelParams g = scalar_params(0.0);
        AdamW opt({0.9, 0.999, 1e-8, 0.01});
        double expected = 2.0;
        for (int i = 0; i < 10; ++i) {
            opt.step(p, g, 0.1);
            expected *= 1.0 - 0.1 * 0.01;
        }
        CHECK(p.classifier_bias(0) == doctest::Approx(expected).epsilon(1e-14));
    }
    SUBCASE("norm parameters skip decay") {
        ModelConfig c = tiny_config();
        ModelParams p = ModelParams::initialize(c, 1);
        ModelParams g = ModelParams::zeros(c);
        AdamW opt;
        opt.step(p, g, 0.5);
        CHECK(p.layers[0].ln1_gain.isOnes());
        CHECK(p.final_gain.isOnes());
        const Matrix decayed = ModelParams::initialize(c, 1).token_embedding * (1 - 0.5 * 0.01);
        CHECK((p.token_embedding - decayed).cwiseAbs().maxCoeff() <= 1e-17);
    }
    SUBCASE("matches a hand written adam over many steps") {
        ModelParams p = scalar_params(0.3);
        AdamW opt({0.9, 0.999, 1e-8, 0.0});
        double x = 0.3, m = 0.0, v = 0.0;
        Rng rng(4);
        std::normal_distribution<double> normal;
        for (int t = 1; t <= 50; ++t) {
            const double grad = normal(rng);
            ModelParams g = scalar_params(grad);
            const double lr = 1e-2 / t;
            opt.step(p, g, lr);
            m = 0.9 * m + 0.1 * grad;
            v = 0.999 * v + 0.001 * grad * grad;
            const double mh = m / (1 - std::pow(0.9, t));
            const double vh = v / (1 - std::pow(0.999, t));
            x = x - lr * (mh / (std::sqrt(vh) + 1e-8));
            CHECK(p.classifier_bias(0) == doctest::Approx(x).epsilon(1e-12));
        }
    }
    SUBCASE("shape mismatch") {
        ModelParams p = ModelParams::zeros(tiny_config());
        ModelParams g = scalar_params(1.0);
        AdamW opt;
        CHECK_THROWS_AS(opt.step(p, g, 1e-3), ModelError);
    }
}

TEST_CASE("mcc examples") {
    CHECK(mcc(ConfusionMatrix(3, {5, 0, 0, 0, 7, 0, 0, 0, 2})) == 1.0);
    CHECK(mcc(ConfusionMatrix(2, {0, 10, 10, 0})) == doctest::Approx(-1.0).epsilon(1e-15));
    const double value = mcc(ConfusionMatrix(2, {48, 2, 6, 44}));
    CHECK(std::abs(value - oracle::binary_mcc(44, 48, 2, 6)) <= 1e-12);
    CHECK(mcc(ConfusionMatrix(2, {30, 0, 20, 0})) == 0.0);
    CHECK_THROWS_AS(mcc(ConfusionMatrix(4)), EmptyMatrixError);
    CHECK_THROWS(ConfusionMatrix(2, {1, 2, 3}));
}

TEST_CASE("mcc agrees with the correlation oracle") {
    Rng rng(53);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t classes = 2 + rng() % 8;
        const ConfusionMatrix cm = random_matrix(classes, rng, trial % 4 == 0 ? 2 : 30);
        const double value = mcc(cm);
        CHECK(value >= -1.0 - 1e-12);
        CHECK(value <= 1.0 + 1e-12);
        CHECK(std::abs(value - oracle::multiclass_mcc(rows_of(cm))) <= 1e-10);
        CHECK(std::abs(value - static_cast<double>(oracle::gorodkin_mcc(rows_of(cm)))) <= 1e-12);
        if (classes == 2) {
            CHECK(std::abs(value - oracle::binary_mcc(static_cast<double>(cm.at(1, 1)),
                                                      static_cast<double>(cm.at(0, 0)),
                                                      static_cast<double>(cm.at(0, 1)),
                                                      static_cast<double>(cm.at(1, 0)))) <= 1e-12);
        }

        // Relabel classes with a random permutation, and swap roles of
        // truth and prediction.
        std::vector<std::size_t> perm(classes);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        ConfusionMatrix permuted(classes), transposed(classes);
        for (std::size_t t = 0; t < classes; ++t) {
            for (std::size_t p = 0; p < classes; ++p) {
                permuted.add(perm[t], perm[p], cm.at(t, p));
                transposed.add(p, t, cm.at(t, p));
            }
        }
        CHECK(std::abs(mcc(permuted) - value) <= 1e-12);
        CHECK(std::abs(mcc(transposed) - value) <= 1e-12);
    }
}

TEST_CASE("confusion matrix arithmetic") {
    ConfusionMatrix a(2), b(2);
    a.add(0, 1, 3);
    b.add(0, 1);
    b.add(1, 1, 2);
    a += b;
    CHECK(a.at(0, 1) == 4);
    CHECK(a.at(1, 1) == 2);
    CHECK(a.total() == 6);
    CHECK_THROWS(a.add(2, 0));
    CHECK_THROWS(a += ConfusionMatrix(3));
}

TEST_CASE("training memorizes random labels") {
    Rng rng(61);
    const Split split = random_labeled_split(64, 20, 2, rng);
    const Tokenizer tok(parse_tokenizer_spec("1mer"));
    const auto examples = make_examples(tok, split, 22);
    const EncoderModel model(tiny_config());
    TrainOptions o;
    o.epochs = 125;  // 4 steps per epoch, 500 steps
    o.batch_size = 16;
    o.lr_peak = 3e-3;
    o.adamw.weight_decay = 0.0;
    o.seed = 3;
    const TrainResult r = train(model, model.init_params(5, 0.1), examples, examples, o);
    CHECK(r.steps == 500);
    CHECK(r.step_loss.size() == 500);
    const auto cm = confusion(model, r.params, examples);
    CHECK(cm.at(0, 0) + cm.at(1, 1) == 64);

    // Smoothed loss envelope: the mean over steps [k+50, k+100) should not
    // exceed the mean over [k, k+50) for at least 95% of offsets k.
    auto window = [&](std::size_t from) {
        double sum = 0.0;
        for (std::size_t i = from; i < from + 50; ++i) {
            sum += r.step_loss[i];
        }
        return sum / 50.0;
    };
    std::size_t violations = 0, windows = 0;
    for (std::size_t k = 0; k + 100 <= r.step_loss.size(); ++k, ++windows) {
        violations += window(k + 50) > window(k) ? 1 : 0;
    }
    CHECK(static_cast<double>(violations) <= 0.05 * static_cast<double>(windows));
}

TEST_CASE("training is deterministic and keeps the dev best epoch") {
    MotifTaskOptions mo;
    mo.length = 30;
    mo.train = 96;
    mo.dev = 32;
    mo.test = 32;
    const TaskDataset task = make_motif_task(mo, 9);
    const Tokenizer tok(parse_tokenizer_spec("2mer"));
    const auto train_set = make_examples(tok, task.train, 32);
    const auto dev_set = make_examples(tok, task.dev, 32);
    ModelConfig c = tiny_config();
    c.vocab_size = tok.vocabulary().size();
    c.max_len = 32;
    c.dropout = 0.1;
    const EncoderModel model(c);

    std::vector<EpochSummary> seen;
    TrainOptions o;
    o.epochs = 4;
    o.batch_size = 8;
    o.lr_peak = 3e-3;
    o.seed = 11;
    o.on_epoch = [&](const EpochSummary& s) { seen.push_back(s); };
    const TrainResult a = train(model, model.init_params(1, 0.1), train_set, dev_set, o);
    o.on_epoch = nullptr;
    o.threads = 3;
    const TrainResult b = train(model, model.init_params(1, 0.1), train_set, dev_set, o);

    REQUIRE(a.dev_mcc.size() == 4);
    CHECK(seen.size() == 4);
    CHECK(seen[2].epoch == 3);
    CHECK(a.dev_mcc == b.dev_mcc);
    CHECK(a.best_epoch == b.best_epoch);
    CHECK(a.steps == 4 * 12);
    for (std::size_t i = 0; i < a.step_loss.size(); ++i) {
        CHECK(std::abs(a.step_loss[i] - b.step_loss[i]) <= 1e-9);
    }

    const auto best = std::max_element(a.dev_mcc.begin(), a.dev_mcc.end());
    CHECK(a.best_epoch == static_cast<std::size_t>(best - a.dev_mcc.begin()) + 1);
    CHECK(mcc(confusion(model, a.params, dev_set)) == doctest::Approx(*best).epsilon(1e-12));
}

TEST_CASE("zero epochs returns the initial params") {
    Rng rng(3);
    const Split split = random_labeled_split(8, 10, 2, rng);
    const Tokenizer tok(parse_tokenizer_spec("1mer"));
    const auto ex = make_examples(tok, split, 22);
    const EncoderModel model(tiny_config());
    const ModelParams init = model.init_params(2);
    TrainOptions o;
    o.epochs = 0;
    const TrainResult r = train(model, init, ex, ex, o);
    CHECK(r.params == init);
    CHECK(r.dev_mcc.empty());
    CHECK(r.best_epoch == 0);
    CHECK(r.steps == 0);
}

TEST_CASE("evaluation is seeded and a constant predictor scores zero") {
    MotifTaskOptions mo;
    mo.length = 20;
    mo.train = 10;
    mo.dev = 10;
    mo.test = 40;
    const TaskDataset task = make_motif_task(mo, 2);
    const Tokenizer tok(parse_tokenizer_spec("1mer"));
    const EncoderModel model(tiny_config());
    ModelParams params = model.init_params(3, 0.1);

    const auto head = Perturbation::head_delete_tail_fill(3);
    const Evaluation a = evaluate(model, params, tok, task.test, head, 5, 22, 1);
    const Evaluation b = evaluate(model, params, tok, task.test, head, 5, 22, 3);
    CHECK(a.confusion == b.confusion);
    CHECK(a.confusion.total() == 40);

    params.classifier.setZero();
    params.classifier_bias << 0.0, 1.0;
    const Evaluation constant = evaluate(model, params, tok, task.test, Perturbation::original(), 0, 22);
    CHECK(constant.confusion.at(1, 1) + constant.confusion.at(0, 1) == 40);
    CHECK(constant.mcc == 0.0);
}

TEST_CASE("run metadata") {
    RunMetadata m;
    m.seed = 7;
    m.config = tiny_config();
    m.epochs = 2;
    m.dev_mcc = {0.5, 0.25};
    m.best_epoch = 1;
    m.code_version = code_version();
    const std::string json = run_metadata_json(m);
    CHECK(json.find("\"seed\": 7") != std::string::npos);
    CHECK(json.find("\"best_epoch\": 1") != std::string::npos);
    CHECK(json.find("rope") != std::string::npos);
    CHECK(std::string(code_version()).size() > 0);
}
