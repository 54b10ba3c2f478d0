// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "test_util.hpp"

#include "sptw/bytes.hpp"
#include "sptw/detector.hpp"
#include "sptw/waveforms.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>

namespace det = sptw::detector;
using sptw::ErrorCode;
using testutil::error_code_of;

namespace {

const std::filesystem::path kData = SPTW_TEST_DATA_DIR;

std::vector<float> randn(std::size_t n, std::uint64_t seed, float scale = 1.0f)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> d(0.0f, scale);
    std::vector<float> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

det::Architecture tiny_arch()
{
    det::Architecture a;
    a.widths = {4, 4, 8, 8};
    a.convs_per_block = {1, 1, 1, 1};
    a.nonlocal_after = {true, false, true, false};
    a.dense_hidden = {8};
    return a;
}

std::vector<float> probe_batch()
{
    const auto raw = testutil::read_bytes(kData / "tiny_probe.f32");
    std::vector<float> v(raw.size() / 4);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = sptw::bytes::get_f32(raw.data() + 4 * i);
    return v;
}

} // namespace

TEST_CASE("conv1d identity kernel and constant field")
{
    const std::size_t len = 16, c = 3;
    const auto x = randn(len * c, 1);
    std::vector<float> eye(c * c, 0.0f);
    for (std::size_t i = 0; i < c; ++i) eye[i * c + i] = 1.0f;
    const std::vector<float> zero_bias(c, 0.0f);
    CHECK(det::conv1d(x, len, c, eye, 1, c, zero_bias) == x);

    // all-ones 3-tap kernel over a constant field of ones gives 3c inside, 2c at padded edges
    const std::vector<float> ones(len * 2, 1.0f), k3(3 * 2, 1.0f), b1(1, 0.0f);
    const auto y = det::conv1d(ones, len, 2, k3, 3, 1, b1, 1, 1);
    REQUIRE(y.size() == len);
    CHECK(y.front() == 4.0f);
    CHECK(y.back() == 4.0f);
    for (std::size_t l = 1; l + 1 < len; ++l) CHECK(y[l] == 6.0f);
    CHECK(det::conv1d(ones, len, 2, k3, 3, 1, b1).size() == len - 2);
}

TEST_CASE("conv1d matches a naive triple loop")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t len = 8 + rng() % 60, c = 1 + rng() % 5, f = 1 + rng() % 6, k = 1 + rng() % 5;
        const std::size_t stride = 1 + rng() % 3, pad = rng() % 3;
        if (len + 2 * pad < k) continue;
        const auto x = randn(len * c, rng());
        const auto w = randn(k * c * f, rng());
        const auto b = randn(f, rng());
        const auto y = det::conv1d(x, len, c, w, k, f, b, stride, pad);
        const std::size_t out_len = (len + 2 * pad - k) / stride + 1;
        REQUIRE(y.size() == out_len * f);
        double worst = 0.0;
        for (std::size_t l = 0; l < out_len; ++l)
            for (std::size_t o = 0; o < f; ++o) {
                double acc = b[o];
                for (std::size_t j = 0; j < k; ++j)
                    for (std::size_t ch = 0; ch < c; ++ch) {
                        const long src = static_cast<long>(l * stride + j) - static_cast<long>(pad);
                        if (src < 0 || src >= static_cast<long>(len)) continue;
                        acc += static_cast<double>(x[static_cast<std::size_t>(src) * c + ch]) * w[(j * c + ch) * f + o];
                    }
                worst = std::max(worst, std::abs(acc - y[l * f + o]));
            }
        CHECK(worst <= 1e-5);
    }
    const std::vector<float> x(10, 0.0f), w(6, 0.0f), b(2, 0.0f);
    CHECK(error_code_of([&] { det::conv1d(x, 10, 2, w, 3, 2, b); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("maxpool, relu and dense basics")
{
    const std::vector<float> x = {1, -1, 3, 5, 2, 0, -4, 8, 9, 9};
    CHECK(det::maxpool1d(x, 5, 2) == std::vector<float>{3, 5, 2, 8});
    std::vector<float> r = {-1.0f, 0.0f, 2.0f};
    det::relu_inplace(r);
    CHECK(r == std::vector<float>{0.0f, 0.0f, 2.0f});
    const std::vector<float> in = {1, 2}, w = {1, 0, 1, 0, 1, 1}, b = {0.5f, 0, -1};
    CHECK(det::dense(in, w, b, 2, 3) == std::vector<float>{1.5f, 2.0f, 2.0f});
}

TEST_CASE("softmax rows sum to one even for large logits")
{
    auto m = randn(7 * 11, 3, 50.0f);
    det::softmax_rows(m, 7, 11);
    for (std::size_t r = 0; r < 7; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 11; ++c) {
            CHECK(m[r * 11 + c] >= 0.0f);
            s += m[r * 11 + c];
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("non-local block with zero output projection is the identity")
{
    const std::size_t len = 32, c = 6, ci = 3;
    det::NonLocalParams p;
    p.channels = c;
    p.inner = ci;
    p.theta_w = randn(c * ci, 1);
    p.phi_w = randn(c * ci, 2);
    p.g_w = randn(c * ci, 3);
    p.theta_b = randn(ci, 4);
    p.phi_b = randn(ci, 5);
    p.g_b = randn(ci, 6);
    p.out_w.assign(ci * c, 0.0f);
    p.out_b.assign(c, 0.0f);
    const auto x = randn(len * c, 9);
    CHECK(det::non_local_block(x, len, p) == x);
}

TEST_CASE("non-local block on a two-position sequence")
{
    det::NonLocalParams p;
    p.channels = p.inner = 1;
    p.theta_w = p.phi_w = p.g_w = p.out_w = {1.0f};
    p.theta_b = p.phi_b = p.g_b = p.out_b = {0.0f};
    const std::vector<float> x = {1.0f, 2.0f};
    const auto y = det::non_local_block(x, 2, p);
    // scores x_i x_j: row 0 = {1, 2}, row 1 = {2, 4}
    const double e = std::exp(1.0), e2 = std::exp(2.0);
    CHECK(y[0] == doctest::Approx(1.0 + (1.0 + 2.0 * e) / (1.0 + e)).epsilon(1e-6));
    CHECK(y[1] == doctest::Approx(2.0 + (1.0 + 2.0 * e2) / (1.0 + e2)).epsilon(1e-6));
}

TEST_CASE("forward pass matches the float64 reference implementation")
{
    const auto model = det::load_model(kData / "tiny_model.sptwnn");
    const auto batch = probe_batch();
    REQUIRE(batch.size() == 3 * 1024 * 2);
    // golden values from tests/oracles/reference_forward.py
    const double logits[3] = {7.098290717, 7.983338087, 1.027202870};
    const double probs[3] = {0.999174166, 0.999659017, 0.736373255};
    const auto out = model.forward(batch, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto s = std::span<const float>(batch).subspan(i * 2048, 2048);
        CHECK(std::abs(model.logit(s) - logits[i]) <= 1e-4);
        CHECK(std::abs(out[i] - probs[i]) <= 1e-4);
    }
    REQUIRE(model.blocks().size() == 4);
    CHECK(model.blocks()[0].nonlocal.has_value());
    CHECK(model.blocks()[1].nonlocal.has_value());
    CHECK_FALSE(model.blocks()[2].nonlocal.has_value());
    CHECK_FALSE(model.blocks()[2].convs[0].bn_scale.empty());
    CHECK(model.blocks()[1].convs[0].k == 5);
}

TEST_CASE("outputs stay in the open unit interval")
{
    CHECK(det::sigmoid_open(1e4) < 1.0);
    CHECK(det::sigmoid_open(-1e4) > 0.0);
    CHECK(det::sigmoid_open(0.0) == 0.5);

    const auto model = det::Model::from_weights(det::make_random_weights(tiny_arch(), 11));
    for (float scale : {1e-3f, 1.0f, 1e3f}) {
        const auto x = randn(4 * 2048, 12, scale);
        for (double p : model.forward(x, 4)) {
            CHECK(p > 0.0);
            CHECK(p < 1.0);
        }
    }
}

TEST_CASE("batch permutation permutes the outputs")
{
    const auto model = det::Model::from_weights(det::make_random_weights(det::Architecture{}, 5));
    const std::size_t b = 4;
    const auto x = randn(b * 2048, 13);
    const auto y = model.forward(x, b);
    const std::size_t perm[b] = {2, 0, 3, 1};
    std::vector<float> xp(x.size());
    for (std::size_t i = 0; i < b; ++i)
        std::copy_n(x.begin() + static_cast<long>(perm[i] * 2048), 2048, xp.begin() + static_cast<long>(i * 2048));
    const auto yp = model.forward(xp, b);
    for (std::size_t i = 0; i < b; ++i) CHECK(yp[i] == y[perm[i]]);
    CHECK(error_code_of([&] { model.forward(x, b + 1); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("zero non-local output projection leaves a block transparent")
{
    auto arch = tiny_arch();
    auto with = det::make_random_weights(arch, 21, true);
    arch.nonlocal_after = {false, false, false, false};
    auto without = det::make_random_weights(arch, 21);
    // copy the shared conv and dense tensors so only the non-local blocks differ
    for (auto& t : without.tensors) t = *with.find(t.name);
    const auto x = randn(2 * 2048, 22);
    const auto a = det::Model::from_weights(with).forward(x, 2);
    const auto b = det::Model::from_weights(without).forward(x, 2);
    CHECK(a == b);
}

TEST_CASE("weights round trip and load errors")
{
    const auto dir = testutil::temp_dir("detector_weights");
    const auto w = det::make_random_weights(tiny_arch(), 3);
    det::save_weights(w, dir / "m.sptwnn");
    const auto back = det::load_weights(dir / "m.sptwnn");
    REQUIRE(back.tensors.size() == w.tensors.size());
    for (std::size_t i = 0; i < w.tensors.size(); ++i) {
        CHECK(back.tensors[i].name == w.tensors[i].name);
        CHECK(back.tensors[i].dims == w.tensors[i].dims);
        CHECK(back.tensors[i].data == w.tensors[i].data);
    }

    auto bytes = testutil::read_bytes(dir / "m.sptwnn");
    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    testutil::write_bytes(dir / "t.sptwnn", truncated);
    CHECK(error_code_of([&] { det::load_weights(dir / "t.sptwnn"); }) == ErrorCode::ShapeCompositionError);

    auto trailing = bytes;
    trailing.push_back(0);
    testutil::write_bytes(dir / "x.sptwnn", trailing);
    CHECK(error_code_of([&] { det::load_weights(dir / "x.sptwnn"); }) == ErrorCode::ShapeCompositionError);

    auto magic = bytes;
    magic[0] = 'X';
    testutil::write_bytes(dir / "g.sptwnn", magic);
    CHECK(error_code_of([&] { det::load_weights(dir / "g.sptwnn"); }) == ErrorCode::MalformedFile);

    auto version = bytes;
    version[6] = 2;
    testutil::write_bytes(dir / "v.sptwnn", version);
    CHECK(error_code_of([&] { det::load_weights(dir / "v.sptwnn"); }) == ErrorCode::FormatVersionMismatch);

    auto nan = w;
    nan.tensors[0].data[1] = std::numeric_limits<float>::quiet_NaN();
    det::save_weights(nan, dir / "n.sptwnn");
    CHECK(error_code_of([&] { det::load_weights(dir / "n.sptwnn"); }) == ErrorCode::NonFiniteTensor);

    CHECK(error_code_of([&] { det::load_weights(dir / "missing.sptwnn"); }) == ErrorCode::MalformedFile);
}

TEST_CASE("inconsistent layer shapes are rejected")
{
    const auto good = det::make_random_weights(tiny_arch(), 4);
    CHECK_NOTHROW(det::Model::from_weights(good));

    auto bad_dense = good;
    for (auto& t : bad_dense.tensors)
        if (t.name == "dense0.weight") {
            t.dims[0] += 1;
            t.data.resize(t.numel());
        }
    CHECK(error_code_of([&] { det::Model::from_weights(bad_dense); }) == ErrorCode::ShapeCompositionError);

    auto unknown = good;
    unknown.tensors[0].name = "block0.conv0.weigth";
    CHECK(error_code_of([&] { det::Model::from_weights(unknown); }) == ErrorCode::ShapeCompositionError);

    auto missing_nlb = good;
    std::erase_if(missing_nlb.tensors, [](const det::Tensor& t) { return t.name == "block0.nlb.g.bias"; });
    CHECK(error_code_of([&] { det::Model::from_weights(missing_nlb); }) == ErrorCode::ShapeCompositionError);

    auto wrong_kind = good;
    wrong_kind.tensors[0].kind = det::LayerKind::Dense;
    CHECK(error_code_of([&] { det::Model::from_weights(wrong_kind); }) == ErrorCode::ShapeCompositionError);

    auto dup = good;
    dup.tensors.push_back(good.tensors[1]);
    CHECK(error_code_of([&] { det::Model::from_weights(dup); }) == ErrorCode::ShapeCompositionError);

    const auto dir = testutil::temp_dir("detector_compose");
    det::save_weights(bad_dense, dir / "b.sptwnn");
    CHECK(error_code_of([&] { det::load_weights(dir / "b.sptwnn"); }) == ErrorCode::ShapeCompositionError);
}

TEST_CASE("vote threshold is a strict majority of the ring")
{
    auto run = [](std::size_t positives) {
        det::VoteState v(10, 100);
        std::optional<det::DetectionVerdict> last;
        for (std::size_t b = 0; b < 10; ++b) {
            std::vector<double> p(10);
            for (std::size_t i = 0; i < 10; ++i) p[i] = b * 10 + i < positives ? 0.9 : 0.1;
            last = v.step(p);
            if (b < 9) CHECK_FALSE(last.has_value());
        }
        REQUIRE(last.has_value());
        return *last;
    };
    CHECK(run(51).radar_present);
    CHECK_FALSE(run(50).radar_present);
    CHECK(run(0).vote_fraction == 0.0);
    CHECK(run(100).vote_fraction == 1.0);
    CHECK(run(100).window_index == 99);

    det::VoteState v;
    CHECK(error_code_of([&] { v.step(std::vector<double>(9, 0.0)); }) == ErrorCode::BatchSizeMismatch);
    CHECK(error_code_of([] { det::VoteState(0, 100); }) == ErrorCode::InvalidParams);
    std::vector<double> half(10, 0.5);
    v.step(half);
    CHECK(v.positives() == 10); // 0.5 counts as positive
}

TEST_CASE("vote verdict equals a recount of the last 100 outputs")
{
    std::mt19937_64 rng(99);
    for (int stream = 0; stream < 1000; ++stream) {
        det::VoteState v;
        std::deque<int> last;
        const double rate = std::uniform_real_distribution<double>(0.3, 0.7)(rng);
        std::bernoulli_distribution bit(rate);
        const int batches = 10 + static_cast<int>(rng() % 20);
        for (int b = 0; b < batches; ++b) {
            std::vector<double> p(10);
            for (auto& x : p) {
                const bool on = bit(rng);
                x = on ? std::uniform_real_distribution<double>(0.5, 1.0)(rng) : std::uniform_real_distribution<double>(0.0, 0.5)(rng);
                last.push_back(on);
                if (last.size() > 100) last.pop_front();
            }
            const auto verdict = v.step(p);
            CHECK(verdict.has_value() == (last.size() == 100));
            if (verdict) {
                const int pos = std::accumulate(last.begin(), last.end(), 0);
                CHECK(verdict->radar_present == (pos > 50));
                CHECK(v.positives() == static_cast<std::size_t>(pos));
            }
        }
    }
}

TEST_CASE("verdict flips within the expected number of windows after an onset")
{
    for (std::size_t lead = 100; lead < 200; lead += 7) {
        det::VoteState v;
        std::size_t window = 0, onset = lead, flipped = 0;
        while (flipped == 0) {
            std::vector<double> p(10);
            for (auto& x : p) x = window++ >= onset ? 1.0 : 0.0;
            auto verdict = v.step(p);
            if (verdict && verdict->radar_present) flipped = window;
        }
        const std::size_t arrivals = flipped - onset;
        CHECK(arrivals >= 51);
        CHECK(arrivals <= 150);
    }
}

TEST_CASE("window features are invariant to receiver gain")
{
    const auto x = testutil::random_buffer(3 * 1024, 31);
    auto y = x;
    for (auto& s : y.samples) s *= 7.5f;
    for (auto domain : {sptw::dataset::FeatureDomain::Frequency, sptw::dataset::FeatureDomain::Time}) {
        const auto fx = det::window_features(x.samples, 3, domain);
        const auto fy = det::window_features(y.samples, 3, domain);
        REQUIRE(fx.size() == 3 * 2048);
        double worst = 0.0;
        for (std::size_t i = 0; i < fx.size(); ++i) worst = std::max(worst, static_cast<double>(std::abs(fx[i] - fy[i])));
        CHECK(worst <= 1e-4);
    }
    const std::vector<sptw::iqcore::cf32> zeros(1024);
    const auto fz = det::window_features(zeros, 1, sptw::dataset::FeatureDomain::Frequency);
    CHECK(std::all_of(fz.begin(), fz.end(), [](float v) { return v == 0.0f; }));
}

TEST_CASE("cnn detector runs on the newest windows of a stream")
{
    det::CnnDetector d(det::Model::from_weights(det::make_random_weights(tiny_arch(), 8)));
    CHECK(d.history_needed(10) == 10240);
    const auto x = testutil::random_buffer(12000, 41);
    const auto p = d.probabilities(x.samples, 10);
    REQUIRE(p.size() == 10);
    for (double v : p) CHECK((v > 0.0 && v < 1.0));
}

TEST_CASE("baseline detector separates radar from noise")
{
    det::BaselineDetector d;
    const auto& cfg = d.config();
    CHECK(d.history_needed(10) == cfg.context + 9 * 1024);
    const auto radar = sptw::waveforms::gen_radar(cfg.radar);
    const std::size_t n = d.history_needed(10);
    sptw::iqcore::IQBuffer seg;
    seg.sample_rate_hz = radar.sample_rate_hz;
    seg.samples.assign(radar.samples.begin(), radar.samples.begin() + static_cast<long>(n));
    const auto mixed = sptw::waveforms::mix_at_snr(seg, nullptr, 10.0, std::nullopt, 3).mixed;
    for (double p : d.probabilities(mixed.samples, 10)) CHECK(p == 1.0);
    const auto noise = sptw::waveforms::gen_noise(static_cast<std::int64_t>(n), 1.0, 4);
    for (double p : d.probabilities(noise.samples, 10)) CHECK(p == 0.0);
    const auto s = d.scores(mixed.samples, 10);
    for (double v : s) CHECK(v <= 1.0 + 1e-6);

    det::BaselineConfig bad;
    bad.threshold = 1.0;
    CHECK(error_code_of([&] { det::BaselineDetector{bad}; }) == ErrorCode::InvalidParams);
    CHECK(error_code_of([&] { d.scores(noise.samples, 11); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("latency bench validates trials and fits a line")
{
    const auto model = det::Model::from_weights(det::make_random_weights(tiny_arch(), 2));
    CHECK(error_code_of([&] { det::bench_latency(model, {1, 10}, 9); }) == ErrorCode::InvalidParams);
    const auto rep = det::bench_latency(model, {1, 4}, 10);
    REQUIRE(rep.points.size() == 2);
    for (const auto& p : rep.points) {
        CHECK(p.mean_s > 0.0);
        CHECK(p.cv >= 0.0);
    }
    const auto f = det::fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    CHECK(error_code_of([] { det::fit_line({1, 1}, {2, 3}); }) == ErrorCode::InvalidParams);
}
