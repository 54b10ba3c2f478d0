// SPDX-License-Identifier: Apache-2.0

#include "sptw/detector.hpp"

#include "sptw/bytes.hpp"
#include "sptw/channel.hpp"
#include "sptw/error.hpp"
#include "sptw/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <regex>

namespace sptw::detector {

namespace {

void shape(bool ok, const std::string& what)
{
    if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

void compose(bool ok, const std::string& what)
{
    if (!ok) throw Error(ErrorCode::ShapeCompositionError, what);
}

// out[r][o] = b[o] + sum_i a[r][i] * w[i][o]
std::vector<float> affine(std::span<const float> a, std::size_t rows, std::size_t in, std::span<const float> w,
                          std::span<const float> b, std::size_t out)
{
    std::vector<float> y(rows * out);
    for (std::size_t r = 0; r < rows; ++r) {
        float* yr = y.data() + r * out;
        std::copy(b.begin(), b.end(), yr);
        const float* ar = a.data() + r * in;
        for (std::size_t i = 0; i < in; ++i) {
            const float v = ar[i];
            const float* wi = w.data() + i * out;
            for (std::size_t o = 0; o < out; ++o) yr[o] += v * wi[o];
        }
    }
    return y;
}

bool all_finite(std::span<const float> x) noexcept
{
    return std::all_of(x.begin(), x.end(), [](float v) { return std::isfinite(v); });
}

} // namespace

std::vector<float> conv1d(std::span<const float> in, std::size_t length, std::size_t channels,
                          std::span<const float> kernel, std::size_t k, std::size_t filters, std::span<const float> bias,
                          std::size_t stride, std::size_t padding)
{
    shape(in.size() == length * channels, "conv1d input size does not match length x channels");
    shape(k >= 1 && filters >= 1 && stride >= 1, "conv1d needs k, filters and stride >= 1");
    shape(kernel.size() == k * channels * filters, "conv1d kernel size does not match k x channels x filters");
    shape(bias.size() == filters, "conv1d bias size does not match filters");
    shape(length + 2 * padding >= k, "conv1d input shorter than kernel");
    const std::size_t out_len = (length + 2 * padding - k) / stride + 1;
    std::vector<float> out(out_len * filters);
    for (std::size_t l = 0; l < out_len; ++l) {
        float* o = out.data() + l * filters;
        std::copy(bias.begin(), bias.end(), o);
        for (std::size_t j = 0; j < k; ++j) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(l * stride + j) - static_cast<std::ptrdiff_t>(padding);
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(length)) continue;
            const float* x = in.data() + static_cast<std::size_t>(src) * channels;
            const float* w = kernel.data() + j * channels * filters;
            for (std::size_t c = 0; c < channels; ++c) {
                const float v = x[c];
                const float* wc = w + c * filters;
                for (std::size_t f = 0; f < filters; ++f) o[f] += v * wc[f];
            }
        }
    }
    return out;
}

std::vector<float> maxpool1d(std::span<const float> in, std::size_t length, std::size_t channels, std::size_t pool)
{
    shape(in.size() == length * channels, "maxpool input size does not match length x channels");
    shape(pool >= 1 && length >= pool, "maxpool window larger than input");
    const std::size_t out_len = length / pool;
    std::vector<float> out(out_len * channels);
    for (std::size_t l = 0; l < out_len; ++l)
        for (std::size_t c = 0; c < channels; ++c) {
            float m = in[l * pool * channels + c];
            for (std::size_t j = 1; j < pool; ++j) m = std::max(m, in[(l * pool + j) * channels + c]);
            out[l * channels + c] = m;
        }
    return out;
}

void relu_inplace(std::span<float> x) noexcept
{
    for (auto& v : x) v = v > 0.0f ? v : 0.0f;
}

void softmax_rows(std::span<float> m, std::size_t rows, std::size_t cols)
{
    shape(m.size() == rows * cols, "softmax size mismatch");
    for (std::size_t r = 0; r < rows; ++r) {
        float* row = m.data() + r * cols;
        const float mx = *std::max_element(row, row + cols);
        float sum = 0.0f;
        for (std::size_t c = 0; c < cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            sum += row[c];
        }
        const float inv = 1.0f / sum;
        for (std::size_t c = 0; c < cols; ++c) row[c] *= inv;
    }
}

std::vector<float> dense(std::span<const float> in, std::span<const float> w, std::span<const float> bias,
                         std::size_t in_dim, std::size_t out_dim)
{
    shape(in.size() == in_dim, "dense input size mismatch");
    shape(w.size() == in_dim * out_dim, "dense weight size mismatch");
    shape(bias.size() == out_dim, "dense bias size mismatch");
    return affine(in, 1, in_dim, w, bias, out_dim);
}

std::vector<float> non_local_block(std::span<const float> x, std::size_t length, const NonLocalParams& p)
{
    const std::size_t c = p.channels, ci = p.inner;
    shape(x.size() == length * c, "non-local input size mismatch");
    shape(p.theta_w.size() == c * ci && p.phi_w.size() == c * ci && p.g_w.size() == c * ci, "non-local projection size");
    shape(p.theta_b.size() == ci && p.phi_b.size() == ci && p.g_b.size() == ci, "non-local projection bias size");
    shape(p.out_w.size() == ci * c && p.out_b.size() == c, "non-local output projection size");
    const auto theta = affine(x, length, c, p.theta_w, p.theta_b, ci);
    const auto phi = affine(x, length, c, p.phi_w, p.phi_b, ci);
    const auto g = affine(x, length, c, p.g_w, p.g_b, ci);

    std::vector<float> att(length * length);
    for (std::size_t i = 0; i < length; ++i) {
        const float* ti = theta.data() + i * ci;
        for (std::size_t j = 0; j < length; ++j) {
            const float* pj = phi.data() + j * ci;
            float s = 0.0f;
            for (std::size_t q = 0; q < ci; ++q) s += ti[q] * pj[q];
            att[i * length + j] = s;
        }
    }
    softmax_rows(att, length, length);
    std::vector<float> y(length * ci, 0.0f);
    for (std::size_t i = 0; i < length; ++i) {
        float* yi = y.data() + i * ci;
        for (std::size_t j = 0; j < length; ++j) {
            const float a = att[i * length + j];
            const float* gj = g.data() + j * ci;
            for (std::size_t q = 0; q < ci; ++q) yi[q] += a * gj[q];
        }
    }
    auto z = affine(y, length, ci, p.out_w, p.out_b, c);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += x[i];
    return z;
}

std::size_t Tensor::numel() const noexcept
{
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

const Tensor* ModelWeights::find(const std::string& name) const noexcept
{
    for (const auto& t : tensors)
        if (t.name == name) return &t;
    return nullptr;
}

void save_weights(const ModelWeights& w, const std::filesystem::path& path)
{
    std::vector<std::uint8_t> out;
    bytes::put_str(out, std::string(kWeightsMagic, 6));
    bytes::put_u32(out, w.format_version);
    bytes::put_u32(out, static_cast<std::uint32_t>(w.tensors.size()));
    for (const auto& t : w.tensors) {
        if (t.name.size() > 0xffff || t.dims.size() > 0xff || t.data.size() != t.numel())
            throw Error(ErrorCode::InvalidParams, "tensor '" + t.name + "' cannot be encoded");
        bytes::put_u16(out, static_cast<std::uint16_t>(t.name.size()));
        bytes::put_str(out, t.name);
        bytes::put_u8(out, static_cast<std::uint8_t>(t.kind));
        bytes::put_u8(out, static_cast<std::uint8_t>(t.dims.size()));
        for (auto d : t.dims) bytes::put_u32(out, d);
        for (float v : t.data) bytes::put_f32(out, v);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

ModelWeights load_weights(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::MalformedFile, "cannot open " + path.string());
    const std::vector<std::uint8_t> buf{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    if (buf.size() < 6 || std::memcmp(buf.data(), kWeightsMagic, 6) != 0)
        throw Error(ErrorCode::MalformedFile, path.string() + " is not a weights file");
    std::size_t pos = 6;
    auto need = [&](std::size_t n, const char* what) {
        if (buf.size() - pos < n) throw Error(ErrorCode::ShapeCompositionError, std::string("weights file truncated in ") + what);
    };
    need(8, "header");
    ModelWeights w;
    w.format_version = bytes::get_u32(buf.data() + pos);
    if (w.format_version != kWeightsVersion)
        throw Error(ErrorCode::FormatVersionMismatch, "unsupported weights version " + std::to_string(w.format_version));
    const std::uint32_t count = bytes::get_u32(buf.data() + pos + 4);
    pos += 8;
    for (std::uint32_t i = 0; i < count; ++i) {
        Tensor t;
        need(2, "tensor name length");
        const std::size_t nlen = bytes::get_u16(buf.data() + pos);
        pos += 2;
        need(nlen + 2, "tensor name");
        t.name.assign(reinterpret_cast<const char*>(buf.data() + pos), nlen);
        pos += nlen;
        const std::uint8_t kind = buf[pos];
        const std::uint8_t ndim = buf[pos + 1];
        pos += 2;
        compose(kind <= 3, "tensor '" + t.name + "' has unknown kind " + std::to_string(kind));
        compose(ndim >= 1, "tensor '" + t.name + "' has no dimensions");
        t.kind = static_cast<LayerKind>(kind);
        need(4u * ndim, "tensor dims");
        std::uint64_t numel = 1;
        for (std::uint8_t d = 0; d < ndim; ++d) {
            t.dims.push_back(bytes::get_u32(buf.data() + pos));
            pos += 4;
            numel *= t.dims.back();
            compose(numel <= (1ull << 28), "tensor '" + t.name + "' is implausibly large");
        }
        need(static_cast<std::size_t>(numel) * 4, "tensor data");
        t.data.resize(static_cast<std::size_t>(numel));
        for (auto& v : t.data) {
            v = bytes::get_f32(buf.data() + pos);
            pos += 4;
            if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteTensor, "tensor '" + t.name + "' has a non-finite value");
        }
        w.tensors.push_back(std::move(t));
    }
    compose(pos == buf.size(), "trailing bytes after the last tensor");
    (void)Model::from_weights(w);
    return w;
}

namespace {

struct ConvRefs {
    const Tensor* weight = nullptr;
    const Tensor* bias = nullptr;
    const Tensor* bn = nullptr;
};

struct NlbRefs {
    std::map<std::string, const Tensor*> parts; // "theta.weight" etc.
};

struct DenseRefs {
    const Tensor* weight = nullptr;
    const Tensor* bias = nullptr;
};

void expect_dims(const Tensor& t, std::initializer_list<std::size_t> dims, LayerKind kind)
{
    compose(t.kind == kind, "tensor '" + t.name + "' has the wrong layer kind");
    bool ok = t.dims.size() == dims.size();
    if (ok) {
        std::size_t i = 0;
        for (auto d : dims) ok = ok && t.dims[i++] == d;
    }
    std::string want;
    for (auto d : dims) want += (want.empty() ? "" : "x") + std::to_string(d);
    compose(ok, "tensor '" + t.name + "' should be " + want);
}

} // namespace

Model Model::from_weights(const ModelWeights& w)
{
    compose(w.format_version == kWeightsVersion, "unsupported weights version");
    static const std::regex conv_re(R"(block(\d+)\.conv(\d+)\.(weight|bias|bn))");
    static const std::regex nlb_re(R"(block(\d+)\.nlb\.((theta|phi|g|out)\.(weight|bias)))");
    static const std::regex dense_re(R"(dense(\d+)\.(weight|bias))");

    std::map<std::size_t, std::map<std::size_t, ConvRefs>> convs;
    std::map<std::size_t, NlbRefs> nlbs;
    std::map<std::size_t, DenseRefs> denses;
    std::map<std::string, int> seen;
    for (const auto& t : w.tensors) {
        compose(seen[t.name]++ == 0, "duplicate tensor '" + t.name + "'");
        compose(t.data.size() == t.numel(), "tensor '" + t.name + "' data does not match its dims");
        std::smatch m;
        if (std::regex_match(t.name, m, conv_re)) {
            auto& r = convs[std::stoul(m[1])][std::stoul(m[2])];
            (m[3] == "weight" ? r.weight : m[3] == "bias" ? r.bias : r.bn) = &t;
        } else if (std::regex_match(t.name, m, nlb_re)) {
            nlbs[std::stoul(m[1])].parts[m[2]] = &t;
        } else if (std::regex_match(t.name, m, dense_re)) {
            auto& r = denses[std::stoul(m[1])];
            (m[2] == "weight" ? r.weight : r.bias) = &t;
        } else {
            compose(false, "unrecognised tensor '" + t.name + "'");
        }
    }
    compose(!convs.empty(), "weights contain no convolution blocks");
    compose(!denses.empty(), "weights contain no dense layers");

    Model model;
    std::size_t c = kInputChannels;
    std::size_t len = kInputLength;
    std::size_t b_expect = 0;
    for (const auto& [b, layers] : convs) {
        compose(b == b_expect++, "convolution blocks are not numbered 0..n-1");
        Block blk;
        std::size_t i_expect = 0;
        for (const auto& [i, r] : layers) {
            const std::string base = "block" + std::to_string(b) + ".conv" + std::to_string(i);
            compose(i == i_expect++, base + ": convolutions are not numbered 0..n-1");
            compose(r.weight && r.bias, base + " needs weight and bias");
            compose(r.weight->dims.size() == 3, base + ".weight must be K x Cin x Cout");
            ConvLayer cl;
            cl.k = r.weight->dims[0];
            cl.in_ch = r.weight->dims[1];
            cl.out_ch = r.weight->dims[2];
            compose(cl.k % 2 == 1, base + ": kernel size must be odd for same padding");
            compose(cl.in_ch == c, base + ": expects " + std::to_string(cl.in_ch) + " input channels, previous layer gives " +
                                       std::to_string(c));
            expect_dims(*r.weight, {cl.k, cl.in_ch, cl.out_ch}, LayerKind::Conv1D);
            expect_dims(*r.bias, {cl.out_ch}, LayerKind::Conv1D);
            cl.weight = r.weight->data;
            cl.bias = r.bias->data;
            if (r.bn) {
                expect_dims(*r.bn, {4, cl.out_ch}, LayerKind::BatchNorm);
                const auto& d = r.bn->data; // rows: gamma, beta, mean, var
                cl.bn_scale.resize(cl.out_ch);
                cl.bn_shift.resize(cl.out_ch);
                for (std::size_t f = 0; f < cl.out_ch; ++f) {
                    const double var = d[3 * cl.out_ch + f];
                    compose(var + 1e-5 > 0.0, base + ".bn has a negative variance");
                    const double s = d[f] / std::sqrt(var + 1e-5);
                    cl.bn_scale[f] = static_cast<float>(s);
                    cl.bn_shift[f] = static_cast<float>(d[cl.out_ch + f] - d[2 * cl.out_ch + f] * s);
                }
            }
            c = cl.out_ch;
            blk.convs.push_back(std::move(cl));
        }
        compose(len >= 2, "too many pooling stages for a 1024-sample input");
        len /= 2;
        if (auto it = nlbs.find(b); it != nlbs.end()) {
            const auto& parts = it->second.parts;
            const std::string base = "block" + std::to_string(b) + ".nlb";
            for (const char* p : {"theta.weight", "theta.bias", "phi.weight", "phi.bias", "g.weight", "g.bias", "out.weight", "out.bias"})
                compose(parts.count(p) == 1, base + " is missing " + p);
            const Tensor& tw = *parts.at("theta.weight");
            compose(tw.dims.size() == 2, base + ".theta.weight must be C x Ci");
            NonLocalParams p;
            p.channels = c;
            p.inner = tw.dims[1];
            for (const char* proj : {"theta", "phi", "g"}) {
                expect_dims(*parts.at(std::string(proj) + ".weight"), {c, p.inner}, LayerKind::NonLocal);
                expect_dims(*parts.at(std::string(proj) + ".bias"), {p.inner}, LayerKind::NonLocal);
            }
            expect_dims(*parts.at("out.weight"), {p.inner, c}, LayerKind::NonLocal);
            expect_dims(*parts.at("out.bias"), {c}, LayerKind::NonLocal);
            p.theta_w = parts.at("theta.weight")->data;
            p.theta_b = parts.at("theta.bias")->data;
            p.phi_w = parts.at("phi.weight")->data;
            p.phi_b = parts.at("phi.bias")->data;
            p.g_w = parts.at("g.weight")->data;
            p.g_b = parts.at("g.bias")->data;
            p.out_w = parts.at("out.weight")->data;
            p.out_b = parts.at("out.bias")->data;
            blk.nonlocal = std::move(p);
        }
        model.blocks_.push_back(std::move(blk));
    }
    for (const auto& [b, refs] : nlbs) {
        (void)refs;
        compose(b < model.blocks_.size(), "non-local block attached to a missing convolution block");
    }

    std::size_t in = len * c;
    std::size_t j_expect = 0;
    for (const auto& [j, r] : denses) {
        const std::string base = "dense" + std::to_string(j);
        compose(j == j_expect++, "dense layers are not numbered 0..n-1");
        compose(r.weight && r.bias, base + " needs weight and bias");
        compose(r.weight->dims.size() == 2, base + ".weight must be in x out");
        compose(r.weight->dims[0] == in, base + ": expects " + std::to_string(r.weight->dims[0]) +
                                             " inputs, previous layer gives " + std::to_string(in));
        DenseLayer d;
        d.in_dim = in;
        d.out_dim = r.weight->dims[1];
        expect_dims(*r.weight, {d.in_dim, d.out_dim}, LayerKind::Dense);
        expect_dims(*r.bias, {d.out_dim}, LayerKind::Dense);
        d.weight = r.weight->data;
        d.bias = r.bias->data;
        in = d.out_dim;
        model.dense_.push_back(std::move(d));
    }
    compose(in == 1, "final dense layer must have one output");
    return model;
}

double sigmoid_open(double z) noexcept
{
    const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double Model::logit(std::span<const float> sample) const
{
    shape(sample.size() == kInputLength * kInputChannels, "model input must be 1024 x 2");
    std::vector<float> x(sample.begin(), sample.end());
    std::size_t len = kInputLength;
    std::size_t c = kInputChannels;
    for (const auto& blk : blocks_) {
        for (const auto& cl : blk.convs) {
            x = conv1d(x, len, c, cl.weight, cl.k, cl.out_ch, cl.bias, 1, cl.k / 2);
            c = cl.out_ch;
            if (!cl.bn_scale.empty())
                for (std::size_t i = 0; i < x.size(); ++i) x[i] = x[i] * cl.bn_scale[i % c] + cl.bn_shift[i % c];
            relu_inplace(x);
        }
        x = maxpool1d(x, len, c, 2);
        len /= 2;
        if (blk.nonlocal) x = non_local_block(x, len, *blk.nonlocal);
        if (!all_finite(x)) throw Error(ErrorCode::NonFiniteActivation, "non-finite activation in a convolution block");
    }
    for (std::size_t j = 0; j < dense_.size(); ++j) {
        const auto& d = dense_[j];
        x = dense(x, d.weight, d.bias, d.in_dim, d.out_dim);
        if (j + 1 < dense_.size()) relu_inplace(x);
    }
    if (!all_finite(x)) throw Error(ErrorCode::NonFiniteActivation, "non-finite logit");
    return x[0];
}

std::vector<double> Model::forward(std::span<const float> batch, std::size_t b) const
{
    shape(b >= 1, "batch must hold at least one sample");
    const std::size_t per = kInputLength * kInputChannels;
    shape(batch.size() == b * per, "batch size does not match B x 1024 x 2");
    std::vector<double> out(b);
    for (std::size_t i = 0; i < b; ++i) out[i] = sigmoid_open(logit(batch.subspan(i * per, per)));
    return out;
}

Model load_model(const std::filesystem::path& path) { return Model::from_weights(load_weights(path)); }

ModelWeights make_random_weights(const Architecture& arch, std::uint64_t seed, bool zero_nonlocal_out)
{
    const std::size_t nb = arch.widths.size();
    if (nb == 0 || arch.convs_per_block.size() != nb || arch.nonlocal_after.size() != nb || arch.kernel % 2 == 0)
        throw Error(ErrorCode::InvalidParams, "inconsistent architecture description");
    Rng rng(seed);
    std::normal_distribution<float> unit(0.0f, 1.0f);
    ModelWeights w;
    auto add = [&](std::string name, LayerKind kind, std::vector<std::uint32_t> dims, float stddev) {
        Tensor t;
        t.name = std::move(name);
        t.kind = kind;
        t.dims = std::move(dims);
        t.data.resize(t.numel());
        for (auto& v : t.data) v = stddev == 0.0f ? 0.0f : unit(rng) * stddev;
        w.tensors.push_back(std::move(t));
        return &w.tensors.back();
    };
    auto u32 = [](std::size_t v) { return static_cast<std::uint32_t>(v); };
    std::size_t c = kInputChannels;
    std::size_t len = kInputLength;
    for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t i = 0; i < arch.convs_per_block[b]; ++i) {
            const std::string base = "block" + std::to_string(b) + ".conv" + std::to_string(i);
            const std::size_t f = arch.widths[b];
            add(base + ".weight", LayerKind::Conv1D, {u32(arch.kernel), u32(c), u32(f)},
                std::sqrt(2.0f / static_cast<float>(arch.kernel * c)));
            add(base + ".bias", LayerKind::Conv1D, {u32(f)}, 0.05f);
            if (arch.batchnorm) {
                Tensor* bn = add(base + ".bn", LayerKind::BatchNorm, {4, u32(f)}, 0.1f);
                for (std::size_t q = 0; q < f; ++q) {
                    bn->data[q] += 1.0f;                                 // gamma
                    bn->data[3 * f + q] = 0.5f + std::abs(bn->data[3 * f + q]); // var
                }
            }
            c = f;
        }
        len /= 2;
        if (arch.nonlocal_after[b]) {
            const std::string base = "block" + std::to_string(b) + ".nlb.";
            const std::size_t ci = std::max<std::size_t>(1, c / 2);
            const float s = std::sqrt(1.0f / static_cast<float>(c));
            for (const char* p : {"theta", "phi", "g"}) {
                add(base + p + ".weight", LayerKind::NonLocal, {u32(c), u32(ci)}, s);
                add(base + p + ".bias", LayerKind::NonLocal, {u32(ci)}, 0.05f);
            }
            add(base + "out.weight", LayerKind::NonLocal, {u32(ci), u32(c)},
                zero_nonlocal_out ? 0.0f : std::sqrt(1.0f / static_cast<float>(ci)));
            add(base + "out.bias", LayerKind::NonLocal, {u32(c)}, zero_nonlocal_out ? 0.0f : 0.05f);
        }
    }
    std::size_t in = len * c;
    std::vector<std::size_t> outs = arch.dense_hidden;
    outs.push_back(1);
    for (std::size_t j = 0; j < outs.size(); ++j) {
        const std::string base = "dense" + std::to_string(j);
        add(base + ".weight", LayerKind::Dense, {u32(in), u32(outs[j])}, std::sqrt(2.0f / static_cast<float>(in)));
        add(base + ".bias", LayerKind::Dense, {u32(outs[j])}, 0.05f);
        in = outs[j];
    }
    return w;
}

VoteState::VoteState(std::size_t batch_size, std::size_t ring_size) : batch_(batch_size), ring_(ring_size, 0)
{
    if (batch_size == 0 || ring_size == 0) throw Error(ErrorCode::InvalidParams, "vote batch and ring sizes must be positive");
}

std::optional<DetectionVerdict> VoteState::step(std::span<const double> probabilities, double latency_s)
{
    if (probabilities.size() != batch_)
        throw Error(ErrorCode::BatchSizeMismatch, "expected " + std::to_string(batch_) + " outputs, got " +
                                                      std::to_string(probabilities.size()));
    for (double p : probabilities) {
        const std::uint8_t bit = p >= 0.5 ? 1 : 0;
        if (filled_ == ring_.size()) positives_ -= ring_[head_];
        else ++filled_;
        ring_[head_] = bit;
        positives_ += bit;
        head_ = (head_ + 1) % ring_.size();
        ++seen_;
    }
    if (filled_ < ring_.size()) return std::nullopt;
    DetectionVerdict v;
    v.radar_present = 2 * positives_ > ring_.size();
    v.vote_fraction = static_cast<double>(positives_) / static_cast<double>(ring_.size());
    v.latency_s = latency_s;
    v.window_index = seen_ - 1;
    return v;
}

std::vector<float> window_features(std::span<const cf32> samples, std::size_t n_windows, dataset::FeatureDomain domain)
{
    const std::size_t w = iqcore::kWindowLength;
    shape(samples.size() >= n_windows * w, "not enough samples for the requested windows");
    const std::size_t start = samples.size() - n_windows * w;
    std::vector<float> out(n_windows * w * 2, 0.0f);
    for (std::size_t k = 0; k < n_windows; ++k) {
        iqcore::Window1024 win;
        std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(start + k * w), w, win.values.begin());
        try {
            if (domain == dataset::FeatureDomain::Frequency) {
                win = iqcore::to_frequency(win);
            } else {
                std::vector<iqcore::cd> v(win.values.begin(), win.values.end());
                iqcore::normalize_power(v);
                for (std::size_t i = 0; i < w; ++i)
                    win.values[i] = cf32(static_cast<float>(v[i].real()), static_cast<float>(v[i].imag()));
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroWindow) throw;
            continue; // an all-zero window stays all-zero
        }
        const auto rec = dataset::record_from_window(win);
        std::copy(rec.features.begin(), rec.features.end(), out.begin() + static_cast<std::ptrdiff_t>(k * w * 2));
    }
    return out;
}

CnnDetector::CnnDetector(Model model, dataset::FeatureDomain domain) : model_(std::move(model)), domain_(domain) {}

std::size_t CnnDetector::history_needed(std::size_t n_windows) const { return n_windows * iqcore::kWindowLength; }

std::vector<double> CnnDetector::probabilities(std::span<const cf32> tail, std::size_t n_windows) const
{
    return model_.forward(window_features(tail, n_windows, domain_), n_windows);
}

BaselineDetector::BaselineDetector(const BaselineConfig& cfg) : cfg_(cfg)
{
    if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) throw Error(ErrorCode::InvalidParams, "threshold must lie in (0, 1)");
    template_ = waveforms::radar_pulse_template(cfg.radar);
    if (cfg.context < template_.size()) throw Error(ErrorCode::TemplateTooLong, "context shorter than the pulse template");
}

std::size_t BaselineDetector::history_needed(std::size_t n_windows) const
{
    return cfg_.context + (n_windows - 1) * iqcore::kWindowLength;
}

std::vector<double> BaselineDetector::scores(std::span<const cf32> tail, std::size_t n_windows) const
{
    shape(n_windows >= 1, "need at least one window");
    const std::size_t need = history_needed(n_windows);
    shape(tail.size() >= need, "not enough history for the requested windows");
    const auto buf = tail.subspan(tail.size() - need);
    const auto rho = channel::correlate_template(buf, std::span<const cf32>(template_.samples));
    const std::size_t t = template_.size();
    std::vector<double> out(n_windows, 0.0);
    for (std::size_t k = 0; k < n_windows; ++k) {
        const std::size_t end = cfg_.context + k * iqcore::kWindowLength;
        const std::size_t lo = end - cfg_.context;
        const std::size_t hi = end - t; // inclusive
        out[k] = *std::max_element(rho.begin() + static_cast<std::ptrdiff_t>(lo), rho.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    }
    return out;
}

std::vector<double> BaselineDetector::probabilities(std::span<const cf32> tail, std::size_t n_windows) const
{
    auto s = scores(tail, n_windows);
    for (auto& v : s) v = v >= cfg_.threshold ? 1.0 : 0.0;
    return s;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidParams, "line fit needs two or more points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw Error(ErrorCode::InvalidParams, "line fit needs distinct x values");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
    }
    f.r2 = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return f;
}

LatencyReport bench_latency(const Model& model, const std::vector<std::size_t>& batch_sizes, int trials, std::uint64_t seed)
{
    if (trials < 10) throw Error(ErrorCode::InvalidParams, "bench_latency needs at least 10 trials");
    if (batch_sizes.empty()) throw Error(ErrorCode::InvalidParams, "bench_latency needs batch sizes");
    LatencyReport rep;
    Rng rng(seed);
    std::normal_distribution<float> unit(0.0f, 1.0f);
    std::vector<double> xs, ys;
    for (std::size_t b : batch_sizes) {
        if (b == 0) throw Error(ErrorCode::InvalidParams, "batch size must be positive");
        std::vector<float> input(b * kInputLength * kInputChannels);
        for (auto& v : input) v = unit(rng);
        volatile double sink = model.forward(input, b)[0]; // warm-up
        std::vector<double> t(static_cast<std::size_t>(trials));
        for (auto& ti : t) {
            const auto t0 = std::chrono::steady_clock::now();
            sink = model.forward(input, b)[0];
            ti = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        (void)sink;
        LatencyPoint p;
        p.batch = b;
        p.mean_s = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(trials);
        double var = 0.0;
        for (double v : t) var += (v - p.mean_s) * (v - p.mean_s);
        p.std_s = std::sqrt(var / static_cast<double>(trials - 1));
        p.cv = p.mean_s > 0.0 ? p.std_s / p.mean_s : 0.0;
        rep.points.push_back(p);
        xs.push_back(static_cast<double>(b));
        ys.push_back(p.mean_s);
    }
    rep.monotone = true;
    for (std::size_t i = 1; i < rep.points.size(); ++i)
        if (!(rep.points[i].batch > rep.points[i - 1].batch && rep.points[i].mean_s > rep.points[i - 1].mean_s)) rep.monotone = false;
    if (xs.size() >= 2) {
        const auto f = fit_line(xs, ys);
        rep.slope_s = f.slope;
        rep.intercept_s = f.intercept;
        rep.r2 = f.r2;
    }
    return rep;
}

} // namespace sptw::detector
