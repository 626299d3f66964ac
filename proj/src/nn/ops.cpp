#include "lvr/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "gemm.hpp"
#include "lvr/errors.hpp"

namespace lvr::nn {

namespace {

template <typename T>
void require_rank(const Tensor<T>& x, std::size_t rank, const char* op) {
    if (!x.defined() || x.rank() != rank)
        throw ConfigError(std::string(op) + ": expected rank " + std::to_string(rank) + " input, got " +
                          (x.defined() ? shape_string(x.shape()) : std::string("undefined")));
}

template <typename T>
void require_same_shape(const Tensor<T>& x, const Tensor<T>& y, const char* op) {
    if (!x.defined() || !y.defined() || x.shape() != y.shape())
        throw ConfigError(std::string(op) + ": shape mismatch");
}

template <typename T>
bool any_requires_grad(std::initializer_list<const Tensor<T>*> xs) {
    for (const auto* x : xs)
        if (x->defined() && x->requires_grad())
            return true;
    return false;
}

// Strided out-of-place transpose: dst[c * dst_ld + r] = src[r * src_ld + c].
template <typename T>
void transpose(const T* src, std::size_t rows, std::size_t cols, std::size_t src_ld, T* dst, std::size_t dst_ld) {
    constexpr std::size_t tile = 32;
    for (std::size_t r0 = 0; r0 < rows; r0 += tile)
        for (std::size_t c0 = 0; c0 < cols; c0 += tile) {
            const std::size_t r1 = std::min(rows, r0 + tile);
            const std::size_t c1 = std::min(cols, c0 + tile);
            for (std::size_t r = r0; r < r1; ++r)
                for (std::size_t c = c0; c < c1; ++c)
                    dst[c * dst_ld + r] = src[r * src_ld + c];
        }
}

// Convolution as a sum of shifted GEMMs over a zero-padded channels-last image.
// Output rows live on the padded-width grid q = y * wp + x; columns x >= w are scratch.
struct ConvLayout {
    std::size_t c_in, c_out, h, w, k, pad, wp, rows, padded;

    ConvLayout(std::size_t c_in_, std::size_t c_out_, std::size_t h_, std::size_t w_, std::size_t k_)
        : c_in(c_in_), c_out(c_out_), h(h_), w(w_), k(k_), pad(k_ / 2), wp(w_ + 2 * (k_ / 2)), rows(h_ * wp),
          padded(((h_ + 2 * pad) * wp + 2 * pad) * c_in_) {}

    std::size_t taps() const { return k * k; }
    std::size_t offset(std::size_t tap) const { return ((tap / k) * wp + tap % k) * c_in; }
    std::size_t interior(std::size_t y) const { return ((y + pad) * wp + pad) * c_in; }

    template <typename T>
    void pack_input(const T* x, T* xp) const {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(h); ++y)
            transpose(x + static_cast<std::size_t>(y) * w, c_in, w, h * w, xp + interior(static_cast<std::size_t>(y)), c_in);
    }

    template <typename T>
    void unpack_input_add(const T* xp, T* x) const {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(c_in); ++c)
            for (std::size_t y = 0; y < h; ++y) {
                const T* src = xp + interior(y) + static_cast<std::size_t>(c);
                T* dst = x + (static_cast<std::size_t>(c) * h + y) * w;
                for (std::size_t i = 0; i < w; ++i)
                    dst[i] += src[i * c_in];
            }
    }

    template <typename T>
    void pack_output(const T* y, T* yq) const {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(h); ++r) {
            T* row = yq + static_cast<std::size_t>(r) * wp * c_out;
            transpose(y + static_cast<std::size_t>(r) * w, c_out, w, h * w, row, c_out);
            std::fill(row + w * c_out, row + wp * c_out, T(0));
        }
    }

    template <typename T>
    void unpack_output(const T* yq, const T* bias, T* y) const {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t o = 0; o < static_cast<std::ptrdiff_t>(c_out); ++o) {
            const auto oc = static_cast<std::size_t>(o);
            const T v = bias != nullptr ? bias[oc] : T(0);
            for (std::size_t r = 0; r < h; ++r) {
                const T* src = yq + r * wp * c_out + oc;
                T* dst = y + (oc * h + r) * w;
                for (std::size_t i = 0; i < w; ++i)
                    dst[i] = src[i * c_out] + v;
            }
        }
    }
};

} // namespace

template <typename T>
Tensor<T> conv2d(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
    require_rank(x, 4, "conv2d");
    require_rank(weight, 4, "conv2d weight");
    const std::size_t batch = x.dim(0), c_in = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t c_out = weight.dim(0), k = weight.dim(2);
    if (weight.dim(1) != c_in)
        throw ConfigError("conv2d: input has " + std::to_string(c_in) + " channels, weight expects " +
                          std::to_string(weight.dim(1)));
    if (weight.dim(3) != k || k % 2 == 0)
        throw ConfigError("conv2d: kernel must be square with odd size");
    if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != c_out))
        throw ConfigError("conv2d: bias shape mismatch");

    const ConvLayout lay(c_in, c_out, h, w, k);
    const std::size_t hw = h * w;
    const std::size_t taps = lay.taps();
    const int rows = static_cast<int>(lay.rows), ci = static_cast<int>(c_in), co = static_cast<int>(c_out);
    Tensor<T> out({batch, c_out, h, w}, any_requires_grad<T>({&x, &weight, &bias}));
    // Per-tap weight blocks, each (c_out, c_in).
    auto wt = std::make_shared<std::vector<T>>(taps * c_out * c_in);
    {
        const T* wd = weight.data().data();
        for (std::size_t o = 0; o < c_out; ++o)
            for (std::size_t c = 0; c < c_in; ++c)
                for (std::size_t t = 0; t < taps; ++t)
                    (*wt)[(t * c_out + o) * c_in + c] = wd[(o * c_in + c) * taps + t];
    }
    std::vector<T> xp(lay.padded, T(0));
    std::vector<T> yq(lay.rows * c_out);
    const T* xd = x.data().data();
    const T* bd = bias.defined() ? bias.data().data() : nullptr;
    T* yd = out.data().data();
    for (std::size_t b = 0; b < batch; ++b) {
        lay.pack_input(xd + b * c_in * hw, xp.data());
        for (std::size_t t = 0; t < taps; ++t)
            detail::gemm(false, true, rows, co, ci, T(1), xp.data() + lay.offset(t), ci, wt->data() + t * c_out * c_in,
                         ci, T(t == 0 ? 0 : 1), yq.data(), co);
        lay.unpack_output(yq.data(), bd, yd + b * c_out * hw);
    }

    if (should_record(tape, {&x, &weight, &bias})) {
        tape.record([x, weight, bias, out, wt, lay, batch, hw, taps, rows, ci, co]() mutable {
            if (!out.has_grad())
                return;
            const std::size_t c_in = lay.c_in, c_out = lay.c_out;
            const T* dy = out.grad().data();
            const bool need_w = weight.requires_grad();
            T* db = bias.defined() && bias.requires_grad() ? bias.grad().data() : nullptr;
            T* dx = x.requires_grad() ? x.grad().data() : nullptr;
            std::vector<T> xp(need_w ? lay.padded : 0, T(0));
            std::vector<T> dxp(dx != nullptr ? lay.padded : 0);
            std::vector<T> dyq(lay.rows * c_out);
            std::vector<T> dwt(need_w ? taps * c_in * c_out : 0, T(0));
            const T* xd = x.data().data();
            for (std::size_t b = 0; b < batch; ++b) {
                const T* dyb = dy + b * c_out * hw;
                if (db != nullptr)
                    for (std::size_t o = 0; o < c_out; ++o) {
                        double acc = 0.0;
                        for (std::size_t i = 0; i < hw; ++i)
                            acc += dyb[o * hw + i];
                        db[o] += static_cast<T>(acc);
                    }
                if (!need_w && dx == nullptr)
                    continue;
                lay.pack_output(dyb, dyq.data());
                if (need_w) {
                    lay.pack_input(xd + b * c_in * hw, xp.data());
                    for (std::size_t t = 0; t < taps; ++t)
                        detail::gemm(true, false, ci, co, rows, T(1), xp.data() + lay.offset(t), ci, dyq.data(), co,
                                     T(1), dwt.data() + t * c_in * c_out, co);
                }
                if (dx != nullptr) {
                    std::fill(dxp.begin(), dxp.end(), T(0));
                    for (std::size_t t = 0; t < taps; ++t)
                        detail::gemm(false, false, rows, ci, co, T(1), dyq.data(), co, wt->data() + t * c_out * c_in,
                                     ci, T(1), dxp.data() + lay.offset(t), ci);
                    lay.unpack_input_add(dxp.data(), dx + b * c_in * hw);
                }
            }
            if (need_w) {
                T* dw = weight.grad().data();
                for (std::size_t o = 0; o < c_out; ++o)
                    for (std::size_t c = 0; c < c_in; ++c)
                        for (std::size_t t = 0; t < taps; ++t)
                            dw[(o * c_in + c) * taps + t] += dwt[(t * c_in + c) * c_out + o];
            }
        });
    }
    return out;
}

namespace {

// Shared plumbing for y = f(x) elementwise with dy/dx = g(x, y).
template <typename T, typename F, typename G>
Tensor<T> unary(Tape<T>& tape, const Tensor<T>& x, F f, G deriv) {
    Tensor<T> out(x.shape(), x.requires_grad());
    const auto xs = x.data();
    auto ys = out.data();
    for (std::size_t i = 0; i < xs.size(); ++i)
        ys[i] = f(xs[i]);
    if (should_record(tape, {&x})) {
        tape.record([x, out, deriv]() mutable {
            if (!out.has_grad())
                return;
            const auto xs = x.data();
            const auto ys = out.data();
            const auto dy = out.grad();
            auto dx = x.grad();
            for (std::size_t i = 0; i < xs.size(); ++i)
                dx[i] += dy[i] * deriv(xs[i], ys[i]);
        });
    }
    return out;
}

} // namespace

template <typename T>
Tensor<T> leaky_relu(Tape<T>& tape, const Tensor<T>& x, T slope) {
    return unary(
        tape, x, [slope](T v) { return v > T(0) ? v : slope * v; },
        [slope](T v, T) { return v > T(0) ? T(1) : slope; });
}

template <typename T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& x) {
    return unary(
        tape, x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> sigmoid(Tape<T>& tape, const Tensor<T>& x) {
    return unary(
        tape, x,
        [](T v) {
            if (v >= T(0))
                return T(1) / (T(1) + std::exp(-v));
            const T e = std::exp(v);
            return e / (T(1) + e);
        },
        [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> global_avg_pool(Tape<T>& tape, const Tensor<T>& x) {
    require_rank(x, 4, "global_avg_pool");
    const std::size_t batch = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    Tensor<T> out({batch, c}, x.requires_grad());
    const T* xd = x.data().data();
    T* yd = out.data().data();
    for (std::size_t bc = 0; bc < batch * c; ++bc) {
        double acc = 0.0;
        for (std::size_t i = 0; i < hw; ++i)
            acc += xd[bc * hw + i];
        yd[bc] = static_cast<T>(acc / static_cast<double>(hw));
    }
    if (should_record(tape, {&x})) {
        tape.record([x, out, batch, c, hw]() mutable {
            if (!out.has_grad())
                return;
            const T* dy = out.grad().data();
            T* dx = x.grad().data();
            const T inv = T(1) / static_cast<T>(hw);
            for (std::size_t bc = 0; bc < batch * c; ++bc) {
                const T g = dy[bc] * inv;
                for (std::size_t i = 0; i < hw; ++i)
                    dx[bc * hw + i] += g;
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> fully_connected(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& weight) {
    require_rank(x, 2, "fully_connected");
    require_rank(weight, 2, "fully_connected weight");
    const std::size_t batch = x.dim(0), in = x.dim(1), outd = weight.dim(0);
    if (weight.dim(1) != in)
        throw ConfigError("fully_connected: input width " + std::to_string(in) + " vs weight " +
                          shape_string(weight.shape()));
    Tensor<T> out({batch, outd}, any_requires_grad<T>({&x, &weight}));
    const int b = static_cast<int>(batch), i = static_cast<int>(in), o = static_cast<int>(outd);
    detail::gemm(false, true, b, o, i, T(1), x.data().data(), i, weight.data().data(), i, T(0), out.data().data(), o);
    if (should_record(tape, {&x, &weight})) {
        tape.record([x, weight, out, b, i, o]() mutable {
            if (!out.has_grad())
                return;
            const T* dy = out.grad().data();
            if (x.requires_grad())
                detail::gemm(false, false, b, i, o, T(1), dy, o, weight.data().data(), i, T(1), x.grad().data(), i);
            if (weight.requires_grad())
                detail::gemm(true, false, o, i, b, T(1), dy, o, x.data().data(), i, T(1), weight.grad().data(), i);
        });
    }
    return out;
}

template <typename T>
Tensor<T> concat_channels(Tape<T>& tape, const std::vector<Tensor<T>>& xs) {
    if (xs.empty())
        throw ConfigError("concat_channels: no inputs");
    for (const auto& x : xs)
        require_rank(x, 4, "concat_channels");
    const std::size_t batch = xs[0].dim(0), h = xs[0].dim(2), w = xs[0].dim(3), hw = h * w;
    std::size_t channels = 0;
    bool needs_grad = false;
    for (const auto& x : xs) {
        if (x.dim(0) != batch || x.dim(2) != h || x.dim(3) != w)
            throw ConfigError("concat_channels: batch/spatial mismatch " + shape_string(x.shape()) + " vs " +
                              shape_string(xs[0].shape()));
        channels += x.dim(1);
        needs_grad = needs_grad || x.requires_grad();
    }
    Tensor<T> out({batch, channels, h, w}, needs_grad);
    T* yd = out.data().data();
    for (std::size_t b = 0; b < batch; ++b) {
        std::size_t offset = 0;
        for (const auto& x : xs) {
            const std::size_t n = x.dim(1) * hw;
            const T* src = x.data().data() + b * n;
            std::copy(src, src + n, yd + (b * channels + offset) * hw);
            offset += x.dim(1);
        }
    }
    if (tape.recording() && needs_grad) {
        tape.record([xs, out, batch, channels, hw]() mutable {
            if (!out.has_grad())
                return;
            const T* dy = out.grad().data();
            std::size_t offset = 0;
            for (auto& x : xs) {
                const std::size_t c = x.dim(1);
                if (x.requires_grad()) {
                    T* dx = x.grad().data();
                    for (std::size_t b = 0; b < batch; ++b) {
                        const T* src = dy + (b * channels + offset) * hw;
                        T* dst = dx + b * c * hw;
                        for (std::size_t i = 0; i < c * hw; ++i)
                            dst[i] += src[i];
                    }
                }
                offset += c;
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> slice_channels(Tape<T>& tape, const Tensor<T>& x, std::size_t start, std::size_t count) {
    require_rank(x, 4, "slice_channels");
    const std::size_t batch = x.dim(0), channels = x.dim(1), hw = x.dim(2) * x.dim(3);
    if (count == 0 || start + count > channels)
        throw ConfigError("slice_channels: range out of bounds");
    Tensor<T> out({batch, count, x.dim(2), x.dim(3)}, x.requires_grad());
    for (std::size_t b = 0; b < batch; ++b) {
        const T* src = x.data().data() + (b * channels + start) * hw;
        std::copy(src, src + count * hw, out.data().data() + b * count * hw);
    }
    if (should_record(tape, {&x})) {
        tape.record([x, out, batch, channels, start, count, hw]() mutable {
            if (!out.has_grad())
                return;
            const T* dy = out.grad().data();
            T* dx = x.grad().data();
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < count * hw; ++i)
                    dx[(b * channels + start) * hw + i] += dy[b * count * hw + i];
        });
    }
    return out;
}

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& y) {
    require_same_shape(x, y, "add");
    Tensor<T> out(x.shape(), any_requires_grad<T>({&x, &y}));
    const auto xs = x.data();
    const auto ys = y.data();
    auto zs = out.data();
    for (std::size_t i = 0; i < zs.size(); ++i)
        zs[i] = xs[i] + ys[i];
    if (should_record(tape, {&x, &y})) {
        tape.record([x, y, out]() mutable {
            if (!out.has_grad())
                return;
            const auto dz = out.grad();
            for (auto* t : {&x, &y})
                if (t->requires_grad()) {
                    auto d = t->grad();
                    for (std::size_t i = 0; i < d.size(); ++i)
                        d[i] += dz[i];
                }
        });
    }
    return out;
}

template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& y) {
    require_same_shape(x, y, "mul");
    Tensor<T> out(x.shape(), any_requires_grad<T>({&x, &y}));
    const auto xs = x.data();
    const auto ys = y.data();
    auto zs = out.data();
    for (std::size_t i = 0; i < zs.size(); ++i)
        zs[i] = xs[i] * ys[i];
    if (should_record(tape, {&x, &y})) {
        tape.record([x, y, out]() mutable {
            if (!out.has_grad())
                return;
            const auto dz = out.grad();
            const auto xs = x.data();
            const auto ys = y.data();
            if (x.requires_grad()) {
                auto dx = x.grad();
                for (std::size_t i = 0; i < dx.size(); ++i)
                    dx[i] += dz[i] * ys[i];
            }
            if (y.requires_grad()) {
                auto dy = y.grad();
                for (std::size_t i = 0; i < dy.size(); ++i)
                    dy[i] += dz[i] * xs[i];
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> mul_channelwise(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& v) {
    require_rank(x, 4, "mul_channelwise");
    require_rank(v, 2, "mul_channelwise scale");
    const std::size_t batch = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    if (v.dim(0) != batch || v.dim(1) != c)
        throw ConfigError("mul_channelwise: scale " + shape_string(v.shape()) + " does not match " +
                          shape_string(x.shape()));
    Tensor<T> out(x.shape(), any_requires_grad<T>({&x, &v}));
    const T* xd = x.data().data();
    const T* vd = v.data().data();
    T* yd = out.data().data();
    for (std::size_t bc = 0; bc < batch * c; ++bc)
        for (std::size_t i = 0; i < hw; ++i)
            yd[bc * hw + i] = xd[bc * hw + i] * vd[bc];
    if (should_record(tape, {&x, &v})) {
        tape.record([x, v, out, batch, c, hw]() mutable {
            if (!out.has_grad())
                return;
            const T* dy = out.grad().data();
            const T* xd = x.data().data();
            const T* vd = v.data().data();
            T* dx = x.requires_grad() ? x.grad().data() : nullptr;
            T* dv = v.requires_grad() ? v.grad().data() : nullptr;
            for (std::size_t bc = 0; bc < batch * c; ++bc) {
                double acc = 0.0;
                for (std::size_t i = 0; i < hw; ++i) {
                    if (dx != nullptr)
                        dx[bc * hw + i] += dy[bc * hw + i] * vd[bc];
                    acc += static_cast<double>(dy[bc * hw + i]) * xd[bc * hw + i];
                }
                if (dv != nullptr)
                    dv[bc] += static_cast<T>(acc);
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> mul_spatialwise(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& m) {
    require_rank(x, 4, "mul_spatialwise");
    require_rank(m, 4, "mul_spatialwise map");
    const std::size_t batch = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    if (m.dim(0) != batch || m.dim(1) != 1 || m.dim(2) != x.dim(2) || m.dim(3) != x.dim(3))
        throw ConfigError("mul_spatialwise: map " + shape_string(m.shape()) + " does not match " +
                          shape_string(x.shape()));
    Tensor<T> out(x.shape(), any_requires_grad<T>({&x, &m}));
    const T* xd = x.data().data();
    const T* md = m.data().data();
    T* yd = out.data().data();
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t i = 0; i < hw; ++i)
                yd[(b * c + ch) * hw + i] = xd[(b * c + ch) * hw + i] * md[b * hw + i];
    if (should_record(tape, {&x, &m})) {
        tape.record([x, m, out, batch, c, hw]() mutable {
            if (!out.has_grad())
                return;
            const T* dy = out.grad().data();
            const T* xd = x.data().data();
            const T* md = m.data().data();
            if (x.requires_grad()) {
                T* dx = x.grad().data();
                for (std::size_t b = 0; b < batch; ++b)
                    for (std::size_t ch = 0; ch < c; ++ch)
                        for (std::size_t i = 0; i < hw; ++i)
                            dx[(b * c + ch) * hw + i] += dy[(b * c + ch) * hw + i] * md[b * hw + i];
            }
            if (m.requires_grad()) {
                T* dm = m.grad().data();
                std::vector<double> acc(hw);
                for (std::size_t b = 0; b < batch; ++b) {
                    std::fill(acc.begin(), acc.end(), 0.0);
                    for (std::size_t ch = 0; ch < c; ++ch)
                        for (std::size_t i = 0; i < hw; ++i)
                            acc[i] += static_cast<double>(dy[(b * c + ch) * hw + i]) * xd[(b * c + ch) * hw + i];
                    for (std::size_t i = 0; i < hw; ++i)
                        dm[b * hw + i] += static_cast<T>(acc[i]);
                }
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& x, T factor) {
    return unary(tape, x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> sum(Tape<T>& tape, const Tensor<T>& x) {
    Tensor<T> out({1}, x.requires_grad());
    double acc = 0.0;
    for (T v : x.data())
        acc += v;
    out.data()[0] = static_cast<T>(acc);
    if (should_record(tape, {&x})) {
        tape.record([x, out]() mutable {
            if (!out.has_grad())
                return;
            const T g = out.grad()[0];
            for (T& d : x.grad())
                d += g;
        });
    }
    return out;
}

template <typename T>
Tensor<T> mean_abs_error(Tape<T>& tape, const Tensor<T>& pred, const Tensor<T>& target) {
    require_same_shape(pred, target, "mean_abs_error");
    Tensor<T> out({1}, any_requires_grad<T>({&pred, &target}));
    const auto ps = pred.data();
    const auto ts = target.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i)
        acc += std::abs(static_cast<double>(ps[i]) - static_cast<double>(ts[i]));
    out.data()[0] = static_cast<T>(acc / static_cast<double>(ps.size()));
    if (should_record(tape, {&pred, &target})) {
        tape.record([pred, target, out]() mutable {
            if (!out.has_grad())
                return;
            const auto ps = pred.data();
            const auto ts = target.data();
            const T g = out.grad()[0] / static_cast<T>(ps.size());
            auto sign = [](T d) { return d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0)); };
            if (pred.requires_grad()) {
                auto dp = pred.grad();
                for (std::size_t i = 0; i < ps.size(); ++i)
                    dp[i] += g * sign(ps[i] - ts[i]);
            }
            if (target.requires_grad()) {
                auto dt = target.grad();
                for (std::size_t i = 0; i < ps.size(); ++i)
                    dt[i] -= g * sign(ps[i] - ts[i]);
            }
        });
    }
    return out;
}

namespace reference {

template <typename T>
std::vector<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
    const std::size_t batch = x.dim(0), c_in = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t c_out = weight.dim(0), k = weight.dim(2);
    const auto pad = static_cast<long>(k / 2);
    std::vector<T> out(batch * c_out * h * w);
    const auto xd = x.data();
    const auto wd = weight.data();
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < c_out; ++o)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t xx = 0; xx < w; ++xx) {
                    double acc = bias.defined() ? static_cast<double>(bias.data()[o]) : 0.0;
                    for (std::size_t c = 0; c < c_in; ++c)
                        for (std::size_t ky = 0; ky < k; ++ky)
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                const long sy = static_cast<long>(y + ky) - pad;
                                const long sx = static_cast<long>(xx + kx) - pad;
                                if (sy < 0 || sx < 0 || sy >= static_cast<long>(h) || sx >= static_cast<long>(w))
                                    continue;
                                acc += static_cast<double>(wd[((o * c_in + c) * k + ky) * k + kx]) *
                                       xd[((b * c_in + c) * h + static_cast<std::size_t>(sy)) * w +
                                          static_cast<std::size_t>(sx)];
                            }
                    out[((b * c_out + o) * h + y) * w + xx] = static_cast<T>(acc);
                }
    return out;
}

template std::vector<float> conv2d_forward(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&);
template std::vector<double> conv2d_forward(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&);

} // namespace reference

#define LVR_INSTANTIATE_OPS(T)                                                                   \
    template Tensor<T> conv2d(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);  \
    template Tensor<T> leaky_relu(Tape<T>&, const Tensor<T>&, T);                                \
    template Tensor<T> relu(Tape<T>&, const Tensor<T>&);                                         \
    template Tensor<T> sigmoid(Tape<T>&, const Tensor<T>&);                                      \
    template Tensor<T> global_avg_pool(Tape<T>&, const Tensor<T>&);                              \
    template Tensor<T> fully_connected(Tape<T>&, const Tensor<T>&, const Tensor<T>&);            \
    template Tensor<T> concat_channels(Tape<T>&, const std::vector<Tensor<T>>&);                 \
    template Tensor<T> slice_channels(Tape<T>&, const Tensor<T>&, std::size_t, std::size_t);     \
    template Tensor<T> add(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                        \
    template Tensor<T> mul(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                        \
    template Tensor<T> mul_channelwise(Tape<T>&, const Tensor<T>&, const Tensor<T>&);            \
    template Tensor<T> mul_spatialwise(Tape<T>&, const Tensor<T>&, const Tensor<T>&);            \
    template Tensor<T> scale(Tape<T>&, const Tensor<T>&, T);                                     \
    template Tensor<T> sum(Tape<T>&, const Tensor<T>&);                                          \
    template Tensor<T> mean_abs_error(Tape<T>&, const Tensor<T>&, const Tensor<T>&);

LVR_INSTANTIATE_OPS(float)
LVR_INSTANTIATE_OPS(double)

} // namespace lvr::nn
