#include <algorithm>
#include <cstring>
#include <string>
#include <vector>

#include "lwt/errors.hpp"
#include "lwt/kernel.hpp"

namespace lwt {

namespace {

constexpr std::size_t kRowBlock = 32;
constexpr std::size_t kOutBlock = 4;

// Eight packed doubles; lowers to one AVX-512 register or two AVX registers.
using Lanes = double __attribute__((vector_size(64)));
constexpr std::size_t kLaneCount = 8;

inline Lanes load_lanes(const double* p) {
  Lanes v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

// For every output o of the group:
//   outs[o][t] += sum_s sum_j taps[s][o * tap_stride + j] * rows[s][t + j]
// over t in [offset, offset + Width). The accumulators stay in registers
// while the shared input rows stream by once for the whole group.
template <std::size_t Outs, std::size_t Width>
void correlate_block(double* const* outs, const double* const* rows,
                     const double* const* taps, std::size_t tap_stride,
                     std::size_t sources, std::size_t kernel,
                     std::size_t offset) {
  constexpr std::size_t kVecs = Width / kLaneCount;
  Lanes acc[Outs][kVecs] = {};
  for (std::size_t s = 0; s < sources; ++s) {
    const double* x = rows[s] + offset;
    const double* w = taps[s];
    for (std::size_t j = 0; j < kernel; ++j) {
      Lanes xv[kVecs];
      for (std::size_t v = 0; v < kVecs; ++v) {
        xv[v] = load_lanes(x + j + v * kLaneCount);
      }
      for (std::size_t o = 0; o < Outs; ++o) {
        const double wj = w[o * tap_stride + j];
        for (std::size_t v = 0; v < kVecs; ++v) acc[o][v] += wj * xv[v];
      }
    }
  }
  for (std::size_t o = 0; o < Outs; ++o) {
    for (std::size_t v = 0; v < kVecs; ++v) {
      for (std::size_t l = 0; l < kLaneCount; ++l) {
        outs[o][offset + v * kLaneCount + l] += acc[o][v][l];
      }
    }
  }
}

template <std::size_t Outs>
void correlate_tail(double* const* outs, const double* const* rows,
                    const double* const* taps, std::size_t tap_stride,
                    std::size_t sources, std::size_t kernel,
                    std::size_t offset, std::size_t width) {
  double acc[Outs][kRowBlock] = {};
  for (std::size_t s = 0; s < sources; ++s) {
    const double* x = rows[s] + offset;
    const double* w = taps[s];
    for (std::size_t j = 0; j < kernel; ++j) {
      for (std::size_t o = 0; o < Outs; ++o) {
        const double wj = w[o * tap_stride + j];
        for (std::size_t l = 0; l < width; ++l) acc[o][l] += wj * x[j + l];
      }
    }
  }
  for (std::size_t o = 0; o < Outs; ++o) {
    for (std::size_t l = 0; l < width; ++l) outs[o][offset + l] += acc[o][l];
  }
}

template <std::size_t Outs>
void correlate_group(double* const* outs, std::size_t n,
                     const double* const* rows, const double* const* taps,
                     std::size_t tap_stride, std::size_t sources,
                     std::size_t kernel, std::size_t offset) {
  std::size_t t = offset;
  if (t + kRowBlock <= n) {
    correlate_block<Outs, kRowBlock>(outs, rows, taps, tap_stride, sources,
                                     kernel, t);
    t += kRowBlock;
  } else {
    if (t + kLaneCount <= n) {
      correlate_block<Outs, kLaneCount>(outs, rows, taps, tap_stride, sources,
                                        kernel, t);
      t += kLaneCount;
    }
    if (t < n) {
      correlate_tail<Outs>(outs, rows, taps, tap_stride, sources, kernel, t,
                           n - t);
    }
  }
}

// Accumulates a family of 1-D correlations that share their input rows.
// Output o reads its taps at taps[s] + o * tap_stride.
void correlate_accumulate(const std::vector<double*>& outs, std::size_t n,
                          const std::vector<const double*>& rows,
                          const std::vector<const double*>& taps,
                          std::size_t tap_stride, std::size_t kernel) {
  const std::size_t sources = rows.size();
  std::vector<const double*> shifted(sources);
  for (std::size_t t = 0; t < n; t += kRowBlock) {
    std::size_t o = 0;
    for (; o + kOutBlock <= outs.size(); o += kOutBlock) {
      for (std::size_t s = 0; s < sources; ++s) {
        shifted[s] = taps[s] + o * tap_stride;
      }
      correlate_group<kOutBlock>(outs.data() + o, n, rows.data(),
                                 shifted.data(), tap_stride, sources, kernel,
                                 t);
    }
    for (; o < outs.size(); ++o) {
      for (std::size_t s = 0; s < sources; ++s) {
        shifted[s] = taps[s] + o * tap_stride;
      }
      correlate_group<1>(outs.data() + o, n, rows.data(), shifted.data(),
                         tap_stride, sources, kernel, t);
    }
  }
}

// out[i * stride_a + j * stride_b] += dot(a[i], b[j]) over n elements.
template <std::size_t RA, std::size_t RB>
void dot_tile(const double* const* a, const double* const* b, std::size_t n,
              double* out, std::size_t stride_a, std::size_t stride_b) {
  constexpr std::size_t kLanes = 8;
  double acc[RA][RB][kLanes] = {};
  std::size_t t = 0;
  for (; t + kLanes <= n; t += kLanes) {
    for (std::size_t i = 0; i < RA; ++i) {
      for (std::size_t j = 0; j < RB; ++j) {
        for (std::size_t l = 0; l < kLanes; ++l) {
          acc[i][j][l] += a[i][t + l] * b[j][t + l];
        }
      }
    }
  }
  for (std::size_t i = 0; i < RA; ++i) {
    for (std::size_t j = 0; j < RB; ++j) {
      double sum = 0.0;
      for (std::size_t l = 0; l < kLanes; ++l) sum += acc[i][j][l];
      for (std::size_t u = t; u < n; ++u) sum += a[i][u] * b[j][u];
      out[i * stride_a + j * stride_b] += sum;
    }
  }
}

template <std::size_t RA>
void dot_tile_row(const double* const* a, const double* const* b,
                  std::size_t nb, std::size_t n, double* out,
                  std::size_t stride_a, std::size_t stride_b) {
  std::size_t j = 0;
  for (; j + 4 <= nb; j += 4) {
    dot_tile<RA, 4>(a, b + j, n, out + j * stride_b, stride_a, stride_b);
  }
  for (; j < nb; ++j) {
    dot_tile<RA, 1>(a, b + j, n, out + j * stride_b, stride_a, stride_b);
  }
}

// out[i][j] += dot(a[i], b[j]) for every pair.
void dot_grid(const std::vector<const double*>& a,
              const std::vector<const double*>& b, std::size_t n, double* out,
              std::size_t stride_a, std::size_t stride_b) {
  std::size_t i = 0;
  for (; i + 4 <= a.size(); i += 4) {
    dot_tile_row<4>(a.data() + i, b.data(), b.size(), n, out + i * stride_a,
                    stride_a, stride_b);
  }
  for (; i < a.size(); ++i) {
    dot_tile_row<1>(a.data() + i, b.data(), b.size(), n, out + i * stride_a,
                    stride_a, stride_b);
  }
}

void check_conv_input(const Tensor& input, const ConvLayer& layer) {
  if (input.rank() != 4) {
    throw DimensionError("conv2d expects a rank-4 input [B,C,H,W], got " +
                         shape_to_string(input.shape()));
  }
  if (input.dim(1) != layer.in_channels) {
    throw DimensionError("conv2d channel axis: input has " +
                         std::to_string(input.dim(1)) +
                         " channels, layer expects " +
                         std::to_string(layer.in_channels));
  }
  if (input.dim(2) < layer.kernel_h) {
    throw DimensionError("conv2d height axis: input height " +
                         std::to_string(input.dim(2)) +
                         " is smaller than kernel height " +
                         std::to_string(layer.kernel_h));
  }
  if (input.dim(3) < layer.kernel_w) {
    throw DimensionError("conv2d width axis: input width " +
                         std::to_string(input.dim(3)) +
                         " is smaller than kernel width " +
                         std::to_string(layer.kernel_w));
  }
  const Shape expected{layer.out_filters, layer.in_channels, layer.kernel_h,
                       layer.kernel_w};
  if (layer.weights.shape() != expected ||
      layer.bias.shape() != Shape{layer.out_filters}) {
    throw DimensionError("conv2d weights " +
                         shape_to_string(layer.weights.shape()) +
                         " do not match declared " + shape_to_string(expected));
  }
}

}  // namespace

ConvLayer::ConvLayer(std::size_t kh, std::size_t kw, std::size_t in_ch,
                     std::size_t filters)
    : kernel_h(kh),
      kernel_w(kw),
      in_channels(in_ch),
      out_filters(filters),
      weights(Shape{filters, in_ch, kh, kw}),
      bias(Shape{filters}) {}

Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer) {
  check_conv_input(input, layer);
  const std::size_t batch = input.dim(0);
  const std::size_t channels = layer.in_channels;
  const std::size_t in_h = input.dim(2);
  const std::size_t in_w = input.dim(3);
  const std::size_t kh = layer.kernel_h;
  const std::size_t kw = layer.kernel_w;
  const std::size_t out_h = conv_extent(in_h, kh);
  const std::size_t out_w = conv_extent(in_w, kw);

  Tensor out(Shape{batch, layer.out_filters, out_h, out_w});
  const std::size_t sources = channels * kh;
  std::vector<const double*> rows(sources);
  std::vector<const double*> taps(sources);
  std::vector<double*> outs(layer.out_filters);
  const double* in = input.data();
  for (std::size_t s = 0; s < sources; ++s) {
    taps[s] = layer.weights.data() + s * kw;
  }

  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t oh = 0; oh < out_h; ++oh) {
      for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t r = 0; r < kh; ++r) {
          rows[c * kh + r] = in + ((b * channels + c) * in_h + oh + r) * in_w;
        }
      }
      for (std::size_t f = 0; f < layer.out_filters; ++f) {
        outs[f] = &out.at(b, f, oh, 0);
        std::fill(outs[f], outs[f] + out_w, layer.bias[f]);
      }
      correlate_accumulate(outs, out_w, rows, taps, sources * kw, kw);
    }
  }
  return out;
}

ConvGradients conv2d_backward(const Tensor& input, const ConvLayer& layer,
                              const Tensor& grad_out, bool need_input_grad) {
  check_conv_input(input, layer);
  const std::size_t batch = input.dim(0);
  const std::size_t channels = layer.in_channels;
  const std::size_t filters = layer.out_filters;
  const std::size_t in_h = input.dim(2);
  const std::size_t in_w = input.dim(3);
  const std::size_t kh = layer.kernel_h;
  const std::size_t kw = layer.kernel_w;
  const std::size_t out_h = conv_extent(in_h, kh);
  const std::size_t out_w = conv_extent(in_w, kw);
  const Shape out_shape{batch, filters, out_h, out_w};
  if (grad_out.shape() != out_shape) {
    throw DimensionError("conv2d_backward: grad_out shape " +
                         shape_to_string(grad_out.shape()) +
                         " differs from forward output " +
                         shape_to_string(out_shape));
  }

  ConvGradients grads;
  grads.weights = Tensor::zeros_like(layer.weights);
  grads.bias = Tensor::zeros_like(layer.bias);
  const double* in = input.data();
  const double* g = grad_out.data();

  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t f = 0; f < filters; ++f) {
      double sum = 0.0;
      const double* row = g + (b * filters + f) * out_h * out_w;
      for (std::size_t i = 0; i < out_h * out_w; ++i) sum += row[i];
      grads.bias[f] += sum;
    }
  }

  // dW[f,c,r,j] = sum over (b, oh, t) of g[b,f,oh,t] * x[b,c,oh+r,t+j]
  {
    std::vector<const double*> grad_rows(filters);
    std::vector<const double*> shifted(channels * kh * kw);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t oh = 0; oh < out_h; ++oh) {
        for (std::size_t f = 0; f < filters; ++f) {
          grad_rows[f] = g + ((b * filters + f) * out_h + oh) * out_w;
        }
        for (std::size_t c = 0; c < channels; ++c) {
          for (std::size_t r = 0; r < kh; ++r) {
            const double* x = in + ((b * channels + c) * in_h + oh + r) * in_w;
            for (std::size_t j = 0; j < kw; ++j) {
              shifted[(c * kh + r) * kw + j] = x + j;
            }
          }
        }
        dot_grid(grad_rows, shifted, out_w, grads.weights.data(),
                 channels * kh * kw, 1);
      }
    }
  }

  if (!need_input_grad) return grads;

  // dX is the full correlation of grad_out with the flipped kernel. Rows are
  // zero-padded in width; the valid kernel rows are selected per output row.
  const std::size_t pad_w = out_w + 2 * (kw - 1);
  std::vector<double> padded(batch * filters * out_h * pad_w, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t f = 0; f < filters; ++f) {
      for (std::size_t oh = 0; oh < out_h; ++oh) {
        const double* src = g + ((b * filters + f) * out_h + oh) * out_w;
        double* dst =
            padded.data() + ((b * filters + f) * out_h + oh) * pad_w + kw - 1;
        std::copy(src, src + out_w, dst);
      }
    }
  }
  // flipped[c,f,r,j] = w[f,c,r,kw-1-j]
  std::vector<double> flipped(channels * filters * kh * kw);
  for (std::size_t f = 0; f < filters; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t r = 0; r < kh; ++r) {
        for (std::size_t j = 0; j < kw; ++j) {
          flipped[((c * filters + f) * kh + r) * kw + j] =
              layer.weights.at(f, c, r, kw - 1 - j);
        }
      }
    }
  }

  grads.input = Tensor(input.shape());
  std::vector<const double*> rows;
  std::vector<const double*> taps;
  std::vector<double*> outs(channels);
  rows.reserve(filters * kh);
  taps.reserve(filters * kh);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t ih = 0; ih < in_h; ++ih) {
      rows.clear();
      taps.clear();
      const std::size_t r_lo = ih >= out_h ? ih - out_h + 1 : 0;
      const std::size_t r_hi = std::min(kh - 1, ih);
      for (std::size_t f = 0; f < filters; ++f) {
        for (std::size_t r = r_lo; r <= r_hi; ++r) {
          rows.push_back(padded.data() +
                         ((b * filters + f) * out_h + ih - r) * pad_w);
          taps.push_back(flipped.data() + (f * kh + r) * kw);
        }
      }
      for (std::size_t c = 0; c < channels; ++c) {
        outs[c] = &grads.input.at(b, c, ih, 0);
      }
      correlate_accumulate(outs, in_w, rows, taps, filters * kh * kw, kw);
    }
  }
  return grads;
}

}  // namespace lwt
