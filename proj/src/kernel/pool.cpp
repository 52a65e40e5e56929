#include <string>

#include "lwt/errors.hpp"
#include "lwt/kernel.hpp"

namespace lwt {

namespace {

Shape pooled_shape(const Shape& in, const AvgPoolLayer& layer) {
  if (layer.pool_h == 0 || layer.pool_w == 0 || layer.stride_h == 0 ||
      layer.stride_w == 0) {
    throw ArgumentError("avgpool extents and strides must be at least 1");
  }
  if (in.size() != 4) {
    throw DimensionError("avgpool expects a rank-4 input [B,C,H,W], got " +
                         shape_to_string(in));
  }
  if (in[2] < layer.pool_h) {
    throw DimensionError("avgpool height axis: pool " +
                         std::to_string(layer.pool_h) +
                         " is larger than input height " +
                         std::to_string(in[2]));
  }
  if (in[3] < layer.pool_w) {
    throw DimensionError("avgpool width axis: pool " +
                         std::to_string(layer.pool_w) +
                         " is larger than input width " +
                         std::to_string(in[3]));
  }
  return {in[0], in[1], pool_extent(in[2], layer.pool_h, layer.stride_h),
          pool_extent(in[3], layer.pool_w, layer.stride_w)};
}

}  // namespace

Tensor avgpool_forward(const Tensor& input, const AvgPoolLayer& layer) {
  const Shape out_shape = pooled_shape(input.shape(), layer);
  Tensor out(out_shape);
  const std::size_t planes = out_shape[0] * out_shape[1];
  const std::size_t in_h = input.dim(2), in_w = input.dim(3);
  const std::size_t out_h = out_shape[2], out_w = out_shape[3];
  const double scale = 1.0 / static_cast<double>(layer.pool_h * layer.pool_w);

  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = input.data() + p * in_h * in_w;
    double* dst = out.data() + p * out_h * out_w;
    for (std::size_t oh = 0; oh < out_h; ++oh) {
      for (std::size_t ow = 0; ow < out_w; ++ow) {
        double sum = 0.0;
        for (std::size_t r = 0; r < layer.pool_h; ++r) {
          const double* row =
              src + (oh * layer.stride_h + r) * in_w + ow * layer.stride_w;
          for (std::size_t j = 0; j < layer.pool_w; ++j) sum += row[j];
        }
        dst[oh * out_w + ow] = sum * scale;
      }
    }
  }
  return out;
}

Tensor avgpool_backward(const Shape& input_shape, const AvgPoolLayer& layer,
                        const Tensor& grad_out) {
  const Shape out_shape = pooled_shape(input_shape, layer);
  if (grad_out.shape() != out_shape) {
    throw DimensionError("avgpool_backward: grad_out shape " +
                         shape_to_string(grad_out.shape()) +
                         " differs from forward output " +
                         shape_to_string(out_shape));
  }
  Tensor grad_in(input_shape);
  const std::size_t planes = out_shape[0] * out_shape[1];
  const std::size_t in_h = input_shape[2], in_w = input_shape[3];
  const std::size_t out_h = out_shape[2], out_w = out_shape[3];
  const double scale = 1.0 / static_cast<double>(layer.pool_h * layer.pool_w);

  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = grad_out.data() + p * out_h * out_w;
    double* dst = grad_in.data() + p * in_h * in_w;
    for (std::size_t oh = 0; oh < out_h; ++oh) {
      for (std::size_t ow = 0; ow < out_w; ++ow) {
        const double share = src[oh * out_w + ow] * scale;
        for (std::size_t r = 0; r < layer.pool_h; ++r) {
          double* row =
              dst + (oh * layer.stride_h + r) * in_w + ow * layer.stride_w;
          for (std::size_t j = 0; j < layer.pool_w; ++j) row[j] += share;
        }
      }
    }
  }
  return grad_in;
}

}  // namespace lwt
