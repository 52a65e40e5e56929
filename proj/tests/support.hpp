#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "lwt/model.hpp"
#include "lwt/tensor.hpp"

namespace lwt::test {

// Small network that fits 8 channels x 128 samples.
inline ModelConfig reduced_config() {
  ModelConfig c;
  c.channels = 8;
  c.samples = 128;
  c.trunk_filters = 4;
  c.word_filters = {4, 6, 8};
  c.temporal_kernel = 16;
  c.word_kernel = 3;
  c.length_kernel = 4;
  c.length_pool = 3;
  c.pool = 2;
  return c;
}

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Tensor t(shape);
  for (double& v : t.values()) v = u(rng);
  return t;
}

inline constexpr double kFdStep = 1e-6;
// Gradients smaller than this are compared absolutely.
inline constexpr double kFdFloor = 1e-4;

inline double relative_error(double analytic, double numeric) {
  const double scale =
      std::max({std::abs(analytic), std::abs(numeric), kFdFloor});
  return std::abs(analytic - numeric) / scale;
}

// Central difference of f with respect to every element of x; returns the
// worst relative error against `analytic`.
inline double fd_check(Tensor& x, const Tensor& analytic,
                       const std::function<double()>& f) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + kFdStep;
    const double up = f();
    x[i] = saved - kFdStep;
    const double down = f();
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * kFdStep);
    worst = std::max(worst, relative_error(analytic[i], numeric));
  }
  return worst;
}

// Random projection turning a tensor into a scalar loss: sum(w * y).
inline double project(const Tensor& y, const Tensor& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

// Layer variant of fd_check for the loss project(f(x), probe). Outputs are
// differenced elementwise before projecting, which keeps the roundoff of the
// large projected sum out of the quotient.
inline double fd_check_layer(Tensor& x, const Tensor& analytic,
                             const std::function<Tensor()>& f,
                             const Tensor& probe) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + kFdStep;
    const Tensor up = f();
    x[i] = saved - kFdStep;
    const Tensor down = f();
    x[i] = saved;
    double numeric = 0.0;
    for (std::size_t k = 0; k < up.size(); ++k) {
      numeric += probe[k] * (up[k] - down[k]);
    }
    numeric /= 2.0 * kFdStep;
    worst = std::max(worst, relative_error(analytic[i], numeric));
  }
  return worst;
}

inline std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& p,
                        const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lwt_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace lwt::test
