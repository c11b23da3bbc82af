#include "aerotrack/kcf.hpp"

#include <cmath>
#include <numbers>

namespace aerotrack {

void KcfParams::validate() const {
  if (!(lambda > 0.0)) throw Error("kcf lambda must be positive");
  if (!(learn_rate >= 0.0 && learn_rate <= 1.0)) throw Error("kcf learn_rate must lie in [0, 1]");
  if (!(kernel_sigma > 0.0)) throw Error("kcf kernel_sigma must be positive");
  if (!(label_sigma_factor > 0.0)) throw Error("kcf label_sigma_factor must be positive");
  if (!(padding >= 0.0)) throw Error("kcf padding must be non-negative");
}

namespace kcf_detail {

Image hann_window(int w, int h) {
  auto hann = [](int n) {
    Eigen::ArrayXd a(n);
    if (n == 1) {
      a(0) = 1.0;
      return a;
    }
    for (int i = 0; i < n; ++i) a(i) = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
    return a;
  };
  const Eigen::ArrayXd col = hann(h);
  const Eigen::ArrayXd row = hann(w);
  Image out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out(r, c) = col(r) * row(c);
  return out;
}

Image gaussian_labels(int w, int h, double sigma) {
  Image y(h, w);
  const int cr = h / 2;
  const int cc = w / 2;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double d2 = static_cast<double>((r - cr) * (r - cr) + (c - cc) * (c - cc));
      y(r, c) = std::exp(-0.5 * d2 / (sigma * sigma));
    }
  return y;
}

Image extract_features(const Frame& frame, PixelPoint center, const Image& window) {
  Image patch = crop_window(frame, center, static_cast<int>(window.cols()), static_cast<int>(window.rows()));
  patch -= patch.mean();
  return patch * window;
}

Image gaussian_correlation(const ComplexImage& x_hat, double x_sq_norm, const ComplexImage& z_hat,
                           double z_sq_norm, double sigma) {
  const Image cross = ifft2_real(x_hat.conjugate() * z_hat);
  const double n = static_cast<double>(cross.size());
  return (-((x_sq_norm + z_sq_norm - 2.0 * cross).max(0.0)) / (sigma * sigma * n)).exp();
}

int wrapped_offset(int peak_index, int size) {
  int offset = peak_index - size / 2;
  if (offset >= size - size / 2) offset -= size;
  if (offset < -(size / 2)) offset += size;
  return offset;
}

}  // namespace kcf_detail

ResponseMap make_response(Image values) {
  if (values.size() == 0) throw Error("empty response map");
  ResponseMap out;
  Eigen::Index best = 0;
  const double* data = values.data();
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (data[i] > data[best]) best = i;  // strict: first occurrence in row-major order wins
  out.peak = {static_cast<double>(best % values.cols()), static_cast<double>(best / values.cols())};
  out.peak_value = data[best];
  out.values = std::move(values);
  return out;
}

namespace {

struct Fresh {
  ComplexImage alpha_hat;
  Image templ;
  ComplexImage templ_hat;
};

Fresh learn(const Frame& frame, PixelPoint center, int window_w, int window_h, double label_sigma,
            const KcfParams& params) {
  const Image window = kcf_detail::hann_window(window_w, window_h);
  Fresh f;
  f.templ = kcf_detail::extract_features(frame, center, window);
  f.templ_hat = fft2(f.templ);
  const double sq = f.templ.square().sum();
  const Image k = kcf_detail::gaussian_correlation(f.templ_hat, sq, f.templ_hat, sq, params.kernel_sigma);
  const ComplexImage y_hat = fft2(kcf_detail::gaussian_labels(window_w, window_h, label_sigma));
  f.alpha_hat = y_hat / (fft2(k) + params.lambda);
  return f;
}

PixelPoint rounded(PixelPoint p) {
  return {static_cast<double>(std::lround(p.u)), static_cast<double>(std::lround(p.v))};
}

}  // namespace

KcfModel train_kcf(const Frame& frame, const BoundingBox& box, const KcfParams& params) {
  params.validate();
  if (!box.is_valid()) throw Error("invalid box");
  if (box.width() < 4.0 || box.height() < 4.0) throw Error("box too small");

  KcfModel model;
  model.params = params;
  model.box_w = box.width();
  model.box_h = box.height();
  model.window_w = static_cast<int>(std::floor(box.width() * (1.0 + params.padding)));
  model.window_h = static_cast<int>(std::floor(box.height() * (1.0 + params.padding)));
  model.center = rounded(bbox_center(box));
  model.label_sigma = std::sqrt(box.width() * box.height()) * params.label_sigma_factor;

  Fresh f = learn(frame, model.center, model.window_w, model.window_h, model.label_sigma, params);
  model.alpha_hat = std::move(f.alpha_hat);
  model.templ = std::move(f.templ);
  model.templ_hat = std::move(f.templ_hat);
  return model;
}

KcfDetection detect_kcf(const KcfModel& model, const Frame& frame) {
  const Image window = kcf_detail::hann_window(model.window_w, model.window_h);
  const Image z = kcf_detail::extract_features(frame, model.center, window);
  const ComplexImage z_hat = fft2(z);
  const Image k = kcf_detail::gaussian_correlation(model.templ_hat, model.templ.square().sum(), z_hat,
                                                   z.square().sum(), model.params.kernel_sigma);
  KcfDetection out;
  out.response = make_response(ifft2_real(model.alpha_hat * fft2(k)));
  const int du = kcf_detail::wrapped_offset(static_cast<int>(out.response.peak.u), model.window_w);
  const int dv = kcf_detail::wrapped_offset(static_cast<int>(out.response.peak.v), model.window_h);
  const PixelPoint anchor = rounded(model.center);
  out.position = {anchor.u + du, anchor.v + dv};
  return out;
}

KcfModel update_model(const KcfModel& model, const Frame& frame, PixelPoint new_center) {
  KcfModel next = model;
  next.center = rounded(new_center);
  const double eta = model.params.learn_rate;
  if (eta == 0.0) return next;
  Fresh f = learn(frame, next.center, model.window_w, model.window_h, model.label_sigma, model.params);
  next.alpha_hat = (1.0 - eta) * model.alpha_hat + eta * f.alpha_hat;
  next.templ = (1.0 - eta) * model.templ + eta * f.templ;
  next.templ_hat = (1.0 - eta) * model.templ_hat + eta * f.templ_hat;
  return next;
}

double apce(const Image& response) {
  if (response.size() == 0) throw Error("empty response map");
  const double r_max = response.maxCoeff();
  const double r_min = response.minCoeff();
  const double energy = (response - r_min).square().mean();
  if (energy == 0.0) return 0.0;
  return (r_max - r_min) * (r_max - r_min) / energy;
}

}  // namespace aerotrack
