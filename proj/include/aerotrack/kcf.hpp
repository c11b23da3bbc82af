#pragma once

#include "aerotrack/fft.hpp"
#include "aerotrack/imaging.hpp"

namespace aerotrack {

struct KcfParams {
  double padding = 1.5;              // search window = box * (1 + padding)
  double lambda = 1e-4;              // ridge regularization
  double kernel_sigma = 0.5;         // Gaussian kernel bandwidth
  double label_sigma_factor = 0.1;   // label sigma = sqrt(box_w * box_h) * factor
  double learn_rate = 0.02;          // model interpolation factor

  void validate() const;
};

/// Trained correlation filter. alpha_hat, templ and templ_hat all have window_h x window_w entries.
struct KcfModel {
  ComplexImage alpha_hat;   // dual coefficients, Fourier domain
  Image templ;              // cosine-windowed appearance
  ComplexImage templ_hat;   // fft2(templ), cached
  int window_w = 0;
  int window_h = 0;
  double box_w = 0.0;
  double box_h = 0.0;
  PixelPoint center;
  double label_sigma = 0.0;
  KcfParams params;

  BoundingBox box() const { return BoundingBox::centered(center, box_w, box_h); }
};

struct ResponseMap {
  Image values;
  PixelPoint peak;  // window coordinates (u = column, v = row)
  double peak_value = 0.0;
};

/// Builds the response record; argmax ties resolve to the smallest row, then smallest column.
ResponseMap make_response(Image values);

struct KcfDetection {
  ResponseMap response;
  PixelPoint position;  // frame coordinates
};

KcfModel train_kcf(const Frame& frame, const BoundingBox& box, const KcfParams& params = {});
KcfDetection detect_kcf(const KcfModel& model, const Frame& frame);
KcfModel update_model(const KcfModel& model, const Frame& frame, PixelPoint new_center);

/// Average peak-to-correlation energy of a response; 0 for a constant map.
double apce(const Image& response);
inline double apce(const ResponseMap& response) { return apce(response.values); }

namespace kcf_detail {

Image hann_window(int w, int h);
/// Gaussian peaked at index (h/2, w/2).
Image gaussian_labels(int w, int h, double sigma);
/// Mean-removed, cosine-windowed patch.
Image extract_features(const Frame& frame, PixelPoint center, const Image& window);
/// Spatial Gaussian kernel correlation k(s) = exp(-max(0, |x|^2 + |z|^2 - 2 (x * z)(s)) / (sigma^2 N)),
/// where (x * z)(s) = sum_i x(i) z(i + s) cyclically.
Image gaussian_correlation(const ComplexImage& x_hat, double x_sq_norm, const ComplexImage& z_hat,
                           double z_sq_norm, double sigma);
/// Wraps a peak index into a signed offset from the window center.
int wrapped_offset(int peak_index, int size);

}  // namespace kcf_detail

}  // namespace aerotrack
