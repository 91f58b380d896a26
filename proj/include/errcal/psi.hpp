#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errcal/calibrate.hpp"
#include "errcal/error.hpp"
#include "errcal/matrix.hpp"
#include "errcal/nuisance.hpp"
#include "errcal/records.hpp"

namespace errcal {

// Flat parameter vector stacking (beta0, beta_x, beta_z) with the nuisance
// blocks a design's estimating equations reference. Symmetric matrices enter
// as vech (lower triangle stacked by column), rectangular blocks as vec
// (columns stacked).
struct ThetaLayout {
  struct Segment {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
  };

  Design design = Design::reliability;
  std::size_t p = 0, q = 0;
  std::vector<Segment> segments;
  std::size_t dim = 0;

  const Segment& segment(std::string_view name) const {
    for (const auto& s : segments)
      if (s.name == name) return s;
    fail(ErrorKind::LayoutError,
         "layout has no segment '" + std::string(name) + "'");
  }
  std::size_t offset_of(std::string_view name) const { return segment(name).offset; }
  bool has(std::string_view name) const {
    for (const auto& s : segments)
      if (s.name == name) return true;
    return false;
  }
};

struct ThetaVector {
  ThetaLayout layout;
  Vector values;
};

inline ThetaLayout theta_layout(Design design, std::size_t p, std::size_t q) {
  ThetaLayout l;
  l.design = design;
  l.p = p;
  l.q = q;
  const auto add = [&l](std::string name, std::size_t size) {
    l.segments.push_back({std::move(name), l.dim, size});
    l.dim += size;
  };
  const std::size_t vp = p * (p + 1) / 2, vq = q * (q + 1) / 2;
  add("beta", 1 + p + q);
  if (design == Design::biomarker) {
    add("alpha", (1 + p + q) * p);
    add("c", 1 + p + q);
    return l;
  }
  add("mu_xstar", p);
  add("sigma_xstar", vp);
  add("mu_z", q);
  add("sigma_z", vq);
  add("sigma_xstar_z", p * q);
  add("sigma_T", vp);
  add("sigma_T_Ttilde", p);
  if (design == Design::validation) {
    add("sigma_x_z", p * q);
    add("sigma_Ttilde_z", q);
    add("mu_Ttilde", 1);
  }
  return l;
}

namespace detail {

inline void write_block(Vector& theta, std::size_t offset, const Vector& v) {
  for (std::size_t i = 0; i < v.size(); ++i) theta[offset + i] = v[i];
}

inline Vector read_block(const Vector& theta, std::size_t offset, std::size_t size) {
  Vector v(size);
  for (std::size_t i = 0; i < size; ++i) v[i] = theta[offset + i];
  return v;
}

inline Vector vec_cols(const Matrix& m) {
  Vector v(m.rows() * m.cols());
  std::size_t k = 0;
  for (std::size_t c = 0; c < m.cols(); ++c)
    for (std::size_t r = 0; r < m.rows(); ++r) v[k++] = m(r, c);
  return v;
}

inline Matrix unvec_cols(const Vector& v, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t r = 0; r < rows; ++r) m(r, c) = v[k++];
  return m;
}

}  // namespace detail

inline ThetaVector pack_theta(Design design, const Vector& beta,
                              const NuisanceEstimates& nu) {
  const std::size_t p = design == Design::biomarker ? nu.case3_alpha.cols()
                                                    : nu.mu_xstar.size();
  const std::size_t q = beta.size() - 1 - p;
  ThetaVector t;
  t.layout = theta_layout(design, p, q);
  if (beta.size() != 1 + p + q)
    fail(ErrorKind::LayoutError, "coefficient vector does not match the layout");
  t.values.assign(t.layout.dim, 0.0);
  const auto put = [&](std::string_view name, const Vector& v) {
    const auto& seg = t.layout.segment(name);
    if (seg.size != v.size())
      fail(ErrorKind::LayoutError,
           "segment '" + std::string(name) + "' expects " +
               std::to_string(seg.size) + " values");
    detail::write_block(t.values, seg.offset, v);
  };
  put("beta", beta);
  if (design == Design::biomarker) {
    put("alpha", detail::vec_cols(nu.case3_alpha));
    put("c", nu.case3_c);
    return t;
  }
  put("mu_xstar", nu.mu_xstar);
  put("sigma_xstar", vech(nu.sigma_xstar));
  put("mu_z", nu.mu_z);
  put("sigma_z", vech(nu.sigma_z));
  put("sigma_xstar_z", detail::vec_cols(nu.sigma_xstar_z));
  put("sigma_T", vech(nu.sigma_T));
  put("sigma_T_Ttilde", nu.sigma_T_Ttilde);
  if (design == Design::validation) {
    put("sigma_x_z", detail::vec_cols(nu.sigma_x_z));
    put("sigma_Ttilde_z", nu.sigma_Ttilde_z);
    put("mu_Ttilde", Vector{nu.mu_Ttilde});
  }
  return t;
}

inline std::pair<Vector, NuisanceEstimates> unpack_theta(const ThetaLayout& layout,
                                                         const Vector& values) {
  if (values.size() != layout.dim)
    fail(ErrorKind::LayoutError, "parameter vector does not match the layout");
  const std::size_t p = layout.p, q = layout.q;
  const auto get = [&](std::string_view name) {
    const auto& seg = layout.segment(name);
    return detail::read_block(values, seg.offset, seg.size);
  };
  Vector beta = get("beta");
  NuisanceEstimates nu;
  if (layout.design == Design::biomarker) {
    nu.case3_alpha = detail::unvec_cols(get("alpha"), 1 + p + q, p);
    nu.case3_c = get("c");
    nu.mu_xstar.assign(p, 0.0);
    nu.mu_z.assign(q, 0.0);
    return {std::move(beta), std::move(nu)};
  }
  nu.mu_xstar = get("mu_xstar");
  nu.sigma_xstar = unvech(get("sigma_xstar"), p);
  nu.mu_z = get("mu_z");
  nu.sigma_z = unvech(get("sigma_z"), q);
  nu.sigma_xstar_z = detail::unvec_cols(get("sigma_xstar_z"), p, q);
  nu.sigma_T = unvech(get("sigma_T"), p);
  nu.sigma_T_Ttilde = get("sigma_T_Ttilde");
  nu.sigma_Ttilde_z.assign(q, 0.0);
  nu.sigma_x_z = Matrix(p, q);
  if (layout.design == Design::validation) {
    nu.sigma_x_z = detail::unvec_cols(get("sigma_x_z"), p, q);
    nu.sigma_Ttilde_z = get("sigma_Ttilde_z");
    nu.mu_Ttilde = get("mu_Ttilde")[0];
  }
  return {std::move(beta), std::move(nu)};
}

inline std::pair<Vector, NuisanceEstimates> unpack_theta(const ThetaVector& theta) {
  return unpack_theta(theta.layout, theta.values);
}

inline ThetaVector theta_from_fit(Design design, const CalibrationFit& fit) {
  return pack_theta(design, fit.beta, fit.nuisance);
}

namespace detail {

// Evaluates the stacked estimating function ψ_i(θ) record by record. Weights
// are rebuilt once per θ, so finite differences and refinement steps flow
// through the calibration formulas rather than cached estimates.
class PsiEvaluator {
 public:
  PsiEvaluator(const ThetaLayout& layout, const Vector& values) : layout_(layout) {
    auto unpacked = unpack_theta(layout, values);
    beta_ = std::move(unpacked.first);
    nu_ = std::move(unpacked.second);
    switch (layout.design) {
      case Design::reliability: w1_ = case1_weights(nu_); break;
      case Design::validation: w2_ = case2_weights(nu_); break;
      case Design::biomarker: break;
    }
  }

  Vector operator()(const SubjectRecord& rec) const {
    const std::size_t p = layout_.p, q = layout_.q;
    if (rec.x_star.size() != rec.replicates() * p || rec.z.size() != q)
      fail(ErrorKind::LayoutError, "record does not match the layout dimensions");
    Vector out(layout_.dim, 0.0);
    const auto score = [&](const Vector& row, double y) {
      double e = y;
      for (std::size_t c = 0; c < row.size(); ++c) e -= row[c] * beta_[c];
      for (std::size_t c = 0; c < row.size(); ++c) out[c] += e * row[c];
    };
    switch (layout_.design) {
      case Design::reliability:
        case1_rows(rec, nu_, w1_, score);
        case1_moment_rows(rec, out);
        break;
      case Design::validation:
        case2_rows(rec, nu_, w2_, score);
        case2_moment_rows(rec, out);
        break;
      case Design::biomarker:
        case3_rows(rec, nu_, score);
        case3_score_rows(rec, out);
        break;
    }
    return out;
  }

 private:
  void case1_moment_rows(const SubjectRecord& rec, Vector& out) const {
    const std::size_t p = layout_.p, q = layout_.q;
    const double k = static_cast<double>(rec.replicates());
    const Vector mx = replicate_mean_x(rec, p);

    std::size_t at = layout_.offset_of("mu_xstar");
    for (std::size_t a = 0; a < p; ++a) out[at + a] = mx[a] - nu_.mu_xstar[a];

    at = layout_.offset_of("sigma_xstar");
    Matrix sxx(p, p), sxz(p, q);
    Vector dx(p), dz(q);
    for (std::size_t c = 0; c < q; ++c) dz[c] = rec.z[c] - nu_.mu_z[c];
    for (std::size_t j = 0; j < rec.replicates(); ++j) {
      for (std::size_t c = 0; c < p; ++c)
        dx[c] = rec.x_star[j * p + c] - nu_.mu_xstar[c];
      for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < p; ++b) sxx(a, b) += dx[a] * dx[b];
        for (std::size_t b = 0; b < q; ++b) sxz(a, b) += dx[a] * dz[b];
      }
    }
    std::size_t idx = 0;
    for (std::size_t col = 0; col < p; ++col)
      for (std::size_t row = col; row < p; ++row)
        out[at + idx++] = sxx(row, col) - k * nu_.sigma_xstar(row, col);

    at = layout_.offset_of("mu_z");
    for (std::size_t a = 0; a < q; ++a) out[at + a] = dz[a];

    at = layout_.offset_of("sigma_z");
    idx = 0;
    for (std::size_t col = 0; col < q; ++col)
      for (std::size_t row = col; row < q; ++row)
        out[at + idx++] = dz[row] * dz[col] - nu_.sigma_z(row, col);

    at = layout_.offset_of("sigma_xstar_z");
    idx = 0;
    for (std::size_t col = 0; col < q; ++col)
      for (std::size_t row = 0; row < p; ++row)
        out[at + idx++] = sxz(row, col) - k * nu_.sigma_xstar_z(row, col);

    const std::size_t at_t = layout_.offset_of("sigma_T");
    const std::size_t at_tt = layout_.offset_of("sigma_T_Ttilde");
    if (rec.replicates() == 2) {
      Vector dd(p);
      for (std::size_t c = 0; c < p; ++c) dd[c] = rec.x_star[c] - rec.x_star[p + c];
      const double dy = rec.y_star[0] - rec.y_star[1];
      idx = 0;
      for (std::size_t col = 0; col < p; ++col)
        for (std::size_t row = col; row < p; ++row)
          out[at_t + idx++] = 0.5 * dd[row] * dd[col] - nu_.sigma_T(row, col);
      for (std::size_t a = 0; a < p; ++a)
        out[at_tt + a] = 0.5 * dd[a] * dy - nu_.sigma_T_Ttilde[a];
    }
  }

  void case2_moment_rows(const SubjectRecord& rec, Vector& out) const {
    const std::size_t p = layout_.p, q = layout_.q;
    Vector dx(p), dz(q);
    for (std::size_t c = 0; c < p; ++c) dx[c] = rec.x_star[c] - nu_.mu_xstar[c];
    for (std::size_t c = 0; c < q; ++c) dz[c] = rec.z[c] - nu_.mu_z[c];

    std::size_t at = layout_.offset_of("mu_xstar");
    for (std::size_t a = 0; a < p; ++a) out[at + a] = dx[a];
    at = layout_.offset_of("sigma_xstar");
    std::size_t idx = 0;
    for (std::size_t col = 0; col < p; ++col)
      for (std::size_t row = col; row < p; ++row)
        out[at + idx++] = dx[row] * dx[col] - nu_.sigma_xstar(row, col);
    at = layout_.offset_of("mu_z");
    for (std::size_t a = 0; a < q; ++a) out[at + a] = dz[a];
    at = layout_.offset_of("sigma_z");
    idx = 0;
    for (std::size_t col = 0; col < q; ++col)
      for (std::size_t row = col; row < q; ++row)
        out[at + idx++] = dz[row] * dz[col] - nu_.sigma_z(row, col);
    at = layout_.offset_of("sigma_xstar_z");
    idx = 0;
    for (std::size_t col = 0; col < q; ++col)
      for (std::size_t row = 0; row < p; ++row)
        out[at + idx++] = dx[row] * dz[col] - nu_.sigma_xstar_z(row, col);

    // Error-moment rows live on the validation subset only; the subset size
    // is their own divisor, so off-subset records contribute exact zeros.
    if (!rec.in_subset) return;
    Vector t(p);
    for (std::size_t c = 0; c < p; ++c) t[c] = rec.x_star[c] - rec.x_true[c];
    const double ttilde = rec.y_star[0] - *rec.y_true;
    at = layout_.offset_of("sigma_T");
    idx = 0;
    for (std::size_t col = 0; col < p; ++col)
      for (std::size_t row = col; row < p; ++row)
        out[at + idx++] = t[row] * t[col] - nu_.sigma_T(row, col);
    at = layout_.offset_of("sigma_T_Ttilde");
    for (std::size_t a = 0; a < p; ++a)
      out[at + a] = t[a] * ttilde - nu_.sigma_T_Ttilde[a];
    at = layout_.offset_of("sigma_x_z");
    idx = 0;
    for (std::size_t col = 0; col < q; ++col)
      for (std::size_t row = 0; row < p; ++row)
        out[at + idx++] =
            (rec.x_true[row] - nu_.mu_xstar[row]) * dz[col] - nu_.sigma_x_z(row, col);
    at = layout_.offset_of("sigma_Ttilde_z");
    for (std::size_t a = 0; a < q; ++a)
      out[at + a] = ttilde * dz[a] - nu_.sigma_Ttilde_z[a];
    out[layout_.offset_of("mu_Ttilde")] = ttilde - nu_.mu_Ttilde;
  }

  void case3_score_rows(const SubjectRecord& rec, Vector& out) const {
    if (!rec.in_subset) return;
    const std::size_t p = layout_.p, q = layout_.q, k = 1 + p + q;
    Vector basis(k);
    basis[0] = 1.0;
    for (std::size_t c = 0; c < p; ++c) basis[1 + c] = rec.x_star[c];
    for (std::size_t c = 0; c < q; ++c) basis[1 + p + c] = rec.z[c];
    std::size_t at = layout_.offset_of("alpha");
    for (std::size_t b = 0; b < p; ++b) {
      double e = rec.x_bio[b];
      for (std::size_t c = 0; c < k; ++c) e -= nu_.case3_alpha(c, b) * basis[c];
      for (std::size_t c = 0; c < k; ++c) out[at + b * k + c] = e * basis[c];
    }
    at = layout_.offset_of("c");
    double e = rec.y_star[0] - *rec.y_bio;
    for (std::size_t c = 0; c < k; ++c) e -= nu_.case3_c[c] * basis[c];
    for (std::size_t c = 0; c < k; ++c) out[at + c] = e * basis[c];
  }

  ThetaLayout layout_;
  Vector beta_;
  NuisanceEstimates nu_;
  Case1Weights w1_;
  Case2Weights w2_;
};

}  // namespace detail

// Stacked estimating function for one record, recomputing the calibrated
// quantities from theta. The fitted parameters are its summed root.
inline Vector psi(Design design, const ThetaVector& theta, const SubjectRecord& rec) {
  if (theta.layout.design != design)
    fail(ErrorKind::LayoutError, "parameter layout was built for a different design");
  return detail::PsiEvaluator(theta.layout, theta.values)(rec);
}

}  // namespace errcal
