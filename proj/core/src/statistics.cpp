#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "loco/analysis.hpp"
#include "loco/error.hpp"

namespace loco::analysis {

namespace {

double poly(const double* cc, int nord, double x) {
  double ret = cc[0];
  if (nord > 1) {
    double p = x * cc[nord - 1];
    for (int j = nord - 2; j > 0; --j) p = (p + cc[j]) * x;
    ret += p;
  }
  return ret;
}

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

void PairedSample::validate() const {
  if (values_a.size() != values_b.size())
    throw Error(ErrorKind::InsufficientData, "paired sample has unequal lengths");
  if (values_a.size() < 3)
    throw Error(ErrorKind::InsufficientData, "paired sample needs at least 3 pairs");
  for (std::size_t i = 0; i < values_a.size(); ++i)
    if (!std::isfinite(values_a[i]) || !std::isfinite(values_b[i]))
      throw Error(ErrorKind::Validation, "non-finite value in pair " + std::to_string(i));
}

std::vector<double> PairedSample::differences() const {
  std::vector<double> d(values_a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = values_a[i] - values_b[i];
  return d;
}

Descriptives describe(std::span<const double> xs) {
  if (xs.empty()) return {};
  return {xs.size(), mean_of(xs), sample_sd(xs)};
}

// ---------------------------------------------------------------------------
// Shapiro-Wilk

NormalityResult shapiro_wilk(std::span<const double> input) {
  const std::size_t n = input.size();
  if (n < 3) throw Error(ErrorKind::InsufficientData, "Shapiro-Wilk needs at least 3 values");
  if (n > 5000) throw Error(ErrorKind::InsufficientData, "Shapiro-Wilk supports at most 5000 values");
  for (double v : input)
    if (!std::isfinite(v)) throw Error(ErrorKind::Validation, "non-finite value in sample");

  std::vector<double> x(input.begin(), input.end());
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (!(range > 1e-19 * std::max(1.0, std::abs(x.front()))))
    throw Error(ErrorKind::DegenerateSample, "all values are identical");

  static constexpr double g[2] = {-2.273, .459};
  static constexpr double c1[6] = {0., .221157, -.147981, -2.07119, 4.434685, -2.706056};
  static constexpr double c2[6] = {0., .042981, -.293762, -1.752461, 5.682633, -3.582633};
  static constexpr double c3[4] = {.544, -.39978, .025054, -6.714e-4};
  static constexpr double c4[4] = {1.3822, -.77857, .062767, -.0020322};
  static constexpr double c5[4] = {-1.5861, -.31082, -.083751, .0038915};
  static constexpr double c6[3] = {-.4803, -.082676, .0030302};

  const std::size_t nn2 = n / 2;
  const double an = static_cast<double>(n);
  std::vector<double> a(nn2 + 1, 0.0);  // 1-based, a[1] pairs the extremes

  if (n == 3) {
    a[1] = std::sqrt(0.5);
  } else {
    const boost::math::normal_distribution<double> std_normal;
    const double an25 = an + 0.25;
    double summ2 = 0.0;
    for (std::size_t i = 1; i <= nn2; ++i) {
      a[i] = boost::math::quantile(std_normal, (static_cast<double>(i) - 0.375) / an25);
      summ2 += a[i] * a[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, 6, rsn) - a[1] / ssumm2;

    std::size_t i1;
    double fac;
    if (n > 5) {
      i1 = 3;
      const double a2 = -a[2] / ssumm2 + poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[2] = a2;
    } else {
      i1 = 2;
      fac = std::sqrt((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1));
    }
    a[1] = a1;
    for (std::size_t i = i1; i <= nn2; ++i) a[i] /= -fac;
  }

  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  double num = 0.0;
  for (std::size_t i = 1; i <= nn2; ++i) num += a[i] * (x[n - i] - x[i - 1]);
  const double w = std::min(1.0, num * num / ss);

  NormalityResult out;
  out.w = w;
  if (n == 3) {
    constexpr double pi6 = 1.90985931710274;   // 6 / pi
    constexpr double stqr = 1.04719755119660;  // pi / 3
    out.p = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    return out;
  }
  const double w1 = 1.0 - w;
  if (w1 <= 0.0) {
    out.p = 1.0;
    return out;
  }
  double y = std::log(w1);
  const double xx = std::log(an);
  double mu, sigma;
  if (n <= 11) {
    const double gamma = poly(g, 2, an);
    if (y >= gamma) {
      out.p = 1e-99;
      return out;
    }
    y = -std::log(gamma - y);
    mu = poly(c3, 4, an);
    sigma = std::exp(poly(c4, 4, an));
  } else {
    mu = poly(c5, 4, xx);
    sigma = std::exp(poly(c6, 3, xx));
  }
  const boost::math::normal_distribution<double> dist(mu, sigma);
  out.p = boost::math::cdf(boost::math::complement(dist, y));
  return out;
}

// ---------------------------------------------------------------------------
// Paired t-test

double student_t_two_tailed_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t_distribution<double> dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

double cohen_d_from_t(double t, double n) {
  if (!(n >= 2.0)) throw Error(ErrorKind::InsufficientData, "Cohen's d needs n >= 2");
  return t / std::sqrt(n);
}

TTestResult paired_t(const PairedSample& sample) {
  sample.validate();
  const auto d = sample.differences();
  const double n = static_cast<double>(d.size());
  const double m = mean_of(d);
  const double sd = sample_sd(d);
  if (!(sd > 0.0)) throw Error(ErrorKind::DegenerateSample, "differences have zero variance");
  TTestResult r;
  r.t = m / (sd / std::sqrt(n));
  r.df = n - 1.0;
  r.p = student_t_two_tailed_p(r.t, r.df);
  r.d = cohen_d_from_t(r.t, n);
  return r;
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank

std::vector<double> signed_rank_magnitudes(std::span<const double> differences) {
  std::vector<double> mags;
  for (double d : differences)
    if (d != 0.0) mags.push_back(std::abs(d));
  std::vector<std::size_t> idx(mags.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return mags[i] < mags[j]; });
  std::vector<double> ranks(mags.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && mags[idx[j + 1]] == mags[idx[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double wilcoxon_exact_p(std::span<const double> ranks, double r_plus) {
  // Average ranks are multiples of 1/2; count sign patterns over doubled ranks.
  std::vector<std::uint64_t> doubled;
  std::uint64_t total = 0;
  for (double r : ranks) {
    doubled.push_back(static_cast<std::uint64_t>(std::llround(2.0 * r)));
    total += doubled.back();
  }
  std::vector<std::uint64_t> counts(total + 1, 0);
  counts[0] = 1;
  std::uint64_t reach = 0;
  for (auto r : doubled) {
    reach += r;
    for (std::uint64_t s = reach; s >= r; --s) {
      counts[s] += counts[s - r];
      if (s == r) break;
    }
  }
  const auto obs = static_cast<std::uint64_t>(std::llround(2.0 * r_plus));
  std::uint64_t lower = 0, upper = 0;
  for (std::uint64_t s = 0; s <= total; ++s) {
    if (s <= obs) lower += counts[s];
    if (s >= obs) upper += counts[s];
  }
  const double patterns = std::ldexp(1.0, static_cast<int>(ranks.size()));
  return std::min(1.0, 2.0 * static_cast<double>(std::min(lower, upper)) / patterns);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences) {
  std::vector<double> nonzero;
  for (double d : differences) {
    if (!std::isfinite(d)) throw Error(ErrorKind::Validation, "non-finite difference");
    if (d != 0.0) nonzero.push_back(d);
  }
  if (nonzero.empty()) throw Error(ErrorKind::DegenerateSample, "all differences are zero");

  const auto ranks = signed_rank_magnitudes(nonzero);
  WilcoxonResult r;
  r.n_nonzero = nonzero.size();
  for (std::size_t i = 0; i < nonzero.size(); ++i) {
    if (nonzero[i] > 0.0) r.r_plus += ranks[i];
    else r.r_minus += ranks[i];
  }
  r.w = std::min(r.r_plus, r.r_minus);
  r.r = (r.r_plus - r.r_minus) / (r.r_plus + r.r_minus);

  const double m = static_cast<double>(r.n_nonzero);
  if (r.n_nonzero <= kWilcoxonExactMax) {
    r.exact = true;
    r.p = wilcoxon_exact_p(ranks, r.r_plus);
  } else {
    std::vector<double> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
    const double mu = m * (m + 1.0) / 4.0;
    const double var = m * (m + 1.0) * (2.0 * m + 1.0) / 24.0 - tie_term / 48.0;
    const double dev = r.r_plus - mu;
    const double corrected = dev > 0.0 ? dev - 0.5 : (dev < 0.0 ? dev + 0.5 : 0.0);
    r.z = corrected / std::sqrt(var);
    const boost::math::normal_distribution<double> std_normal;
    r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(std_normal, std::abs(r.z))));
  }
  return r;
}

WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample) {
  if (sample.values_a.size() != sample.values_b.size())
    throw Error(ErrorKind::InsufficientData, "paired sample has unequal lengths");
  return wilcoxon_signed_rank(sample.differences());
}

// ---------------------------------------------------------------------------
// Normality-gated selection

std::string_view to_string(TestKind k) noexcept {
  return k == TestKind::PairedT ? "paired_t" : "wilcoxon";
}

TestReport select_test(const PairedSample& sample, std::string measure) {
  sample.validate();
  const auto diffs = sample.differences();

  TestReport rep;
  rep.measure = std::move(measure);
  rep.label_a = sample.label_a;
  rep.label_b = sample.label_b;
  rep.n = diffs.size();
  const auto da = describe(sample.values_a);
  const auto db = describe(sample.values_b);
  rep.mean_a = da.mean;
  rep.sd_a = da.sd;
  rep.mean_b = db.mean;
  rep.sd_b = db.sd;
  rep.normality = shapiro_wilk(diffs);

  if (rep.normality.p >= kAlpha) {
    const auto t = paired_t(sample);
    rep.chosen = TestKind::PairedT;
    rep.statistic = t.t;
    rep.df = t.df;
    rep.p_value = t.p;
    rep.effect_size = t.d;
    rep.effect_name = "d";
  } else {
    const auto w = wilcoxon_signed_rank(diffs);
    rep.chosen = TestKind::Wilcoxon;
    rep.statistic = w.w;
    rep.p_value = w.p;
    rep.effect_size = w.r;
    rep.effect_name = "r";
    rep.wilcoxon = w;
  }
  return rep;
}

}  // namespace loco::analysis
