#include "fairdef/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fairdef {

namespace {

bool bernoulli(Rng& rng, double p) { return uniform_real(rng) < p; }

double clamp_round(double v, double lo, double hi) { return std::clamp(std::round(v), lo, hi); }

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

Eigen::VectorXd make_synthetic_concept(int num_features, Rng& rng) {
  Eigen::VectorXd beta(num_features + 1);
  for (int j = 0; j < num_features; ++j) beta(j) = standard_normal(rng);
  beta /= beta.head(num_features).norm();
  beta *= 2.0;
  beta(num_features) = 0.0;
  return beta;
}

Dataset make_synthetic_client(const SyntheticClientParams& params,
                              const Eigen::Ref<const Eigen::VectorXd>& beta, Rng& rng) {
  const int d = params.num_features;
  Dataset out(params.size);
  for (auto& p : out) {
    p.s = bernoulli(rng, 0.5) ? 1 : 0;
    p.x.resize(d + 1);
    for (int j = 0; j < d; ++j) p.x(j) = standard_normal(rng);
    p.x(0) += params.group_shift * (p.s - 0.5);
    p.x(d) = 1.0;
    const double score = p.x.dot(beta) + params.label_noise * standard_normal(rng);
    p.y = score >= 0.0 ? 1 : -1;
    if (bernoulli(rng, params.planted_bias)) p.y = 2 * p.s - 1;
  }
  return out;
}

std::string make_law_like_csv(std::size_t rows, std::uint64_t seed) {
  Rng rng = make_stream(seed, "law_like");
  std::ostringstream out;
  out << "decile1b,decile3,lsat,ugpa,zfygpa,zgpa,fulltime,fam_inc,male,tier,race,pass_bar\n";
  for (std::size_t i = 0; i < rows; ++i) {
    const bool white = bernoulli(rng, 0.84);
    const double ability = standard_normal(rng) + (white ? 0.8 : 0.0);
    const double decile1b = clamp_round(5.5 + 2.0 * ability + 1.5 * standard_normal(rng), 1, 10);
    const double decile3 = clamp_round(5.5 + 2.0 * ability + 1.5 * standard_normal(rng), 1, 10);
    const double lsat = std::clamp(33.0 + 4.5 * ability + 3.0 * standard_normal(rng), 11.0, 48.0);
    const double ugpa = std::clamp(3.1 + 0.25 * ability + 0.3 * standard_normal(rng), 1.5, 4.0);
    const double zfygpa = 0.7 * ability + 0.7 * standard_normal(rng) - 0.4;
    const double zgpa = 0.6 * zfygpa + 0.8 * standard_normal(rng) * 0.7;
    const int fulltime = bernoulli(rng, 0.9) ? 1 : 2;
    const double fam_inc = clamp_round(3.0 + 0.5 * ability + standard_normal(rng), 1, 5);
    const int male = bernoulli(rng, 0.56) ? 1 : 0;
    const double tier = clamp_round(3.5 + 0.6 * ability + 1.2 * standard_normal(rng), 1, 6);
    const double pass_score = 1.4 + 0.9 * ability + 0.35 * (lsat - 33.0) / 4.5 +
                              (white ? 0.4 : -0.2) + 1.3 * standard_normal(rng);
    const int pass_bar = pass_score > 0.0 ? 1 : 0;
    out << fmt(decile1b, 0) << ',' << fmt(decile3, 0) << ',' << fmt(lsat, 1) << ','
        << fmt(ugpa, 2) << ',' << fmt(zfygpa, 3) << ',' << fmt(zgpa, 3) << ',' << fulltime << ','
        << fmt(fam_inc, 0) << ',' << male << ',' << fmt(tier, 0) << ','
        << (white ? "White" : "Non-White") << ',' << pass_bar << '\n';
  }
  return out.str();
}

std::string make_dutch_like_csv(std::size_t rows, std::uint64_t seed) {
  Rng rng = make_stream(seed, "dutch_like");
  std::ostringstream out;
  out << "age,household_position,household_size,prev_residence_place,citizenship,country_birth,"
         "edu_level,economic_status,cur_eco_activity,Marital_status,sex,occupation\n";
  for (std::size_t i = 0; i < rows; ++i) {
    const bool male = bernoulli(rng, 0.5);
    const double age = clamp_round(8.0 + 2.5 * standard_normal(rng), 4, 15);
    const double edu = clamp_round(3.0 + 1.3 * standard_normal(rng) + (male ? 0.2 : 0.0), 0, 5);
    const double household_position = clamp_round(1131 + 10 * standard_normal(rng), 1110, 1200);
    const double household_size = clamp_round(112 + 3 * standard_normal(rng), 111, 126);
    const int prev_residence = bernoulli(rng, 0.9) ? 1 : 2;
    const int citizenship = bernoulli(rng, 0.95) ? 1 : 2;
    const int country_birth = bernoulli(rng, 0.9) ? 1 : 2;
    const double economic_status = bernoulli(rng, 0.8) ? 111 : 120;
    const double activity = clamp_round(135 + 2 * standard_normal(rng), 124, 140);
    const int marital = bernoulli(rng, 0.55) ? 2 : 1;
    const double score = 0.9 * (edu - 3.0) + 0.15 * (age - 8.0) + (male ? 0.45 : -0.1) +
                         0.8 * standard_normal(rng);
    const int occupation = score > 0.0 ? 1 : 0;
    out << fmt(age, 0) << ',' << fmt(household_position, 0) << ',' << fmt(household_size, 0) << ','
        << prev_residence << ',' << citizenship << ',' << country_birth << ',' << fmt(edu, 0)
        << ',' << fmt(economic_status, 0) << ',' << fmt(activity, 0) << ',' << marital << ','
        << (male ? 1 : 2) << ',' << occupation << '\n';
  }
  return out.str();
}

}  // namespace fairdef
