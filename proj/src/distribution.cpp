#include "trisre/distribution.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "trisre/error.hpp"

namespace trisre {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-13;
constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidSpec, what);
}

bool is_prob(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Integral over (0, inf) of g(t) * phi(t - c).  The half line is split at the
// mode when it lies inside so that the double-exponential rules see a smooth
// integrand away from the (possibly singular) endpoint t = 0.
template <typename G>
double half_line_gauss(G g, double c) {
  auto integrand = [&](double t) {
    const double w = std_normal_pdf(t - c);
    return w == 0.0 ? 0.0 : g(t) * w;
  };
  boost::math::quadrature::exp_sinh<double> tail;
  if (c <= 1.0) {
    return tail.integrate(integrand, 0.0, kInf, kQuadTol);
  }
  boost::math::quadrature::tanh_sinh<double> finite;
  return finite.integrate(integrand, 0.0, c, kQuadTol) +
         tail.integrate(integrand, c, kInf, kQuadTol);
}

// E[|X|^beta 1{X>0}] and E[|X|^beta 1{X<0}] for X ~ N(mean, sd^2).
double normal_part(const law::Normal& n, double beta, Sign sign) {
  const double c = (sign == Sign::Plus ? n.mean : -n.mean) / n.sd;
  const double integral = half_line_gauss([beta](double t) { return std::pow(t, beta); }, c);
  return std::pow(n.sd, beta) * integral;
}

double lower_limit(const Distribution& spec) noexcept;
double upper_limit(const Distribution& spec) noexcept;

void check_moment_range(const Distribution& spec, double beta) {
  if (!std::isfinite(beta)) throw Error(ErrorCode::MomentDiverges, "non-finite order");
  if (beta == 0.0) return;
  if (beta >= upper_limit(spec) || beta <= lower_limit(spec)) {
    std::ostringstream os;
    os << "E|X|^" << beta << " is infinite for " << describe(spec);
    throw Error(ErrorCode::MomentDiverges, os.str());
  }
}

double upper_limit(const Distribution& spec) noexcept {
  return std::visit(Overloaded{
                        [](const law::TwoSidedPareto& p) { return p.alpha; },
                        [](const law::Scaled& s) {
                          return s.factor == 0.0 ? kInf : upper_limit(*s.inner);
                        },
                        [](const auto&) { return kInf; },
                    },
                    spec.variant());
}

double lower_limit(const Distribution& spec) noexcept {
  return std::visit(Overloaded{
                        [](const law::Constant& c) { return c.value == 0.0 ? 0.0 : -kInf; },
                        [](const law::Normal&) { return -1.0; },
                        [](const law::Uniform& u) {
                          return (u.a <= 0.0 && u.b >= 0.0) ? -1.0 : -kInf;
                        },
                        [](const law::Scaled& s) {
                          return s.factor == 0.0 ? 0.0 : lower_limit(*s.inner);
                        },
                        [](const auto&) { return -kInf; },
                    },
                    spec.variant());
}

// Integral of |x|^beta over [lo, hi] with lo <= hi on one side of zero.
double power_integral(double lo, double hi, double beta) {
  auto antiderivative = [beta](double x) {
    return std::copysign(std::pow(std::abs(x), beta + 1.0), x) / (beta + 1.0);
  };
  return antiderivative(hi) - antiderivative(lo);
}

double positive_part(const Distribution& spec, double beta);
double negative_part(const Distribution& spec, double beta);

double positive_part(const Distribution& spec, double beta) {
  return std::visit(
      Overloaded{
          [&](const law::Constant& c) {
            if (c.value > 0.0) return std::pow(c.value, beta);
            if (c.value == 0.0 && beta == 0.0) return 1.0;
            return 0.0;
          },
          [&](const law::Normal& n) {
            if (beta == 0.0) return 0.5 * std::erfc(-n.mean / (n.sd * std::sqrt(2.0)));
            return normal_part(n, beta, Sign::Plus);
          },
          [&](const law::Lognormal& l) {
            return std::exp(l.mu * beta + 0.5 * l.sigma * l.sigma * beta * beta);
          },
          [&](const law::SignedLognormal& l) {
            return l.p_pos * std::exp(l.mu * beta + 0.5 * l.sigma * l.sigma * beta * beta);
          },
          [&](const law::TwoSidedPareto& p) {
            return p.p_pos * p.alpha * std::pow(p.scale, beta) / (p.alpha - beta);
          },
          [&](const law::Uniform& u) {
            const double lo = std::max(u.a, 0.0);
            const double hi = std::max(u.b, 0.0);
            if (hi <= lo) return 0.0;
            return power_integral(lo, hi, beta) / (u.b - u.a);
          },
          [&](const law::Scaled& s) {
            if (s.factor == 0.0) return beta == 0.0 ? 1.0 : 0.0;
            const double scale = std::pow(std::abs(s.factor), beta);
            return scale * (s.factor > 0.0 ? positive_part(*s.inner, beta)
                                           : negative_part(*s.inner, beta));
          },
      },
      spec.variant());
}

double negative_part(const Distribution& spec, double beta) {
  return std::visit(
      Overloaded{
          [&](const law::Constant& c) {
            return c.value < 0.0 ? std::pow(-c.value, beta) : 0.0;
          },
          [&](const law::Normal& n) {
            if (beta == 0.0) return 0.5 * std::erfc(n.mean / (n.sd * std::sqrt(2.0)));
            return normal_part(n, beta, Sign::Minus);
          },
          [&](const law::Lognormal&) { return 0.0; },
          [&](const law::SignedLognormal& l) {
            return (1.0 - l.p_pos) *
                   std::exp(l.mu * beta + 0.5 * l.sigma * l.sigma * beta * beta);
          },
          [&](const law::TwoSidedPareto& p) {
            return (1.0 - p.p_pos) * p.alpha * std::pow(p.scale, beta) / (p.alpha - beta);
          },
          [&](const law::Uniform& u) {
            const double lo = std::min(u.a, 0.0);
            const double hi = std::min(u.b, 0.0);
            if (hi <= lo) return 0.0;
            return power_integral(lo, hi, beta) / (u.b - u.a);
          },
          [&](const law::Scaled& s) {
            if (s.factor == 0.0) return 0.0;
            const double scale = std::pow(std::abs(s.factor), beta);
            return scale * (s.factor > 0.0 ? negative_part(*s.inner, beta)
                                           : positive_part(*s.inner, beta));
          },
      },
      spec.variant());
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

Distribution::Distribution(Variant v) : v_(std::move(v)) {
  std::visit(
      Overloaded{
          [](const law::Constant& c) { require(std::isfinite(c.value), "constant must be finite"); },
          [](const law::Normal& n) {
            require(std::isfinite(n.mean), "normal mean must be finite");
            require(std::isfinite(n.sd) && n.sd > 0.0, "normal sd must be > 0");
          },
          [](const law::Lognormal& l) {
            require(std::isfinite(l.mu), "lognormal mu must be finite");
            require(std::isfinite(l.sigma) && l.sigma > 0.0, "lognormal sigma must be > 0");
          },
          [](const law::SignedLognormal& l) {
            require(std::isfinite(l.mu), "signed lognormal mu must be finite");
            require(std::isfinite(l.sigma) && l.sigma > 0.0, "signed lognormal sigma must be > 0");
            require(is_prob(l.p_pos), "p_pos must lie in [0, 1]");
          },
          [](const law::TwoSidedPareto& p) {
            require(std::isfinite(p.alpha) && p.alpha > 0.0, "pareto alpha must be > 0");
            require(std::isfinite(p.scale) && p.scale > 0.0, "pareto scale must be > 0");
            require(is_prob(p.p_pos), "p_pos must lie in [0, 1]");
          },
          [](const law::Uniform& u) {
            require(std::isfinite(u.a) && std::isfinite(u.b) && u.a < u.b,
                    "uniform requires finite a < b");
          },
          [](const law::Scaled& s) {
            require(s.inner != nullptr, "scaled requires an inner law");
            require(std::isfinite(s.factor), "scale factor must be finite");
          },
      },
      v_);
}

Distribution Distribution::scaled(Distribution inner, double factor) {
  return law::Scaled{std::make_shared<const Distribution>(std::move(inner)), factor};
}

bool operator==(const Distribution& a, const Distribution& b) {
  if (a.v_.index() != b.v_.index()) return false;
  return std::visit(
      Overloaded{
          [&](const law::Constant& x) { return x.value == std::get<law::Constant>(b.v_).value; },
          [&](const law::Normal& x) {
            const auto& y = std::get<law::Normal>(b.v_);
            return x.mean == y.mean && x.sd == y.sd;
          },
          [&](const law::Lognormal& x) {
            const auto& y = std::get<law::Lognormal>(b.v_);
            return x.mu == y.mu && x.sigma == y.sigma;
          },
          [&](const law::SignedLognormal& x) {
            const auto& y = std::get<law::SignedLognormal>(b.v_);
            return x.mu == y.mu && x.sigma == y.sigma && x.p_pos == y.p_pos;
          },
          [&](const law::TwoSidedPareto& x) {
            const auto& y = std::get<law::TwoSidedPareto>(b.v_);
            return x.alpha == y.alpha && x.scale == y.scale && x.p_pos == y.p_pos;
          },
          [&](const law::Uniform& x) {
            const auto& y = std::get<law::Uniform>(b.v_);
            return x.a == y.a && x.b == y.b;
          },
          [&](const law::Scaled& x) {
            const auto& y = std::get<law::Scaled>(b.v_);
            return x.factor == y.factor && *x.inner == *y.inner;
          },
      },
      a.v_);
}

double sample(const Distribution& spec, RngStream& rng) {
  return std::visit(
      Overloaded{
          [](const law::Constant& c) { return c.value; },
          [&](const law::Normal& n) { return n.mean + n.sd * rng.normal(); },
          [&](const law::Lognormal& l) { return std::exp(l.mu + l.sigma * rng.normal()); },
          [&](const law::SignedLognormal& l) {
            const bool positive = rng.uniform() < l.p_pos;
            const double magnitude = std::exp(l.mu + l.sigma * rng.normal());
            return positive ? magnitude : -magnitude;
          },
          [&](const law::TwoSidedPareto& p) {
            const bool positive = rng.uniform() < p.p_pos;
            const double magnitude = p.scale * std::pow(rng.uniform(), -1.0 / p.alpha);
            return positive ? magnitude : -magnitude;
          },
          [&](const law::Uniform& u) { return u.a + (u.b - u.a) * rng.uniform(); },
          [&](const law::Scaled& s) { return s.factor * sample(*s.inner, rng); },
      },
      spec.variant());
}

double abs_moment(const Distribution& spec, double beta) {
  if (beta == 0.0) return 1.0;
  check_moment_range(spec, beta);
  if (const auto* n = spec.as<law::Normal>()) {
    return normal_part(*n, beta, Sign::Plus) + normal_part(*n, beta, Sign::Minus);
  }
  return positive_part(spec, beta) + negative_part(spec, beta);
}

double signed_moment(const Distribution& spec, double beta, Sign sign) {
  check_moment_range(spec, beta);
  return sign == Sign::Plus ? positive_part(spec, beta) : negative_part(spec, beta);
}

double log_abs_moment(const Distribution& spec) {
  if (has_atom_at_zero(spec)) {
    throw Error(ErrorCode::LogMomentUndefined, describe(spec) + " has an atom at 0");
  }
  return std::visit(
      Overloaded{
          [](const law::Constant& c) { return std::log(std::abs(c.value)); },
          [](const law::Normal& n) {
            const double c = n.mean / n.sd;
            auto log_t = [](double t) { return std::log(t); };
            return std::log(n.sd) + half_line_gauss(log_t, c) + half_line_gauss(log_t, -c);
          },
          [](const law::Lognormal& l) { return l.mu; },
          [](const law::SignedLognormal& l) { return l.mu; },
          [](const law::TwoSidedPareto& p) { return std::log(p.scale) + 1.0 / p.alpha; },
          [](const law::Uniform& u) {
            auto g = [](double x) { return x == 0.0 ? 0.0 : x * std::log(std::abs(x)) - x; };
            return (g(u.b) - g(u.a)) / (u.b - u.a);
          },
          [](const law::Scaled& s) { return std::log(std::abs(s.factor)) + log_abs_moment(*s.inner); },
      },
      spec.variant());
}

bool is_tiltable(const Distribution& spec) noexcept {
  return std::visit(Overloaded{
                        [](const law::Constant& c) { return c.value != 0.0; },
                        [](const law::Lognormal&) { return true; },
                        [](const law::SignedLognormal&) { return true; },
                        [](const law::Scaled& s) { return s.factor != 0.0 && is_tiltable(*s.inner); },
                        [](const auto&) { return false; },
                    },
                    spec.variant());
}

Distribution tilted(const Distribution& spec, double alpha) {
  if (!is_tiltable(spec)) {
    throw Error(ErrorCode::TiltUnsupported,
                describe(spec) + " is not closed under |x|^alpha tilting");
  }
  return std::visit(
      Overloaded{
          [&](const law::Lognormal& l) -> Distribution {
            return law::Lognormal{l.mu + alpha * l.sigma * l.sigma, l.sigma};
          },
          [&](const law::SignedLognormal& l) -> Distribution {
            return law::SignedLognormal{l.mu + alpha * l.sigma * l.sigma, l.sigma, l.p_pos};
          },
          [&](const law::Scaled& s) -> Distribution {
            return Distribution::scaled(tilted(*s.inner, alpha), s.factor);
          },
          [&](const auto&) -> Distribution { return spec; },
      },
      spec.variant());
}

double abs_normal_moment(double alpha) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::ArgumentOutOfRange, "alpha must be >= 0");
  return std::exp(0.5 * alpha * std::log(2.0) + std::lgamma(0.5 * (alpha + 1.0))) /
         std::sqrt(M_PI);
}

double mean(const Distribution& spec) {
  check_moment_range(spec, 1.0);
  return std::visit(
      Overloaded{
          [](const law::Constant& c) { return c.value; },
          [](const law::Normal& n) { return n.mean; },
          [](const law::Lognormal& l) { return std::exp(l.mu + 0.5 * l.sigma * l.sigma); },
          [](const law::SignedLognormal& l) {
            return (2.0 * l.p_pos - 1.0) * std::exp(l.mu + 0.5 * l.sigma * l.sigma);
          },
          [](const law::TwoSidedPareto& p) {
            return (2.0 * p.p_pos - 1.0) * p.alpha * p.scale / (p.alpha - 1.0);
          },
          [](const law::Uniform& u) { return 0.5 * (u.a + u.b); },
          [](const law::Scaled& s) { return s.factor == 0.0 ? 0.0 : s.factor * mean(*s.inner); },
      },
      spec.variant());
}

double abs_moment_derivative_fd(const Distribution& spec, double beta) {
  constexpr double h = 1e-5;
  return (abs_moment(spec, beta + h) - abs_moment(spec, beta - h)) / (2.0 * h);
}

double abs_moment_derivative(const Distribution& spec, double beta) {
  return std::visit(
      Overloaded{
          [&](const law::Constant& c) {
            if (c.value == 0.0) return 0.0;
            const double a = std::abs(c.value);
            return std::pow(a, beta) * std::log(a);
          },
          [&](const law::Lognormal& l) {
            return (l.mu + l.sigma * l.sigma * beta) * abs_moment(spec, beta);
          },
          [&](const law::SignedLognormal& l) {
            return (l.mu + l.sigma * l.sigma * beta) * abs_moment(spec, beta);
          },
          [&](const law::Scaled& s) {
            if (s.factor == 0.0) return 0.0;
            const double f = std::abs(s.factor);
            return std::pow(f, beta) * (std::log(f) * abs_moment(*s.inner, beta) +
                                        abs_moment_derivative(*s.inner, beta));
          },
          [&](const auto&) { return abs_moment_derivative_fd(spec, beta); },
      },
      spec.variant());
}

double log_abs_moment_curvature(const Distribution& spec, double beta) {
  if (const auto* l = spec.as<law::Lognormal>()) return l->sigma * l->sigma;
  if (const auto* l = spec.as<law::SignedLognormal>()) return l->sigma * l->sigma;
  constexpr double h = 1e-4;
  auto log_moment = [&](double b) { return std::log(abs_moment(spec, b)); };
  return (log_moment(beta + h) - 2.0 * log_moment(beta) + log_moment(beta - h)) / (h * h);
}

double moment_upper_limit(const Distribution& spec) noexcept { return upper_limit(spec); }
double moment_lower_limit(const Distribution& spec) noexcept { return lower_limit(spec); }

bool has_negative_mass(const Distribution& spec) noexcept {
  return std::visit(Overloaded{
                        [](const law::Constant& c) { return c.value < 0.0; },
                        [](const law::Normal&) { return true; },
                        [](const law::Lognormal&) { return false; },
                        [](const law::SignedLognormal& l) { return l.p_pos < 1.0; },
                        [](const law::TwoSidedPareto& p) { return p.p_pos < 1.0; },
                        [](const law::Uniform& u) { return u.a < 0.0; },
                        [](const law::Scaled& s) {
                          if (s.factor == 0.0) return false;
                          return s.factor > 0.0 ? has_negative_mass(*s.inner)
                                                : has_positive_mass(*s.inner);
                        },
                    },
                    spec.variant());
}

bool has_positive_mass(const Distribution& spec) noexcept {
  return std::visit(Overloaded{
                        [](const law::Constant& c) { return c.value > 0.0; },
                        [](const law::Normal&) { return true; },
                        [](const law::Lognormal&) { return true; },
                        [](const law::SignedLognormal& l) { return l.p_pos > 0.0; },
                        [](const law::TwoSidedPareto& p) { return p.p_pos > 0.0; },
                        [](const law::Uniform& u) { return u.b > 0.0; },
                        [](const law::Scaled& s) {
                          if (s.factor == 0.0) return false;
                          return s.factor > 0.0 ? has_positive_mass(*s.inner)
                                                : has_negative_mass(*s.inner);
                        },
                    },
                    spec.variant());
}

bool has_atom_at_zero(const Distribution& spec) noexcept {
  return std::visit(Overloaded{
                        [](const law::Constant& c) { return c.value == 0.0; },
                        [](const law::Scaled& s) {
                          return s.factor == 0.0 || has_atom_at_zero(*s.inner);
                        },
                        [](const auto&) { return false; },
                    },
                    spec.variant());
}

bool is_degenerate(const Distribution& spec) noexcept {
  return std::visit(Overloaded{
                        [](const law::Constant&) { return true; },
                        [](const law::Scaled& s) { return s.factor == 0.0 || is_degenerate(*s.inner); },
                        [](const auto&) { return false; },
                    },
                    spec.variant());
}

bool is_non_arithmetic(const Distribution& spec) noexcept { return !is_degenerate(spec); }

std::optional<RegularVariation> regular_variation(const Distribution& spec) {
  if (const auto* p = spec.as<law::TwoSidedPareto>()) {
    return RegularVariation{p->alpha, p->p_pos, 1.0 - p->p_pos, std::pow(p->scale, p->alpha)};
  }
  if (const auto* s = spec.as<law::Scaled>()) {
    if (s->factor == 0.0) return std::nullopt;
    auto inner = regular_variation(*s->inner);
    if (!inner) return std::nullopt;
    inner->ell *= std::pow(std::abs(s->factor), inner->alpha);
    if (s->factor < 0.0) std::swap(inner->p, inner->q);
    return inner;
  }
  return std::nullopt;
}

std::string describe(const Distribution& spec) {
  return std::visit(
      Overloaded{
          [](const law::Constant& c) { return "constant(" + fmt(c.value) + ")"; },
          [](const law::Normal& n) { return "normal(" + fmt(n.mean) + ", " + fmt(n.sd) + ")"; },
          [](const law::Lognormal& l) {
            return "lognormal(" + fmt(l.mu) + ", " + fmt(l.sigma) + ")";
          },
          [](const law::SignedLognormal& l) {
            return "signed_lognormal(" + fmt(l.mu) + ", " + fmt(l.sigma) + ", " + fmt(l.p_pos) + ")";
          },
          [](const law::TwoSidedPareto& p) {
            return "two_sided_pareto(" + fmt(p.alpha) + ", " + fmt(p.scale) + ", " + fmt(p.p_pos) +
                   ")";
          },
          [](const law::Uniform& u) { return "uniform(" + fmt(u.a) + ", " + fmt(u.b) + ")"; },
          [](const law::Scaled& s) { return fmt(s.factor) + " * " + describe(*s.inner); },
      },
      spec.variant());
}

}  // namespace trisre
