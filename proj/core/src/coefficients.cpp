#include "subfbsde/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "subfbsde/random.hpp"

namespace subfbsde {

void CoefficientBundle::validate() const {
  if (!b || !g || !delta || !sigma || !h || !phi) {
    throw std::invalid_argument("bundle '" + name + "' has an unset evaluator");
  }
  if (!(std::isfinite(lipschitz) && lipschitz >= 1.0)) {
    throw std::invalid_argument("bundle '" + name + "': declared Lipschitz constant must be >= 1");
  }
  if (!(std::isfinite(monotonicity) && monotonicity > 0.0)) {
    throw std::invalid_argument("bundle '" + name + "': declared monotonicity constant must be > 0");
  }
}

CoefficientBundle canonical_monotone(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("canonical_monotone: c must be > 0");
  CoefficientBundle B;
  B.name = "canonical_monotone";
  B.b = [c](double, const MarkovState&, double, double y) { return -c * y; };
  B.g = [c](double, const MarkovState&, double x, double) { return c * x; };
  B.delta = [c](double, const MarkovState&, double, double y, double) { return -c * y; };
  B.sigma = [c](double, const MarkovState&, double, double, double z) { return -c * z; };
  B.h = [c](double, const MarkovState&, double x, double, double) { return c * x; };
  B.phi = [](const MarkovState&, double x) { return x; };
  B.lipschitz = std::max(1.0, c);
  B.monotonicity = c;
  return B;
}

CoefficientBundle canonical_flipped_hp2(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("canonical_flipped_hp2: c must be > 0");
  CoefficientBundle B;
  B.name = "canonical_flipped_hp2";
  B.b = [c](double, const MarkovState&, double, double y) { return c * y; };
  B.g = [c](double, const MarkovState&, double x, double) { return -c * x; };
  B.delta = [c](double, const MarkovState&, double, double y, double) { return c * y; };
  B.sigma = [c](double, const MarkovState&, double, double, double z) { return c * z; };
  B.h = [c](double, const MarkovState&, double x, double, double) { return -c * x; };
  B.phi = [](const MarkovState&, double x) { return -x; };
  B.lipschitz = std::max(1.0, c);
  B.monotonicity = c;
  B.orientation = Orientation::increasing;
  return B;
}

CoefficientBundle linear_test() {
  auto B = canonical_monotone(1.0);
  B.name = "linear_test";
  return B;
}

CoefficientBundle riccati_test() {
  CoefficientBundle B;
  B.name = "riccati_test";
  B.b = [](double, const MarkovState&, double, double y) { return -0.5 * y; };
  B.g = [](double, const MarkovState&, double x, double) { return 1.5 * x; };
  B.delta = [](double, const MarkovState&, double, double y, double) { return -0.5 * y; };
  B.sigma = [](double, const MarkovState&, double, double, double z) { return -0.5 * z; };
  B.h = [](double, const MarkovState&, double x, double, double) { return 1.5 * x; };
  B.phi = [](const MarkovState&, double x) { return 2.0 * x; };
  B.lipschitz = 2.0;
  B.monotonicity = 0.5;
  return B;
}

CoefficientBundle divergence_demo() {
  auto B = linear_test();
  B.name = "divergence_demo";
  B.phi = [](const MarkovState&, double x) { return -5.0 * x; };
  B.lipschitz = 5.0;
  return B;
}

CoefficientBundle remark32_margin(double c, double cross) {
  if (!(c > 0.0) || !(cross >= 0.0) || !(cross < 0.5 * c)) {
    throw std::invalid_argument("remark32_margin: need c > 0 and 0 <= cross < c/2");
  }
  auto B = canonical_monotone(c);
  B.name = "remark32_margin";
  B.b = [c, cross](double, const MarkovState&, double x, double y) { return -c * y + cross * std::sin(x); };
  B.g = [c, cross](double, const MarkovState&, double x, double y) { return c * x + cross * std::sin(y); };
  B.lipschitz = std::max(1.0, std::hypot(c, cross));
  B.monotonicity = 0.5 * c;
  return B;
}

CoefficientBundle zero_bundle() {
  CoefficientBundle B;
  B.name = "zero";
  B.b = [](double, const MarkovState&, double, double) { return 0.0; };
  B.g = B.b;
  B.delta = [](double, const MarkovState&, double, double, double) { return 0.0; };
  B.sigma = B.delta;
  B.h = B.delta;
  B.phi = [](const MarkovState&, double) { return 0.0; };
  return B;
}

std::vector<std::string> bundle_catalog() {
  return {"canonical_monotone", "canonical_flipped_hp2", "linear_test", "riccati_test",
          "divergence_demo",    "remark32_margin",       "zero"};
}

CoefficientBundle make_bundle(std::string_view name, const BundleParams& params) {
  if (name == "canonical_monotone") return canonical_monotone(params.c);
  if (name == "canonical_flipped_hp2") return canonical_flipped_hp2(params.c);
  if (name == "linear_test") return linear_test();
  if (name == "riccati_test") return riccati_test();
  if (name == "divergence_demo") return divergence_demo();
  if (name == "remark32_margin") return remark32_margin(params.c, 0.4 * params.c);
  if (name == "zero") return zero_bundle();
  throw std::invalid_argument("unknown bundle '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

namespace {

double finite_or_throw(double v, const char* which, const std::string& bundle) {
  if (!std::isfinite(v)) {
    throw std::domain_error(std::string("non-finite ") + which + " in bundle '" + bundle + "'");
  }
  return v;
}

struct Evaluated {
  double b1, b2, g1, g2, d1, d2, s1, s2, h1, h2, p1, p2;
};

Evaluated evaluate(const CoefficientBundle& B, const HypothesisTuple& u) {
  const auto& n = B.name;
  return {finite_or_throw(B.b(u.t, u.state, u.x1, u.y1), "b", n),
          finite_or_throw(B.b(u.t, u.state, u.x2, u.y2), "b", n),
          finite_or_throw(B.g(u.t, u.state, u.x1, u.y1), "g", n),
          finite_or_throw(B.g(u.t, u.state, u.x2, u.y2), "g", n),
          finite_or_throw(B.delta(u.t, u.state, u.x1, u.y1, u.z1), "delta", n),
          finite_or_throw(B.delta(u.t, u.state, u.x2, u.y2, u.z2), "delta", n),
          finite_or_throw(B.sigma(u.t, u.state, u.x1, u.y1, u.z1), "sigma", n),
          finite_or_throw(B.sigma(u.t, u.state, u.x2, u.y2, u.z2), "sigma", n),
          finite_or_throw(B.h(u.t, u.state, u.x1, u.y1, u.z1), "h", n),
          finite_or_throw(B.h(u.t, u.state, u.x2, u.y2, u.z2), "h", n),
          finite_or_throw(B.phi(u.state, u.x1), "phi", n),
          finite_or_throw(B.phi(u.state, u.x2), "phi", n)};
}

}  // namespace

HypothesisReport check_hypothesis(const CoefficientBundle& bundle, const HypothesisSampler& sampler) {
  bundle.validate();
  if (sampler.samples == 0 || !(sampler.box > 0.0) || !(sampler.r_max >= 0.0) ||
      !(sampler.t_max >= sampler.t_min)) {
    throw std::invalid_argument("invalid hypothesis sampler");
  }

  const double c = bundle.monotonicity;
  const double L = bundle.lipschitz;
  const bool decreasing = bundle.orientation == Orientation::decreasing;

  RandomStream rng(sampler.seed, StreamTag::sampler, 0);
  auto in_box = [&] { return sampler.box * (2.0 * rng.uniform() - 1.0); };

  HypothesisReport rep;
  rep.m1_margin = -std::numeric_limits<double>::infinity();
  rep.m2_margin = -std::numeric_limits<double>::infinity();

  // Axis probes come first (x1 = x2, then y1 = y2, then z1 = z2), so a violation
  // that shows up on a reduced condition is reported in that reduced form.
  const std::size_t per_axis = std::max<std::size_t>(1, sampler.samples / 10);
  const std::size_t total = sampler.samples + 3 * per_axis;

  for (std::size_t i = 0; i < total; ++i) {
    HypothesisTuple u;
    u.t = sampler.t_min + (sampler.t_max - sampler.t_min) * rng.uniform();
    u.state = {in_box(), sampler.r_max * rng.uniform()};
    u.x1 = in_box();
    u.x2 = in_box();
    u.y1 = in_box();
    u.y2 = in_box();
    u.z1 = in_box();
    u.z2 = in_box();
    if (i < per_axis) {
      u.x2 = u.x1;
    } else if (i < 2 * per_axis) {
      u.y2 = u.y1;
    } else if (i < 3 * per_axis) {
      u.z2 = u.z1;
    }

    const Evaluated e = evaluate(bundle, u);
    const double dx = u.x1 - u.x2, dy = u.y1 - u.y2, dz = u.z1 - u.z2;

    const double lhs1 = (e.b1 - e.b2) * dy - (e.g1 - e.g2) * dx;
    const double q1 = c * (dx * dx + dy * dy);
    const double margin1 = decreasing ? lhs1 + q1 : q1 - lhs1;
    rep.m1_margin = std::max(rep.m1_margin, margin1);
    if (margin1 > kHypothesisSlack * (1.0 + std::abs(lhs1) + q1) && !rep.m1_violation) {
      rep.m1_violation = u;
    }

    const double lhs2 = (e.s1 - e.s2) * dz + (e.d1 - e.d2) * dy - (e.h1 - e.h2) * dx;
    const double q2 = c * (dx * dx + dy * dy + dz * dz);
    const double margin2 = decreasing ? lhs2 + q2 : q2 - lhs2;
    rep.m2_margin = std::max(rep.m2_margin, margin2);
    if (margin2 > kHypothesisSlack * (1.0 + std::abs(lhs2) + q2) && !rep.m2_violation) {
      rep.m2_violation = u;
    }

    const double phi_prod = (e.p1 - e.p2) * dx;
    const double phi_scale = kHypothesisSlack * (1.0 + std::abs(phi_prod));
    const bool phi_ok = decreasing ? phi_prod >= -phi_scale : phi_prod <= phi_scale;
    if (!phi_ok && !rep.phi_violation) rep.phi_violation = u;

    // Difference quotients in the Euclidean norm of each evaluator's arguments.
    const double n2 = std::hypot(dx, dy);
    const double n3 = std::hypot(dx, dy, dz);
    double worst = 0.0;
    if (n2 > 0.0) worst = std::max({worst, std::abs(e.b1 - e.b2) / n2, std::abs(e.g1 - e.g2) / n2});
    if (n3 > 0.0) {
      worst = std::max({worst, std::abs(e.d1 - e.d2) / n3, std::abs(e.s1 - e.s2) / n3,
                        std::abs(e.h1 - e.h2) / n3});
    }
    if (dx != 0.0) worst = std::max(worst, std::abs(e.p1 - e.p2) / std::abs(dx));
    rep.lipschitz_estimate = std::max(rep.lipschitz_estimate, worst);
    if (worst > L * (1.0 + 1e-9) && !rep.lipschitz_violation) rep.lipschitz_violation = u;
  }

  rep.samples_used = total;
  rep.phi_monotone = !rep.phi_violation.has_value();
  rep.verdict = {!rep.lipschitz_violation.has_value(), !rep.m1_violation.has_value(),
                 !rep.m2_violation.has_value(), rep.phi_monotone};
  return rep;
}

// ---------------------------------------------------------------------------

ContinuationParams continuation_params(double alpha, double c) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  return {alpha, alpha * c + (1.0 - alpha)};
}

CoefficientBundle continuation_transform(const CoefficientBundle& bundle, double alpha) {
  bundle.validate();
  const auto params = continuation_params(alpha, bundle.monotonicity);
  if (alpha == 1.0) return bundle;

  const double a = alpha;
  const double w = 1.0 - alpha;
  // Anchor signs: decreasing -> (-y, x, -y, -z, x, x); increasing is its mirror.
  const double s = bundle.orientation == Orientation::decreasing ? 1.0 : -1.0;

  CoefficientBundle out = bundle;
  out.name = bundle.name + "@alpha";
  out.b = [f = bundle.b, a, w, s](double t, const MarkovState& st, double x, double y) {
    return a * f(t, st, x, y) - s * w * y;
  };
  out.g = [f = bundle.g, a, w, s](double t, const MarkovState& st, double x, double y) {
    return a * f(t, st, x, y) + s * w * x;
  };
  out.delta = [f = bundle.delta, a, w, s](double t, const MarkovState& st, double x, double y, double z) {
    return a * f(t, st, x, y, z) - s * w * y;
  };
  out.sigma = [f = bundle.sigma, a, w, s](double t, const MarkovState& st, double x, double y, double z) {
    return a * f(t, st, x, y, z) - s * w * z;
  };
  out.h = [f = bundle.h, a, w, s](double t, const MarkovState& st, double x, double y, double z) {
    return a * f(t, st, x, y, z) + s * w * x;
  };
  out.phi = [f = bundle.phi, a, w, s](const MarkovState& st, double x) {
    return a * f(st, x) + s * w * x;
  };
  out.monotonicity = params.c_alpha;
  out.lipschitz = a * bundle.lipschitz + w;
  return out;
}

CoefficientBundle mirror_orientation(const CoefficientBundle& bundle) {
  bundle.validate();
  CoefficientBundle out = bundle;
  out.name = bundle.name + "~mirror";
  out.b = [f = bundle.b](double t, const MarkovState& st, double x, double y) { return f(t, st, x, -y); };
  out.g = [f = bundle.g](double t, const MarkovState& st, double x, double y) { return -f(t, st, x, -y); };
  out.delta = [f = bundle.delta](double t, const MarkovState& st, double x, double y, double z) {
    return f(t, st, x, -y, -z);
  };
  out.sigma = [f = bundle.sigma](double t, const MarkovState& st, double x, double y, double z) {
    return f(t, st, x, -y, -z);
  };
  out.h = [f = bundle.h](double t, const MarkovState& st, double x, double y, double z) {
    return -f(t, st, x, -y, -z);
  };
  out.phi = [f = bundle.phi](const MarkovState& st, double x) { return -f(st, x); };
  out.orientation = bundle.orientation == Orientation::decreasing ? Orientation::increasing
                                                                  : Orientation::decreasing;
  return out;
}

Eta0 eta0(double L, double c, double kappa, double T, double C1) {
  for (double v : {L, c, kappa, T, C1}) {
    if (!(std::isfinite(v) && v > 0.0)) throw std::invalid_argument("eta0: inputs must be positive");
  }
  const double c_eff = std::min(c, 1.0);
  Eta0 e;
  e.forward_bound = 1.0 / (3.0 * (1.0 + L) * ((1.0 + 1.0 / kappa) * T + 1.0));
  e.monotone_bound = c_eff / (1.0 + 4.0 * C1);
  e.value = std::min(e.forward_bound, e.monotone_bound);
  return e;
}

double default_c1(double L) { return 4.0 * (1.0 + L) * (1.0 + L); }

}  // namespace subfbsde
