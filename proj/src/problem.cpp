#include "fdelay/problem.hpp"

#include <cmath>
#include <sstream>

#include "fdelay/error.hpp"

namespace fdelay {

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

template <class Piece>
void validate_partition(const std::vector<Piece>& pieces, const DelayIVP& ivp, const std::string& name) {
  if (pieces.empty()) invalid(name, "at least one piece is required");
  double begin = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& pc = pieces[i];
    const std::string path = name + "[" + std::to_string(i) + "]";
    if (!(pc.t_end > begin)) invalid(path + ".T_end", "pieces must satisfy 0 = T_0 < T_1 < ... < T_n");
    if (pc.t_end > ivp.T * (1.0 + 1e-12)) invalid(path + ".T_end", "exceeds the horizon T");
    if (i == 0) {
      if (pc.eta && *pc.eta != 0.0) {
        invalid(path + ".eta", "the first piece is singular at t = 0 and takes no interior eta");
      }
    } else {
      if (!pc.eta) invalid(path + ".eta", "required for every piece after the first");
      if (!(*pc.eta > begin && *pc.eta < pc.t_end)) {
        std::ostringstream msg;
        msg << "eta must be interior to (" << begin << ", " << pc.t_end << "), got " << *pc.eta;
        invalid(path + ".eta", msg.str());
      }
    }
    if (!(pc.a >= 0.0 && pc.a < ivp.alpha)) invalid(path + ".a", "must lie in [0, alpha)");
    if (!finite_positive(pc.b)) invalid(path + ".b", "must be positive");
    begin = pc.t_end;
  }
  if (std::abs(pieces.back().t_end - ivp.T) > 1e-12 * std::max(1.0, ivp.T)) {
    invalid(name + "[" + std::to_string(pieces.size() - 1) + "].T_end", "the last piece must end at T");
  }
}

}  // namespace

int DelayIVP::ceil_alpha() const { return static_cast<int>(std::ceil(alpha)); }

void DelayIVP::validate() const {
  if (!finite_positive(alpha)) invalid("alpha", "must be positive");
  if (!finite_positive(h)) invalid("h", "must be positive");
  if (!finite_positive(T)) invalid("T", "must be positive");
  for (double tau : f.delays()) {
    if (tau > h * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "delay exceeds h (U(" << tau << ") with h=" << h << ")";
      invalid("f", msg.str());
    }
  }
  if (static_cast<int>(phi.derivatives_at_zero().size()) != ceil_alpha()) {
    std::ostringstream msg;
    msg << "expected " << ceil_alpha() << " derivative values (ceil(alpha)), got "
        << phi.derivatives_at_zero().size();
    invalid("phi.derivs", msg.str());
  }
  if (!phi.is_expression() && phi.sample_nodes().front() > -h * (1.0 - 1e-12)) {
    invalid("phi.samples.t", "samples must cover [-h, 0]");
  }
  try {
    const double sup = phi.sup_norm(h, 257);
    if (!std::isfinite(sup)) invalid("phi", "not finite on [-h, 0]");
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    invalid("phi", std::string("not evaluable on [-h, 0]: ") + e.what());
  }
  if (phi.is_expression() && std::abs(phi.at(0.0) - phi.derivatives_at_zero()[0]) >
                                 1e-9 * std::max(1.0, std::abs(phi.at(0.0)))) {
    invalid("phi.derivs[0]", "must equal phi(0)");
  }
}

void GrowthSpec::validate(const DelayIVP& ivp) const {
  validate_partition(pieces, ivp, "growth");
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& pc = pieces[i];
    const std::string path = "growth[" + std::to_string(i) + "]";
    if (!(pc.p > 0.0 && pc.p <= 1.0)) invalid(path + ".p", "must lie in (0, 1]");
    if (!(pc.q >= 0.0 && pc.q < ivp.alpha && pc.q < 1.0)) invalid(path + ".q", "must lie in [0, alpha) and below 1");
    if (pc.m.reads_state()) invalid(path + ".m", "forcing term may only depend on t");
  }
}

void LipschitzSpec::validate(const DelayIVP& ivp) const { validate_partition(pieces, ivp, "lipschitz"); }

double eval_rhs(const Expression& f, double t, const Segment& seg) { return f.eval(t, seg); }

}  // namespace fdelay
