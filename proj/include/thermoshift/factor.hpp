#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "thermoshift/errors.hpp"
#include "thermoshift/gibbs.hpp"
#include "thermoshift/language.hpp"
#include "thermoshift/logmath.hpp"
#include "thermoshift/pressure.hpp"
#include "thermoshift/weight_system.hpp"

namespace thermoshift {

/// One-block code from the Markov cover of a space onto the space itself.
/// A space without a factor map gets the identity.
class FactorMap {
 public:
  explicit FactorMap(const ShiftSpace& codomain) : codomain_(codomain), domain_(codomain.cover()) {}

  const ShiftSpace& domain() const { return domain_; }
  const ShiftSpace& codomain() const { return codomain_; }
  bool is_identity() const { return !codomain_.is_sofic(); }
  Symbol operator()(Symbol x) const { return codomain_.label(x); }

 private:
  ShiftSpace codomain_;
  ShiftSpace domain_;
};

inline Word image_word(const FactorMap& fm, WordView u) {
  require_allowable(fm.domain(), u, "domain word");
  Word out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = fm(u[i]);
  return out;
}

/// Allowable cover words labelled v, lexicographic.
inline std::vector<Word> preimage_words(const FactorMap& fm, WordView v, std::size_t budget = kDefaultWordBudget) {
  require_allowable(fm.codomain(), v, "codomain word");
  const ShiftSpace& s = fm.codomain();
  std::vector<Word> out;
  if (v.empty()) {
    out.emplace_back();
    return out;
  }
  Word cur(v.size());
  std::vector<std::size_t> idx(v.size(), 0);
  std::size_t depth = 0;
  while (true) {
    const auto& fib = s.fiber(v[depth]);
    bool advanced = false;
    while (idx[depth] < fib.size()) {
      Symbol x = fib[idx[depth]++];
      if (depth > 0 && !s.has_edge(cur[depth - 1], x)) continue;
      cur[depth] = x;
      advanced = true;
      break;
    }
    if (!advanced) {
      if (depth == 0) break;
      --depth;
      continue;
    }
    if (depth + 1 == v.size()) {
      if (out.size() >= budget) throw BudgetExceeded("preimage_words: more than " + std::to_string(budget) + " preimages");
      out.push_back(cur);
    } else {
      ++depth;
      idx[depth] = 0;
    }
  }
  return out;
}

/// Phi(v) = log |preimages of v|; with an exponent k this becomes
/// Psi(v) = Phi(v) - k * sum_i log |fiber(v_i)|.
inline WeightSystem preimage_count_weight(const ShiftSpace& s, std::optional<double> exponent = std::nullopt) {
  const double k = exponent.value_or(0.0);
  std::vector<double> phi(s.cover_size(), kNegInf);
  for (Symbol x = 1; x <= s.cover_size(); ++x)
    if (s.is_live(x)) phi[x - 1] = -k * std::log(static_cast<double>(s.fiber(s.label(x)).size()));
  WeightSystem::Parts parts;
  parts.kind = WeightKind::preimage_count;
  parts.meta.declared_C = 0.0;
  parts.meta.declared_M = 1.0;
  parts.meta.depth = 1;
  parts.meta.linear = true;
  parts.meta.regime = exponent ? "preimage count with fiber exponent" : "preimage count";
  parts.transfer = std::make_shared<const TransferForm>(TransferForm::one_site(s, std::move(phi)));
  parts.rebind = [exponent](const ShiftSpace& other) { return preimage_count_weight(other, exponent); };
  return WeightSystem(s, std::move(parts));
}

inline WeightSystem preimage_count_weight(const FactorMap& fm, std::optional<double> exponent = std::nullopt) {
  return preimage_count_weight(fm.codomain(), exponent);
}

/// g_n(v) = log sum over preimages u of exp(eval_F(u)): the sum of cylinder
/// sups, which equals the hidden potential exactly when F is locally
/// constant (Bowen constant 1) and brackets it within M otherwise.
inline WeightSystem pushforward_weight(const ShiftSpace& s, const WeightSystem& inner_any) {
  const WeightSystem inner = inner_any.rebind(s.cover());
  WeightSystem::Parts parts;
  parts.kind = WeightKind::pushforward;
  parts.meta.declared_C = inner.meta().declared_C;
  parts.meta.declared_M = inner.meta().declared_M;
  parts.meta.depth = inner.meta().depth;
  parts.meta.linear = true;
  const double M = inner.meta().declared_M.value_or(kPosInf);
  parts.meta.regime = M == 1.0 ? "exact" : "within Bowen constant " + std::to_string(M);
  parts.rebind = [inner](const ShiftSpace& other) { return pushforward_weight(other, inner); };
  if (const TransferForm* t = inner.transfer()) {
    parts.transfer = std::make_shared<const TransferForm>(*t);
  } else {
    FactorMap fm(s);
    parts.eval = [inner, fm](const ShiftSpace&, WordView v) {
      LogSumAccumulator acc;
      for (const Word& u : preimage_words(fm, v)) acc.add(inner.eval(u));
      return acc.value();
    };
  }
  return WeightSystem(s, std::move(parts));
}

inline WeightSystem pushforward_weight(const FactorMap& fm, const WeightSystem& inner) {
  return pushforward_weight(fm.codomain(), inner);
}

inline CylinderMeasure pushforward_measure(const FactorMap& fm, const CylinderMeasure& m) {
  CylinderMeasure::Table out;
  for (const auto& [w, mass] : m.weights()) {
    Word img(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) img[i] = fm(w[i]);
    out[img] += mass;
  }
  return CylinderMeasure::normalized(fm.codomain(), m.depth(), std::move(out));
}

struct PressureInterval {
  std::optional<double> lower;
  double upper = kPosInf;
  BracketConstants constants;
};

inline PressureInterval pressure_interval(const WeightSystem& ws, std::size_t n_max, const ConstantOptions& opt = {}) {
  PressureOptions po;
  po.n_max = n_max;
  po.gurevich = false;
  po.constants = opt;
  PressureReport r = pressure_report(ws, po);
  return {r.best_lower, r.best_upper, r.constants};
}

struct HiddenGibbsOptions {
  std::size_t depth = 10;
  std::size_t cesaro = 2;
  std::size_t n_max = 6;
  std::size_t n_pressure = 16;
  std::size_t p_max = 4;
};

struct HiddenGibbsReport {
  SpecificationCertificate certificate;
  PressureInterval P_F, P_G;
  bool overlap = false;
  GibbsRatioReport domain_ratios, image_ratios;
  bool C0_finite = false, C0_stable = false;
  std::string regime;
  bool pass = false;
};

/// Gibbs ratios of the projected (Cesaro-averaged) measure against the
/// pushforward potential, plus overlap of the two pressure intervals.
inline HiddenGibbsReport hidden_gibbs_report(const FactorMap& fm, const WeightSystem& ws_any,
                                             const HiddenGibbsOptions& opt = {}) {
  HiddenGibbsReport r;
  IrreducibilityReport cert = check_finite_irreducibility(fm.domain(), 1, opt.p_max);
  if (!cert.ok()) throw ConditionFailure("domain truncation has no connector certificate with p <= " + std::to_string(opt.p_max));
  r.certificate = *cert.certificate;
  if (opt.cesaro >= opt.depth || opt.n_max > opt.depth - opt.cesaro)
    throw SpecError("hidden-gibbs needs cesaro < depth and n_max <= depth - cesaro");
  const WeightSystem F = ws_any.rebind(fm.domain());
  const WeightSystem G = pushforward_weight(fm, F);
  r.regime = G.meta().regime;
  ConstantOptions co;
  co.p_max = opt.p_max;
  r.P_F = pressure_interval(F, opt.n_pressure, co);
  r.P_G = pressure_interval(G, opt.n_pressure, co);
  const double lf = r.P_F.lower.value_or(kNegInf), lg = r.P_G.lower.value_or(kNegInf);
  r.overlap = std::max(lf, lg) <= std::min(r.P_F.upper, r.P_G.upper) + 1e-12;

  CylinderMeasure mu = build_nu(F, opt.depth);
  if (opt.cesaro > 0) mu = cesaro_average(mu, opt.cesaro);
  CylinderMeasure pmu = pushforward_measure(fm, mu);
  auto mid = [](const PressureInterval& p) {
    return std::make_pair(p.lower.value_or(p.upper), p.upper);
  };
  auto [fl, fu] = mid(r.P_F);
  auto [gl, gu] = mid(r.P_G);
  r.domain_ratios = gibbs_ratio_report(mu, F, fl, fu, opt.n_max);
  r.image_ratios = gibbs_ratio_report(pmu, G, gl, gu, opt.n_max);
  r.C0_finite = std::isfinite(r.image_ratios.C0);
  const double c_half = r.image_ratios.rows[std::max<std::size_t>(opt.n_max / 2, 1) - 1].C0;
  const double c_full = r.image_ratios.rows.back().C0;
  r.C0_stable = r.C0_finite && std::abs(c_full - c_half) <= 0.1 * c_half;
  r.pass = r.overlap && r.C0_finite && r.C0_stable;
  return r;
}

}  // namespace thermoshift
