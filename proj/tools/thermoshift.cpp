// thermoshift command-line front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thermoshift/io.hpp"
#include "thermoshift/thermoshift.hpp"

namespace ts = thermoshift;
using ts::io::json;
using ts::io::num;

namespace {

struct Common {
  std::string shift_path;
  std::string potential_path;
  std::string out_path;
  bool csv = false;
  double tol = 1e-6;
};

struct Loaded {
  json shift_spec;
  json potential_spec;
  ts::ShiftSpace shift;
};

Loaded load_shift(const Common& c) {
  json spec = ts::io::read_json_file(c.shift_path);
  ts::ShiftSpace s = ts::io::parse_shift(spec, c.shift_path);
  return {spec, json(nullptr), s};
}

ts::WeightSystem load_potential(const Common& c, Loaded& l) {
  if (c.potential_path.empty()) {
    l.potential_spec = {{"type", "zero"}};
    return ts::zero_potential(l.shift);
  }
  l.potential_spec = ts::io::read_json_file(c.potential_path);
  return ts::io::parse_potential(l.potential_spec, l.shift, c.potential_path);
}

json envelope(const std::string& command, json params, const Loaded& l) {
  json config = {{"command", command}, {"params", std::move(params)}, {"shift", l.shift_spec}};
  if (!l.potential_spec.is_null()) config["potential"] = l.potential_spec;
  return {{"version", std::string(ts::kLibraryVersion)}, {"config", config}};
}

void emit(const Common& c, const std::string& text) {
  if (c.out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(c.out_path, std::ios::binary);
  if (!out) throw ts::SpecError(c.out_path + ": cannot write output file");
  out << text;
}

void emit_json(const Common& c, const json& j) { emit(c, j.dump(2) + "\n"); }

std::string csv_num(double x) {
  json j = num(x);
  return j.is_string() ? j.get<std::string>() : j.dump();
}

std::string csv_num(const std::optional<double>& x) { return x ? csv_num(*x) : ""; }

void add_common(CLI::App* app, Common& c, bool potential = true) {
  app->add_option("--shift", c.shift_path, "Shift spec file (JSON)")->required()->check(CLI::ExistingFile);
  if (potential) app->add_option("--potential", c.potential_path, "Potential spec file (JSON); default F = 0")->check(CLI::ExistingFile);
  app->add_option("--out", c.out_path, "Write the report here instead of stdout");
  app->add_flag("--csv", c.csv, "Emit the per-n table as CSV");
  app->add_option("--tol", c.tol, "Tolerance for pass/fail comparisons")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermoshift: pressure, Gibbs measures and specification checks on truncated countable shifts"};
  app.set_version_flag("--version", std::string(ts::kLibraryVersion));
  app.require_subcommand(1);
  Common common;

  // words
  std::size_t words_n = 3;
  std::optional<std::size_t> words_level;
  auto* words = app.add_subcommand("words", "Enumerate allowable words B_n");
  add_common(words, common, false);
  words->add_option("--n", words_n, "Word length")->capture_default_str();
  words->add_option("--level", words_level, "Restrict to ladder entry (0-based)");

  // check
  std::size_t check_n_max = 4, check_p_max = 2;
  auto* check = app.add_subcommand("check", "Finite irreducibility certificate, BIP, and potential conditions");
  add_common(check, common);
  check->add_option("--n-max", check_n_max, "Longest word in sampled pairs")->capture_default_str();
  check->add_option("--p-max", check_p_max, "Longest connector")->capture_default_str();
  bool check_conditions = false, check_c3 = false;
  check->add_flag("--conditions", check_conditions, "Also estimate (C1), (C2), Z_1 for the potential");
  check->add_flag("--c3-scan", check_c3, "Also run the connector-finiteness scan along the ladder");

  // pressure
  std::size_t pressure_n = 20, p_max = 4;
  std::vector<ts::Symbol> anchors{1};
  bool use_ladder = false;
  auto* pressure = app.add_subcommand("pressure", "Partition sums and two-sided pressure brackets");
  add_common(pressure, common);
  pressure->add_option("--n", pressure_n, "Largest n")->capture_default_str();
  pressure->add_option("--anchors", anchors, "Gurevich anchor symbols")->capture_default_str();
  pressure->add_option("--p-max", p_max, "Longest connector when estimating (C2)")->capture_default_str();
  pressure->add_flag("--ladder", use_ladder, "Also evaluate the truncation ladder");

  // gurevich
  std::size_t gur_n = 20, gur_from = 1;
  auto* gurevich = app.add_subcommand("gurevich", "Periodic-orbit sums Z_n(F, a) against Z_n(F)");
  add_common(gurevich, common);
  gurevich->add_option("--n", gur_n, "Largest n")->capture_default_str();
  gurevich->add_option("--from", gur_from, "Smallest n")->capture_default_str();
  gurevich->add_option("--anchors", anchors, "Anchor symbols")->capture_default_str();

  // gibbs
  std::size_t gibbs_depth = 10, gibbs_cesaro = 0;
  std::optional<std::size_t> gibbs_n_max, gibbs_p;
  std::string samples_path;
  double c_min = 0.1;
  auto* gibbs = app.add_subcommand("gibbs", "Finite-truncation Gibbs measure and its ratio report");
  add_common(gibbs, common);
  gibbs->add_option("--depth", gibbs_depth, "Depth l of nu_l")->capture_default_str();
  gibbs->add_option("--cesaro", gibbs_cesaro, "Cesaro steps (0 = none)")->capture_default_str();
  gibbs->add_option("--n-max", gibbs_n_max, "Largest cylinder length in the ratio table");
  gibbs->add_option("--samples", samples_path, "Mixing samples: JSON list of {u, v, t}")->check(CLI::ExistingFile);
  gibbs->add_option("--p", gibbs_p, "Gap parameter p for the mixing report (default: p from (C2))");
  gibbs->add_option("--c-min", c_min, "Pass threshold for the mixing ratio")->capture_default_str();
  gibbs->add_option("--p-max", p_max, "Longest connector when estimating (C2)")->capture_default_str();

  // factor
  std::string factor_op = "phi";
  std::size_t factor_n = 3, factor_depth = 8, factor_cesaro = 2;
  std::optional<double> exponent;
  auto* factor = app.add_subcommand("factor", "One-block factor maps and hidden Gibbs potentials");
  add_common(factor, common);
  factor->add_option("--op", factor_op, "phi | push-weight | push-measure | hidden-gibbs")
      ->check(CLI::IsMember({"phi", "push-weight", "push-measure", "hidden-gibbs"}))
      ->capture_default_str();
  factor->add_option("--n", factor_n, "Word length (phi, push-weight) or ratio depth (hidden-gibbs)")->capture_default_str();
  factor->add_option("--depth", factor_depth, "Measure depth (push-measure, hidden-gibbs)")->capture_default_str();
  factor->add_option("--cesaro", factor_cesaro, "Cesaro steps (push-measure, hidden-gibbs)")->capture_default_str();
  factor->add_option("--exponent", exponent, "Fiber exponent k for phi (gives Psi)");
  factor->add_option("--p-max", p_max, "Longest connector")->capture_default_str();

  // lyapunov
  std::string matrices_path, measure_spec = "gibbs";
  std::size_t lyap_n = 10;
  auto* lyapunov = app.add_subcommand("lyapunov", "Lyapunov exponent of a matrix cocycle against a cylinder measure");
  add_common(lyapunov, common, false);
  lyapunov->add_option("--matrices", matrices_path, "Matrices file: JSON list of row-major d x d arrays")
      ->required()
      ->check(CLI::ExistingFile);
  lyapunov->add_option("--measure", measure_spec, "gibbs | bernoulli:q")->capture_default_str();
  lyapunov->add_option("--n", lyap_n, "Largest word length")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    Loaded l = load_shift(common);

    if (*words) {
      json params = {{"n", words_n}};
      if (words_level) params["level"] = *words_level;
      auto list = ts::enumerate_words(l.shift, words_n, words_level);
      if (common.csv) {
        std::string text = "word\n";
        for (const auto& w : list) text += ts::to_string(w) + "\n";
        emit(common, text);
        return 0;
      }
      json r = envelope("words", params, l);
      r["count"] = list.size();
      r["words"] = ts::io::words(list);
      emit_json(common, r);
      return 0;
    }

    if (*check) {
      ts::WeightSystem ws = load_potential(common, l);
      json params = {{"n_max", check_n_max}, {"p_max", check_p_max}, {"conditions", check_conditions}, {"c3_scan", check_c3}};
      json r = envelope("check", params, l);
      auto fi = ts::check_finite_irreducibility(l.shift, check_n_max, check_p_max);
      r["finite_irreducibility"] = ts::io::to_json(fi);
      r["irreducible"] = l.shift.cover().is_irreducible();
      r["bip"] = ts::io::to_json(ts::check_bip(l.shift.cover()));
      if (check_conditions) {
        r["subadditivity"] = ts::io::to_json(ts::subadditivity_defect(ws, std::min<std::size_t>(check_n_max + 2, 8)));
        r["c2"] = ts::io::to_json(ts::estimate_c2(ws, check_n_max, check_p_max));
        r["z1"] = ts::io::to_json(ts::z1(ws));
      }
      if (check_c3) r["c3_scan"] = ts::io::to_json(ts::c3_finiteness_scan(ws, check_n_max, check_p_max));
      emit_json(common, r);
      return fi.ok() ? 0 : 2;
    }

    if (*pressure || *gurevich) {
      ts::WeightSystem ws = load_potential(common, l);
      if (*pressure) {
        ts::PressureOptions opt;
        opt.n_max = pressure_n;
        opt.anchors = anchors;
        opt.ladder = use_ladder;
        opt.constants.p_max = p_max;
        ts::PressureReport rep = ts::pressure_report(ws, opt);
        if (common.csv) {
          std::ostringstream os;
          os << "n,logZ,lower,upper";
          for (auto a : anchors) os << ",gurevich_a" << a;
          os << "\n";
          for (std::size_t i = 0; i < rep.per_n.size(); ++i) {
            const auto& b = rep.per_n[i];
            os << b.n << "," << csv_num(b.log_Z) << "," << csv_num(b.lower) << "," << csv_num(b.upper);
            for (std::size_t q = 0; q < anchors.size(); ++q) os << "," << csv_num(rep.gurevich_per_n[i * anchors.size() + q].log_Z);
            os << "\n";
          }
          emit(common, os.str());
          return 0;
        }
        json params = {{"n", pressure_n}, {"anchors", anchors}, {"ladder", use_ladder}, {"p_max", p_max}};
        json r = envelope("pressure", params, l);
        r["report"] = ts::io::to_json(rep);
        emit_json(common, r);
        return 0;
      }
      auto cmp = ts::pressure_compare(ws, gur_from, gur_n, anchors, common.tol);
      if (common.csv) {
        std::ostringstream os;
        os << "n,rate";
        for (auto a : anchors) os << ",gurevich_rate_a" << a;
        os << ",discrepancy\n";
        for (const auto& row : cmp.rows) {
          os << row.n << "," << csv_num(row.rate);
          for (double g : row.gurevich_rate) os << "," << csv_num(g);
          os << "," << csv_num(row.discrepancy) << "\n";
        }
        emit(common, os.str());
        return 0;
      }
      json params = {{"n", gur_n}, {"from", gur_from}, {"anchors", anchors}, {"tol", common.tol}};
      json r = envelope("gurevich", params, l);
      r["comparison"] = ts::io::to_json(cmp);
      emit_json(common, r);
      return 0;
    }

    if (*gibbs) {
      ts::WeightSystem ws = load_potential(common, l);
      if (gibbs_cesaro >= gibbs_depth) throw ts::SpecError("--cesaro must be smaller than --depth");
      const std::size_t out_depth = gibbs_depth - gibbs_cesaro;
      const std::size_t n_max = std::min(gibbs_n_max.value_or(out_depth), out_depth);
      ts::PressureOptions po;
      po.n_max = gibbs_depth;
      po.gurevich = false;
      po.constants.p_max = p_max;
      ts::PressureReport pr = ts::pressure_report(ws, po);
      ts::CylinderMeasure m = ts::build_nu(ws, gibbs_depth);
      if (gibbs_cesaro > 0) m = ts::cesaro_average(m, gibbs_cesaro);
      const double lo = pr.best_lower.value_or(pr.best_upper);
      json params = {{"depth", gibbs_depth}, {"cesaro", gibbs_cesaro}, {"n_max", n_max}, {"c_min", c_min}, {"p_max", p_max}};
      json r = envelope("gibbs", params, l);
      r["pressure"] = {{"lower", num(pr.best_lower)}, {"upper", num(pr.best_upper)}, {"constants", ts::io::to_json(pr.constants)}};
      auto ratios = ts::gibbs_ratio_report(m, ws, lo, pr.best_upper, n_max);
      r["ratios"] = ts::io::to_json(ratios);
      json ee = json::array();
      for (std::size_t n = 1; n <= n_max; ++n) ee.push_back(ts::io::to_json(ts::entropy_energy(m, ws, n)));
      r["entropy_energy"] = ee;
      bool ok = true;
      if (!samples_path.empty()) {
        auto samples = ts::io::parse_samples(ts::io::read_json_file(samples_path), samples_path);
        const std::size_t p = gibbs_p.value_or(pr.constants.p);
        auto mix = ts::mixing_report(m, p, samples, c_min);
        r["mixing"] = ts::io::to_json(mix);
        ok = mix.pass;
      }
      if (common.csv) {
        std::ostringstream os;
        os << "n,min_ratio,max_ratio,C0\n";
        for (const auto& row : ratios.rows)
          os << row.n << "," << csv_num(row.min_ratio) << "," << csv_num(row.max_ratio) << "," << csv_num(row.C0) << "\n";
        emit(common, os.str());
      } else {
        emit_json(common, r);
      }
      return ok ? 0 : 2;
    }

    if (*factor) {
      ts::FactorMap fm(l.shift);
      json params = {{"op", factor_op}, {"n", factor_n}, {"depth", factor_depth}, {"cesaro", factor_cesaro}, {"p_max", p_max}};
      if (exponent) params["exponent"] = *exponent;
      if (factor_op == "phi") {
        auto phi = ts::preimage_count_weight(fm, exponent);
        json r = envelope("factor", params, l);
        json rows = json::array();
        for (const auto& v : ts::enumerate_words(fm.codomain(), factor_n))
          rows.push_back({{"word", ts::to_string(v)}, {"log_weight", num(phi.eval(v))}});
        r["weights"] = rows;
        emit_json(common, r);
        return 0;
      }
      // The potential file describes F on the cover.
      Loaded cover_l{l.shift_spec, json(nullptr), fm.domain()};
      ts::WeightSystem F = load_potential(common, cover_l);
      l.potential_spec = cover_l.potential_spec;
      json r = envelope("factor", params, l);
      if (factor_op == "push-weight") {
        auto G = ts::pushforward_weight(fm, F);
        json rows = json::array();
        for (const auto& v : ts::enumerate_words(fm.codomain(), factor_n))
          rows.push_back({{"word", ts::to_string(v)}, {"log_weight", num(G.eval(v))}});
        r["regime"] = G.meta().regime;
        r["weights"] = rows;
        emit_json(common, r);
        return 0;
      }
      if (factor_op == "push-measure") {
        auto m = ts::build_nu(F, factor_depth);
        if (factor_cesaro > 0) m = ts::cesaro_average(m, factor_cesaro);
        r["measure"] = ts::io::to_json(ts::pushforward_measure(fm, m));
        emit_json(common, r);
        return 0;
      }
      ts::HiddenGibbsOptions ho;
      ho.depth = factor_depth;
      ho.cesaro = factor_cesaro;
      ho.n_max = factor_n;
      ho.p_max = p_max;
      auto rep = ts::hidden_gibbs_report(fm, F, ho);
      r["hidden_gibbs"] = ts::io::to_json(rep);
      emit_json(common, r);
      return rep.pass ? 0 : 2;
    }

    if (*lyapunov) {
      json mspec = ts::io::read_json_file(matrices_path);
      ts::MatrixFamily mf = ts::io::parse_matrices(mspec, matrices_path);
      ts::CylinderMeasure m = [&] {
        if (measure_spec == "gibbs") return ts::build_nu(ts::matrix_cocycle(l.shift, mf), lyap_n);
        if (measure_spec.rfind("bernoulli:", 0) == 0) {
          double q = 0.0;
          try {
            q = std::stod(measure_spec.substr(10));
          } catch (const std::exception&) {
            throw ts::SpecError("--measure: malformed bernoulli parameter");
          }
          if (!(q > 0.0 && q < 1.0)) throw ts::SpecError("--measure: bernoulli parameter must be in (0, 1)");
          if (l.shift.alphabet_size() != 2) throw ts::SpecError("--measure bernoulli:q needs a 2-symbol shift");
          return ts::product_measure(l.shift, {q, 1.0 - q}, lyap_n);
        }
        throw ts::SpecError("--measure: expected gibbs or bernoulli:q");
      }();
      json params = {{"measure", measure_spec}, {"n", lyap_n}, {"norm", std::string(ts::norm_name(mf.norm()))}};
      json r = envelope("lyapunov", params, l);
      r["matrices"] = mspec;
      auto rows = ts::lyapunov_estimate(m, mf, lyap_n);
      if (common.csv) {
        std::ostringstream os;
        os << "n,estimate,envelope,increment\n";
        for (const auto& row : rows)
          os << row.n << "," << csv_num(row.estimate) << "," << csv_num(row.envelope) << "," << csv_num(row.increment) << "\n";
        emit(common, os.str());
        return 0;
      }
      r["rows"] = ts::io::to_json(rows);
      emit_json(common, r);
      return 0;
    }
  } catch (const ts::ConditionFailure& e) {
    std::cerr << "condition failure: " << e.what() << "\n";
    return 2;
  } catch (const ts::BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
