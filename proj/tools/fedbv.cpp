#include "fedbv/json_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

using namespace fedbv;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kFail = 1, kInput = 2, kResidual = 3 };

struct Run {
  std::string subcommand;
  std::string input;
  std::string output;
  Json options = Json::object();

  // Manifest plus result; the hash covers the input bytes and the options.
  int emit(Json result, int code) const {
    std::string content = input.empty() ? std::string() : read_file(input);
    content += '\0';
    content += options.dump();
    Json doc;
    doc["manifest"] = Json{{"tool", "fedbv"},
                           {"version", kVersion},
                           {"subcommand", subcommand},
                           {"input", input.empty() ? Json() : Json(input)},
                           {"output", output.empty() ? Json() : Json(output)},
                           {"options", options},
                           {"input_hash", fnv1a_hex(content)}};
    doc["result"] = std::move(result);
    const std::string text = doc.dump(2) + "\n";
    if (output.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(output, std::ios::binary);
      if (!out) throw InputError("cannot write '" + output + "'");
      out << text;
    }
    return code;
  }
};

Chart<JetPoly> load_chart(const std::string& path) { return chart_from_json(parse_json(read_file(path))); }

Chart<JetPoly> with_policy(const Chart<JetPoly>& c, const TruncationPolicy& p) {
  JetContext ctx{c.dim(), p.x_degree};
  auto lift = [&](const std::vector<JetPoly>& v) {
    std::vector<JetPoly> out;
    for (const auto& e : v) {
      JetPoly q(ctx);
      const JetPoly cut = e.truncated(p.x_degree);
      for (const auto& [m, x] : cut.terms()) q += JetPoly::monomial(ctx, m, x);
      out.push_back(q);
    }
    return out;
  };
  std::vector<JetPoly> omega;
  for (int i = 0; i < c.dim(); ++i)
    for (int j = 0; j < c.dim(); ++j) omega.push_back(c.omega.lower(i, j));
  std::vector<std::vector<JetPoly>> wk;
  for (const auto& w : c.omega_k) wk.push_back(lift(w));
  return Chart<JetPoly>::build(c.n, ctx, lift(omega), lift(c.gamma), std::move(wk), p);
}

int cmd_validate(Run& run) {
  const auto c = load_chart(run.input);
  const auto diag = validate_chart(c);
  Json issues = Json::array();
  for (const auto& s : diag.issues) issues.push_back(s);
  return run.emit(Json{{"ok", diag.ok}, {"truncation", to_json(c.policy)}, {"issues", issues}}, diag.ok ? kOk : kFail);
}

int cmd_fedosov(Run& run, int weight) {
  auto c = load_chart(run.input);
  if (weight >= 0) {
    TruncationPolicy p = c.policy;
    p.weight = weight;
    p.hbar = std::min(p.hbar, weight / 2);
    p.validate();
    c = with_policy(c, p);
  }
  const auto g = solve_fedosov(c);
  const bool flat = flatness_residual(g, c).is_zero();
  return run.emit(Json{{"truncation", to_json(c.policy)},
                       {"gamma", to_json(g)},
                       {"flatness_residual_zero", flat},
                       {"max_weight_checked", residual_policy(c.policy).weight}},
                  flat ? kOk : kResidual);
}

int cmd_star(Run& run, const std::string& f, const std::string& g, int hbar_order) {
  auto c = load_chart(run.input);
  TruncationPolicy p = c.policy;
  p.hbar = hbar_order;
  p.weight = std::max(p.weight, 2 * hbar_order);
  p.validate();
  c = with_policy(c, p);
  const int xd = exact_x_degree(p);
  if (xd < 0) throw InputError("x_degree must be at least the weight " + std::to_string(p.weight), "/truncation");
  auto poly = [&](const std::string& s, const char* flag) {
    return detail::parse_expr(s, flag, [&](const std::string& t) { return parse_poly(t, c.ctx); });
  };
  const auto fs = function_section(c, poly(f, "--f"));
  const auto gs = function_section(c, poly(g, "--g"));
  const auto gamma = solve_fedosov(c);
  const auto prod = star(fs, gs, gamma, c).truncated_x(xd);
  Json series = Json::array();
  for (const auto& [k, v] : prod.terms()) series.push_back(Json{{"hbar_exp", k.h}, {"value", format(v)}});
  return run.emit(Json{{"truncation", to_json(p)}, {"exact_x_degree", xd}, {"star", series}}, kOk);
}

int cmd_gamma_inf(Run& run) {
  const auto c = load_chart(run.input);
  const auto g = solve_fedosov(c);
  const auto gi = gamma_infinity(g, c);
  const auto res = qme_residual(gi, c);
  const bool zero = res.is_zero();
  return run.emit(Json{{"truncation", to_json(c.policy)},
                       {"gamma_inf", to_json(gi)},
                       {"qme_residual_zero", zero},
                       {"max_weight_checked", res.policy().weight}},
                  zero ? kOk : kResidual);
}

int cmd_amplitude(Run& run) {
  const auto spec = amplitude_from_json(parse_json(read_file(run.input)));
  const auto a = amplitude(spec);
  Json r{{"value", to_string(a.value)}};
  if (!a.note.empty()) r["note"] = a.note;
  return run.emit(r, kOk);
}

int cmd_wheel(Run& run, int k) {
  if (k < 2 || k > kMaxVars) throw InputError("--k must lie in 2.." + std::to_string(kMaxVars));
  const Rational a = amplitude(wheel_spec(k)).value;
  const Rational z = wheel_zeta(k);
  return run.emit(Json{{"k", k}, {"amplitude", to_string(a)}, {"zeta_formula", to_string(z)}, {"match", a == z}},
                  a == z ? kOk : kResidual);
}

int cmd_trace(Run& run, const std::string& f) {
  const auto spec = torus_from_json(parse_json(read_file(run.input)));
  const auto fe = detail::parse_expr(f, "--f", [&](const std::string& t) {
    return parse_fourier(t, FourierContext{2 * spec.n});
  });
  const auto s = setup_from(spec);
  return run.emit(Json{{"trace", to_json(trace(fe, s))},
                       {"max_hbar_exact", s.max_exact_hbar()},
                       {"sign_convention", index_sign(s.n())}},
                  kOk);
}

int cmd_index(Run& run) {
  const auto s = setup_from(torus_from_json(parse_json(read_file(run.input))));
  const auto r = index_check(s);
  return run.emit(Json{{"trace", to_json(r.trace)},
                       {"integral", to_json(r.integral)},
                       {"sign_convention", r.sign},
                       {"max_hbar_exact", r.max_hbar},
                       {"match", r.match}},
                  r.match ? kOk : kResidual);
}

int cmd_heatkernel(Run& run, double t, double th1, double th2, double eps, double L) {
  if (!(t > 0)) throw InputError("--t must be positive");
  const auto h = heat_kernel(t, th1, th2);
  const bool agree = std::abs(h.image_sum - h.fourier_sum) <= 1e-10;
  Json r{{"image_sum", h.image_sum}, {"fourier_sum", h.fourier_sum}, {"agree", agree}};
  if (!std::isnan(eps) || !std::isnan(L)) {
    if (!(eps > 0) || !(L > eps)) throw InputError("--epsilon and --L need 0 < epsilon < L");
    r["effective_propagator"] = Json{{"quadrature", effective_propagator(eps, L, th1, th2)},
                                     {"modes", effective_propagator_modes(eps, L, th1, th2)}};
  }
  return run.emit(r, agree ? kOk : kResidual);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fedosov quantization, BV transfer and trace on flat charts and tori"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Run run;
  app.add_option("-o,--output", run.output, "Write the JSON report here instead of stdout");

  auto* validate = app.add_subcommand("validate", "Check the invariants of a chart");
  auto* fedosov = app.add_subcommand("fedosov", "Solve for the Fedosov connection");
  auto* star_cmd = app.add_subcommand("star", "Fedosov star product of two functions");
  auto* gamma_inf = app.add_subcommand("gamma-inf", "Transfer to the BV action and check the master equation");
  auto* amp = app.add_subcommand("amplitude", "Exact configuration-space integral of a graph");
  auto* wheel = app.add_subcommand("wheel", "Wheel amplitude against the zeta formula");
  auto* trace_cmd = app.add_subcommand("trace", "Trace of a Fourier function on a flat torus");
  auto* index = app.add_subcommand("index", "Both sides of the index identity on a flat torus");
  auto* heat = app.add_subcommand("heatkernel", "Heat kernel and effective propagator on the circle");

  for (auto* s : {validate, fedosov, star_cmd, gamma_inf}) s->add_option("chart", run.input, "Chart JSON")->required();
  amp->add_option("spec", run.input, "Amplitude JSON")->required();
  for (auto* s : {trace_cmd, index}) s->add_option("torus", run.input, "Torus JSON")->required();

  int weight = -1, hbar_order = 2, k = 2;
  std::string f, g;
  double t = 0, th1 = 0, th2 = 0, eps = std::nan(""), L = std::nan("");
  fedosov->add_option("--weight", weight, "Weight bound W")->check(CLI::Range(0, 64));
  star_cmd->add_option("--f", f, "Polynomial in x1..x2n")->required();
  star_cmd->add_option("--g", g, "Polynomial in x1..x2n")->required();
  star_cmd->add_option("--hbar-order", hbar_order, "Highest hbar power")->check(CLI::Range(0, 32));
  wheel->add_option("--k", k, "Number of vertices")->required();
  trace_cmd->add_option("--f", f, "Fourier expression")->required();
  heat->add_option("--t", t)->required();
  heat->add_option("--theta1", th1)->required();
  heat->add_option("--theta2", th2)->required();
  heat->add_option("--epsilon", eps);
  heat->add_option("--L", L);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  auto* sub = app.get_subcommands().front();
  run.subcommand = sub->get_name();
  if (weight >= 0) run.options["weight"] = weight;
  if (sub == star_cmd) run.options.update(Json{{"f", f}, {"g", g}, {"hbar_order", hbar_order}});
  if (sub == wheel) run.options["k"] = k;
  if (sub == trace_cmd) run.options["f"] = f;
  if (sub == heat) {
    run.options.update(Json{{"t", t}, {"theta1", th1}, {"theta2", th2}});
    if (!std::isnan(eps)) run.options["epsilon"] = eps;
    if (!std::isnan(L)) run.options["L"] = L;
  }

  try {
    if (sub == validate) return cmd_validate(run);
    if (sub == fedosov) return cmd_fedosov(run, weight);
    if (sub == star_cmd) return cmd_star(run, f, g, hbar_order);
    if (sub == gamma_inf) return cmd_gamma_inf(run);
    if (sub == amp) return cmd_amplitude(run);
    if (sub == wheel) return cmd_wheel(run, k);
    if (sub == trace_cmd) return cmd_trace(run, f);
    if (sub == index) return cmd_index(run);
    return cmd_heatkernel(run, t, th1, th2, eps, L);
  } catch (const std::invalid_argument& e) {
    std::cerr << "fedbv " << run.subcommand << ": " << e.what() << "\n";
    return kInput;
  } catch (const std::domain_error& e) {
    std::cerr << "fedbv " << run.subcommand << ": " << e.what() << "\n";
    return kInput;
  }
}
