#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rnash/core.hpp"
#include "rnash/ergodic.hpp"
#include "rnash/error.hpp"
#include "rnash/genfun.hpp"
#include "rnash/meanfield.hpp"
#include "rnash/montecarlo.hpp"
#include "rnash/riccati.hpp"
#include "rnash/sequence.hpp"

namespace py = pybind11;
using namespace rnash;

namespace {

// values[m][p] as an array of shape (samples, players, n, n).
py::array_t<double> flow_values(const CoefficientFlow& flow) {
  const std::size_t M = flow.samples();
  const std::size_t P = M ? flow.values[0].size() : 0;
  const Eigen::Index n = (M && P) ? flow.values[0][0].rows() : 0;
  py::array_t<double> out({M, P, static_cast<std::size_t>(n), static_cast<std::size_t>(n)});
  auto v = out.mutable_unchecked<4>();
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t p = 0; p < P; ++p)
      for (Eigen::Index h = 0; h < n; ++h)
        for (Eigen::Index k = 0; k < n; ++k) v(m, p, h, k) = flow.values[m][p](h, k);
  return out;
}

py::dict decay_dict(const DecayCertificate& c) {
  py::dict d;
  d["rate"] = c.rate;
  d["constant"] = c.constant;
  d["argmax"] = py::make_tuple(c.argmax_h, c.argmax_k);
  d["argmax_player"] = c.argmax_player;
  d["argmax_t"] = c.argmax_t;
  return d;
}

Sign sign_of(const std::string& s) {
  if (s == "plus") return Sign::Plus;
  if (s == "minus") return Sign::Minus;
  throw Error(ErrorCode::ConfigError, "sign must be 'plus' or 'minus'");
}

ContourPlan plan_of(const SymbolPair& s, int H, std::optional<double> r, std::optional<int> n_nodes) {
  ContourPlan plan = default_plan(s, H);
  if (r) plan.r = *r;
  if (n_nodes) plan.n_nodes = *n_nodes;
  return plan;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Riccati-Nash solver for linear-quadratic N-player games";
  m.attr("__version__") = RNASH_VERSION;

  // The type lives as long as the interpreter; the handle is never released.
  static py::handle error_type = py::exception<Error>(m, "Error").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = error_name(e.code());
      exc.attr("value") = e.value();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  // ---- lq-core
  py::class_<GameSpec>(m, "GameSpec")
      .def_readonly("d", &GameSpec::d)
      .def_readonly("T", &GameSpec::T)
      .def_property_readonly("shift_invariant", &GameSpec::shift_invariant)
      .def_property_readonly("n_players", [](const GameSpec& g) -> std::optional<int> {
        if (g.shift_invariant()) return g.si().n_players;
        return g.general().n_players();
      });
  m.def(
      "shift_invariant_game",
      [](Matrix f, Matrix g, std::optional<int> n_players, int d, double T) {
        return shift_invariant_game(make_stencil(std::move(f), std::move(g)), n_players, d, T);
      },
      py::arg("f"), py::arg("g"), py::arg("n_players") = py::none(), py::arg("d") = 1, py::arg("T") = 1.0,
      "Shift-invariant game from a width-ell stencil; n_players=None is the infinite game.");
  m.def("general_game", &general_game, py::arg("f"), py::arg("g"), py::arg("d") = 1, py::arg("T") = 1.0);
  m.def(
      "expand_costs",
      [](Matrix f, Matrix g, int N) {
        GeneralMode c = expand_costs(make_stencil(std::move(f), std::move(g)), N);
        return py::make_tuple(c.f, c.g);
      },
      py::arg("f"), py::arg("g"), py::arg("N"));
  m.def("shift_matrix", &shift_matrix, py::arg("c"), py::arg("i"), py::arg("N"));

  py::class_<CoefficientFlow>(m, "CoefficientFlow")
      .def_property_readonly("grid", [](const CoefficientFlow& f) { return f.grid; })
      .def_property_readonly("values", &flow_values, "array of shape (samples, players, n, n)")
      .def_property_readonly("full", [](const CoefficientFlow& f) { return f.layout == Layout::Full; })
      .def_readonly("truncation", &CoefficientFlow::truncation)
      .def("at", &CoefficientFlow::at, py::arg("t"), py::arg("player") = 0)
      .def("eta", [](const CoefficientFlow& f, int d, int p) { return eta(f, d, p); }, py::arg("d") = 1,
           py::arg("player") = 0);

  // ---- riccati-solver
  m.def("integrate_backward", &integrate_backward, py::arg("game"), py::arg("steps"),
        py::arg("truncation") = 32, py::call_guard<py::gil_scoped_release>());
  m.def(
      "certify_decay", [](const CoefficientFlow& f, double r) { return decay_dict(certify_decay(f, r)); },
      py::arg("flow"), py::arg("r"));
  m.def(
      "picard_solve",
      [](const GameSpec& game, const DecaySequence& beta, int steps, int truncation, double tol) {
        PicardOptions opt;
        opt.steps = steps;
        opt.truncation = truncation;
        opt.tol = tol;
        PicardResult r = picard_solve(game, beta, opt);
        py::dict d;
        d["flow"] = r.flow;
        d["increments"] = r.increments;
        d["contraction_factors"] = r.contraction_factors;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        d["weighted_norm"] = r.weighted_norm;
        d["weights"] = r.d;
        return d;
      },
      py::arg("game"), py::arg("beta"), py::arg("steps") = 512, py::arg("truncation") = 32, py::arg("tol") = 1e-12);

  // ---- seq-tools
  py::class_<DecaySequence>(m, "DecaySequence")
      .def_property_readonly("radius", &DecaySequence::radius)
      .def("__call__", &DecaySequence::operator(), py::arg("i"))
      .def_property_readonly("entries", [](const DecaySequence& s) { return s.entries().v; });
  m.def("exponential_fourier_seq", &make_exponential_fourier_seq, py::arg("alpha"), py::arg("radius"));
  m.def(
      "certify_self_controlled",
      [](DecaySequence beta, double tol_tail) {
        SelfControlCertificate c = certify_self_controlled(beta, tol_tail);
        py::dict d;
        d["constant"] = c.constant;
        d["window_constant"] = c.window_constant;
        d["tail_slack"] = c.tail_slack;
        d["max_tail"] = c.max_tail;
        d["argmax"] = c.argmax;
        return d;
      },
      py::arg("beta"), py::arg("tol_tail") = 8.0);

  // ---- genfun
  py::class_<SymbolPair>(m, "SymbolPair")
      .def_readonly("rho", &SymbolPair::rho)
      .def_property_readonly("certified", &SymbolPair::certified)
      .def("phi", [](const SymbolPair& s, Complex z, Complex w) { return eval_phi(s, z, w); })
      .def("xi", [](const SymbolPair& s, Complex z) { return eval_xi(s, z); })
      .def("xi_hat", [](const SymbolPair& s, double t, Complex z, Complex w) { return eval_xi_hat(s, t, z, w); })
      .def("xi_bar", [](const SymbolPair& s, Complex z, Complex w) { return eval_xi_bar(s, z, w); });
  m.def(
      "build_symbol", [](Matrix f, Matrix g) { return build_symbol(make_stencil(std::move(f), std::move(g))); },
      py::arg("f"), py::arg("g"));
  m.def(
      "check_strong_gathering",
      [](SymbolPair& s, double rho) {
        GatheringReport r = check_strong_gathering(s, rho);
        py::dict d;
        d["rho"] = r.rho;
        d["min_distance"] = r.min_distance;
        d["argmin"] = r.argmin;
        d["winding"] = r.winding;
        return d;
      },
      py::arg("symbol"), py::arg("rho"));
  m.def(
      "check_compatibility",
      [](const SymbolPair& s, double t_max) {
        CompatibilityReport r = check_compatibility(s, t_max);
        py::dict d;
        d["minimum"] = r.minimum;
        d["t_at"] = r.t_at;
        d["z_at"] = r.z_at;
        d["pass"] = r.pass;
        return d;
      },
      py::arg("symbol"), py::arg("t_max"));
  m.def(
      "extract_coefficients",
      [](const SymbolPair& s, double t, int H, std::optional<double> r, std::optional<int> n_nodes) {
        return extract_coefficients(s, plan_of(s, H, r, n_nodes), t, H).c;
      },
      py::arg("symbol"), py::arg("t"), py::arg("H"), py::arg("r") = py::none(), py::arg("n_nodes") = py::none(),
      "c_hk(T - t) for h, k < H; t is forward time.");
  m.def(
      "ergodic_coefficients",
      [](const SymbolPair& s, int H, const std::string& sign, std::optional<double> r) {
        return ergodic_coefficients(s, plan_of(s, H, r, std::nullopt), H, sign_of(sign)).c;
      },
      py::arg("symbol"), py::arg("H"), py::arg("sign") = "plus", py::arg("r") = py::none());
  m.def(
      "directed_chain_oracle", [](int h, int k, const std::string& sign) { return directed_chain_oracle(h, k, sign_of(sign)); },
      py::arg("h"), py::arg("k"), py::arg("sign") = "plus");
  m.def(
      "directed_chain_oracle_exact",
      [](int h, int k, const std::string& sign) {
        std::ostringstream os;
        os << directed_chain_oracle_exact(h, k, sign_of(sign));
        return os.str();
      },
      py::arg("h"), py::arg("k"), py::arg("sign") = "plus", "exact value as 'p/q'");

  // ---- ergodic-longtime
  m.def(
      "ergodic_value",
      [](const Matrix& cbar, int d, double r) {
        ErgodicValue v = ergodic_value(cbar, d, r);
        return py::make_tuple(v.lambda, v.tail_bound);
      },
      py::arg("cbar"), py::arg("d"), py::arg("r"), "(lambda, tail_bound)");
  m.def(
      "convergence_sweep",
      [](const SymbolPair& s, std::vector<double> horizons, int H) {
        ConvergenceReport r;
        {
          py::gil_scoped_release release;
          r = convergence_sweep(s, std::move(horizons), H, default_plan(s, H));
        }
        py::dict d;
        d["horizons"] = r.horizons;
        d["l1_gaps"] = r.l1_gaps;
        d["trace_gaps"] = r.trace_gaps;
        d["lambda"] = r.lambda;
        d["fitted_rate"] = r.fitted_rate;
        d["epsilon"] = r.epsilon;
        d["mu_estimate"] = r.mu_estimate;
        d["mu_error"] = r.mu_error;
        return d;
      },
      py::arg("symbol"), py::arg("horizons"), py::arg("H"));

  // ---- mc-sim
  m.def(
      "epsilon_nash_experiment",
      [](Matrix f, Matrix g, std::vector<int> N_list, double drift, double T, double rho, int truncation,
         int flow_steps, double dt, int n_paths, std::uint64_t seed) {
        const CostStencil st = make_stencil(std::move(f), std::move(g));
        McParams p;
        p.T = T;
        p.rho = rho;
        p.truncation = truncation;
        p.flow_steps = flow_steps;
        p.dt = dt;
        p.n_paths = n_paths;
        p.seed = seed;
        DeviationSpec dev;
        if (drift != 0.0) dev.drift = Vector::Constant(1, drift);
        NashExperiment ex;
        {
          py::gil_scoped_release release;
          ex = epsilon_nash_experiment(st, N_list, dev, p);
        }
        py::list rows;
        for (const NashGainRow& r : ex.rows) {
          py::dict d;
          d["N"] = r.N;
          d["mean"] = r.mean;
          d["std_error"] = r.std_error;
          d["upper_bound"] = r.upper_bound;
          d["envelope"] = r.envelope;
          rows.append(d);
        }
        return rows;
      },
      py::arg("f"), py::arg("g"), py::arg("N_list"), py::arg("drift") = 0.5, py::arg("T") = 1.0,
      py::arg("rho") = 1.4, py::arg("truncation") = 32, py::arg("flow_steps") = 1024, py::arg("dt") = 1e-3,
      py::arg("n_paths") = 10000, py::arg("seed") = 1);

  // ---- meanfield
  m.def(
      "generate_mf_costs",
      [](int N, double kappa, double K, std::uint64_t seed) {
        CostFamily c = generate_mf_costs(N, kappa, K, seed);
        return py::make_tuple(c.f, c.g);
      },
      py::arg("N"), py::arg("kappa") = 1.0, py::arg("K") = 0.0, py::arg("seed") = 1);
  m.def("mf_weighted_norm", &mf_weighted_norm, py::arg("family"));
  m.def(
      "scan_horizon_condition",
      [](double K_f, double K_g, double T) {
        HorizonScan s = scan_horizon_condition(K_f, K_g, T);
        py::dict d;
        d["feasible"] = s.feasible;
        d["M"] = s.M;
        d["kg_sup"] = s.kg_sup;
        d["kf_sup"] = s.kf_sup;
        d["reason"] = s.reason;
        return d;
      },
      py::arg("K_f"), py::arg("K_g"), py::arg("T"));
  m.def(
      "solve_mf_system",
      [](std::vector<Matrix> f, std::vector<Matrix> g, double T, int steps, double M) {
        CostFamily costs{std::move(f), std::move(g)};
        MfSolveOptions opt;
        opt.storage = MfStorage::MonitorOnly;
        MfSolveResult r;
        {
          py::gil_scoped_release release;
          r = solve_mf_system(costs, T, steps, M, opt);
        }
        const MfMonitor& mon = r.monitor;
        py::dict d;
        d["grid"] = mon.grid;
        d["min_eig_Bc"] = mon.min_eig_Bc;
        d["norm_offdiag"] = mon.norm_offdiag;
        d["norm_column"] = mon.norm_column;
        d["norm_diag"] = mon.norm_diag;
        d["est_lhs"] = mon.est_lhs;
        d["final"] = r.flow.values.front();
        return d;
      },
      py::arg("f"), py::arg("g"), py::arg("T"), py::arg("steps"), py::arg("M"),
      "Forward solve with monitor-only storage; 'final' holds c(0).");
}
