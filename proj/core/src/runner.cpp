#include "bosejj/runner.hpp"

#include "bosejj/oracle.hpp"
#include "bosejj/report.hpp"
#include "bosejj/transport.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace bosejj {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError({"cannot write " + p.string()});
    out << content;
    if (!out.flush()) throw ConfigError({"cannot write " + p.string()});
}

RunReport make_report(const std::string& name, const RunConfig& cfg) {
    RunReport rep(name, config_hash(cfg));
    for (const std::string& w : cfg.warnings) rep.add_warning(w);
    return rep;
}

void emit(RunReport& rep, const fs::path& dir, const std::string& format, RunResult& res) {
    const std::string name = "report." + format;
    rep.add_artifact(name);
    write_file(dir / name, format == "json" ? rep.to_json() : rep.to_csv());
    res.artifacts = rep.artifacts();
}

int run_density(const RunConfig& cfg, const fs::path& dir, const std::string& format,
                RunResult& res) {
    const NessEvaluator ev(cfg.model, cfg.ness);
    RunReport rep = make_report("density", cfg);
    rep.add_conditions(ev.conditions());
    for (std::size_t l = 0; l < ev.n_reservoirs(); ++l) {
        const SpectralDensity& rho = ev.reservoir(l).rho_g;
        const std::string name = "density_" + std::to_string(l) + ".csv";
        write_file(dir / name, export_density_csv(rho));
        rep.add_artifact(name);
        rep.add_scalar("mass_" + std::to_string(l), rho.total_mass);
        rep.add_scalar("support_hi_" + std::to_string(l), rho.support_hi);
    }
    write_file(dir / "density_total.csv", export_density_csv(ev.rho_g_total()));
    rep.add_artifact("density_total.csv");
    rep.add_scalar("mass_total", ev.rho_g_total().total_mass);
    emit(rep, dir, format, res);
    res.message = "densities written";
    return 0;
}

int run_eta(const RunConfig& cfg, const fs::path& dir, const std::string& format,
            RunResult& res) {
    const NessEvaluator ev(cfg.model, cfg.ness);
    RunReport rep = make_report("eta", cfg);
    rep.add_conditions(ev.conditions());
    write_file(dir / "eta.csv", export_eta_csv(ev.eta()));
    rep.add_artifact("eta.csv");
    rep.add_flag("eta_zero_finite", ev.eta().eta_zero_finite);
    if (ev.eta().eta_zero_finite) rep.add_scalar("eta_zero", ev.eta().eta_zero);
    rep.add_scalar("min_abs", ev.eta().min_abs);
    rep.add_scalar("argmin", ev.eta().argmin);
    emit(rep, dir, format, res);
    res.message = "boundary self-energy written";
    return 0;
}

int run_check(const RunConfig& cfg, const fs::path& dir, const std::string& format,
              RunResult& res) {
    const NessEvaluator ev(cfg.model, cfg.ness);
    RunReport rep = make_report("check", cfg);
    rep.add_conditions(ev.conditions());
    const bool gap = ev.conditions().eta_gap.pass;
    rep.add_text("verdict", gap ? "conditions hold" : "resonance gap failure");
    emit(rep, dir, format, res);
    res.message = gap ? "conditions hold" : "resonance gap failure";
    return gap ? 0 : 2;
}

int run_currents(const RunConfig& cfg, const fs::path& dir, const std::string& format,
                 RunResult& res) {
    const NessEvaluator ev(cfg.model, cfg.ness);
    const TransportReport tr = transport_report(ev, cfg.channel_threshold);
    RunReport rep = make_report("currents", cfg);
    rep.add_conditions(ev.conditions());
    double j_sum = 0.0, e_sum = 0.0, jos_sum = 0.0;
    for (std::size_t l = 0; l < tr.J.size(); ++l) {
        const std::string tag = std::to_string(l);
        rep.add_scalar("J_" + tag, tr.J[l]);
        rep.add_scalar("J_error_" + tag, tr.J_error[l]);
        rep.add_scalar("E_" + tag, tr.E[l]);
        rep.add_scalar("E_error_" + tag, tr.E_error[l]);
        rep.add_scalar("Jos_" + tag, tr.Jos[l]);
        j_sum += tr.J[l];
        e_sum += tr.E[l];
        jos_sum += tr.Jos[l];
    }
    rep.add_scalar("J_sum", j_sum);
    rep.add_scalar("E_sum", e_sum);
    rep.add_scalar("Jos_sum", jos_sum);
    rep.add_scalar("entropy_production", tr.entropy_production);
    rep.add_scalar("entropy_production_error", tr.entropy_production_error);
    rep.add_text("positivity", tr.verdict.statement);
    write_file(dir / "currents.csv", export_transport_csv(tr));
    rep.add_artifact("currents.csv");
    emit(rep, dir, format, res);
    res.message = "currents written";
    return 0;
}

int run_epr(const RunConfig& cfg, const fs::path& dir, const std::string& format,
            RunResult& res) {
    const NessEvaluator ev(cfg.model, cfg.ness);
    const CurrentValue ep = entropy_production(ev);
    const PositivityVerdict verdict = positivity_verdict(ev, cfg.channel_threshold);
    RunReport rep = make_report("epr", cfg);
    rep.add_conditions(ev.conditions());
    rep.add_scalar("entropy_production", ep.value);
    rep.add_scalar("entropy_production_error", ep.quad_error);
    rep.add_flag("hypotheses_met", verdict.hypotheses_met);
    rep.add_flag("strictly_positive", verdict.strictly_positive);
    rep.add_text("verdict", verdict.statement);
    for (std::size_t l = 0; l < ev.n_reservoirs(); ++l)
        rep.add_scalar("Jos_" + std::to_string(l), josephson(ev, l));
    emit(rep, dir, format, res);
    res.message = "entropy production " + format_sig12(ep.value);
    return 0;
}

int run_evolve(const RunConfig& cfg, const fs::path& dir, const std::string& format,
               RunResult& res) {
    const NessEvaluator ev(cfg.model, cfg.ness);
    const TruncatedModel tm = build_truncation(ev, cfg.modes_per_reservoir);
    const TruncatedEvolver evolver(tm);
    TestVector f = TestVector::zero(ev.n_reservoirs());
    f.c = 1.0;
    const TruncatedProbe fp = project_probe(ev, tm, f);

    const double omega = ev.model().system.omega;
    const double t_max = cfg.evolve_t_max > 0.0 ? cfg.evolve_t_max : 20.0 / omega;
    const std::vector<double> times = uniform_grid(0.0, t_max, cfg.evolve_samples);

    std::vector<cdouble> c_mat(times.size());
    std::vector<double> cov(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        c_mat[i] = evolver.evolve(fp, times[i]).c_of_t;
        cov[i] = quench_covariance(tm, evolver, fp, times[i]);
    }

    RunReport rep = make_report("evolve", cfg);
    rep.add_conditions(ev.conditions());
    rep.add_integer("modes_per_reservoir", cfg.modes_per_reservoir);
    rep.add_scalar("t_max", t_max);
    rep.add_scalar("recurrence_time", tm.recurrence_time());
    write_file(dir / "evolve_matrix.csv", export_time_series_csv(times, c_mat, cov));
    rep.add_artifact("evolve_matrix.csv");

    if (ev.model().system.lambda == 0.0) {
        rep.add_text("analytic", "degenerate");
    } else {
        const std::vector<AnalyticEvolution> series = evolve_analytic_series(ev, f, times);
        std::vector<cdouble> c_an(series.size());
        for (std::size_t i = 0; i < series.size(); ++i) c_an[i] = series[i].c_of_t;
        write_file(dir / "evolve_analytic.csv", export_time_series_csv(times, c_an, {}));
        rep.add_artifact("evolve_analytic.csv");
        double gap = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i)
            gap = std::max(gap, std::abs(c_mat[i] - c_an[i]));
        rep.add_scalar("max_abs_gap", gap);
        rep.add_scalar("ness_covariance", ev.ness_covariance(f));
    }
    emit(rep, dir, format, res);
    res.message = "time series written";
    return 0;
}

int run_graph_check(const RunConfig& cfg, const fs::path& dir, const std::string& format,
                    RunResult& res) {
    const NessEvaluator ev(cfg.model, cfg.ness);
    RunReport rep = make_report("graph-check", cfg);
    rep.add_conditions(ev.conditions());
    for (std::size_t l = 0; l < ev.n_reservoirs(); ++l) {
        const std::string tag = std::to_string(l);
        const ReservoirData& r = ev.reservoir(l);
        if (!r.patch) {
            rep.add_text("graph_" + tag, "not a graph reservoir");
            continue;
        }
        const GraphPatch& patch = *r.patch;
        const AdaptedFunction phi = coordinate_sum_phi(patch);
        const AdaptedVerdict adapted = check_adapted(patch, phi);
        rep.add_flag("adapted_ok_" + tag, adapted.ok());
        rep.add_integer("adapted_pairs_" + tag, adapted.pairs_checked);
        rep.add_integer("adapted_balance_violations_" + tag,
                        static_cast<long long>(adapted.balance_violations.size()));
        const Orientation orient = orient_by_phi(patch, phi.phi);
        const AdmissibleVerdict adm = check_admissible(patch, orient);
        rep.add_flag("admissible_ok_" + tag, adm.ok());
        rep.add_integer("closed_walks_" + tag, adm.closed_walks_checked);
        if (r.weight) {
            rep.add_scalar("pf_residual_" + tag, pf_relation_residual(patch, *r.weight));
            rep.add_scalar("pf_pairing_re_" + tag, ev.reservoir(l).v_dot_g.real());
            rep.add_scalar("pf_pairing_im_" + tag, ev.reservoir(l).v_dot_g.imag());
        }
    }
    emit(rep, dir, format, res);
    res.message = "graph verdicts written";
    return 0;
}

}  // namespace

RunResult run_subcommand(const std::string& name, const RunConfig& cfg,
                         const std::string& out_dir, const std::string& format) {
    RunResult res;
    if (format != "csv" && format != "json") {
        res.exit_code = 3;
        res.message = "unknown format '" + format + "' (expected csv or json)";
        return res;
    }
    const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);

    try {
        if (name == "density")
            res.exit_code = run_density(cfg, dir, format, res);
        else if (name == "eta")
            res.exit_code = run_eta(cfg, dir, format, res);
        else if (name == "check")
            res.exit_code = run_check(cfg, dir, format, res);
        else if (name == "currents")
            res.exit_code = run_currents(cfg, dir, format, res);
        else if (name == "epr")
            res.exit_code = run_epr(cfg, dir, format, res);
        else if (name == "evolve")
            res.exit_code = run_evolve(cfg, dir, format, res);
        else if (name == "graph-check")
            res.exit_code = run_graph_check(cfg, dir, format, res);
        else
            throw ConfigError({"unknown subcommand '" + name + "'"});
    } catch (const ConfigError& e) {
        res.exit_code = 3;
        res.message = e.what();
    } catch (const ConditionFailure& e) {
        res.exit_code = 2;
        res.message = e.what();
    } catch (const std::invalid_argument& e) {
        res.exit_code = 3;
        res.message = e.what();
    } catch (const std::domain_error& e) {
        res.exit_code = 4;
        res.message = e.what();
    } catch (const std::exception& e) {
        res.exit_code = 4;
        res.message = e.what();
    }
    return res;
}

}  // namespace bosejj
